"""Numerical maximization of the six commutator-norm ratios.

With one factor fixed, the squared ratio is a Rayleigh quotient
``x* K x / x* W x`` in the vectorized free factor, so each half-step of the
ascent is solved exactly as the top eigenpair of a Hermitian pencil.
Alternating the two half-steps gives a monotone ascent; random restarts make
it a global estimate. On flat stretches the iterates creep along an almost
fixed direction, so each sweep also tries a step extrapolated along the last
move of A; the trial is kept only when its best responses beat the plain
sweep, which leaves the ascent monotone.

Vectorization is column stacking: entry ``(i, j)`` of an ``n x n`` matrix
sits at position ``j*n + i``. With this convention

    vec(A w)    = (w^T (x) I) vec(A)
    vec([A, B]) = (B^T (x) I - I (x) B) vec(A)
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
import scipy.linalg as sla
from scipy.linalg import blas, lapack

from .bounds import BoundKind, ratio, tight_constant
from .ensembles import SeededStream, complex_normal
from .linalg import Weight, as_matrix, dagger, frobenius_norm, omega_norm

Side = Literal["A", "B"]

MAX_PENCIL_CONDITION = 1e12
COUNTEREXAMPLE_RTOL = 1e-8
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 500
DEFAULT_RESTARTS = 32
# extrapolation length: grows on success, shrinks on failure
EXTRAP_GROW = 2.0
EXTRAP_SHRINK = 4.0
EXTRAP_MAX = 1e4


def vectorize(A) -> np.ndarray:
    return np.asarray(A, dtype=complex).reshape(-1, order="F")


def unvectorize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    n = int(round(np.sqrt(v.size)))
    if n * n != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape((n, n), order="F")


def weight_gram(w: Weight | None, n: int | None = None) -> np.ndarray:
    """Gram matrix of the weighted inner product in vectorized coordinates.

    ``None`` stands for the plain Frobenius inner product and needs ``n``.
    """
    if w is None:
        if n is None:
            raise ValueError("identity gram needs the dimension")
        return np.eye(n * n, dtype=complex)
    return np.kron(w.matrix.T, np.eye(w.dim))


def commutator_superop(B) -> np.ndarray:
    """Matrix C with ``C vec(A) = vec([A, B])``."""
    B = as_matrix(B, "B")
    eye = np.eye(B.shape[0])
    return np.kron(B.T, eye) - np.kron(eye, B)


@dataclass(frozen=True)
class QuadraticFormPair:
    """Numerator and denominator grams of a half-step Rayleigh quotient."""

    numerator: np.ndarray
    denominator: np.ndarray

    def quotient(self, X) -> float:
        v = vectorize(X)
        return float(np.vdot(v, self.numerator @ v).real / np.vdot(v, self.denominator @ v).real)


def _check_side(side: str) -> None:
    if side not in ("A", "B"):
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def _side_norms(kind: BoundKind, side: str) -> tuple[bool, bool, bool]:
    """(commutator, free factor, partner) weightedness for a half-step."""
    x, y, z = kind.norms
    return (x, y, z) if side == "A" else (x, z, y)


def quadratic_form_pair(kind: BoundKind, w: Weight, partner, side: Side) -> QuadraticFormPair:
    _check_side(side)
    P = as_matrix(partner, "partner")
    n = P.shape[0]
    cx, cf, _ = _side_norms(kind, side)
    C = commutator_superop(P)
    Gx = weight_gram(w if cx else None, n)
    Gf = weight_gram(w if cf else None, n)
    return QuadraticFormPair(dagger(C) @ Gx @ C, Gf)


class _GramFactor:
    """Upper factor R of a gram ``G = R* R``, kept as a vector when diagonal."""

    def __init__(self, w: Weight | None, n: int):
        self.n = n
        if w is None:
            self.diag = np.ones(n * n)
        elif w.is_diagonal:
            self.diag = np.sqrt(np.repeat(np.diag(w.matrix).real, n))
        else:
            self.diag = None
            self.R = sla.cholesky(weight_gram(w), lower=False)
            self.Rinv = sla.solve_triangular(self.R, np.eye(n * n, dtype=complex), lower=False)

    def solve(self, y: np.ndarray) -> np.ndarray:
        return y / self.diag if self.diag is not None else self.Rinv @ y


def _check_conditioning(w: Weight) -> None:
    if w.condition > MAX_PENCIL_CONDITION:
        raise ValueError(
            f"weight condition number {w.condition:.3e} exceeds {MAX_PENCIL_CONDITION:g}; "
            "the pencil is numerically singular (rescale or regularize the weight explicitly)"
        )


def _norm(X: np.ndarray, weighted: bool, w: Weight) -> float:
    return omega_norm(X, w) if weighted else frobenius_norm(X)


def _superop(P: np.ndarray, eye: np.ndarray) -> np.ndarray:
    # kron(P.T, I) - kron(I, P) without the generic kron machinery
    n = P.shape[0]
    C = P.T[:, None, :, None] * eye[None, :, None, :] - eye[:, None, :, None] * P[None, :, None, :]
    return C.reshape(n * n, n * n)


def _top_eigpair(M: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest eigenpair of a Hermitian matrix given by its upper triangle."""
    N = M.shape[0]
    upper = np.triu(M)
    vals, vecs, _, _, info = lapack.zheevr(M, compute_v=1, range="I", il=N, iu=N, lower=0, overwrite_a=1)
    y = vecs[:, 0]
    if info == 0 and abs(np.linalg.norm(y) - 1) <= 1e-8:
        return max(float(vals[0]), 0.0), y
    # MRRR with a partial index range can return a null vector when the top
    # eigenvalue is degenerate; fall back to the full divide-and-conquer solver
    full = upper + np.triu(upper, 1).conj().T
    vals, vecs = np.linalg.eigh(full)
    return max(float(vals[-1]), 0.0), vecs[:, -1]


class _Pencil:
    """Precomputed factors for the half-steps of one (kind, weight) pair.

    The squared ratio over the free factor X is ``|F y|^2 / |y|^2`` with
    ``F = R_x C R_f^{-1}`` and ``y = R_f vec(X)``, so the maximizer is the top
    eigenvector of ``F* F``.
    """

    def __init__(self, kind: BoundKind, w: Weight):
        _check_conditioning(w)
        self.kind = kind
        self.w = w
        n = w.dim
        self.eye = np.eye(n)
        self.factors = {False: _GramFactor(None, n), True: _GramFactor(w, n)}
        self.col_weights = {False: np.ones(n), True: np.diag(w.matrix).real.copy()} if w.is_diagonal else None
        self._scales = {}

    def _scale(self, cx: bool, cf: bool) -> np.ndarray:
        key = (cx, cf)
        if key not in self._scales:
            self._scales[key] = self.factors[cx].diag[:, None] / self.factors[cf].diag[None, :]
        return self._scales[key]

    def _norm(self, X: np.ndarray, weighted: bool) -> float:
        if self.col_weights is None:
            return _norm(X, weighted, self.w)
        return float(np.sqrt(np.sum((X.real**2 + X.imag**2) @ self.col_weights[weighted])))

    def respond(self, partner: np.ndarray, side: str) -> tuple[float, np.ndarray]:
        """Global max of the ratio over the free side, and a unit-norm maximizer."""
        cx, cf, cp = _side_norms(self.kind, side)
        partner_norm = self._norm(partner, cp)
        if partner_norm == 0:
            raise ValueError("partner must be nonzero")
        C = _superop(partner, self.eye)
        Rf = self.factors[cf]
        if self.col_weights is not None:
            F = C * self._scale(cx, cf)
        else:
            Rx = self.factors[cx]
            Fx = Rx.diag[:, None] * C if Rx.diag is not None else Rx.R @ C
            F = Fx / Rf.diag[None, :] if Rf.diag is not None else Fx @ Rf.Rinv
        lam, y = _top_eigpair(blas.zherk(1.0, F, trans=2))
        X = unvectorize(Rf.solve(y))
        X /= self._norm(X, cf)
        return float(np.sqrt(lam) / partner_norm), X


def best_response(kind: BoundKind, w: Weight, partner, side: Side) -> tuple[float, np.ndarray]:
    """Maximize the ratio over one factor with the other held fixed.

    ``side`` names the free factor. The pencil ``(K, W)`` is reduced to a
    standard Hermitian eigenproblem through the Cholesky factor of ``W``; the
    square root of its top eigenvalue, divided by the partner's norm, is the
    maximal ratio. The maximizer is returned with unit norm.
    """
    _check_side(side)
    P = as_matrix(partner, "partner")
    if P.shape[0] != w.dim:
        raise ValueError("dimension mismatch")
    if not np.any(P):
        raise ValueError("partner must be nonzero")
    return _Pencil(kind, w).respond(P, side)


@dataclass
class RatioResult:
    kind: BoundKind
    value: float
    A: np.ndarray
    B: np.ndarray
    iterations: int
    converged: bool
    restart_index: int = 0
    trace: list[float] = field(default_factory=list)
    constant: float | None = None
    candidate: bool = False

    def excess(self) -> float | None:
        return None if self.constant is None else self.value - self.constant


def _align_phase(X: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Multiply X by the unit phase that makes <ref, X> real and nonnegative."""
    z = np.vdot(ref, X)
    return X * (np.conj(z) / abs(z)) if abs(z) > 0 else X


def _frame(w: Weight) -> tuple[Weight, np.ndarray | None, float]:
    """Unit-trace diagonal weight in the eigenbasis of ``w``, the basis, and tr(w)."""
    t = w.trace
    if w.is_diagonal:
        return Weight(w.matrix / t), None, t
    return Weight.diag(w.eigenvalues / t), w.eigenvectors, t


def alternate_maximize(
    kind: BoundKind,
    w: Weight,
    seedA,
    seedB,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
) -> RatioResult:
    """Alternating exact best responses on A and B from the given seeds.

    Work happens in the unit-trace eigenframe of ``w``; the returned pair is
    mapped back and normalized in the caller's norms. ``trace`` holds the
    seed ratio followed by the ratio after every half-step on the accepted
    path (rejected extrapolation trials are not recorded), so it is
    nondecreasing.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    A = as_matrix(seedA, "seedA")
    B = as_matrix(seedB, "seedB")
    if A.shape != B.shape or A.shape[0] != w.dim:
        raise ValueError("dimension mismatch")
    if not np.any(A) or not np.any(B):
        raise ValueError("seeds must be nonzero")

    wf, U, t = _frame(w)
    scale = t**kind.scaling_exponent
    if U is not None:
        A = dagger(U) @ A @ U
        B = dagger(U) @ B @ U
    pencil = _Pencil(kind, wf)

    trace = [ratio(kind, wf, A, B) * scale]
    converged = False
    it = 0
    prev = trace[0]
    beta = 1.0
    for it in range(1, max_iters + 1):
        A_old = A
        r1, A = pencil.respond(B, "A")
        A = _align_phase(A, A_old)
        r2, B = pencil.respond(A, "B")
        trace += [r1 * scale, r2 * scale]
        if it > 1:
            # trial point further along the last move of A
            _, Bt = pencil.respond(A + beta * (A - A_old), "B")
            rt, At = pencil.respond(Bt, "A")
            if rt > r2:
                A = _align_phase(At, A)
                r3, B = pencil.respond(A, "B")
                trace += [rt * scale, r3 * scale]
                beta = min(beta * EXTRAP_GROW, EXTRAP_MAX)
            else:
                beta = max(1.0, beta / EXTRAP_SHRINK)
        cur = trace[-1]
        if abs(cur - prev) <= tol * max(cur, np.finfo(float).tiny):
            converged = True
            break
        prev = cur

    if U is not None:
        A = U @ A @ dagger(U)
        B = U @ B @ dagger(U)
    x, y, z = kind.norms
    A = A / _norm(A, y, w)
    B = B / _norm(B, z, w)
    return RatioResult(kind=kind, value=trace[-1], A=A, B=B, iterations=it, converged=converged, trace=trace)


def seed_pair(n: int, stream: SeededStream) -> tuple[np.ndarray, np.ndarray]:
    """Entrywise complex standard normal seed pair for one restart."""
    rng = stream.generator()
    return complex_normal(rng, (n, n)), complex_normal(rng, (n, n))


def global_estimate(
    kind: BoundKind,
    w: Weight,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    *,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    constant: float | None = None,
) -> RatioResult:
    """Best of ``restarts`` alternating ascents from random seed pairs.

    Restart ``r`` draws its seeds from ``SeededStream(seed, r)``; ties go to
    the lowest restart index. ``constant`` overrides the reference constant
    (defaults to :func:`tight_constant`). For the conjectured kinds a value
    above ``constant * (1 + 1e-8)`` marks the result as a counterexample
    candidate; nothing is raised.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if constant is None:
        constant = tight_constant(kind, w)[0]
    best = None
    for r in range(restarts):
        A0, B0 = seed_pair(w.dim, SeededStream(seed, r))
        res = alternate_maximize(kind, w, A0, B0, max_iters=max_iters, tol=tol)
        res.restart_index = r
        if best is None or res.value > best.value:
            best = res
    candidate = kind.status == "conjectured" and best.value > constant * (1 + COUNTEREXAMPLE_RTOL)
    return replace(best, constant=constant, candidate=candidate)
