"""Quantum applications of the weighted commutator bounds.

Two calculations live here:

* variance-based uncertainty bounds for observables under a faithful state,
  comparing the Robertson bound with the bounds that follow from kind I;
* GKLS generators: the dual superoperator, its relaxation-rate spectrum,
  the rate formula against a faithful stationary state, the sum rule and the
  rate constraint that follows from kind II.

Relaxation rates are reported as ``Gamma = -Re(l)`` for dual eigenvalues
``l``, which makes them nonnegative for any GKLS generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .linalg import (
    Weight,
    as_matrix,
    commutator,
    dagger,
    frobenius_norm,
    hermitian_defect,
    omega_norm,
)
from .optimize import unvectorize, vectorize

FAITHFUL_EPS = 1e-12


def _require_hermitian(A, name: str) -> np.ndarray:
    A = as_matrix(A, name)
    if hermitian_defect(A) > 1e-10:
        raise ValueError(f"{name} must be Hermitian")
    return (A + dagger(A)) / 2


class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    __slots__ = ("matrix", "eigenvalues")

    def __init__(self, matrix):
        M = _require_hermitian(matrix, "density matrix")
        vals = np.linalg.eigvalsh(M)
        if vals[0] < -FAITHFUL_EPS:
            raise ValueError(f"density matrix has negative eigenvalue {vals[0]:.3e}")
        if abs(np.trace(M).real - 1) > 1e-12:
            raise ValueError("density matrix must have unit trace")
        M.setflags(write=False)
        self.matrix = M
        self.eigenvalues = vals

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityMatrix":
        return cls(np.eye(n) / n)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def faithful(self) -> bool:
        return bool(self.eigenvalues[0] > FAITHFUL_EPS)

    def weight(self) -> Weight:
        if not self.faithful:
            raise ValueError("state is not faithful (smallest eigenvalue <= 1e-12)")
        return Weight(self.matrix)


def qubit_mixture(p: float) -> DensityMatrix:
    """p I/2 + (1 - p)|0><0|, the qubit example state."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    return DensityMatrix(np.diag([1 - p / 2, p / 2]))


def _dims_agree(rho: DensityMatrix, *mats: np.ndarray) -> None:
    if any(m.shape[0] != rho.dim for m in mats):
        raise ValueError("dimension mismatch")


def expectation(A, rho: DensityMatrix) -> float:
    A = _require_hermitian(A, "A")
    _dims_agree(rho, A)
    value = np.trace(rho.matrix @ A)
    if abs(value.imag) > 1e-12 * max(1.0, abs(value.real)):
        raise ArithmeticError("expectation of a Hermitian observable has an imaginary part")
    return float(value.real)


def variance(A, rho: DensityMatrix) -> float:
    """tr(rho A^2) - (tr rho A)^2, cross-checked against ||A - <A> I||_rho^2."""
    A = _require_hermitian(A, "A")
    _dims_agree(rho, A)
    mean = expectation(A, rho)
    direct = np.trace(rho.matrix @ A @ A).real - mean**2
    At = A - mean * np.eye(rho.dim)
    # weighted norm of the centered observable; valid for non-faithful states too
    centered = np.vdot(At, At @ rho.matrix).real
    scale = max(1.0, abs(direct), abs(centered))
    if abs(direct - centered) > 1e-12 * scale:
        raise ArithmeticError(f"variance routes disagree: {direct!r} vs {centered!r}")
    return float(max(centered, 0.0))


def robertson_bound(A, B, rho: DensityMatrix) -> float:
    A = _require_hermitian(A, "A")
    B = _require_hermitian(B, "B")
    _dims_agree(rho, A, B)
    return float(abs(np.trace(rho.matrix @ commutator(A, B))) ** 2 / 4)


def _commutator_rho_norm2(A, B, rho: DensityMatrix) -> tuple[float, Weight]:
    A = _require_hermitian(A, "A")
    B = _require_hermitian(B, "B")
    _dims_agree(rho, A, B)
    if rho.dim < 2:
        raise ValueError("need dim >= 2")
    w = rho.weight()
    return omega_norm(commutator(A, B), w) ** 2, w


def new_uncertainty_bound(A, B, rho: DensityMatrix) -> float:
    """(lm lsm/(lm + lsm)) ||[A,B]||_rho^2; rests on the conjectured kind-I constant."""
    c2, w = _commutator_rho_norm2(A, B, rho)
    lm, lsm = w.lam_min, w.lam_second
    return float(lm * lsm / (lm + lsm) * c2)


def loose_uncertainty_bound(A, B, rho: DensityMatrix) -> float:
    """(lm^2/(2 lM)) ||[A,B]||_rho^2, from the proven loose kind-I constant."""
    c2, w = _commutator_rho_norm2(A, B, rho)
    return float(w.lam_min**2 / (2 * w.lam_max) * c2)


def maxmixed_bound(A, B, n: int) -> float:
    """||[A,B]||^2/(2 n^2): the BW bound on the variance product at I/n."""
    A = _require_hermitian(A, "A")
    B = _require_hermitian(B, "B")
    if A.shape[0] != n or B.shape[0] != n:
        raise ValueError("dimension mismatch")
    return float(frobenius_norm(commutator(A, B)) ** 2 / (2 * n * n))


# GKLS dynamics ---------------------------------------------------------------


class GKLSModel:
    """Hamiltonian plus jump operators with nonnegative rates.

    Jump operators must have unit Frobenius norm. The sum rule additionally
    needs them traceless, which :func:`omegabw.ensembles.random_gkls` provides.
    """

    __slots__ = ("H", "jumps")

    def __init__(self, H, jumps):
        H = as_matrix(H, "H")
        if np.linalg.norm(H - dagger(H)) > 1e-12 * max(1.0, np.linalg.norm(H)):
            raise ValueError("H must be Hermitian")
        H = (H + dagger(H)) / 2
        checked = []
        for L, gamma in jumps:
            L = as_matrix(L, "jump operator")
            if L.shape != H.shape:
                raise ValueError("jump operator dimension mismatch")
            if abs(np.linalg.norm(L) - 1) > 1e-10:
                raise ValueError("jump operators must have unit Frobenius norm")
            if not gamma >= 0:
                raise ValueError("rates must be nonnegative")
            checked.append((L, float(gamma)))
        self.H = H
        self.jumps = tuple(checked)

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    @property
    def total_rate(self) -> float:
        return float(sum(g for _, g in self.jumps))

    @classmethod
    def dephasing(cls, gamma: float) -> "GKLSModel":
        """Qubit pure dephasing: H = 0, one jump sigma_z/sqrt(2)."""
        return cls(np.zeros((2, 2)), [(np.diag([1.0, -1.0]) / np.sqrt(2), gamma)])


def gkls_apply(m: GKLSModel, rho) -> np.ndarray:
    """L(rho) = -i[H, rho] + (1/2) sum_k g_k (2 L rho L* - L*L rho - rho L*L)."""
    rho = as_matrix(rho, "rho")
    if rho.shape != m.H.shape:
        raise ValueError("dimension mismatch")
    out = -1j * commutator(m.H, rho)
    for L, g in m.jumps:
        LdL = dagger(L) @ L
        out += 0.5 * g * (2 * L @ rho @ dagger(L) - LdL @ rho - rho @ LdL)
    return out


def gkls_dual_apply(m: GKLSModel, X) -> np.ndarray:
    """Heisenberg-picture generator, dual to :func:`gkls_apply` under tr(X L(Y))."""
    X = as_matrix(X, "X")
    if X.shape != m.H.shape:
        raise ValueError("dimension mismatch")
    out = 1j * commutator(m.H, X)
    for L, g in m.jumps:
        LdL = dagger(L) @ L
        out += 0.5 * g * (2 * dagger(L) @ X @ L - LdL @ X - X @ LdL)
    return out


def _left(M: np.ndarray) -> np.ndarray:
    # vec(M X) = (I (x) M) vec(X)
    return np.kron(np.eye(M.shape[0]), M)


def _right(M: np.ndarray) -> np.ndarray:
    # vec(X M) = (M^T (x) I) vec(X)
    return np.kron(M.T, np.eye(M.shape[0]))


def gkls_superop(m: GKLSModel) -> np.ndarray:
    """Matrix of the generator acting on column-stacked density matrices."""
    H = m.H
    S = -1j * (_left(H) - _right(H))
    for L, g in m.jumps:
        LdL = dagger(L) @ L
        S += 0.5 * g * (2 * np.kron(L.conj(), L) - _left(LdL) - _right(LdL))
    return S


def gkls_dual_superop(m: GKLSModel) -> np.ndarray:
    """Matrix S with ``S vec(X) = vec(L_dual(X))``."""
    H = m.H
    S = 1j * (_left(H) - _right(H))
    for L, g in m.jumps:
        LdL = dagger(L) @ L
        S += 0.5 * g * (2 * np.kron(L.T, dagger(L)) - _left(LdL) - _right(LdL))
    return S


@dataclass
class RateSpectrum:
    eigenvalues: np.ndarray
    eigenmatrices: list[np.ndarray]
    rates: np.ndarray
    stationary: Weight
    identity_index: int
    mode_rates: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.stationary.dim


def stationary_state(m: GKLSModel, tol: float = 1e-10) -> Weight:
    """Faithful stationary state of the generator, as a unit-trace weight.

    A unique kernel direction is used as is. With a degenerate kernel the
    maximally mixed state is returned when it is stationary (unital
    generators); otherwise the stationary state is ambiguous and an error is
    raised, as it is for non-faithful states.
    """
    S = gkls_superop(m)
    n = m.dim
    s = sla.svdvals(S)
    scale = max(1.0, s[0])
    null_dim = int(np.sum(s <= tol * scale))
    if null_dim == 0:
        raise np.linalg.LinAlgError("generator has no numerically stationary state")
    if null_dim > 1:
        mixed = np.eye(n) / n
        if np.linalg.norm(gkls_apply(m, mixed)) <= tol * scale:
            return Weight(mixed)
        raise ValueError(f"stationary state is not unique (kernel dimension {null_dim})")
    _, _, Vh = np.linalg.svd(S)
    rho = unvectorize(Vh[-1].conj())
    rho = rho / np.trace(rho)
    rho = (rho + dagger(rho)) / 2
    lam = np.linalg.eigvalsh(rho)
    if lam[0] <= FAITHFUL_EPS:
        raise ValueError(f"stationary state is not faithful (smallest eigenvalue {lam[0]:.3e})")
    return Weight(rho)


def _cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    """Group indices of (complex) values closer than ``tol`` (single linkage)."""
    order = list(range(len(values)))
    groups: list[list[int]] = []
    seen = set()
    for i in order:
        if i in seen:
            continue
        group, stack = [], [i]
        seen.add(i)
        while stack:
            j = stack.pop()
            group.append(j)
            for k in order:
                if k not in seen and abs(values[k] - values[j]) <= tol:
                    seen.add(k)
                    stack.append(k)
        groups.append(sorted(group))
    return groups


def rate_spectrum(m: GKLSModel, cond_max: float = 1e8, residual_tol: float = 1e-8) -> RateSpectrum:
    """Eigenmodes of the dual generator and their relaxation rates.

    Degenerate eigenvalues are grouped and their eigenvectors orthonormalized
    within the group; in the group at zero the identity is placed first and
    kept as the trivial mode, which is excluded from ``rates``.
    """
    n = m.dim
    N = n * n
    S = gkls_dual_superop(m)
    scale = max(1.0, np.linalg.norm(S, 2))
    vals, vecs = sla.eig(S)
    vecs = vecs / np.linalg.norm(vecs, axis=0)

    ident = vectorize(np.eye(n)) / np.sqrt(n)
    groups = _cluster(vals, 1e-9 * scale)
    zero_group = min(groups, key=lambda g: min(abs(vals[i]) for i in g))
    if min(abs(vals[i]) for i in zero_group) > 1e-9 * scale:
        raise np.linalg.LinAlgError("dual generator has no zero eigenvalue")

    out_vals = np.empty(N, dtype=complex)
    out_vecs = np.empty((N, N), dtype=complex)
    identity_index = -1
    pos = 0
    for g in groups:
        mean = np.mean(vals[g])
        block = vecs[:, g]
        keep = len(g)
        if g is zero_group:
            # identity first, then an orthonormal basis of the rest of the kernel
            comp = block - np.outer(ident, ident.conj() @ block)
            u, _, _ = np.linalg.svd(comp, full_matrices=False)
            q = np.column_stack([ident, u[:, : keep - 1]])
            identity_index = pos
            mean = 0.0
        else:
            q, _ = np.linalg.qr(block)
        out_vals[pos : pos + keep] = mean
        out_vecs[:, pos : pos + keep] = q
        pos += keep

    cond = np.linalg.cond(out_vecs)
    if not np.isfinite(cond) or cond > cond_max:
        raise np.linalg.LinAlgError(f"dual generator is (nearly) defective: eigenvector condition {cond:.3e}")
    resid = np.linalg.norm(S @ out_vecs - out_vecs * out_vals[None, :], axis=0)
    if np.max(resid) > residual_tol * scale:
        raise np.linalg.LinAlgError(f"eigenpair residual {np.max(resid):.3e} exceeds tolerance")

    stationary = stationary_state(m)
    mats = [unvectorize(out_vecs[:, k]) for k in range(N)]
    mode_rates = -out_vals.real
    rates = np.delete(mode_rates, identity_index)
    if np.min(rates, initial=0.0) < -1e-10 * scale:
        raise ArithmeticError("negative relaxation rate; generator is not dissipative")
    return RateSpectrum(
        eigenvalues=out_vals,
        eigenmatrices=mats,
        rates=rates,
        stationary=stationary,
        identity_index=identity_index,
        mode_rates=mode_rates,
    )


def rate_formula(m: GKLSModel, Y, w: Weight) -> float:
    """(1/(2||Y||_w^2)) sum_k g_k ||[L_k, Y]||_w^2."""
    Y = as_matrix(Y, "Y")
    total = sum(g * omega_norm(commutator(L, Y), w) ** 2 for L, g in m.jumps)
    return float(total / (2 * omega_norm(Y, w) ** 2))


def rate_formula_residual(m: GKLSModel, s: RateSpectrum) -> float:
    """Largest deviation between each mode's rate and the commutator formula."""
    worst = 0.0
    for k, Y in enumerate(s.eigenmatrices):
        if k == s.identity_index:
            continue
        worst = max(worst, abs(s.mode_rates[k] - rate_formula(m, Y, s.stationary)))
    return worst


def sum_rule_check(m: GKLSModel, s: RateSpectrum) -> tuple[float, float]:
    """(sum of jump rates, (1/n) * sum of relaxation rates)."""
    return m.total_rate, float(np.sum(s.rates) / s.n)


@dataclass(frozen=True)
class RateConstraint:
    max_rate: float
    bound: float
    satisfied: bool


def rate_constraint_check(m: GKLSModel, s: RateSpectrum) -> RateConstraint:
    """max Gamma <= (1/(2n)) (1 + lM/lm) sum Gamma, with l from the stationary state.

    The bound rests on the conjectured kind-II constant, so a violation is
    reported rather than raised.
    """
    w = s.stationary
    total = float(np.sum(s.rates))
    bound = (1 + w.lam_max / w.lam_min) * total / (2 * s.n)
    max_rate = float(np.max(s.rates)) if len(s.rates) else 0.0
    return RateConstraint(max_rate, bound, max_rate <= bound + 1e-10)
