"""Dense complex matrix primitives: weighted inner products and norms,
commutators, centering maps and the Hermitian eigendecomposition used
everywhere else in the package.

Matrices are plain ``numpy`` arrays of complex dtype. A weight is a
Hermitian positive definite matrix wrapped in :class:`Weight`, which caches
its ascending eigensystem.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_RTOL = 1e-12
RECONSTRUCTION_RTOL = 1e-10


def as_matrix(A, name: str = "matrix") -> np.ndarray:
    """Return ``A`` as a square complex ndarray, rejecting NaN/Inf."""
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def _same_dim(*mats: np.ndarray) -> None:
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")


def dagger(A: np.ndarray) -> np.ndarray:
    return A.conj().T


def hermitian_defect(M: np.ndarray) -> float:
    """Relative distance of ``M`` from its Hermitian part."""
    scale = max(np.linalg.norm(M), np.finfo(float).tiny)
    return float(np.linalg.norm(M - dagger(M)) / scale)


def eig_hermitian(M) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    The input is symmetrized as ``(M + M*)/2`` after the Hermiticity check so the
    LAPACK solver sees an exactly Hermitian matrix.
    """
    M = as_matrix(M)
    if hermitian_defect(M) > HERMITIAN_RTOL:
        raise ValueError(f"matrix is not Hermitian within relative tolerance {HERMITIAN_RTOL:g}")
    H = (M + dagger(M)) / 2
    vals, vecs = np.linalg.eigh(H)
    scale = max(np.linalg.norm(H), np.finfo(float).tiny)
    resid = np.linalg.norm((vecs * vals) @ dagger(vecs) - H)
    if resid > RECONSTRUCTION_RTOL * scale:
        raise np.linalg.LinAlgError(f"eigendecomposition residual {resid:.3e} too large")
    return vals, vecs


class Weight:
    """Hermitian positive definite weight matrix with cached eigensystem.

    Eigenvalues are sorted ascending (``eigenvalues[0]`` is the smallest).
    Weights are never rescaled implicitly; use :meth:`normalized` for a
    unit-trace copy.
    """

    __slots__ = ("_matrix", "_eigenvalues", "_eigenvectors", "_is_diagonal")

    def __init__(self, matrix):
        M = as_matrix(matrix, "weight")
        vals, vecs = eig_hermitian(M)
        if vals[0] <= 0:
            raise ValueError(f"weight is not positive definite (smallest eigenvalue {vals[0]:.3e})")
        H = (M + dagger(M)) / 2
        off = H - np.diag(np.diag(H))
        self._is_diagonal = not np.any(off)
        if self._is_diagonal:
            # exact eigensystem for diagonal weights; stable sort keeps ties in index order
            d = np.diag(H).real
            order = np.argsort(d, kind="stable")
            vals = d[order]
            vecs = np.eye(len(d), dtype=complex)[:, order]
        for arr in (H, vals, vecs):
            arr.setflags(write=False)
        self._matrix = H
        self._eigenvalues = vals
        self._eigenvectors = vecs

    @classmethod
    def diag(cls, values) -> "Weight":
        return cls(np.diag(np.asarray(values, dtype=float)))

    @classmethod
    def identity(cls, n: int) -> "Weight":
        return cls(np.eye(n))

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._eigenvalues

    @property
    def eigenvectors(self) -> np.ndarray:
        return self._eigenvectors

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.sum(self._eigenvalues))

    @property
    def is_diagonal(self) -> bool:
        return self._is_diagonal

    @property
    def lam_min(self) -> float:
        return float(self._eigenvalues[0])

    @property
    def lam_second(self) -> float:
        """Second smallest eigenvalue; needs ``dim >= 2``."""
        if self.dim < 2:
            raise ValueError("second smallest eigenvalue needs dim >= 2")
        return float(self._eigenvalues[1])

    @property
    def lam_max(self) -> float:
        return float(self._eigenvalues[-1])

    @property
    def condition(self) -> float:
        return self.lam_max / self.lam_min

    def ket(self, i: int) -> np.ndarray:
        """Unit eigenvector for the ``i``-th smallest eigenvalue (0-based)."""
        return self._eigenvectors[:, i]

    def sqrt(self) -> np.ndarray:
        V, lam = self._eigenvectors, self._eigenvalues
        return (V * np.sqrt(lam)) @ dagger(V)

    def scaled(self, p: float) -> "Weight":
        if not p > 0:
            raise ValueError("scale factor must be positive")
        return Weight(p * self._matrix)

    def normalized(self) -> "Weight":
        return Weight(self._matrix / self.trace)

    def conjugated(self, U) -> "Weight":
        """The weight ``U w U*`` for a unitary ``U``."""
        U = as_matrix(U, "unitary")
        return Weight(U @ self._matrix @ dagger(U))

    def is_scalar(self, rtol: float = 1e-12) -> bool:
        return bool(self.lam_max - self.lam_min <= rtol * self.lam_max)

    def __repr__(self) -> str:
        return f"Weight(dim={self.dim}, eigenvalues={np.array2string(self._eigenvalues, precision=4)})"


def omega_inner(A, B, w: Weight) -> complex:
    """The weighted inner product ``tr(A* B w)``."""
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    _same_dim(A, B, w.matrix)
    return complex(np.vdot(A, B @ w.matrix))


def omega_norm(A, w: Weight) -> float:
    """Weighted Frobenius norm ``sqrt(tr(A* A w))``."""
    A = as_matrix(A, "A")
    _same_dim(A, w.matrix)
    return float(np.sqrt(max(np.vdot(A, A @ w.matrix).real, 0.0)))


def frobenius_norm(A) -> float:
    return float(np.linalg.norm(as_matrix(A, "A")))


def commutator(A, B) -> np.ndarray:
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    _same_dim(A, B)
    return A @ B - B @ A


def center_omega(A, w: Weight) -> np.ndarray:
    """Orthogonal projection of ``A`` onto the weighted complement of the identity.

    Returns ``A - (tr(A w)/tr(w)) I``; for unit-trace weights this is
    ``A - tr(A w) I``.
    """
    A = as_matrix(A, "A")
    _same_dim(A, w.matrix)
    alpha = np.trace(A @ w.matrix) / w.trace
    return A - alpha * np.eye(A.shape[0])


def center_trace(A) -> np.ndarray:
    A = as_matrix(A, "A")
    n = A.shape[0]
    return A - (np.trace(A) / n) * np.eye(n)
