"""Seeded random matrix ensembles and the deterministic omega(p) sweep family.

All randomness goes through :class:`SeededStream`, which feeds
``numpy.random.SeedSequence([master_seed, stream_index])`` into the PCG64
bit generator. Identical ``(master_seed, stream_index)`` pairs give identical
draws on every platform numpy supports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import Weight, center_trace, dagger

MAX_WEIGHT_CONDITION = 1e8
MAX_REDRAWS = 100


@dataclass(frozen=True)
class SeededStream:
    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.master_seed < 0 or self.stream_index < 0:
            raise ValueError("seeds and stream indices must be nonnegative")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence([self.master_seed, self.stream_index])
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, index: int) -> "SeededStream":
        """Stream for a sub-task; distinct from this stream and from siblings."""
        seq = np.random.SeedSequence([self.master_seed, self.stream_index, index])
        return SeededStream(int(seq.generate_state(1, np.uint64)[0]), 0)


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Entries with independent real and imaginary parts of variance 1/2."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def ginibre(n: int, stream: SeededStream) -> np.ndarray:
    """n x n matrix of iid complex standard normal entries (E|z|^2 = 1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return complex_normal(stream.generator(), (n, n))


def random_weight(n: int, stream: SeededStream) -> Weight:
    """Trace-normalized Wishart weight G G*/tr(G G*), redrawn while ill-conditioned."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = stream.generator()
    for _ in range(MAX_REDRAWS):
        G = complex_normal(rng, (n, n))
        M = G @ dagger(G)
        M /= np.trace(M).real
        w = Weight(M)
        if w.condition <= MAX_WEIGHT_CONDITION:
            return w
    raise RuntimeError(f"no weight with condition <= {MAX_WEIGHT_CONDITION:g} after {MAX_REDRAWS} draws")


def random_weight_uniform_spectrum(n: int, stream: SeededStream) -> Weight:
    """U diag(l) U*/sum(l) with l uniform on (0, 1] and U Haar; same conditioning rule."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = stream.generator()
    for _ in range(MAX_REDRAWS):
        lam = 1.0 - rng.random(n)
        Q, R = np.linalg.qr(complex_normal(rng, (n, n)))
        d = np.diag(R)
        U = Q * (d / np.abs(d))
        M = (U * lam) @ dagger(U) / lam.sum()
        w = Weight((M + dagger(M)) / 2)
        if w.condition <= MAX_WEIGHT_CONDITION:
            return w
    raise RuntimeError(f"no weight with condition <= {MAX_WEIGHT_CONDITION:g} after {MAX_REDRAWS} draws")


# pluggable generators for ensemble-robustness runs
WEIGHT_ENSEMBLES = {"wishart": random_weight, "uniform-spectrum": random_weight_uniform_spectrum}


def omega_sweep(p: float) -> Weight:
    """diag(sin 2p, sin 2p^2, ..., sin 2p^5) for 0 < p <= 1."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    return Weight.diag(np.sin(2 * p ** np.arange(1, 6)))


def sweep_grid(points: int = 200) -> np.ndarray:
    """Uniform grid p = k/points, k = 1..points."""
    if points < 1:
        raise ValueError("grid needs at least one point")
    return np.arange(1, points + 1) / points


def random_hermitian(n: int, stream: SeededStream) -> np.ndarray:
    G = ginibre(n, stream)
    return (G + dagger(G)) / 2


def random_unitary(n: int, stream: SeededStream) -> np.ndarray:
    """Haar unitary from the QR decomposition of a Ginibre matrix with phase fix."""
    Q, R = np.linalg.qr(ginibre(n, stream))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_gkls(n: int, k: int, stream: SeededStream):
    """Random GKLS model: Hermitian H, k traceless unit-norm jumps, rates in (0, 1]."""
    from .quantum import GKLSModel

    if n < 2 or k < 1:
        raise ValueError("need n >= 2 and k >= 1")
    rng = stream.generator()
    G = complex_normal(rng, (n, n))
    H = (G + dagger(G)) / 2
    jumps = []
    for _ in range(k):
        L = center_trace(complex_normal(rng, (n, n)))
        L /= np.linalg.norm(L)
        # uniform on (0, 1]
        gamma = 1.0 - rng.random()
        jumps.append((L, gamma))
    return GKLSModel(H, jumps)
