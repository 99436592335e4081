import numpy as np
import pytest

from omegabw.ensembles import complex_normal


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def cmat(rng, n):
    return complex_normal(rng, (n, n))


def herm(rng, n):
    G = cmat(rng, n)
    return (G + G.conj().T) / 2


def diag_weight_values(rng, n, lo=0.05):
    """Ascending positive values, unit trace."""
    lam = np.sort(lo + rng.random(n))
    return lam / lam.sum()
