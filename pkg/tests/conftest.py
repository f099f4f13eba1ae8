import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wigwitness.fock_core import FockOperator

settings.register_profile(
    "wigwitness", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("wigwitness")


def random_state(rng: np.random.Generator, dim: int, support: int | None = None, rank: int = 3) -> FockOperator:
    """Random mixed state whose population lives on the lowest ``support`` levels."""
    support = dim if support is None else support
    vecs = rng.normal(size=(rank, support)) + 1j * rng.normal(size=(rank, support))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    w = rng.dirichlet(np.ones(rank))
    mat = np.zeros((dim, dim), dtype=complex)
    mat[:support, :support] = np.einsum("k,ki,kj->ij", w, vecs, vecs.conj())
    return FockOperator.density(mat)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
