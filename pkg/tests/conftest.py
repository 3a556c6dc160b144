import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from nvbath.lindblad import LindbladModel
from nvbath.models.cpt import togan2011

# derandomized so the property suite is reproducible run to run
settings.register_profile("nvbath", derandomize=True, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("nvbath")


def random_model(seed: int, dim: int, scale: float = 1.0) -> LindbladModel:
    """Random Hermitian Hamiltonian with an irreducible jump graph."""
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = scale * (h + h.conj().T) / 2
    jumps = [(i, f, rng.uniform(0.1, 2.0)) for i in range(dim) for f in range(dim)
             if i != f and rng.random() < 0.4]
    # a directed ring guarantees a unique steady state
    jumps += [(i, (i + 1) % dim, rng.uniform(0.2, 1.0)) for i in range(dim)]
    deph = rng.uniform(0.0, 0.5, size=dim)
    return LindbladModel(h, jumps=jumps, pure_dephasing=deph)


def random_operator(seed: int, dim: int) -> np.ndarray:
    rng = np.random.default_rng(seed + 7919)
    return rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))


def random_density(seed: int, dim: int) -> np.ndarray:
    x = random_operator(seed + 1, dim)
    rho = x @ x.conj().T
    return rho / np.trace(rho)


seeds = st.integers(min_value=0, max_value=2 ** 31 - 1)
dims = st.integers(min_value=2, max_value=5)


@pytest.fixture(scope="session")
def preset():
    return togan2011()
