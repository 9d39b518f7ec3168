import numpy as np
import pytest

from qgibbs import spin_model as sm


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def z_qubit():
    return sm.build_hamiltonian(sm.chain(1), [sm.pauli_term((0,), "Z")])


@pytest.fixture
def ising3():
    return sm.ising_chain(3)


@pytest.fixture
def heis3():
    return sm.heisenberg_chain(3)


def random_local_model(n, rng, scale=1.0):
    """Chain with random two-site couplings and random single-site fields."""
    from qgibbs.superop import random_hermitian
    terms = [sm.InteractionTerm((i, i + 1), random_hermitian(4, rng, scale)) for i in range(n - 1)]
    terms += [sm.InteractionTerm((i,), random_hermitian(2, rng, 0.5 * scale)) for i in range(n)]
    return sm.build_hamiltonian(sm.chain(n), terms)
