"""Shared fixtures"""
import numpy as np
import pytest

from entanglement.qstate import DensityMatrix, bell_state, from_pure, maximally_mixed
from entanglement.rng import SeededRng
from entanglement.sampling import random_mixed_batch


@pytest.fixture
def rng():
    return SeededRng(20240611)


@pytest.fixture
def phi_plus() -> DensityMatrix:
    return from_pure(bell_state("phi+"))


@pytest.fixture
def mixed_identity() -> DensityMatrix:
    return maximally_mixed()


@pytest.fixture(scope="module")
def mixed_states() -> np.ndarray:
    """10^4 random mixed states drawn from a fixed stream"""
    return random_mixed_batch(SeededRng(7), 10_000)
