"""Tests for the seeded random stream and the state samplers."""
import numpy as np
import pytest
from scipy.stats import chisquare

from entanglement.bell import CANONICAL_SETTINGS, RUS_BOUND, bell_family4, expectations_batch, family_matrices
from entanglement.errors import ConfigInvalid, InvalidCount
from entanglement.linalg import adjoint
from entanglement.qstate import ENTANGLEMENT_TOL, negativity_batch, projectors_batch, validate_batch
from entanglement.rng import SEED_MAX, SeededRng
from entanglement.sampling import (
    haar_pure,
    haar_pure_batch,
    haar_unitary_batch,
    random_mixed,
    random_mixed_batch,
    random_product_pure_batch,
    random_rotation,
    random_separable,
    random_separable_batch,
    random_settings,
    simplex_batch,
    simplex_uniform,
)


def test_same_seed_same_stream():
    a = random_mixed_batch(SeededRng(99), 50)
    b = random_mixed_batch(SeededRng(99), 50)
    np.testing.assert_array_equal(a, b)


def test_split_streams_differ():
    a = SeededRng.split(5, 0).uniform(8)
    b = SeededRng.split(5, 1).uniform(8)
    c = SeededRng(5).uniform(8)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)
    np.testing.assert_array_equal(a, SeededRng.split(5, 0).uniform(8))


@pytest.mark.parametrize("seed", [-1, SEED_MAX + 1, 1.5, True])
def test_invalid_seed(seed):
    with pytest.raises(ConfigInvalid):
        SeededRng(seed)


def test_max_seed_accepted():
    assert SeededRng(SEED_MAX).uniform(1).shape == (1,)


def test_normal_moments(rng):
    z = rng.normal(100_001)
    assert z.shape == (100_001,)
    assert abs(np.mean(z)) < 0.02
    assert abs(np.var(z) - 1.0) < 0.02


def test_exponential_moments(rng):
    e = rng.exponential((200, 500))
    assert np.all(e >= 0.0)
    assert abs(np.mean(e) - 1.0) < 0.02


def test_complex_normal_variance(rng):
    z = rng.complex_normal(100_000)
    assert abs(np.mean(np.abs(z) ** 2) - 1.0) < 0.02


def test_haar_pure_normalized(rng):
    amps = haar_pure_batch(rng, 1000)
    np.testing.assert_allclose(np.linalg.norm(amps, axis=-1), 1.0, atol=1e-14)
    assert haar_pure(rng).norm == pytest.approx(1.0)


def test_haar_pure_mean_projector(rng):
    """The average Haar projector is I/4."""
    mean = np.mean(projectors_batch(haar_pure_batch(rng, 20_000)), axis=0)
    np.testing.assert_allclose(mean, np.eye(4) / 4, atol=0.01)


def test_haar_unitaries_are_unitary(rng):
    u = haar_unitary_batch(rng, 500)
    gram = adjoint(u) @ u
    np.testing.assert_allclose(gram, np.broadcast_to(np.eye(4), gram.shape), atol=1e-12)


def test_haar_unitary_phase_spread(rng):
    """Diagonal entries of a Haar unitary have mean zero."""
    u = haar_unitary_batch(rng, 20_000)
    assert np.abs(np.mean(u[:, 0, 0])) < 0.02


def test_simplex_points(rng):
    w = simplex_batch(rng, 1000, k=5)
    assert np.all(w >= 0.0)
    np.testing.assert_allclose(np.sum(w, axis=-1), 1.0, atol=1e-14)
    assert simplex_uniform(rng).w.shape == (4,)


def test_simplex_mean_is_uniform(rng):
    w = simplex_batch(rng, 20_000)
    np.testing.assert_allclose(np.mean(w, axis=0), 0.25, atol=0.01)


def test_random_mixed_states_valid(rng):
    assert np.all(validate_batch(random_mixed_batch(rng, 2000)))
    random_mixed(rng)


def test_random_mixed_mean_is_maximally_mixed(rng):
    mean = np.mean(random_mixed_batch(rng, 20_000), axis=0)
    np.testing.assert_allclose(mean, np.eye(4) / 4, atol=0.01)


def test_product_states_obey_chsh(rng):
    psi = random_product_pure_batch(rng, 10_000)
    rhos = projectors_batch(psi)
    assert np.max(negativity_batch(rhos)) <= 1e-9
    mats = family_matrices(bell_family4(random_settings(rng)))
    assert np.max(np.abs(expectations_batch(mats, rhos))) <= 2.0 + 1e-9


def test_separable_mixtures_obey_rus(rng):
    """Separable states never exceed sqrt2 at orthogonal settings."""
    rhos = random_separable_batch(rng, 10_000, 8)
    assert np.all(validate_batch(rhos))
    assert np.max(negativity_batch(rhos)) <= 1e-9
    mats = family_matrices(bell_family4(CANONICAL_SETTINGS))
    assert np.max(np.abs(expectations_batch(mats, rhos))) <= RUS_BOUND + 1e-9


def test_single_term_separable_is_pure(rng):
    rho = random_separable(rng, k=1)
    assert np.real(np.trace(rho.mat @ rho.mat)) == pytest.approx(1.0)


def test_separable_needs_a_term(rng):
    with pytest.raises(InvalidCount):
        random_separable_batch(rng, 10, 0)


def test_random_rotation_is_proper(rng):
    for _ in range(100):
        r = random_rotation(rng)
        np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)
        assert np.linalg.det(r) == pytest.approx(1.0)


def test_random_settings_orthogonal(rng):
    s = random_settings(rng)
    assert abs(s.a.d1.dot(s.a.d2)) <= 1e-12
    assert abs(s.b.d1.dot(s.b.d2)) <= 1e-12


def test_haar_pure_states_are_almost_surely_entangled(rng):
    psi = haar_pure_batch(rng, 100_000)
    assert np.mean(np.abs(psi[:, 0]) ** 2) == pytest.approx(0.25, abs=0.005)
    neg = negativity_batch(projectors_batch(psi))
    assert np.mean(neg > ENTANGLEMENT_TOL) >= 0.9999


def test_simplex_max_coordinate_mean(rng):
    """E[max w] on the 3-simplex is (1 + 1/2 + 1/3 + 1/4) / 4 = 25/48."""
    w = simplex_batch(rng, 100_000)
    assert np.mean(np.max(w, axis=-1)) == pytest.approx(25 / 48, abs=0.01)


def test_haar_unitary_moments_and_eigenphases(rng):
    u = haar_unitary_batch(rng, 10_000)
    assert np.mean(np.abs(u[:, 0, 0]) ** 2) == pytest.approx(0.25, abs=0.01)
    phases = np.angle(np.linalg.eigvals(u)).ravel()
    counts, _ = np.histogram(phases, bins=8, range=(-np.pi, np.pi))
    assert chisquare(counts).pvalue > 0.001
