"""Tests for Bell-CHSH operators, threshold classification and the settings optimizer."""
import numpy as np
import pytest

from entanglement.bell import (
    AXIS_X,
    AXIS_Y,
    AXIS_Z,
    CANONICAL_SETTINGS,
    COORDINATE_TRIAD,
    PAULIS,
    SQRT2,
    Direction,
    OrthogonalPair,
    SettingsPair,
    Triad,
    _angle_objective,
    _climb,
    angles_from_rotation,
    bell_family4,
    bell_family36,
    bell_operator,
    classify,
    correlation_matrix,
    expectation,
    expectations_batch,
    family_matrices,
    gram_schmidt_pair,
    horodecki_max,
    horodecki_max_batch,
    max_over_orthogonal_settings,
    rotation_zyz,
    saturating_settings,
    settings_from_angles,
    singular_value_max,
)
from entanglement.errors import ConfigInvalid, NotOrthogonal, NotUnit
from entanglement.linalg import hermitian_eigvals
from entanglement.qstate import (
    DensityMatrix,
    fully_entangled_fraction,
    fully_entangled_fraction_batch,
    local_unitary,
    negativity,
    negativity_batch,
    werner_state,
)
from entanglement.sampling import (
    haar_unitary_batch,
    random_mixed,
    random_rotation,
    random_settings,
    random_triad,
)

SPECTRUM = np.array([-2 * SQRT2, 0.0, 0.0, 2 * SQRT2])


def test_direction_must_be_unit():
    with pytest.raises(NotUnit):
        Direction(1.0, 1.0, 0.0)


def test_direction_from_vector_normalizes():
    d = Direction.from_vector([0.0, 3.0, 4.0], normalize=True)
    assert d.y == pytest.approx(0.6)
    with pytest.raises(NotUnit):
        Direction.from_vector([0.0, 0.0, 0.0], normalize=True)


def test_pair_must_be_orthogonal():
    d = Direction.from_vector([1.0, 1.0, 0.0], normalize=True)
    with pytest.raises(NotOrthogonal):
        OrthogonalPair(AXIS_X, d)


def test_triad_must_be_orthogonal():
    d = Direction.from_vector([1.0, 0.0, 1.0], normalize=True)
    with pytest.raises(NotOrthogonal):
        Triad(AXIS_X, AXIS_Y, d)


def test_gram_schmidt_pair():
    pair = gram_schmidt_pair(AXIS_Z, [1.0, 0.0, 0.3])
    assert pair.d2.as_array() == pytest.approx([1.0, 0.0, 0.0])
    with pytest.raises(NotUnit):
        gram_schmidt_pair(AXIS_Z, [0.0, 0.0, 2.0])


def test_triad_pairs_order():
    pairs = COORDINATE_TRIAD.pairs()
    assert [(p.d1, p.d2) for p in pairs] == [(AXIS_X, AXIS_Y), (AXIS_X, AXIS_Z), (AXIS_Y, AXIS_Z)]


def test_canonical_operator_spectrum():
    values = hermitian_eigvals(bell_operator(CANONICAL_SETTINGS).mat)
    np.testing.assert_allclose(values, SPECTRUM, atol=1e-12)


def test_family_spectrum_for_random_settings(rng):
    """Every member of the 4-family has spectrum {-2sqrt2, 0, 0, 2sqrt2}."""
    mats = np.concatenate(
        [family_matrices(bell_family4(random_settings(rng))) for _ in range(1000)]
    )
    values = hermitian_eigvals(mats)
    assert np.max(np.abs(values - SPECTRUM)) <= 1e-9


def test_family36_spectrum_and_order(rng):
    operators = bell_family36(random_triad(rng), random_triad(rng))
    assert len(operators) == 36
    assert [(op.a_pair, op.b_pair, op.variant) for op in operators[:5]] == [
        (0, 0, 1), (0, 0, 2), (0, 0, 3), (0, 0, 4), (0, 1, 1),
    ]
    assert (operators[-1].a_pair, operators[-1].b_pair, operators[-1].variant) == (2, 2, 4)
    values = hermitian_eigvals(family_matrices(operators))
    assert np.max(np.abs(values - SPECTRUM)) <= 1e-9


def test_family36_contains_canonical_family():
    family36 = family_matrices(bell_family36(COORDINATE_TRIAD, COORDINATE_TRIAD))
    for mat in family_matrices(bell_family4(CANONICAL_SETTINGS)):
        distances = np.linalg.norm(family36 - mat, axis=(-2, -1))
        assert np.min(distances) <= 1e-12


def test_phi_plus_saturates_cirelson(phi_plus):
    values = [expectation(op, phi_plus) for op in bell_family4(saturating_settings())]
    assert values[0] == pytest.approx(2 * SQRT2, abs=1e-12)
    np.testing.assert_allclose(values[1:], 0.0, atol=1e-12)


def test_maximally_mixed_expectations_vanish(mixed_identity, rng):
    for op in bell_family4(random_settings(rng)):
        assert expectation(op, mixed_identity) == pytest.approx(0.0, abs=1e-12)


def test_werner_expectation_is_linear():
    value = expectation(bell_operator(saturating_settings()), werner_state(0.95))
    assert value == pytest.approx(2 * SQRT2 * 0.95, abs=1e-12)
    verdict = classify(value)
    assert verdict.violates_chsh and verdict.violates_rus


def test_expectations_batch_matches_single(rng):
    states = [random_mixed(rng) for _ in range(5)]
    operators = bell_family4(random_settings(rng))
    batch = expectations_batch(family_matrices(operators), np.stack([s.mat for s in states]))
    single = [[expectation(op, s) for op in operators] for s in states]
    np.testing.assert_allclose(batch, single, atol=1e-14)


@pytest.mark.parametrize(
    "value, chsh, rus, cirelson, lower_bound",
    [
        (2 * SQRT2, True, True, True, 1.0),
        (SQRT2, False, False, True, 0.0),
        (2.0, False, True, True, SQRT2 - 1),
        (-2.5, True, True, True, 2.5 / SQRT2 - 1),
        (0.0, False, False, True, 0.0),
        (3.0, True, True, False, 3.0 / SQRT2 - 1),
    ],
)
def test_classify(value, chsh, rus, cirelson, lower_bound):
    verdict = classify(value)
    assert verdict.violates_chsh is chsh
    assert verdict.violates_rus is rus
    assert verdict.within_cirelson is cirelson
    assert verdict.negativity_lower_bound == pytest.approx(lower_bound, abs=1e-15)
    assert verdict.satisfies_negativity_bound is None


def test_classify_with_negativity():
    assert classify(2 * SQRT2, 1.0).satisfies_negativity_bound is True
    assert classify(2.0, 0.0).satisfies_negativity_bound is False


def test_strengthened_bound_on_random_states(mixed_states, rng):
    """|<B>| <= sqrt2 (1 + N) for random states at random orthogonal settings."""
    neg = negativity_batch(mixed_states)
    chunks = np.array_split(np.arange(len(mixed_states)), 100)
    for idx in chunks:
        mats = family_matrices(bell_family4(random_settings(rng)))
        values = np.abs(expectations_batch(mats, mixed_states[idx]))
        assert np.all(values <= SQRT2 * (1.0 + neg[idx, None]) + 1e-9)


def test_correlation_matrix_of_phi_plus(phi_plus):
    np.testing.assert_allclose(correlation_matrix(phi_plus), np.diag([1.0, -1.0, 1.0]), atol=1e-15)
    assert horodecki_max(phi_plus) == pytest.approx(2 * SQRT2, abs=1e-12)


def test_horodecki_max_of_maximally_mixed(mixed_identity):
    assert horodecki_max(mixed_identity) == pytest.approx(0.0, abs=1e-12)


def test_horodecki_max_local_unitary_invariance(rng):
    rho = random_mixed(rng)
    u_a, u_b = haar_unitary_batch(rng, 2, dim=2)
    assert horodecki_max(local_unitary(rho, u_a, u_b)) == pytest.approx(horodecki_max(rho), abs=1e-10)


def test_horodecki_bounds_fixed_settings(mixed_states):
    upper = horodecki_max_batch(mixed_states[:2000])
    values = np.abs(expectations_batch(family_matrices(bell_family4(CANONICAL_SETTINGS)), mixed_states[:2000]))
    assert np.all(values.max(axis=-1) <= upper + 1e-9)


def test_settings_from_angles_are_orthogonal():
    settings = settings_from_angles([0.1, 0.2, 0.3, 1.0, 2.0, 3.0])
    assert settings.a.d1.dot(settings.a.d2) == pytest.approx(0.0, abs=1e-12)
    zero = settings_from_angles(np.zeros(6))
    assert zero.a.d1 == AXIS_X


def test_optimizer_saturates_on_phi_plus(phi_plus):
    value, settings = max_over_orthogonal_settings(phi_plus, restarts=4, iterations=100, seed=1)
    assert value == pytest.approx(2 * SQRT2, abs=1e-6)
    assert expectation(bell_operator(settings), phi_plus) == value


def test_optimizer_is_certified_and_bounded(rng):
    for _ in range(10):
        rho = random_mixed(rng)
        value, settings = max_over_orthogonal_settings(rho, restarts=2, iterations=50, seed=3)
        assert value == expectation(bell_operator(settings), rho)
        assert value <= horodecki_max(rho) + 1e-6


def test_optimizer_deterministic_and_monotone(rng):
    rho = random_mixed(rng)
    first = max_over_orthogonal_settings(rho, restarts=3, iterations=30, seed=11)
    again = max_over_orthogonal_settings(rho, restarts=3, iterations=30, seed=11)
    more = max_over_orthogonal_settings(rho, restarts=6, iterations=30, seed=11)
    assert first[0] == again[0]
    assert first[1] == again[1]
    assert more[0] >= first[0]


def test_optimizer_rejects_empty_budget(phi_plus):
    with pytest.raises(ConfigInvalid):
        max_over_orthogonal_settings(phi_plus, restarts=0)


def test_optimizer_on_werner_state():
    """The optimum over orthogonal settings of a Werner state is 2sqrt2 p."""
    rho = werner_state(0.6)
    value, _ = max_over_orthogonal_settings(rho, restarts=4, iterations=100, seed=0)
    assert value == pytest.approx(2 * SQRT2 * 0.6, abs=1e-6)


def test_optimizer_on_separable_state_respects_rus():
    rho = DensityMatrix(np.diag([0.5, 0.0, 0.0, 0.5]).astype(complex))
    value, _ = max_over_orthogonal_settings(rho, restarts=4, iterations=100, seed=0)
    assert value <= SQRT2 + 1e-9
    assert value == pytest.approx(SQRT2, abs=1e-6)


def test_family36_is_duplicate_free(rng):
    for _ in range(20):
        mats = family_matrices(bell_family36(random_triad(rng), random_triad(rng)))
        distances = np.linalg.norm(mats[:, None] - mats[None, :], axis=(-2, -1))
        off_diagonal = distances[~np.eye(36, dtype=bool)]
        assert np.min(off_diagonal) > 1e-6


def _bloch_rotation(u: np.ndarray) -> np.ndarray:
    """R with u (n . sigma) u^dagger = (R n) . sigma"""
    return np.real(np.einsum("iab,bc,jcd,da->ij", PAULIS, u, PAULIS, u.conj().T)) / 2.0


def _rotated_settings(settings, rot_a, rot_b):
    def pair(p, rot):
        return OrthogonalPair(
            Direction.from_vector(rot.T @ p.d1.as_array(), normalize=True),
            Direction.from_vector(rot.T @ p.d2.as_array(), normalize=True),
        )
    return SettingsPair(pair(settings.a, rot_a), pair(settings.b, rot_b))


def test_classification_is_frame_invariant(rng):
    """Rotating the state by local unitaries and the settings by the matching rotations changes nothing."""
    for _ in range(200):
        rho = random_mixed(rng)
        u_a, u_b = haar_unitary_batch(rng, 2, dim=2)
        settings = random_settings(rng)
        moved = local_unitary(rho, u_a, u_b)
        pulled_back = _rotated_settings(settings, _bloch_rotation(u_a), _bloch_rotation(u_b))
        for op, op_back in zip(bell_family4(settings), bell_family4(pulled_back)):
            value = expectation(op, moved)
            assert value == pytest.approx(expectation(op_back, rho), abs=1e-12)
            verdict, verdict_back = classify(value), classify(expectation(op_back, rho))
            assert verdict.violates_chsh == verdict_back.violates_chsh
            assert verdict.violates_rus == verdict_back.violates_rus


def test_optimizer_is_local_unitary_invariant(rng):
    for _ in range(10):
        rho = random_mixed(rng)
        u_a, u_b = haar_unitary_batch(rng, 2, dim=2)
        value, _ = max_over_orthogonal_settings(rho, restarts=2, iterations=20, seed=4)
        moved, _ = max_over_orthogonal_settings(local_unitary(rho, u_a, u_b), restarts=2, iterations=20, seed=4)
        assert moved == pytest.approx(value, abs=1e-9)


def test_singular_value_max_is_attained(rng):
    """Restart 0 starts at the singular-vector settings, so no sweep is needed."""
    for _ in range(50):
        rho = random_mixed(rng)
        value, settings = max_over_orthogonal_settings(rho, restarts=1, iterations=0)
        assert value == pytest.approx(singular_value_max(rho), abs=1e-12)
        assert value == expectation(bell_operator(settings), rho)
        assert singular_value_max(rho) <= horodecki_max(rho) + 1e-12


def test_climb_never_lowers_a_start(rng):
    rho = random_mixed(rng)
    objective = _angle_objective(correlation_matrix(rho))
    starts = 2.0 * np.pi * rng.uniform((6, 6))
    params, values = _climb(objective, starts, 50)
    assert np.all(values >= objective(starts))
    assert np.all(values <= singular_value_max(rho) + 1e-12)
    np.testing.assert_allclose(objective(params), values, atol=1e-15)


def test_angles_from_rotation_inverts_rotation_zyz(rng):
    for _ in range(100):
        rot = random_rotation(rng)
        np.testing.assert_allclose(rotation_zyz(angles_from_rotation(rot)), rot, atol=1e-12)
    for rot in (np.eye(3), np.diag([1.0, -1.0, -1.0]), np.diag([-1.0, 1.0, -1.0])):
        np.testing.assert_allclose(rotation_zyz(angles_from_rotation(rot)), rot, atol=1e-12)


def test_optimizer_werner_bounds():
    rho = werner_state(0.9)
    value, _ = max_over_orthogonal_settings(rho)
    f = fully_entangled_fraction(rho)
    n = negativity(rho)
    assert value <= min(2 * SQRT2 * f, SQRT2 * (1 + n), horodecki_max(rho)) + 1e-6
    assert value >= 2 * SQRT2 * 0.9 - 1e-9


def test_optimizer_default_budget_bounds(mixed_states):
    states = mixed_states[:20]
    fidelity = fully_entangled_fraction_batch(states)
    neg = negativity_batch(states)
    upper = horodecki_max_batch(states)
    for k, mat in enumerate(states):
        value, _ = max_over_orthogonal_settings(DensityMatrix(mat), seed=k)
        assert value <= 2 * SQRT2 * fidelity[k] + 1e-6
        assert value <= SQRT2 * (1 + neg[k]) + 1e-6
        assert value <= upper[k] + 1e-6


@pytest.mark.slow
def test_optimizer_bounds_on_many_states(mixed_states):
    """Fidelity, negativity and unrestricted bounds hold at the optimizer output for 10^4 states."""
    fidelity = fully_entangled_fraction_batch(mixed_states)
    neg = negativity_batch(mixed_states)
    upper = horodecki_max_batch(mixed_states)
    for k, mat in enumerate(mixed_states):
        rho = DensityMatrix(mat)
        value, _ = max_over_orthogonal_settings(rho, restarts=2, iterations=20, seed=k)
        assert value <= 2 * SQRT2 * fidelity[k] + 1e-6
        assert value <= SQRT2 * (1 + neg[k]) + 1e-6
        assert value <= upper[k] + 1e-6
        assert value >= singular_value_max(rho) - 1e-9
