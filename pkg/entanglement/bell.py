"""
Bell-CHSH operators built from orthogonal spin measurement settings

Covers the single operator A1(B1 + B2) + A2(B1 - B2), the four sign variants
obtainable from one fixed set of four correlations, the 36-operator family
of a tomographically complete measurement, threshold classification, and
maximization of the Bell expectation over orthogonal settings.
"""
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple
import logging

import numpy as np

from entanglement.errors import ConfigInvalid, NotOrthogonal, NotUnit
from entanglement.linalg import CMat2, CMat4, hermitian_trace, kron
from entanglement.qstate import DensityMatrix
from entanglement.rng import SeededRng

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)
CHSH_BOUND = 2.0
RUS_BOUND = SQRT2
CIRELSON_BOUND = 2.0 * SQRT2
CIRELSON_TOL = 1e-9

UNIT_TOL = 1e-10
ORTHOGONAL_TOL = 1e-10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = np.stack([PAULI_X, PAULI_Y, PAULI_Z])

# PAULI_PRODUCTS[i, j] = sigma_i x sigma_j
PAULI_PRODUCTS = np.einsum("iab,jcd->ijacbd", PAULIS, PAULIS).reshape(3, 3, 4, 4)


@dataclass(frozen=True)
class Direction:
    """Unit vector of a spin measurement direction"""
    x: float
    y: float
    z: float

    def __post_init__(self):
        norm = np.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2)
        if not np.isfinite(norm) or abs(norm - 1.0) > UNIT_TOL:
            raise NotUnit(f"Direction ({self.x}, {self.y}, {self.z}) has norm {norm:.12g}")

    @classmethod
    def from_vector(cls, v, normalize: bool = False) -> "Direction":
        v = np.asarray(v, dtype=float).reshape(3)
        if normalize:
            norm = np.linalg.norm(v)
            if norm == 0.0:
                raise NotUnit("Zero vector has no direction")
            v = v / norm
        return cls(float(v[0]), float(v[1]), float(v[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def dot(self, other: "Direction") -> float:
        return float(self.as_array() @ other.as_array())

    def __neg__(self) -> "Direction":
        return Direction(-self.x, -self.y, -self.z)


@dataclass(frozen=True)
class OrthogonalPair:
    """Two perpendicular measurement directions of one party"""
    d1: Direction
    d2: Direction

    def __post_init__(self):
        overlap = self.d1.dot(self.d2)
        if abs(overlap) > ORTHOGONAL_TOL:
            raise NotOrthogonal(f"Directions overlap by {overlap:.3e}")


@dataclass(frozen=True)
class Triad:
    """Three mutually perpendicular directions of a tomographically complete measurement"""
    d1: Direction
    d2: Direction
    d3: Direction

    def __post_init__(self):
        for u, v in ((self.d1, self.d2), (self.d1, self.d3), (self.d2, self.d3)):
            overlap = u.dot(v)
            if abs(overlap) > ORTHOGONAL_TOL:
                raise NotOrthogonal(f"Triad directions overlap by {overlap:.3e}")

    def pairs(self) -> List[OrthogonalPair]:
        """Unordered pairs in the fixed order (d1, d2), (d1, d3), (d2, d3)"""
        return [
            OrthogonalPair(self.d1, self.d2),
            OrthogonalPair(self.d1, self.d3),
            OrthogonalPair(self.d2, self.d3),
        ]


@dataclass(frozen=True)
class SettingsPair:
    """(A1, A2) for party A and (B1, B2) for party B"""
    a: OrthogonalPair
    b: OrthogonalPair


@dataclass(frozen=True, eq=False)
class BellOperator:
    mat: CMat4
    settings: SettingsPair
    variant: int = 1
    a_pair: int = 0
    b_pair: int = 0


@dataclass(frozen=True)
class Verdict:
    """Classification of one Bell expectation value against the known bounds"""
    value: float
    violates_chsh: bool
    violates_rus: bool
    within_cirelson: bool
    negativity_lower_bound: float
    satisfies_negativity_bound: Optional[bool] = None


AXIS_X = Direction(1.0, 0.0, 0.0)
AXIS_Y = Direction(0.0, 1.0, 0.0)
AXIS_Z = Direction(0.0, 0.0, 1.0)

CANONICAL_PAIR = OrthogonalPair(AXIS_Z, AXIS_X)
CANONICAL_SETTINGS = SettingsPair(CANONICAL_PAIR, CANONICAL_PAIR)
COORDINATE_TRIAD = Triad(AXIS_X, AXIS_Y, AXIS_Z)


def saturating_settings() -> SettingsPair:
    """A = (z, x), B = ((z + x)/sqrt2, (z - x)/sqrt2): reaches 2 sqrt2 on |Phi+>"""
    b1 = Direction.from_vector([1.0, 0.0, 1.0], normalize=True)
    b2 = Direction.from_vector([-1.0, 0.0, 1.0], normalize=True)
    return SettingsPair(CANONICAL_PAIR, OrthogonalPair(b1, b2))


def gram_schmidt_pair(d1: Direction, d2_raw) -> OrthogonalPair:
    """
    Orthogonal pair keeping d1 and the component of d2_raw perpendicular to it

    Args:
        d1: First direction, kept as is
        d2_raw: Approximate second direction (any 3-vector not parallel to d1)

    Raises:
        NotUnit: if d2_raw is (numerically) parallel to d1
    """
    u = d1.as_array()
    v = np.asarray(d2_raw, dtype=float).reshape(3)
    v = v - (v @ u) * u
    return OrthogonalPair(d1, Direction.from_vector(v, normalize=True))


def spin_op(d: Direction) -> CMat2:
    """d . sigma, a dichotomic observable with eigenvalues +1 and -1"""
    norm = np.sqrt(d.x ** 2 + d.y ** 2 + d.z ** 2)
    if abs(norm - 1.0) > UNIT_TOL:
        raise NotUnit(f"Direction has norm {norm:.12g}")
    return d.x * PAULI_X + d.y * PAULI_Y + d.z * PAULI_Z


def _variant_matrices(s: SettingsPair) -> List[CMat4]:
    a1, a2 = spin_op(s.a.d1), spin_op(s.a.d2)
    b1, b2 = spin_op(s.b.d1), spin_op(s.b.d2)
    b_sum = b1 + b2
    b_diff = b1 - b2
    return [
        kron(a1, b_sum) + kron(a2, b_diff),
        kron(a1, b_sum) - kron(a2, b_diff),
        kron(a1, b_diff) + kron(a2, b_sum),
        kron(a1, -b_diff) + kron(a2, b_sum),
    ]


def bell_operator(s: SettingsPair) -> BellOperator:
    """A1 x (B1 + B2) + A2 x (B1 - B2); spectrum {-2 sqrt2, 0, 0, 2 sqrt2}"""
    return BellOperator(mat=_variant_matrices(s)[0], settings=s, variant=1)


def bell_family4(s: SettingsPair) -> List[BellOperator]:
    """The four operators built from the same four correlations, variants 1..4 in order"""
    return [
        BellOperator(mat=mat, settings=s, variant=k + 1)
        for k, mat in enumerate(_variant_matrices(s))
    ]


def bell_family36(ta: Triad, tb: Triad) -> List[BellOperator]:
    """
    36 operators from two triads: 3 pairs for A x 3 pairs for B x 4 variants

    Ordered with the A-pair index major, the B-pair index middle and the
    variant minor.
    """
    operators = []
    for ia, pair_a in enumerate(ta.pairs()):
        for ib, pair_b in enumerate(tb.pairs()):
            settings = SettingsPair(pair_a, pair_b)
            for k, mat in enumerate(_variant_matrices(settings)):
                operators.append(
                    BellOperator(mat=mat, settings=settings, variant=k + 1, a_pair=ia, b_pair=ib)
                )
    return operators


def family_matrices(operators: List[BellOperator]) -> np.ndarray:
    return np.stack([op.mat for op in operators])


def expectation(b: BellOperator, rho: DensityMatrix) -> float:
    """Tr(B rho); the imaginary part must stay below 1e-10"""
    return float(hermitian_trace(b.mat @ rho.mat, tol=1e-10))


def expectations_batch(operator_mats: np.ndarray, rhos: np.ndarray) -> np.ndarray:
    """(k, 4, 4) operators and (n, 4, 4) states -> (n, k) expectation values"""
    return np.real(np.einsum("kij,nji->nk", operator_mats, rhos))


def classify(value: float, negativity: Optional[float] = None) -> Verdict:
    """
    Compare a Bell expectation value against the CHSH, RUS and Cirel'son bounds

    Violations use strict inequalities. The negativity lower bound follows
    from |<B>| <= sqrt2 (1 + N).
    """
    magnitude = abs(value)
    satisfies = None
    if negativity is not None:
        satisfies = bool(magnitude <= SQRT2 * (1.0 + negativity) + CIRELSON_TOL)
    return Verdict(
        value=float(value),
        violates_chsh=bool(magnitude > CHSH_BOUND),
        violates_rus=bool(magnitude > RUS_BOUND),
        within_cirelson=bool(magnitude <= CIRELSON_BOUND + CIRELSON_TOL),
        negativity_lower_bound=float(max(0.0, magnitude / SQRT2 - 1.0)),
        satisfies_negativity_bound=satisfies,
    )


# --- correlation matrix and the unconstrained maximum -------------------------

def correlation_matrix_batch(rhos: np.ndarray) -> np.ndarray:
    """T[n, i, j] = Tr(rho_n sigma_i x sigma_j)"""
    return np.real(np.einsum("ijab,nba->nij", PAULI_PRODUCTS, rhos))


def correlation_matrix(rho: DensityMatrix) -> np.ndarray:
    return correlation_matrix_batch(rho.mat[None])[0]


def horodecki_max_batch(rhos: np.ndarray) -> np.ndarray:
    t = correlation_matrix_batch(rhos)
    eigs = np.linalg.eigvalsh(np.swapaxes(t, -1, -2) @ t)
    return 2.0 * np.sqrt(np.maximum(eigs[..., -1] + eigs[..., -2], 0.0))


def horodecki_max(rho: DensityMatrix) -> float:
    """
    CHSH maximum over unrestricted settings: 2 sqrt(m1 + m2)

    m1, m2 are the two largest eigenvalues of T^T T. Upper-bounds the
    orthogonal-settings optimum.
    """
    return float(horodecki_max_batch(rho.mat[None])[0])


# --- maximization over orthogonal settings ------------------------------------

SWEEP_GAIN_TOL = 1e-14
EULER_LOCK_TOL = 1e-8

# probe angles of an exact coordinate step
_STEP_ANGLES = np.array([0.0, 0.5 * np.pi, np.pi])


def rotation_zyz(angles: np.ndarray) -> np.ndarray:
    """Rz(alpha) Ry(beta) Rz(gamma) for angles (..., 3) -> (..., 3, 3)"""
    alpha, beta, gamma = angles[..., 0], angles[..., 1], angles[..., 2]
    ca, sa = np.cos(alpha), np.sin(alpha)
    cb, sb = np.cos(beta), np.sin(beta)
    cg, sg = np.cos(gamma), np.sin(gamma)
    r = np.empty(angles.shape[:-1] + (3, 3))
    r[..., 0, 0] = ca * cb * cg - sa * sg
    r[..., 0, 1] = -ca * cb * sg - sa * cg
    r[..., 0, 2] = ca * sb
    r[..., 1, 0] = sa * cb * cg + ca * sg
    r[..., 1, 1] = -sa * cb * sg + ca * cg
    r[..., 1, 2] = sa * sb
    r[..., 2, 0] = -sb * cg
    r[..., 2, 1] = sb * sg
    r[..., 2, 2] = cb
    return r


def angles_from_rotation(rot: np.ndarray) -> np.ndarray:
    """
    z-y-z Euler angles of a proper rotation, the inverse of rotation_zyz

    At the gimbal lock (beta = 0 or pi) gamma is set to zero.
    """
    rot = np.asarray(rot, dtype=float)
    beta = float(np.arccos(np.clip(rot[2, 2], -1.0, 1.0)))
    if np.sin(beta) > EULER_LOCK_TOL:
        alpha = np.arctan2(rot[1, 2], rot[0, 2])
        gamma = np.arctan2(rot[2, 1], -rot[2, 0])
    elif rot[2, 2] > 0:
        alpha, gamma = np.arctan2(rot[1, 0], rot[0, 0]), 0.0
    else:
        alpha, gamma = np.arctan2(-rot[1, 0], -rot[0, 0]), 0.0
    return np.array([alpha, beta, gamma])


def settings_from_angles(params) -> SettingsPair:
    """Six Euler angles (A: zyz, B: zyz) -> settings from the first two rotation columns"""
    params = np.asarray(params, dtype=float)
    rot_a = rotation_zyz(params[:3])
    rot_b = rotation_zyz(params[3:])
    return SettingsPair(
        OrthogonalPair(Direction.from_vector(rot_a[:, 0]), Direction.from_vector(rot_a[:, 1])),
        OrthogonalPair(Direction.from_vector(rot_b[:, 0]), Direction.from_vector(rot_b[:, 1])),
    )


def _proper_rotation(c1: np.ndarray, c2: np.ndarray) -> np.ndarray:
    return np.stack([c1, c2, np.cross(c1, c2)], axis=-1)


def _singular_value_rotations(t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Rotations whose first two columns attain sqrt2 (s1 + s2)

    A takes the two leading left singular vectors of T. B's pair is
    (c1 +- c2) / sqrt2 built from the two leading right singular vectors,
    which turns a1.T(b1 + b2) + a2.T(b1 - b2) into sqrt2 (s1 + s2).
    """
    u, _, vt = np.linalg.svd(t)
    c1, c2 = vt[0], vt[1]
    rot_a = _proper_rotation(u[:, 0], u[:, 1])
    rot_b = _proper_rotation((c1 + c2) / SQRT2, (c1 - c2) / SQRT2)
    return rot_a, rot_b


def singular_value_max(rho: DensityMatrix) -> float:
    """
    Maximum of Tr(B rho) over orthogonal settings: sqrt2 (s1 + s2)

    s1 >= s2 are the two largest singular values of the correlation matrix.
    Never exceeds horodecki_max, which drops the orthogonality constraint.
    """
    s = np.linalg.svd(correlation_matrix(rho), compute_uv=False)
    return float(SQRT2 * (s[0] + s[1]))


def _angle_objective(t: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Bell expectation a1.T(b1 + b2) + a2.T(b1 - b2) as a function of angle vectors (m, 6)"""
    def objective(params: np.ndarray) -> np.ndarray:
        rot_a = rotation_zyz(params[:, :3])
        rot_b = rotation_zyz(params[:, 3:])
        a1, a2 = rot_a[:, :, 0], rot_a[:, :, 1]
        b1, b2 = rot_b[:, :, 0], rot_b[:, :, 1]
        # einsum keeps every row independent of the batch it is evaluated in
        t_sum = np.einsum("ij,mj->mi", t, b1 + b2)
        t_diff = np.einsum("ij,mj->mi", t, b1 - b2)
        return np.einsum("mi,mi->m", a1, t_sum) + np.einsum("mi,mi->m", a2, t_diff)
    return objective


def _coordinate_step(objective, params: np.ndarray, k: int) -> np.ndarray:
    """
    Maximize every row of ``params`` (m, 6) along angle k

    With the other angles fixed the objective is c0 + c1 cos(theta) + c2 sin(theta),
    so three evaluations give the exact maximizer atan2(c2, c1).
    """
    m = params.shape[0]
    probes = np.repeat(params[None, :, :], len(_STEP_ANGLES), axis=0)
    probes[:, :, k] = _STEP_ANGLES[:, None]
    f0, f90, f180 = objective(probes.reshape(-1, 6)).reshape(len(_STEP_ANGLES), m)
    updated = params.copy()
    updated[:, k] = np.arctan2(f90 - 0.5 * (f0 + f180), 0.5 * (f0 - f180))
    return updated


def _climb(objective, params: np.ndarray, iterations: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Coordinate-wise ascent of every row of ``params`` (m, 6), all rows at once

    A row stops once a sweep gains at most SWEEP_GAIN_TOL relative to its
    value; rows never influence each other.
    """
    params = params.copy()
    values = objective(params)
    active = np.ones(len(params), dtype=bool)
    for sweep in range(iterations):
        rows = np.flatnonzero(active)
        if rows.size == 0:
            break
        before = values[rows].copy()
        for k in range(6):
            trial = _coordinate_step(objective, params[rows], k)
            trial_values = objective(trial)
            improved = trial_values > values[rows]
            params[rows[improved]] = trial[improved]
            values[rows[improved]] = trial_values[improved]
        gain = values[rows] - before
        active[rows] = gain > SWEEP_GAIN_TOL * np.maximum(1.0, np.abs(values[rows]))
    return params, values


def max_over_orthogonal_settings(
    rho: DensityMatrix,
    restarts: int = 8,
    iterations: int = 200,
    seed: int = 0,
) -> Tuple[float, SettingsPair]:
    """
    Maximize Tr(B rho) over all orthogonal settings of both parties

    Each party's pair is the first two columns of a z-y-z Euler rotation.
    Restart 0 starts from the singular-vector settings of the correlation
    matrix; restart r >= 1 starts from uniform angles drawn from
    split(seed, r). Every restart then runs exact coordinate-wise ascent over
    the six angles for up to ``iterations`` sweeps. The returned value is the
    expectation actually achieved at the returned settings, so it is a
    certified lower bound on the true maximum. Adding restarts or iterations
    never lowers it.

    Args:
        rho: State to evaluate
        restarts: Number of starting points
        iterations: Maximum sweeps over the six angles per restart
        seed: Seed of the random restart streams

    Returns:
        Tuple of (value, settings)
    """
    if restarts < 1 or iterations < 0:
        raise ConfigInvalid("optimizer budget needs restarts ≥ 1 and iterations ≥ 0")

    t = correlation_matrix(rho)
    starts = np.empty((restarts, 6))
    rot_a, rot_b = _singular_value_rotations(t)
    starts[0, :3] = angles_from_rotation(rot_a)
    starts[0, 3:] = angles_from_rotation(rot_b)
    for r in range(1, restarts):
        starts[r] = 2.0 * np.pi * SeededRng.split(seed, r).uniform(6)

    params, internal = _climb(_angle_objective(t), starts, iterations)

    best_value = -np.inf
    best_settings = None
    for r in range(restarts):
        settings = settings_from_angles(params[r])
        value = expectation(bell_operator(settings), rho)
        logger.debug(f"Restart {r}: value {value:.15g} (internal {internal[r]:.15g})")
        if value > best_value:
            best_value, best_settings = value, settings

    return best_value, best_settings
