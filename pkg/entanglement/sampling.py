"""
Random two-qubit state ensembles

All samplers draw from a SeededRng. Batch samplers return raw arrays for the
Monte Carlo harness; the single-draw functions wrap a batch of one in the
validated qstate types. Within one batch call the Gaussian draws precede the
simplex (exponential) draws.
"""
from dataclasses import dataclass

import numpy as np

from entanglement.bell import Direction, OrthogonalPair, SettingsPair, Triad
from entanglement.errors import InvalidCount
from entanglement.linalg import adjoint
from entanglement.qstate import DensityMatrix, PureState, projectors_batch
from entanglement.rng import SeededRng

__all__ = [
    "SeededRng",
    "SimplexPoint",
    "haar_pure",
    "haar_pure_batch",
    "haar_unitary4",
    "haar_unitary_batch",
    "simplex_uniform",
    "simplex_batch",
    "random_mixed",
    "random_mixed_batch",
    "random_product_pure",
    "random_product_pure_batch",
    "random_separable",
    "random_separable_batch",
    "random_rotation",
    "random_settings",
    "random_triad",
]

DEFAULT_SEPARABLE_TERMS = 8


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    """Non-negative weights summing to one"""
    w: np.ndarray


def _normalize_rows(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def haar_pure_batch(rng: SeededRng, n: int) -> np.ndarray:
    """(n, 4) Haar-random amplitudes: normalized complex Gaussian vectors"""
    return _normalize_rows(rng.complex_normal((n, 4)))


def haar_pure(rng: SeededRng) -> PureState:
    return PureState(haar_pure_batch(rng, 1)[0])


def haar_unitary_batch(rng: SeededRng, n: int, dim: int = 4) -> np.ndarray:
    """
    Haar-random unitaries from QR of complex Ginibre matrices

    Each column of Q is multiplied by the phase of the matching diagonal
    entry of R so the result is exactly Haar distributed.
    """
    z = rng.complex_normal((n, dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    phases = d / np.abs(d)
    return q * phases[:, None, :]


def haar_unitary4(rng: SeededRng) -> np.ndarray:
    return haar_unitary_batch(rng, 1)[0]


def simplex_batch(rng: SeededRng, n: int, k: int = 4) -> np.ndarray:
    """(n, k) points uniform on the standard simplex via normalized exponentials"""
    e = rng.exponential((n, k))
    return e / np.sum(e, axis=-1, keepdims=True)


def simplex_uniform(rng: SeededRng) -> SimplexPoint:
    return SimplexPoint(simplex_batch(rng, 1)[0])


def random_mixed_batch(rng: SeededRng, n: int) -> np.ndarray:
    """(n, 4, 4) states U diag(w) U^dagger with Haar U and uniform-simplex w"""
    u = haar_unitary_batch(rng, n)
    w = simplex_batch(rng, n)
    return (u * w[:, None, :]) @ adjoint(u)


def random_mixed(rng: SeededRng) -> DensityMatrix:
    """
    Random mixed state from the product measure Haar unitary x uniform spectrum

    About 36.4% of the states drawn this way are entangled.
    """
    return DensityMatrix(random_mixed_batch(rng, 1)[0])


def random_product_pure_batch(rng: SeededRng, n: int) -> np.ndarray:
    """(n, 4) amplitudes of products of two independent Haar qubit states"""
    qa = _normalize_rows(rng.complex_normal((n, 2)))
    qb = _normalize_rows(rng.complex_normal((n, 2)))
    return np.einsum("ni,nj->nij", qa, qb).reshape(n, 4)


def random_product_pure(rng: SeededRng) -> PureState:
    return PureState(random_product_pure_batch(rng, 1)[0])


def random_separable_batch(rng: SeededRng, n: int, k: int = DEFAULT_SEPARABLE_TERMS) -> np.ndarray:
    """(n, 4, 4) convex mixtures of k product pure states with uniform-simplex weights"""
    if k < 1:
        raise InvalidCount(f"Separable mixtures need at least one term, got {k}")
    psi = random_product_pure_batch(rng, n * k).reshape(n, k, 4)
    weights = simplex_batch(rng, n, k)
    return np.einsum("nk,nki,nkj->nij", weights, psi, np.conj(psi))


def random_separable(rng: SeededRng, k: int = DEFAULT_SEPARABLE_TERMS) -> DensityMatrix:
    """
    Separable test state: mixture of k random product states

    This is a harness for bound checks, not a uniform sample of the
    separable set.

    Raises:
        InvalidCount: if k < 1
    """
    return DensityMatrix(random_separable_batch(rng, 1, k)[0])


def random_rotation(rng: SeededRng) -> np.ndarray:
    """Uniformly random proper rotation (3x3) from QR of a real Gaussian matrix"""
    q, r = np.linalg.qr(rng.normal((3, 3)))
    q = q * np.sign(np.diagonal(r))[None, :]
    if np.linalg.det(q) < 0:
        q[:, 2] = -q[:, 2]
    return q


def _pair_from_rotation(rot: np.ndarray) -> OrthogonalPair:
    return OrthogonalPair(Direction.from_vector(rot[:, 0]), Direction.from_vector(rot[:, 1]))


def random_settings(rng: SeededRng) -> SettingsPair:
    """Independent uniformly random orthogonal pairs for both parties"""
    return SettingsPair(_pair_from_rotation(random_rotation(rng)), _pair_from_rotation(random_rotation(rng)))


def random_triad(rng: SeededRng) -> Triad:
    rot = random_rotation(rng)
    return Triad(*(Direction.from_vector(rot[:, i]) for i in range(3)))
