"""
Fixed-size complex matrix kernel for two-qubit computations

Matrices are numpy complex128 arrays of shape (2, 2) or (4, 4), optionally
stacked along leading axes. Plain numpy operators cover matmul (``@``),
addition and scaling; this module adds the pieces numpy does not give us in
the exact form we need: a batched cyclic Jacobi eigensolver for Hermitian
4x4 matrices and Hermitian-aware trace/adjoint helpers.
"""
from dataclasses import dataclass
from itertools import combinations
from typing import Tuple
import logging

import numpy as np

from entanglement.errors import NotHermitian

logger = logging.getLogger(__name__)

CMat2 = np.ndarray
CMat4 = np.ndarray

HERMITIAN_TOL = 1e-10
JACOBI_TOL = 1e-13
MAX_SWEEPS = 50

_PAIRS = tuple(combinations(range(4), 2))
_OFF_DIAGONAL = ~np.eye(4, dtype=bool)


@dataclass(frozen=True)
class EigenResult4:
    """
    Eigendecomposition of a Hermitian 4x4 matrix (or a stack of them)

    values: real eigenvalues, ascending, shape (..., 4)
    vectors: orthonormal eigenvectors as columns, shape (..., 4, 4);
             column k belongs to values[..., k]
    """
    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """Rebuild sum_k lambda_k v_k v_k^dagger"""
        return (self.vectors * self.values[..., None, :]) @ adjoint(self.vectors)


def as_cmat(m, dim: int) -> np.ndarray:
    """
    Convert input to a complex128 array with trailing shape (dim, dim)

    Raises:
        ValueError: on wrong shape or non-finite entries
    """
    arr = np.asarray(m, dtype=np.complex128)
    if arr.shape[-2:] != (dim, dim):
        raise ValueError(f"Expected trailing shape ({dim}, {dim}), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("Matrix contains NaN or Inf entries")
    return arr


def kron(a: CMat2, b: CMat2) -> CMat4:
    """Kronecker product with the A-party factor on the left (slowest index)"""
    return np.kron(as_cmat(a, 2), as_cmat(b, 2))


def adjoint(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes"""
    return np.conj(np.swapaxes(m, -1, -2))


def trace(m: np.ndarray) -> np.ndarray:
    return np.trace(m, axis1=-2, axis2=-1)


def hermitian_trace(m: np.ndarray, tol: float = 1e-12):
    """
    Trace of a Hermitian matrix as a real number

    The imaginary part must not exceed ``tol`` in magnitude; a larger
    residue means the input was not Hermitian.
    """
    t = trace(m)
    if np.any(np.abs(np.imag(t)) > tol):
        raise NotHermitian(f"Trace has imaginary part {np.max(np.abs(np.imag(t))):.3e}")
    return np.real(t)


def frobenius_norm(m: np.ndarray) -> np.ndarray:
    return np.linalg.norm(m, axis=(-2, -1))


def conjugate(u: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Return u m u^dagger"""
    return u @ m @ adjoint(u)


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    """Relative check ||m - m^dagger||_F <= tol * ||m||_F for every matrix in the stack"""
    return bool(np.all(frobenius_norm(m - adjoint(m)) <= tol * frobenius_norm(m)))


def _off_diagonal_norm(a: np.ndarray) -> np.ndarray:
    # summed directly: ||a||^2 - sum(diag^2) cancels down to sqrt(eps) * ||a||
    return np.sqrt(np.sum(np.abs(a[..., _OFF_DIAGONAL]) ** 2, axis=-1))


def _jacobi_rotation(a: np.ndarray, p: int, q: int) -> np.ndarray:
    """
    Build the unitary G (one per stacked matrix) with (G^dagger A G)[p, q] = 0

    G = D R where D removes the phase of A[p, q] and R is the real plane
    rotation of the symmetric 2x2 problem. Rotation angles stay in
    (-pi/4, pi/4] so sweeps converge quadratically.
    """
    apq = a[:, p, q]
    beta = np.abs(apq)
    phase = np.exp(-1j * np.angle(apq))
    alpha = a[:, p, p].real
    gamma = a[:, q, q].real

    theta = 0.5 * np.arctan2(2.0 * beta, gamma - alpha)
    theta = np.where(theta > np.pi / 4, theta - np.pi / 2, theta)
    theta = np.where(beta > 0.0, theta, 0.0)
    c = np.cos(theta)
    s = np.sin(theta)

    g = np.zeros_like(a)
    g[:, range(4), range(4)] = 1.0
    g[:, p, p] = c
    g[:, p, q] = s
    g[:, q, p] = -s * phase
    g[:, q, q] = c * phase
    return g


def _jacobi_diagonalize(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    a = a.copy()
    v = np.zeros_like(a)
    v[:, range(4), range(4)] = 1.0
    threshold = JACOBI_TOL * frobenius_norm(a)
    # indices of the matrices still being rotated
    active = np.arange(a.shape[0])

    for sweep in range(MAX_SWEEPS):
        active = active[_off_diagonal_norm(a[active]) > threshold[active]]
        if active.size == 0:
            break
        sub_a = a[active]
        sub_v = v[active]
        for p, q in _PAIRS:
            g = _jacobi_rotation(sub_a, p, q)
            sub_a = adjoint(g) @ sub_a @ g
            sub_v = sub_v @ g
        a[active] = sub_a
        v[active] = sub_v
    else:
        stalled = np.count_nonzero(_off_diagonal_norm(a[active]) > threshold[active])
        if stalled:
            logger.warning(f"Jacobi eigensolver hit the {MAX_SWEEPS}-sweep cap for {stalled} matrices")

    return np.real(np.diagonal(a, axis1=-2, axis2=-1)), v


def hermitian_eigen(m: CMat4, tol: float = HERMITIAN_TOL) -> EigenResult4:
    """
    Eigendecomposition of Hermitian 4x4 matrices by cyclic Jacobi rotations

    Accepts a single (4, 4) matrix or any stack (..., 4, 4). Sweeps run until
    the off-diagonal Frobenius norm is at most 1e-13 * ||m||_F, with a hard
    cap of 50 sweeps. Vectors inside a degenerate cluster come out in whatever
    orthonormal basis the rotations produce.

    Args:
        m: Hermitian matrix or stack of matrices
        tol: Relative Hermiticity tolerance

    Returns:
        EigenResult4 with ascending eigenvalues

    Raises:
        NotHermitian: if ||m - m^dagger||_F > tol * ||m||_F for any matrix
    """
    arr = as_cmat(m, 4)
    if not is_hermitian(arr, tol):
        raise NotHermitian("Matrix is not Hermitian within tolerance")

    batch_shape = arr.shape[:-2]
    flat = arr.reshape(-1, 4, 4)
    # exact Hermitian symmetrization so round-off in the input does not leak into the rotations
    flat = 0.5 * (flat + adjoint(flat))

    values, vectors = _jacobi_diagonalize(flat)
    order = np.argsort(values, axis=-1, kind="stable")
    values = np.take_along_axis(values, order, axis=-1)
    vectors = np.take_along_axis(vectors, order[:, None, :], axis=-1)

    return EigenResult4(
        values=values.reshape(batch_shape + (4,)),
        vectors=vectors.reshape(batch_shape + (4, 4)),
    )


def hermitian_eigvals(m: CMat4, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Ascending eigenvalues only; see hermitian_eigen"""
    return hermitian_eigen(m, tol).values
