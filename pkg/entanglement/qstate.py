"""
Two-qubit states and entanglement quantities

Basis order is |00>, |01>, |10>, |11> everywhere, with party A as the left
tensor factor. Each quantity has a ``_batch`` form working on raw (n, 4, 4)
arrays; the single-state forms take validated DensityMatrix objects.
"""
from dataclasses import dataclass
from typing import Union
import logging

import numpy as np

from entanglement.errors import InvalidDensityMatrix, NotHermitian, NotNormalized
from entanglement.linalg import (
    CMat4,
    adjoint,
    as_cmat,
    conjugate,
    frobenius_norm,
    hermitian_eigvals,
    is_hermitian,
    kron,
)

logger = logging.getLogger(__name__)

STATE_TOL = 1e-10
ENTANGLEMENT_TOL = 1e-10

SQRT_HALF = np.sqrt(0.5)

# Magic basis columns: |Phi+>, -i|Phi->, |Psi->, -i|Psi+>.
# Every maximally entangled state is a real unit vector in this basis, up to a global phase.
MAGIC_BASIS = SQRT_HALF * np.array(
    [
        [1.0, -1j, 0.0, 0.0],
        [0.0, 0.0, 1.0, -1j],
        [0.0, 0.0, -1.0, -1j],
        [1.0, 1j, 0.0, 0.0],
    ],
    dtype=np.complex128,
)


@dataclass(frozen=True, eq=False)
class PureState:
    """Four amplitudes in the computational basis"""
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(4)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def normalized(cls, amplitudes) -> "PureState":
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(4)
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise NotNormalized("Zero vector cannot be normalized")
        return cls(amps / norm)


@dataclass(frozen=True)
class DensityMatrix:
    """
    Validated two-qubit density matrix

    Hermitian within 1e-10, unit trace within 1e-10 and smallest eigenvalue
    at least -1e-10. Tiny negative eigenvalues from round-off are accepted
    as they are.
    """
    mat: CMat4

    def __post_init__(self):
        try:
            mat = as_cmat(self.mat, 4)
        except ValueError as e:
            raise InvalidDensityMatrix(str(e)) from e
        if mat.shape != (4, 4):
            raise InvalidDensityMatrix(f"Expected a single 4x4 matrix, got shape {mat.shape}")
        if not is_hermitian(mat, STATE_TOL):
            raise InvalidDensityMatrix("Density matrix is not Hermitian")
        tr = np.trace(mat)
        if abs(tr - 1.0) > STATE_TOL:
            raise InvalidDensityMatrix(f"Density matrix trace is {tr.real:.12g}, expected 1")
        smallest = hermitian_eigvals(mat, STATE_TOL)[0]
        if smallest < -STATE_TOL:
            raise InvalidDensityMatrix(f"Density matrix has negative eigenvalue {smallest:.3e}")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return np.array_equal(self.mat, other.mat)

    __hash__ = None


def from_pure(psi: PureState) -> DensityMatrix:
    """
    Rank-1 projector |psi><psi|

    Raises:
        NotNormalized: if ||psi|| deviates from 1 by more than 1e-10
    """
    if abs(psi.norm - 1.0) > STATE_TOL:
        raise NotNormalized(f"State norm is {psi.norm:.12g}, expected 1")
    return DensityMatrix(np.outer(psi.amplitudes, np.conj(psi.amplitudes)))


def projectors_batch(amplitudes: np.ndarray) -> np.ndarray:
    """(n, 4) amplitudes -> (n, 4, 4) projectors"""
    return amplitudes[:, :, None] * np.conj(amplitudes[:, None, :])


def as_density(state: Union[DensityMatrix, PureState]) -> DensityMatrix:
    if isinstance(state, PureState):
        return from_pure(state)
    return state


# --- standard states ---------------------------------------------------------

def bell_state(name: str = "phi+") -> PureState:
    """One of the four Bell states: phi+, phi-, psi+, psi-"""
    amps = {
        "phi+": [1.0, 0.0, 0.0, 1.0],
        "phi-": [1.0, 0.0, 0.0, -1.0],
        "psi+": [0.0, 1.0, 1.0, 0.0],
        "psi-": [0.0, 1.0, -1.0, 0.0],
    }
    if name not in amps:
        raise ValueError(f"Unknown Bell state: {name}")
    return PureState(SQRT_HALF * np.array(amps[name], dtype=np.complex128))


def maximally_mixed() -> DensityMatrix:
    return DensityMatrix(np.eye(4, dtype=np.complex128) / 4.0)


def werner_state(p: float) -> DensityMatrix:
    """p |Phi+><Phi+| + (1 - p) I/4, valid for -1/3 <= p <= 1"""
    phi = from_pure(bell_state("phi+")).mat
    return DensityMatrix(p * phi + (1.0 - p) * np.eye(4) / 4.0)


def product_state(a, b) -> PureState:
    """Normalized tensor product of two single-qubit amplitude vectors"""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    return PureState.normalized(np.kron(a / np.linalg.norm(a), b / np.linalg.norm(b)))


def local_unitary(rho: DensityMatrix, u_a: np.ndarray, u_b: np.ndarray) -> DensityMatrix:
    """(U_A x U_B) rho (U_A x U_B)^dagger"""
    return DensityMatrix(conjugate(kron(u_a, u_b), rho.mat))


def reduced_state(rho: DensityMatrix, party: str = "a") -> np.ndarray:
    """Single-qubit marginal obtained by tracing out the other party"""
    t = rho.mat.reshape(2, 2, 2, 2)
    if party == "a":
        return np.einsum("ijkj->ik", t)
    if party == "b":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"Unknown party: {party}")


def purity(m: np.ndarray) -> float:
    return float(np.real(np.trace(m @ m)))


# --- partial transpose and negativity ----------------------------------------

def partial_transpose_batch(mats: np.ndarray) -> np.ndarray:
    """Transpose on the B index: entry ((i,j),(k,l)) -> ((i,l),(k,j))"""
    shape = mats.shape
    t = mats.reshape(shape[:-2] + (2, 2, 2, 2))
    return np.swapaxes(t, -3, -1).reshape(shape)


def partial_transpose(rho: DensityMatrix) -> CMat4:
    """
    Partial transpose of rho on party B

    The result is Hermitian with unit trace but may be indefinite; a negative
    eigenvalue signals entanglement.
    """
    return partial_transpose_batch(np.array(rho.mat))


def negativity_raw_batch(mats: np.ndarray) -> np.ndarray:
    """Twice the absolute sum of negative partial-transpose eigenvalues, unclamped"""
    eigs = hermitian_eigvals(partial_transpose_batch(mats), STATE_TOL)
    return 2.0 * np.sum(np.maximum(0.0, -eigs), axis=-1)


def negativity_batch(mats: np.ndarray) -> np.ndarray:
    return np.clip(negativity_raw_batch(mats), 0.0, 1.0)


def negativity(rho: DensityMatrix) -> float:
    """
    Negativity N = 2 * sum_k max(0, -lambda_k) over partial-transpose eigenvalues

    Clamped to [0, 1]; N = 1 for maximally entangled states and N = 0
    exactly for separable two-qubit states.
    """
    raw = float(negativity_raw_batch(rho.mat[None])[0])
    if raw > 1.0 + 1e-12:
        logger.debug(f"Raw negativity {raw:.15g} exceeds 1, clamping")
    return min(max(raw, 0.0), 1.0)


def is_entangled(rho: DensityMatrix, tol: float = ENTANGLEMENT_TOL) -> bool:
    """PPT test; exact for two qubits"""
    return negativity(rho) > tol


# --- fully entangled fraction ------------------------------------------------

def fully_entangled_fraction_batch(mats: np.ndarray) -> np.ndarray:
    """Largest eigenvalue of Re(M^dagger rho M) with M the magic basis"""
    in_magic = adjoint(MAGIC_BASIS) @ mats @ MAGIC_BASIS
    real_part = np.real(in_magic).astype(np.complex128)
    # the real part of a Hermitian matrix is symmetric; symmetrize away round-off
    real_part = 0.5 * (real_part + np.swapaxes(real_part, -1, -2))
    return hermitian_eigvals(real_part, STATE_TOL)[..., -1]


def fully_entangled_fraction(rho: DensityMatrix) -> float:
    """
    Maximal overlap of rho with a maximally entangled state under local unitaries

    Lies in [1/4, 1] for every two-qubit state.
    """
    return float(fully_entangled_fraction_batch(rho.mat[None])[0])


def fidelity_negativity_slack_batch(mats: np.ndarray) -> np.ndarray:
    return (1.0 + negativity_batch(mats)) / 2.0 - fully_entangled_fraction_batch(mats)


def fidelity_negativity_slack(rho: DensityMatrix) -> float:
    """(1 + N) / 2 - F, never below -1e-9 for a valid state"""
    return (1.0 + negativity(rho)) / 2.0 - fully_entangled_fraction(rho)


def validate_batch(mats: np.ndarray, tol: float = STATE_TOL) -> np.ndarray:
    """Boolean mask of stacked matrices satisfying the DensityMatrix invariants"""
    hermitian = frobenius_norm(mats - adjoint(mats)) <= tol * frobenius_norm(mats)
    unit_trace = np.abs(np.trace(mats, axis1=-2, axis2=-1) - 1.0) <= tol
    try:
        psd = hermitian_eigvals(mats, tol)[..., 0] >= -tol
    except NotHermitian:
        return np.zeros(mats.shape[:-2], dtype=bool)
    return hermitian & unit_trace & psd
