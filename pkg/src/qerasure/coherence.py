"""Block structure, recoverable coherence and the optimal erasure measurement.

A state of the qubit and its accessible environment is a 2A x 2A density
matrix whose row/column index is ``q * A + i``: the qubit is the slow index.
Its off-diagonal A x A block ``X`` carries all of the coherence that any
measurement of the environment can restore.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InternalError, InvalidStateError, OutcomeImpossibleError

__all__ = [
    "HERMITIAN_TOL",
    "TRACE_TOL",
    "EIG_TOL",
    "MIN_PROBABILITY",
    "BlockDecomposition",
    "MeasurementBasis",
    "ConditionalQubitState",
    "check_density_matrix",
    "decompose_blocks",
    "trace_norm",
    "recoverable_coherence",
    "pure_pair_coherence",
    "optimal_erasure_basis",
    "conditional_qubit_state",
    "average_conditional_coherence",
    "qubit_coherence",
]

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
EIG_TOL = 1e-10
ORTHO_TOL = 1e-10
MIN_PROBABILITY = 1e-14


def check_density_matrix(rho) -> np.ndarray:
    """Return ``rho`` as a complex array, raising if it is not a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] == 0:
        raise InvalidStateError(f"density matrix must be square, got shape {rho.shape}")
    herm_err = np.max(np.abs(rho - rho.conj().T))
    if herm_err > HERMITIAN_TOL:
        raise InvalidStateError(f"not Hermitian (max deviation {herm_err:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace is {tr.real:.15g}, expected 1")
    lam_min = np.linalg.eigvalsh(rho)[0]
    if lam_min < -EIG_TOL:
        raise InvalidStateError(f"not positive semidefinite (min eigenvalue {lam_min:.3e})")
    return rho


@dataclass(frozen=True)
class BlockDecomposition:
    """The qubit-indexed blocks of a 2A x 2A state: ``[[R0, X], [X^dagger, R1]]``."""

    A: int
    R0: np.ndarray
    R1: np.ndarray
    X: np.ndarray

    @property
    def X_dag(self) -> np.ndarray:
        return self.X.conj().T

    def assemble(self) -> np.ndarray:
        return np.block([[self.R0, self.X], [self.X_dag, self.R1]])


@dataclass(frozen=True)
class MeasurementBasis:
    """Orthonormal basis of the accessible environment, stored as matrix columns."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise InvalidStateError(f"basis must be an A x A matrix of columns, got {v.shape}")
        gram_err = np.max(np.abs(v.conj().T @ v - np.eye(v.shape[0])))
        if gram_err > ORTHO_TOL:
            raise InvalidStateError(f"basis vectors not orthonormal (deviation {gram_err:.3e})")
        object.__setattr__(self, "vectors", v)

    @property
    def A(self) -> int:
        return self.vectors.shape[0]

    def __iter__(self):
        return iter(self.vectors.T)

    def __len__(self):
        return self.A


@dataclass(frozen=True)
class ConditionalQubitState:
    probability: float
    rho2: np.ndarray

    @property
    def coherence(self) -> float:
        return qubit_coherence(self.rho2)


def decompose_blocks(rho, A: int) -> BlockDecomposition:
    """Split a 2A x 2A matrix into its four A x A blocks (qubit = slow index)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"expected a square matrix, got shape {rho.shape}")
    dim = rho.shape[0]
    if dim % 2:
        raise InvalidStateError(f"dimension {dim} is odd; no qubit factor")
    if dim != 2 * A:
        raise InvalidStateError(f"dimension {dim} does not match A={A}")
    return BlockDecomposition(A=A, R0=rho[:A, :A], R1=rho[A:, A:], X=rho[:A, A:])


def _require_square(X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {X.shape}")
    return X


def trace_norm(X) -> float:
    """Sum of the singular values of a square matrix."""
    X = _require_square(X)
    return float(np.linalg.svd(X, compute_uv=False).sum())


def recoverable_coherence(rho, A: int) -> float:
    """Largest outcome-averaged qubit coherence reachable by measuring the accessible environment.

    Equals twice the trace norm of the off-diagonal block. Positivity of
    ``rho`` bounds it by 1; a value above ``1 + 1e-10`` means the input slipped
    past validation and raises :class:`InternalError`.
    """
    rho = check_density_matrix(rho)
    blocks = decompose_blocks(rho, A)
    c = 2.0 * trace_norm(blocks.X)
    if c > 1.0 + EIG_TOL:
        raise InternalError(f"recoverable coherence {c!r} exceeds 1")
    return c


def pure_pair_coherence(alpha: complex, beta: complex, overlap: complex) -> float:
    """Coherence ``2|alpha beta* <s0|s1>|`` of the qubit in ``alpha|0,s0> + beta|1,s1>``.

    This is the coherence left after tracing out the environment, before any
    erasure measurement.
    """
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1.0) > 1e-12:
        raise InvalidStateError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")
    if abs(overlap) > 1.0 + 1e-12:
        raise InvalidStateError(f"|overlap| = {abs(overlap)!r} exceeds 1")
    return 2.0 * abs(alpha * np.conj(beta) * overlap)


def optimal_erasure_basis(X) -> MeasurementBasis:
    """Environment basis whose outcomes restore coherence ``2 Tr|X|`` on average.

    With ``X = V S W^dagger`` the polar unitary ``U = V W^dagger`` satisfies
    ``X = U |X|``. In an eigenbasis ``u_j`` of U, ``|<u_j|X|u_j>| = <u_j||X||u_j>``,
    and these sum to ``Tr|X|``. A complex Schur form is used so the eigenvectors
    stay orthonormal when eigenvalues of U are degenerate.
    """
    X = _require_square(X)
    V, _, Wh = np.linalg.svd(X)
    U = V @ Wh
    _, Z = scipy.linalg.schur(U, output="complex")
    return MeasurementBasis(Z)


def conditional_qubit_state(blocks: BlockDecomposition, u) -> ConditionalQubitState:
    u = np.asarray(u, dtype=complex)
    if u.shape != (blocks.A,):
        raise ValueError(f"vector of shape {u.shape} does not match A={blocks.A}")
    if abs(np.linalg.norm(u) - 1.0) > ORTHO_TOL:
        raise InvalidStateError("measurement vector is not normalized")
    uh = u.conj()
    r00 = (uh @ blocks.R0 @ u).real
    r11 = (uh @ blocks.R1 @ u).real
    x01 = uh @ blocks.X @ u
    p = r00 + r11
    if p < MIN_PROBABILITY:
        raise OutcomeImpossibleError(f"outcome probability {p:.3e} is below {MIN_PROBABILITY}")
    rho2 = np.array([[r00, x01], [np.conj(x01), r11]], dtype=complex) / p
    return ConditionalQubitState(probability=float(p), rho2=rho2)


def average_conditional_coherence(rho, A: int, basis: MeasurementBasis) -> float:
    """Outcome-averaged coherence ``sum_j p_j C_j`` for a projective environment measurement."""
    if not isinstance(basis, MeasurementBasis):
        basis = MeasurementBasis(basis)
    rho = check_density_matrix(rho)
    blocks = decompose_blocks(rho, A)
    if basis.A != A:
        raise InvalidStateError(f"basis dimension {basis.A} does not match A={A}")
    Z = basis.vectors
    Zh = Z.conj().T
    p = np.einsum("ij,ji->i", Zh @ (blocks.R0 + blocks.R1), Z).real
    x = np.einsum("ij,ji->i", Zh @ blocks.X, Z)
    # p_j * C_j = 2|<u_j|X|u_j>|; skipping the 1/p_j round trip keeps tiny outcomes exact.
    return float(2.0 * np.abs(x[p >= MIN_PROBABILITY]).sum())


def qubit_coherence(rho2) -> float:
    """Twice the modulus of the off-diagonal element; the transverse Bloch length."""
    rho2 = check_density_matrix(rho2)
    if rho2.shape != (2, 2):
        raise InvalidStateError(f"expected a 2x2 qubit state, got {rho2.shape}")
    return 2.0 * abs(rho2[0, 1])
