"""Seeded sampling of complex Gaussian matrices and induced random states.

Every sample in a Monte Carlo run draws from its own counter-based substream,
identified by ``(seed, stream_index)``.  The substream is a Philox generator
keyed by the seed whose counter starts at a block reserved for the stream
index, so draws depend only on the index and never on the order in which
samples are evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GuardError, InternalError

__all__ = [
    "MAX_ENTRIES",
    "RngStream",
    "derive_seed",
    "sample_complex_gaussian",
    "sample_induced_density",
    "sample_haar_pure",
    "partial_trace",
    "sample_cross_product",
]

#: Largest number of complex entries a single sampled matrix may hold.
MAX_ENTRIES = 2**26

_U64 = 2**64


@dataclass(frozen=True)
class RngStream:
    """Identifier of one reproducible random substream.

    ``family`` separates otherwise identical index ranges that must not share
    draws (for example the two sampling routes compared by cross-validation).
    """

    seed: int
    stream_index: int = 0
    family: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_index", "family"):
            value = getattr(self, name)
            if not 0 <= value < _U64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def generator(self) -> np.random.Generator:
        # Stream i owns the counter block starting at i * 2**192.
        bitgen = np.random.Philox(key=[self.seed, self.family], counter=[0, 0, 0, self.stream_index])
        return np.random.Generator(bitgen)


def derive_seed(seed: int, *words: int) -> int:
    """Hash ``seed`` together with extra integers into a fresh 64-bit seed."""
    ss = np.random.SeedSequence([seed, *words])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _as_generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def _check_dims(**dims: int) -> None:
    for name, value in dims.items():
        if int(value) != value or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value!r}")


def sample_complex_gaussian(rows: int, cols: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Matrix of i.i.d. complex normals with unit-variance real and imaginary parts.

    Consumes exactly ``2 * rows * cols`` standard normals: all real parts first,
    then all imaginary parts, both in row-major order.
    """
    _check_dims(rows=rows, cols=cols)
    if rows * cols > MAX_ENTRIES:
        raise GuardError(f"{rows}x{cols} matrix exceeds the {MAX_ENTRIES}-entry guard")
    gen = _as_generator(rng)
    parts = gen.standard_normal((2, rows, cols))
    return parts[0] + 1j * parts[1]


def sample_induced_density(A: int, K: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Random 2A x 2A density matrix from the induced measure with ancilla dimension K.

    Built as ``G G^dagger / Tr(G G^dagger)`` for a 2A x K complex Gaussian ``G``.
    """
    _check_dims(A=A, K=K)
    g = sample_complex_gaussian(2 * A, K, rng)
    w = g @ g.conj().T
    tr = np.trace(w).real
    if not tr > 0.0:
        raise InternalError("sampled Gaussian matrix has zero norm")
    rho = w / tr
    return 0.5 * (rho + rho.conj().T)


def sample_haar_pure(dim: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Uniformly random unit vector in C^dim."""
    _check_dims(dim=dim)
    v = sample_complex_gaussian(dim, 1, rng)[:, 0]
    return v / np.linalg.norm(v)


def partial_trace(state: np.ndarray, d1: int, d2: int) -> np.ndarray:
    """Reduce a pure state on C^d1 (x) C^d2 to the first factor.

    Amplitude index convention: ``i = i1 * d2 + i2``.
    """
    _check_dims(d1=d1, d2=d2)
    psi = np.asarray(state, dtype=complex)
    if psi.ndim != 1 or psi.shape[0] != d1 * d2:
        raise ValueError(f"state of length {psi.shape} does not factor as {d1} x {d2}")
    m = psi.reshape(d1, d2)
    rho = m @ m.conj().T
    return 0.5 * (rho + rho.conj().T)


def sample_cross_product(A: int, K: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Unnormalized cross block ``mu1 @ mu2^dagger`` of two independent A x K Gaussians."""
    _check_dims(A=A, K=K)
    gen = _as_generator(rng)
    mu1 = sample_complex_gaussian(A, K, gen)
    mu2 = sample_complex_gaussian(A, K, gen)
    return mu1 @ mu2.conj().T
