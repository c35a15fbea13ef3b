"""Exact and asymptotic ensemble-average recoverable coherence.

The average over induced states of dimension 2A with ancilla dimension K is
``m / (2K)``, where ``m`` is the order-1/2 moment of the eigenvalue density of
``M^dagger M`` for a product ``M`` of two independent A x K complex Gaussian
matrices.  The moment is a terminating 4F3 series at unit argument.  Writing
``c(n) = binom(2n, n) / 4**n`` and using ``Gamma(1/2 - n) = (-4)**n n! sqrt(pi) / (2n)!``
the Gamma-function prefactor collapses to ``4 pi A K c(A)**2 c(K)``, so

    m = 4 pi A K c(A)^2 c(K) * sum_l t_l,

    t_l = (1/2)_l (1-A)_l^2 (1-K)_l / ((1/2-A)_l^2 (1/2-K)_l l!),   l < min(A, K),

with every ``t_l > 0``.  Consecutive terms differ by a rational factor, which
is how the sum is accumulated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

from .errors import GuardError, InternalError, UnsupportedCoefficientError

__all__ = [
    "MAX_TERMS",
    "MeanCoherenceResult",
    "central_binomial_ratio",
    "half_moment",
    "half_moment_over_pi_exact",
    "mean_coherence",
    "mean_coherence_closed_form",
    "high_K_asymptote",
    "HIGH_K_COEFFICIENTS",
    "linear_approximation",
    "qubit_partition_mean",
]

#: Largest min(A, K) for which the terminating series is summed.
MAX_TERMS = 2**14

Method = Literal["exact", "linear-asymptote", "high-K-asymptote", "below-resolution"]

_SQRT_PI = math.sqrt(math.pi)

HIGH_K_COEFFICIENTS = {
    1: _SQRT_PI / 2,
    2: 11 * _SQRT_PI / 16,
    3: 107 * _SQRT_PI / 128,
}


@dataclass(frozen=True)
class MeanCoherenceResult:
    value: float
    method: Method
    terms_summed: int | None = None
    note: str | None = None

    def __float__(self):
        return self.value


def _check_positive(**dims: int) -> None:
    for name, value in dims.items():
        if isinstance(value, bool) or int(value) != value or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value!r}")


def central_binomial_ratio(n: int) -> float:
    """``binom(2n, n) / 4**n`` for any non-negative integer n, including huge ones."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n <= MAX_TERMS:
        return math.exp(math.fsum(math.log1p(-0.5 / j) for j in range(1, n + 1)))
    # Gamma(n + 1/2) / (sqrt(pi) Gamma(n + 1)); truncation error ~ n**-5.
    x = 1.0 / n
    series = 1 - x / 8 + x**2 / 128 + 5 * x**3 / 1024 - 21 * x**4 / 32768
    return series / math.sqrt(math.pi * n)


def _central_binomial_ratio_exact(n: int) -> Fraction:
    return Fraction(math.comb(2 * n, n), 4**n)


def _series(A: int, K: int) -> float:
    """Sum of the strictly positive terms t_l, accumulated by term ratios."""
    terms = min(A, K)
    t = 1.0
    acc = [t]
    for l in range(terms - 1):
        ra = 1.0 + 0.5 / (0.5 - A + l)  # (1-A+l)/(1/2-A+l)
        rk = 1.0 + 0.5 / (0.5 - K + l)  # (1-K+l)/(1/2-K+l)
        t *= (0.5 + l) / (l + 1) * ra * ra * rk
        if not t > 0.0:
            raise InternalError(f"non-positive series term at l={l + 1} for A={A}, K={K}")
        acc.append(t)
    return math.fsum(acc)


def half_moment(A: int, K: int) -> float:
    """Order-1/2 moment ``m`` with ``<Tr|mu1 mu2^dagger|> = A m`` for A x K Gaussians.

    Raises :class:`GuardError` when ``min(A, K)`` exceeds :data:`MAX_TERMS`.
    """
    _check_positive(A=A, K=K)
    if min(A, K) > MAX_TERMS:
        raise GuardError(f"min(A, K) = {min(A, K)} exceeds the {MAX_TERMS}-term guard; use asymptotics")
    cA = central_binomial_ratio(A)
    prefactor = 4.0 * math.pi * float(A) * float(K) * cA * cA * central_binomial_ratio(K)
    return prefactor * _series(A, K)


def half_moment_over_pi_exact(A: int, K: int) -> Fraction:
    """``m / pi`` as an exact rational; for cross-checking the float path at small sizes."""
    _check_positive(A=A, K=K)
    if min(A, K) > MAX_TERMS:
        raise GuardError(f"min(A, K) = {min(A, K)} exceeds the {MAX_TERMS}-term guard")
    t = Fraction(1)
    total = Fraction(1)
    half = Fraction(1, 2)
    for l in range(min(A, K) - 1):
        t *= (half + l) * (1 - A + l) ** 2 * (1 - K + l) / ((half - A + l) ** 2 * (half - K + l) * (l + 1))
        if t <= 0:
            raise InternalError(f"non-positive series term at l={l + 1}")
        total += t
    cA = _central_binomial_ratio_exact(A)
    return 4 * A * K * cA * cA * _central_binomial_ratio_exact(K) * total


def linear_approximation(A: int, K: int) -> float:
    """Small-K law ``1 - K/(4A)``; accurate for K <= A."""
    if A < 1 or K < 0:
        raise ValueError(f"need A >= 1 and K >= 0, got A={A}, K={K}")
    return 1.0 - K / (4 * A)


def high_K_asymptote(A: int, K: int) -> float:
    """Leading large-K behaviour ``c_A / sqrt(K)``, known only for A in {1, 2, 3}.

    Not a probability bound: for small K the value can exceed 1.
    """
    _check_positive(K=K)
    try:
        coefficient = HIGH_K_COEFFICIENTS[A]
    except KeyError:
        raise UnsupportedCoefficientError(f"no high-K coefficient is available for A={A}") from None
    return coefficient / math.sqrt(K)


def mean_coherence_closed_form(A: int, K: int) -> float:
    """Closed forms for A = 1, 2; A = 3 falls back to the series.

    The Gamma functions at negative half-integers are eliminated, leaving
    ``(pi/2) c(K)`` for A = 1 and ``pi (22K - 13) c(K) / (16 (2K - 1))`` for A = 2.
    """
    _check_positive(K=K)
    if A == 1:
        return 0.5 * math.pi * central_binomial_ratio(K)
    if A == 2:
        return math.pi * (22 * K - 13) * central_binomial_ratio(K) / (16 * (2 * K - 1))
    if A == 3:
        return half_moment(3, K) / (2 * K)
    raise UnsupportedCoefficientError(f"no closed form for A={A}")


def mean_coherence(A: int, K: int) -> MeanCoherenceResult:
    _check_positive(A=A, K=K)
    if min(A, K) <= MAX_TERMS:
        value = half_moment(A, K) / (2 * K)
        if value > 1.0 + 1e-12:
            raise InternalError(f"mean coherence {value!r} exceeds 1 at A={A}, K={K}")
        return MeanCoherenceResult(value, "exact", terms_summed=min(A, K))
    if A >= K:
        return MeanCoherenceResult(linear_approximation(A, K), "linear-asymptote")
    return MeanCoherenceResult(
        0.0,
        "below-resolution",
        note="A < K beyond the exact-sum guard; the mean decays like O(1/sqrt(K))",
    )


def qubit_partition_mean(n: int, a: int) -> MeanCoherenceResult:
    """Mean coherence with ``a`` of ``n`` environment qubits accessible (A = 2**a, K = 2**(n-a))."""
    if n < 0 or not 0 <= a <= n:
        raise ValueError(f"need 0 <= a <= n, got n={n}, a={a}")
    k = n - a
    A, K = 2**a, 2**k
    if min(A, K) <= MAX_TERMS:
        return mean_coherence(A, K)
    if a >= (n + 1) // 2:
        return MeanCoherenceResult(1.0 - 2.0 ** (k - a - 2), "linear-asymptote")
    return MeanCoherenceResult(
        0.0,
        "below-resolution",
        note="fewer than half the qubits accessible and no exact sum is available; the mean is close to 0",
    )
