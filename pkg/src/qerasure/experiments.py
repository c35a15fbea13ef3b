"""Seeded Monte Carlo harness and figure tables.

Sample ``i`` of a run always draws from ``RngStream(seed, i)``.  Samples are
evaluated in fixed-size chunks, optionally across a process pool, and the
per-sample results are concatenated in index order before any statistic is
taken, so the output does not depend on the number of workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import analytics
from .coherence import recoverable_coherence
from .errors import GuardError
from .rng import RngStream, derive_seed, partial_trace, sample_complex_gaussian, sample_haar_pure

__all__ = [
    "MAX_STATE_DIM",
    "MAX_SWEEP_QUBITS",
    "DEFAULT_BANDS",
    "DEFAULT_SAMPLES",
    "WORKERS_ENV",
    "ExperimentConfig",
    "CoherenceStatistics",
    "CrossValidationReport",
    "default_workers",
    "induced_coherences",
    "pure_path_coherences",
    "summarize",
    "run_monte_carlo",
    "sweep_partition",
    "typicality_metric",
    "figure_data",
    "cross_validate",
]

#: Largest joint state dimension 2AK admitted for Monte Carlo runs.
MAX_STATE_DIM = 2**14
#: Largest environment size n for Monte Carlo partition sweeps (2**(n+1) <= MAX_STATE_DIM).
MAX_SWEEP_QUBITS = 13
DEFAULT_BANDS = (50.0, 90.0, 99.0)
DEFAULT_SAMPLES = 10_000
WORKERS_ENV = "QERASURE_WORKERS"

# Chunk limits: complex entries held in memory, and samples per task.
_CHUNK_ENTRIES = 2**20
_CHUNK_SAMPLES = 2048
# Family tag keeping the pure-state route off the induced route's draws.
_PURE_FAMILY = 1
_Z_LIMIT = 3.0


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV)
    if value:
        workers = int(value)
        if workers < 1:
            raise ValueError(f"{WORKERS_ENV} must be >= 1, got {value}")
        return workers
    return os.cpu_count() or 1


def _check_guard(A: int, K: int) -> None:
    if 2 * A * K > MAX_STATE_DIM:
        raise GuardError(f"state dimension 2AK = {2 * A * K} exceeds the Monte Carlo guard {MAX_STATE_DIM}")


def _chunks(samples: int, A: int, K: int) -> list[tuple[int, int]]:
    size = max(1, min(_CHUNK_SAMPLES, _CHUNK_ENTRIES // (2 * A * K)))
    return [(lo, min(lo + size, samples)) for lo in range(0, samples, size)]


def _induced_chunk(args) -> np.ndarray:
    A, K, seed, lo, hi = args
    g = np.stack([sample_complex_gaussian(2 * A, K, RngStream(seed, i)) for i in range(lo, hi)])
    norm = np.einsum("nij,nij->n", g, g.conj()).real
    top, bottom = g[:, :A, :], g[:, A:, :]
    if K < A:
        # G0 G1^dagger = Q0 (R0 R1^dagger) Q1^dagger: same singular values, K x K core.
        top = np.linalg.qr(top, mode="r")
        bottom = np.linalg.qr(bottom, mode="r")
    core = top @ bottom.conj().transpose(0, 2, 1)
    return 2.0 * np.linalg.svd(core, compute_uv=False).sum(axis=1) / norm


def _pure_chunk(args) -> np.ndarray:
    A, K, seed, lo, hi = args
    out = np.empty(hi - lo)
    for j, i in enumerate(range(lo, hi)):
        psi = sample_haar_pure(2 * A * K, RngStream(seed, i, family=_PURE_FAMILY))
        out[j] = recoverable_coherence(partial_trace(psi, 2 * A, K), A)
    return out


def _run_chunks(fn, A: int, K: int, samples: int, seed: int, workers: int | None) -> np.ndarray:
    _check_guard(A, K)
    if samples < 1:
        raise ValueError("samples must be positive")
    jobs = [(A, K, seed, lo, hi) for lo, hi in _chunks(samples, A, K)]
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(jobs) == 1:
        parts = [fn(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            parts = list(pool.map(fn, jobs))
    return np.concatenate(parts)


def induced_coherences(A: int, K: int, samples: int, seed: int, workers: int | None = None) -> np.ndarray:
    """Recoverable coherence of ``samples`` induced states, in sample-index order.

    Equivalent to ``recoverable_coherence(sample_induced_density(A, K, RngStream(seed, i)), A)``
    for each i, evaluated with a batched kernel that never forms the 2A x 2A matrix.
    """
    return _run_chunks(_induced_chunk, A, K, samples, seed, workers)


def pure_path_coherences(A: int, K: int, samples: int, seed: int, workers: int | None = None) -> np.ndarray:
    """Same quantity via a Haar-random pure state on 2AK dimensions and a partial trace."""
    return _run_chunks(_pure_chunk, A, K, samples, seed, workers)


@dataclass(frozen=True)
class ExperimentConfig:
    A: int
    K: int
    samples: int = DEFAULT_SAMPLES
    seed: int = 0
    percentile_bands: tuple[float, ...] = DEFAULT_BANDS

    def __post_init__(self):
        if self.A < 1 or self.K < 1:
            raise ValueError(f"A and K must be positive, got A={self.A}, K={self.K}")
        if self.samples < 2:
            raise ValueError("at least two samples are required")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        bands = tuple(float(c) for c in self.percentile_bands)
        if not bands or any(not 0.0 < c < 100.0 for c in bands):
            raise ValueError(f"coverages must lie strictly between 0 and 100, got {bands}")
        object.__setattr__(self, "percentile_bands", tuple(sorted(set(bands))))


@dataclass(frozen=True)
class CoherenceStatistics:
    mean: float
    std_dev: float
    std_err: float
    bands: dict[float, tuple[float, float]]
    samples: int
    analytic_mean: float | None = None
    analytic_method: str | None = None

    @property
    def z_score(self) -> float | None:
        if self.analytic_mean is None:
            return None
        if self.std_err == 0.0:
            return 0.0 if self.mean == self.analytic_mean else math.inf
        return (self.mean - self.analytic_mean) / self.std_err

    def as_row(self) -> dict:
        row = {
            "mean": self.mean,
            "std_dev": self.std_dev,
            "std_err": self.std_err,
            "samples": self.samples,
        }
        for coverage, (lo, hi) in self.bands.items():
            row[f"band_lo_{coverage:g}"] = lo
            row[f"band_hi_{coverage:g}"] = hi
        row["analytic_mean"] = self.analytic_mean
        row["analytic_method"] = self.analytic_method
        row["z"] = self.z_score
        return row


def summarize(values: np.ndarray, bands: Iterable[float] = DEFAULT_BANDS, analytic=None) -> CoherenceStatistics:
    """Mean, spread and central equal-tail quantile bands of a sample.

    A band of coverage c spans the (50 - c/2) and (50 + c/2) percentiles, with
    linear interpolation between order statistics.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < 2:
        raise ValueError("at least two samples are required")
    mean = float(values.mean())
    std = float(values.std(ddof=1))
    band_map = {}
    for c in sorted(bands):
        lo, hi = np.quantile(values, [0.5 - c / 200.0, 0.5 + c / 200.0])
        band_map[float(c)] = (float(lo), float(hi))
    return CoherenceStatistics(
        mean=mean,
        std_dev=std,
        std_err=std / math.sqrt(n),
        bands=band_map,
        samples=n,
        analytic_mean=None if analytic is None else analytic.value,
        analytic_method=None if analytic is None else analytic.method,
    )


def _analytic(A: int, K: int):
    return analytics.mean_coherence(A, K)


def run_monte_carlo(config: ExperimentConfig, workers: int | None = None) -> CoherenceStatistics:
    values = induced_coherences(config.A, config.K, config.samples, config.seed, workers)
    return summarize(values, config.percentile_bands, _analytic(config.A, config.K))


def sweep_partition(
    n: int,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    bands: Sequence[float] = DEFAULT_BANDS,
    workers: int | None = None,
) -> list[tuple[int, CoherenceStatistics]]:
    """Monte Carlo statistics for every split a = 0..n of n environment qubits."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > MAX_SWEEP_QUBITS:
        raise GuardError(f"n = {n} exceeds the Monte Carlo sweep limit {MAX_SWEEP_QUBITS}; use analytics")
    out = []
    for a in range(n + 1):
        cfg = ExperimentConfig(2**a, 2 ** (n - a), samples, derive_seed(seed, n, a), tuple(bands))
        out.append((a, run_monte_carlo(cfg, workers)))
    return out


def typicality_metric(stats_by_n: Sequence[tuple[int, CoherenceStatistics]]) -> list[tuple[int, float]]:
    if len(stats_by_n) < 2:
        raise ValueError("typicality needs statistics for at least two environment sizes")
    counts = {s.samples for _, s in stats_by_n}
    if len(counts) != 1:
        raise ValueError(f"mismatched sample counts {sorted(counts)}")
    return [(n, s.std_dev) for n, s in stats_by_n]


@dataclass(frozen=True)
class CrossValidationReport:
    A: int
    K: int
    samples: int
    seed: int
    induced_mean: float
    induced_std_err: float
    pure_mean: float
    pure_std_err: float
    analytic_mean: float
    analytic_method: str
    z_scores: dict[str, float] = field(default_factory=dict)

    @property
    def flagged(self) -> list[str]:
        return [k for k, z in self.z_scores.items() if abs(z) > _Z_LIMIT]

    @property
    def passed(self) -> bool:
        return not self.flagged

    def as_row(self) -> dict:
        row = {
            "A": self.A,
            "K": self.K,
            "samples": self.samples,
            "seed": self.seed,
            "induced_mean": self.induced_mean,
            "induced_std_err": self.induced_std_err,
            "pure_mean": self.pure_mean,
            "pure_std_err": self.pure_std_err,
            "analytic_mean": self.analytic_mean,
            "analytic_method": self.analytic_method,
        }
        row.update({f"z_{k}": v for k, v in self.z_scores.items()})
        row["passed"] = self.passed
        return row


def _z(diff: float, se: float) -> float:
    if se == 0.0:
        return 0.0 if diff == 0.0 else math.inf
    return diff / se


def cross_validate(A: int, K: int, samples: int = DEFAULT_SAMPLES, seed: int = 0, workers: int | None = None) -> CrossValidationReport:
    """Compare the induced-state route, the pure-state route and the exact mean."""
    if samples < 2:
        raise ValueError("at least two samples are required")
    induced = summarize(induced_coherences(A, K, samples, seed, workers))
    pure = summarize(pure_path_coherences(A, K, samples, seed, workers))
    exact = _analytic(A, K)
    z = {
        "induced_vs_analytic": _z(induced.mean - exact.value, induced.std_err),
        "pure_vs_analytic": _z(pure.mean - exact.value, pure.std_err),
        "induced_vs_pure": _z(induced.mean - pure.mean, math.hypot(induced.std_err, pure.std_err)),
    }
    return CrossValidationReport(
        A=A,
        K=K,
        samples=samples,
        seed=seed,
        induced_mean=induced.mean,
        induced_std_err=induced.std_err,
        pure_mean=pure.mean,
        pure_std_err=pure.std_err,
        analytic_mean=exact.value,
        analytic_method=exact.method,
        z_scores=z,
    )


def _fig3(A: int = 100, Kmin: int = 1, Kmax: int = 1000) -> list[dict]:
    if A < 1 or Kmin < 1 or Kmax < Kmin:
        raise ValueError(f"invalid fig3 range A={A}, K={Kmin}..{Kmax}")
    rows = []
    for K in range(Kmin, Kmax + 1):
        row = {
            "K": K,
            "exact": analytics.mean_coherence(A, K).value,
            "linear": analytics.linear_approximation(A, K),
        }
        if A in analytics.HIGH_K_COEFFICIENTS:
            row["asymptote"] = analytics.high_K_asymptote(A, K)
        rows.append(row)
    return rows


def _fig4(
    nmin: int = 3,
    nmax: int = 11,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    bands: Sequence[float] = DEFAULT_BANDS,
    workers: int | None = None,
) -> list[dict]:
    if nmin < 0 or nmax < nmin:
        raise ValueError(f"invalid fig4 range n={nmin}..{nmax}")
    bands = tuple(sorted(float(c) for c in bands))
    rows = []
    for n in range(nmin, nmax + 1):
        for a, st in sweep_partition(n, samples, seed, bands, workers):
            row = {"n": n, "a": a, "mean": st.mean}
            for c in bands:
                row[f"band_lo_{c:g}"], row[f"band_hi_{c:g}"] = st.bands[c]
            rows.append(row)
    return rows


def _fig5(n: int = 200) -> list[dict]:
    if n < 0:
        raise ValueError("n must be non-negative")
    rows = []
    for a in range(n + 1):
        r = analytics.qubit_partition_mean(n, a)
        rows.append({"a": a, "value": r.value, "method": r.method})
    return rows


_FIGURES = {"fig3": _fig3, "fig4": _fig4, "fig5": _fig5}


def figure_data(which: str, **params) -> list[dict]:
    """Table rows behind one of the three figures (``fig3``, ``fig4`` or ``fig5``)."""
    try:
        fn = _FIGURES[which]
    except KeyError:
        raise ValueError(f"unknown figure {which!r}; expected one of {sorted(_FIGURES)}") from None
    return fn(**params)
