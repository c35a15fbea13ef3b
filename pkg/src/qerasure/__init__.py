"""Recoverable qubit coherence when only part of the environment can be measured."""

__version__ = "0.1.0"

from .analytics import (
    MeanCoherenceResult,
    half_moment,
    high_K_asymptote,
    linear_approximation,
    mean_coherence,
    mean_coherence_closed_form,
    qubit_partition_mean,
)
from .coherence import (
    BlockDecomposition,
    ConditionalQubitState,
    MeasurementBasis,
    average_conditional_coherence,
    conditional_qubit_state,
    decompose_blocks,
    optimal_erasure_basis,
    pure_pair_coherence,
    qubit_coherence,
    recoverable_coherence,
    trace_norm,
)
from .errors import (
    ErasureError,
    GuardError,
    InternalError,
    InvalidStateError,
    OutcomeImpossibleError,
    UnsupportedCoefficientError,
)
from .experiments import (
    CoherenceStatistics,
    CrossValidationReport,
    ExperimentConfig,
    cross_validate,
    figure_data,
    run_monte_carlo,
    sweep_partition,
    typicality_metric,
)
from .rng import (
    RngStream,
    partial_trace,
    sample_complex_gaussian,
    sample_cross_product,
    sample_haar_pure,
    sample_induced_density,
)
