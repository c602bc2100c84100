"""Graph learning from stationary signals with log-barrier spectral templates."""

from .errors import (
    DivergenceError,
    GraphParseError,
    InfeasibleError,
    LogSpecTError,
    ManifestError,
    NumericalError,
    ParameterError,
    ShapeError,
    ValidationError,
)
from .graphs import AdjacencyMatrix, GraphEnsembleSpec, generate, generate_ba, generate_er, project_valid
from .signals import CovarianceEstimate, DeltaRule, FilterSpec, sample_covariance, sample_signals, true_covariance
from .linops import CommutatorOp, assemble_AnB, b_map, b_map_inverse, commutator_op_norm
from .solvers import SolveResult, SolverConfig, correlation_baseline, solve_logspect, solve_rlogspect, solve_rspect
from .feasibility import FeasibilityReport, delta_min, infeasibility_frequency, rank_certificate
from .evaluation import (BinarizationStrategy, RecoveryMetrics, RecoveryReport, aggregate, binarize, metrics,
                         search_threshold, train_threshold)

__version__ = "0.1.0"

__all__ = [
    "DivergenceError",
    "GraphParseError",
    "InfeasibleError",
    "LogSpecTError",
    "ManifestError",
    "NumericalError",
    "ParameterError",
    "ShapeError",
    "ValidationError",
    "AdjacencyMatrix",
    "GraphEnsembleSpec",
    "generate",
    "generate_ba",
    "generate_er",
    "project_valid",
    "CovarianceEstimate",
    "DeltaRule",
    "FilterSpec",
    "sample_covariance",
    "sample_signals",
    "true_covariance",
    "CommutatorOp",
    "assemble_AnB",
    "b_map",
    "b_map_inverse",
    "commutator_op_norm",
    "SolveResult",
    "SolverConfig",
    "correlation_baseline",
    "solve_logspect",
    "solve_rlogspect",
    "solve_rspect",
    "FeasibilityReport",
    "delta_min",
    "infeasibility_frequency",
    "rank_certificate",
    "BinarizationStrategy",
    "RecoveryMetrics",
    "RecoveryReport",
    "aggregate",
    "binarize",
    "metrics",
    "search_threshold",
    "train_threshold",
]
