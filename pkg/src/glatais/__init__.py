"""Joint estimation of a time-varying mean and a sparse precision matrix."""
from .atais import ProposalState, adapt_proposal, effective_sample_size, log_posterior, normalize_log_weights
from .errors import (
    ConvergenceError,
    DegenerateCloudError,
    DomainError,
    GlataisError,
    InfeasibleError,
    NotPositiveDefiniteError,
    ParameterError,
    RunError,
    SingularityError,
)
from .evaluation import EdgeSet, ThresholdSpec, f_score, support_from_precision
from .ggm import Graph, ObservationSet, generate_er_graph, make_precision, sample_observations
from .gl_atais import GlAtaisConfig, run
from .glasso import GlassoOptions, graphical_lasso, kkt_residual, solve_glasso
from .harness import ExperimentConfig, emit_results, run_repetition, run_sweep
from .mean_model import MeanModel, PriorSpec, benchmark_model, eval_benchmark_mean

__version__ = "0.1.0"
