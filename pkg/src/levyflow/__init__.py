"""Correlated random-walk analysis of discussions on a topic simplex.

Text sources become trajectories of topic mixtures; chunk-to-chunk surprise
is modeled as a heavy-tailed walk whose focus-weight distribution (mu,
sigma) is fitted by simulated-likelihood grid inference and charted across
coarse-graining scales.
"""

from .corpus import (
    DEFAULT_K_SWEEP,
    ChunkingSpec,
    ChunkSequence,
    CleanOptions,
    CommentNode,
    CommentTree,
    TokenStream,
    chunk,
    clean_text,
    drop_top_words,
    linearize_tree,
    parse_thread,
)
from .flow import (
    REFERENCE_CENTROIDS,
    FlowCurve,
    GaussianRegion,
    PipelineSettings,
    ScaleFit,
    fit_at_scale,
    flow_curve,
    limit_region,
    mahalanobis_contains,
    shuffle_null,
)
from .inference import (
    DensityEstimate,
    FitResult,
    GridSpec,
    LambdaGridMixture,
    PosteriorGrid,
    estimate_density,
    fit,
    log_likelihood,
    posterior_grid,
)
from .levy import (
    DensityGrid,
    JumpSample,
    LambdaGridSpec,
    Trajectory,
    density_grid,
    simulate_jump_distribution,
    simulate_trajectory,
    step,
)
from .simplex import (
    AlphaVector,
    LambdaRange,
    LevyParams,
    child_seed_sequence,
    kl_divergence,
    kl_divergence_rows,
    lambda_range,
    lognormal_quantile,
    make_rng,
    sample_dirichlet,
    sample_lognormal,
)
from .topics import TopicModel, fit_stationary_alpha, infer_mixtures, train_lda
from .trees import (
    DepthHistogram,
    RegressionResult,
    average_depth,
    depth_distribution,
    nesting_fraction,
    ols_regression,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaVector",
    "ChunkSequence",
    "ChunkingSpec",
    "CleanOptions",
    "CommentNode",
    "CommentTree",
    "DEFAULT_K_SWEEP",
    "DensityEstimate",
    "DensityGrid",
    "DepthHistogram",
    "FitResult",
    "FlowCurve",
    "GaussianRegion",
    "GridSpec",
    "JumpSample",
    "LambdaGridMixture",
    "LambdaGridSpec",
    "LambdaRange",
    "LevyParams",
    "PipelineSettings",
    "PosteriorGrid",
    "REFERENCE_CENTROIDS",
    "RegressionResult",
    "ScaleFit",
    "TokenStream",
    "TopicModel",
    "Trajectory",
    "average_depth",
    "child_seed_sequence",
    "chunk",
    "clean_text",
    "density_grid",
    "depth_distribution",
    "drop_top_words",
    "estimate_density",
    "fit",
    "fit_at_scale",
    "fit_stationary_alpha",
    "flow_curve",
    "infer_mixtures",
    "kl_divergence",
    "kl_divergence_rows",
    "lambda_range",
    "limit_region",
    "linearize_tree",
    "log_likelihood",
    "lognormal_quantile",
    "mahalanobis_contains",
    "make_rng",
    "nesting_fraction",
    "ols_regression",
    "parse_thread",
    "posterior_grid",
    "sample_dirichlet",
    "sample_lognormal",
    "shuffle_null",
    "simulate_jump_distribution",
    "simulate_trajectory",
    "step",
    "train_lda",
]
