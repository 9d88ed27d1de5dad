"""Factor-adjusted covariate-assisted variable ranking.

Rank the columns of a high-dimensional linear or logistic design by first
removing leading singular directions (factor adjustment) and then scoring
each variable by its best local likelihood-ratio over small connected
neighborhoods of a correlation-threshold graph. Ships baseline rankers,
synthetic-design simulation, ROC and sure-screening evaluation, closed-form
rate exponents for the blockwise design, and empirical validators for the
eigenvector perturbation bounds behind the factor-adjustment step.
"""

from .designs import (
    CovSpec,
    DesignInstance,
    RareWeakSpec,
    gen_response_linear,
    gen_response_logistic,
    load_design_csv,
    materialize_cov,
    sample_beta_fixed,
    sample_beta_rw,
    sample_design,
)
from .errors import (
    ConfigError,
    CostError,
    DegenerateVariableError,
    FacarError,
    FormatError,
    NumericError,
    ParameterError,
    SeparationError,
    SingularNeighborhoodError,
)
from .evaluation import (
    OmegaOracle,
    RateOracle,
    ScreeningMetrics,
    average_roc,
    nu_g_star,
    omega_oracle,
    rate_dominance_check,
    rate_oracle,
    roc_curve,
    screening_metrics,
    screening_threshold,
)
from .experiments import (
    EvalReport,
    ExperimentConfig,
    ExperimentResult,
    load_config,
    run_experiment,
    write_outputs,
)
from .factor import (
    FactorAdjusted,
    SvdTriples,
    adjust,
    select_k,
    select_k_elbow,
    select_k_threshold,
    svd_design,
)
from .glm import (
    FAMILIES,
    LOGISTIC,
    GlmFamily,
    LocalMleResult,
    local_mle,
    score_facar_glm,
    score_local_glm,
    score_mr_glm,
)
from .graph import (
    CovariateGraph,
    NeighborhoodCollection,
    anchored_connected_sets,
    build_graph,
    enumerate_neighborhoods,
    verify_enum_bound,
)
from .perturbation import (
    BoundReport,
    FactorModelMatrix,
    check_lemma_eigvec1,
    check_thm_eigen,
    make_sparse_factor_instance,
)
from .scores import (
    RankingResult,
    rank_facar,
    rank_scores,
    score_facar,
    score_famr,
    score_holp,
    score_local,
    score_lsr_block,
    score_mr,
    score_rrcs,
    write_ranking_csv,
)

__version__ = "0.1.0"
