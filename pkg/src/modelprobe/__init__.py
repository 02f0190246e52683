"""modelprobe: post-hoc explanations for black-box tabular models.

The engine scores models it does not own (a small built-in zoo plus a
subprocess protocol), fits local linear surrogates under every contrast
weighting in common use, searches for counterfactual inputs that reach a
chosen target, and measures where those explanations can actually be trusted.
"""

__version__ = "0.1.0"

from .attribution import (
    BaselineConfig,
    Scheme,
    SurrogateExplanation,
    attribute,
    banzhaf_attribution,
    edge_attribution,
    gradient_attribution,
    lime_fit,
    materialize,
    resolve_baseline,
    shapley_attribution,
)
from .counterfactual import (
    ContrastStatement,
    CounterfactualResult,
    DistanceConfig,
    SearchConfig,
    TargetSpec,
    diverse_counterfactuals,
    find_counterfactual,
    oracle_grid_search,
    render_contrast,
)
from .distill import (
    BoxRegion,
    CaseBasedExplanation,
    GlobalTreeSurrogate,
    case_based,
    global_tree_surrogate,
)
from .errors import (
    ConfigError,
    DegenerateRegion,
    ExactLimitExceeded,
    ModelProbeError,
    ProtocolError,
    SchemaViolation,
    SpecError,
    UnsupportedMethod,
)
from .fidelity import (
    AnalogyReport,
    DivergenceMatrix,
    RegionSpec,
    ValidityProfile,
    agreement_at,
    classify_analogies,
    compare_schemes,
    validity_profile,
)
from .models import (
    LinearModel,
    MlpModel,
    Model,
    PredictionOutput,
    RuleSetModel,
    ScalarView,
    TreeModel,
    gradient,
    load_model,
)
from .schema import Dataset, FeatureSpec, FeatureStats, Schema, compute_stats

__all__ = [name for name in dir() if not name.startswith("_")]
