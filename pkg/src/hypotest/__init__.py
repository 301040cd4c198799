"""Binary hypothesis testing under communication constraints.

Exact Bayes errors, Hellinger-lambda sample-complexity bounds, threshold
quantizers with reverse data-processing guarantees, and exact evaluation of
sequential distributed protocols.
"""

from .bayes import (
    LambdaStar,
    Prior,
    bayes_error,
    bayes_error_product,
    lambda_star,
    one_shot_lower_bound,
    pad_to_error,
)
from .distributions import (
    Channel,
    Distribution,
    LikelihoodRatioProfile,
    ThresholdChannel,
    bernoulli,
    pushforward,
    ratio_profile,
    validate,
)
from .divergences import (
    DivergenceSpec,
    TvLikeParams,
    f_divergence,
    hellinger,
    hellinger_affinity,
    hellinger_spec,
    total_variation,
    tv_spec,
)
from .errors import GateError, HypotestError, ValidationError
from .protocols import (
    SequentialStrategy,
    TranscriptDistribution,
    beta_star,
    n_star_id_threshold,
    n_star_seq_certified_lower,
    protocol_error,
    sequential_affinity_check,
    transcript_distribution,
)
from .quantize import (
    LevelSet,
    QuantizerReport,
    best_threshold_channel,
    constructive_quantizer,
    hard_instance,
    hellinger_quantizer,
    reverse_markov_levels,
)
from .sample_complexity import NotFoundBelow, ScBounds, sc_bounds, sc_exact, sc_simplified

__all__ = [
    "Channel", "DivergenceSpec", "Distribution", "GateError", "HypotestError", "LambdaStar",
    "LevelSet", "LikelihoodRatioProfile", "NotFoundBelow", "Prior", "QuantizerReport",
    "ScBounds", "SequentialStrategy", "ThresholdChannel", "TranscriptDistribution",
    "TvLikeParams", "ValidationError", "bayes_error", "bayes_error_product", "bernoulli",
    "best_threshold_channel", "beta_star", "constructive_quantizer", "f_divergence",
    "hard_instance", "hellinger", "hellinger_affinity", "hellinger_quantizer", "hellinger_spec",
    "lambda_star", "n_star_id_threshold", "n_star_seq_certified_lower", "one_shot_lower_bound",
    "pad_to_error", "protocol_error", "pushforward", "ratio_profile", "reverse_markov_levels",
    "sc_bounds", "sc_exact", "sc_simplified", "sequential_affinity_check", "total_variation",
    "transcript_distribution", "tv_spec", "validate",
]
