"""Sign-based distributed SGD with majority, weighted and federated voting."""

from .bounds import (
    BoundDomainError,
    ErrorExponentReport,
    exponent_report,
    gamma_mv,
    gamma_wmv,
    imperfect_bound,
    mv_error_bound,
    theorem1_rate_bound,
    wmv_error_bound,
)
from .channel import BscSpec, ParallelChannels
from .config import ConfigError, ExperimentConfig, batch_mode_preset, load_config
from .core import RngStream, SignVector, pack, sign_of, signs
from .decode import (
    decode_error_probability_exact,
    llr_weight,
    majority_vote,
    ml_oracle,
    weighted_majority_vote,
)
from .estimate import CrossoverState, WeightUncertainty
from .simulate import RunResult, communication_cost, round_bits, run, sweep

__version__ = "0.1.0"

__all__ = [
    "BoundDomainError",
    "BscSpec",
    "ConfigError",
    "CrossoverState",
    "ErrorExponentReport",
    "ExperimentConfig",
    "ParallelChannels",
    "RngStream",
    "RunResult",
    "SignVector",
    "WeightUncertainty",
    "batch_mode_preset",
    "communication_cost",
    "decode_error_probability_exact",
    "exponent_report",
    "gamma_mv",
    "gamma_wmv",
    "imperfect_bound",
    "llr_weight",
    "load_config",
    "majority_vote",
    "ml_oracle",
    "mv_error_bound",
    "pack",
    "round_bits",
    "run",
    "sign_of",
    "signs",
    "sweep",
    "theorem1_rate_bound",
    "weighted_majority_vote",
    "wmv_error_bound",
]
