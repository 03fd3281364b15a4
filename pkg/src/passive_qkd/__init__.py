"""Finite-size key rates for decoy-state BB84 with passive, partially characterized detectors."""

from .config import (
    ChannelConfig,
    EpsilonBudget,
    ParamPoint,
    ParamRanges,
    ProtocolConfig,
    total_security,
    validate_config,
)
from .keyrate import KeyRateResult, Scenario, evaluate_point, key_length, optimize_intensities, sweep
from .mismatch import MismatchCertificate, build_certificate
from .subspace import LambdaMinCertificate, lambda_min_box, lambda_min_point

__version__ = "0.1.0"

__all__ = [
    "ChannelConfig",
    "EpsilonBudget",
    "KeyRateResult",
    "LambdaMinCertificate",
    "MismatchCertificate",
    "ParamPoint",
    "ParamRanges",
    "ProtocolConfig",
    "Scenario",
    "__version__",
    "build_certificate",
    "evaluate_point",
    "key_length",
    "lambda_min_box",
    "lambda_min_point",
    "optimize_intensities",
    "sweep",
    "total_security",
    "validate_config",
]
