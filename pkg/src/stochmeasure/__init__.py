"""Memory kernels and the response and correlation integrals they weight."""

from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .errors import (
    AccuracyError,
    ConvergenceError,
    CutoffWarning,
    DivergenceError,
    DomainError,
    MeasureError,
    SamplingError,
    SingularityError,
    TruncationWarning,
    ValidationError,
)
from .measures import KernelKind, MemoryKernel, asymptotic_amplitude, eval_kernel, parse_kernel, stochastic_time
from .paths import SampledPath
from .response import ResponseModel, markovian_limit_scan, mcv_residual, respond
from .correlations import EITParameters, eit_correlation, van_hove_asymptote

__all__ = [
    "__version__",
    "AccuracyError",
    "ConvergenceError",
    "CutoffWarning",
    "DivergenceError",
    "DomainError",
    "MeasureError",
    "SamplingError",
    "SingularityError",
    "TruncationWarning",
    "ValidationError",
    "KernelKind",
    "MemoryKernel",
    "asymptotic_amplitude",
    "eval_kernel",
    "parse_kernel",
    "stochastic_time",
    "SampledPath",
    "ResponseModel",
    "respond",
    "mcv_residual",
    "markovian_limit_scan",
    "EITParameters",
    "eit_correlation",
    "van_hove_asymptote",
]
