"""Low-latency multi-frame speech enhancement (MF-Wiener, MF-MVDR, deep filtering)."""

from .errors import (
    ConfigInvalid,
    DegenerateDenominator,
    MfError,
    MissingReference,
    NotPositiveDefinite,
    RefMismatch,
)
from .filterbank import FilterbankConfig, analyze, latency_report, synthesize
from .filters import CovKind, CovParameterization, FilterKind, mvdr_weights, wf_weights
from .kernels import BACKEND
from .metrics import MetricReport, measure_rtf, seg_snr, si_sdr
from .pipeline import PipelineConfig, enhance_stream

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigInvalid",
    "CovKind",
    "CovParameterization",
    "DegenerateDenominator",
    "FilterKind",
    "FilterbankConfig",
    "MetricReport",
    "MfError",
    "MissingReference",
    "NotPositiveDefinite",
    "PipelineConfig",
    "RefMismatch",
    "analyze",
    "enhance_stream",
    "latency_report",
    "measure_rtf",
    "mvdr_weights",
    "seg_snr",
    "si_sdr",
    "synthesize",
    "wf_weights",
]
