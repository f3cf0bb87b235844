"""Streaming enhancement chain.

analysis bank -> per-bin frame stacks -> estimator -> filter synthesis ->
filter application -> synthesis bank. Bins whose center frequency lies below
``f_mf`` are multi-frame filtered; the remaining bins pass through (optionally
scaled by an oracle single-tap Wiener gain), delayed to stay aligned.
"""

import time
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np
from scipy.signal import lfilter

from . import filterbank as fb
from .errors import ConfigInvalid, DegenerateDenominator, MissingReference, RefMismatch
from .estimators import OracleEstimator, WeightSequence
from .filters import (
    DIAG_LOADING,
    CovKind,
    FilterKind,
    apply_weights,
    mvdr_weights,
    resolve_cov,
    wf_weights,
)
from .metrics import MetricReport, measure_rtf, seg_snr, si_sdr
from .mfmodel import MfBufferConfig, stack_frames

REF_TOLERANCE = 1e-6


@dataclass
class PipelineConfig:
    filter: str = "mvdr"
    order: int = 5
    lookahead: int = 2
    selection_index: Optional[int] = None
    f_mf: float = 4000.0
    param: str = "hermitian-inverse"
    wf_mode: str = "scaled"
    estimator: str = "oracle"
    smoothing: float = 0.96
    loading: float = DIAG_LOADING
    high_band: str = "passthrough"
    on_singular: str = "raise"
    sample_rate: int = 24000
    window_len: int = 96
    hop: int = 24
    filterbank: fb.FilterbankConfig = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        try:
            self.filter_kind = FilterKind(self.filter)
            self.cov_kind = CovKind(self.param)
        except ValueError as exc:
            raise ConfigInvalid(str(exc)) from None
        if self.wf_mode not in ("scaled", "strict"):
            raise ConfigInvalid(f"wf_mode must be 'scaled' or 'strict', got {self.wf_mode!r}")
        if self.estimator not in ("oracle", "weights"):
            raise ConfigInvalid(f"estimator must be 'oracle' or 'weights', got {self.estimator!r}")
        if self.high_band not in ("passthrough", "wiener"):
            raise ConfigInvalid(f"high_band must be 'passthrough' or 'wiener', got {self.high_band!r}")
        if self.on_singular not in ("raise", "passthrough"):
            raise ConfigInvalid(f"on_singular must be 'raise' or 'passthrough', got {self.on_singular!r}")
        if self.filter_kind is FilterKind.DEEP_FILTER and self.estimator != "weights":
            self.estimator = "weights"
        if not 0.0 <= self.smoothing < 1.0:
            raise ConfigInvalid("smoothing must lie in [0, 1)")
        if self.loading < 0 or not np.isfinite(self.loading):
            raise ConfigInvalid("loading must be finite and >= 0")
        if self.filterbank is None:
            self.filterbank = fb.FilterbankConfig(self.sample_rate, self.window_len, self.hop)
        if not 0 < self.f_mf <= self.sample_rate / 2:
            raise ConfigInvalid("f_mf must lie in (0, Nyquist]")
        self.buffer = MfBufferConfig(self.order, self.lookahead, self.selection_index)

    @classmethod
    def from_mapping(cls, mapping, **overrides):
        known = {f.name for f in fields(cls)} - {"filterbank"}
        merged = {**mapping, **{k: v for k, v in overrides.items() if v is not None}}
        unknown = set(merged) - known
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        return cls(**merged)

    @classmethod
    def from_toml(cls, path, **overrides):
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        return cls.from_mapping(data.get("pipeline", data), **overrides)

    def with_(self, **changes):
        return replace(self, filterbank=None, **changes)

    @property
    def selection(self):
        return self.buffer.selection

    def mf_bins(self):
        """Number of low bins (center frequency below ``f_mf``) that are multi-frame filtered."""
        return int(np.count_nonzero(self.filterbank.bin_centers() < self.f_mf))

    def latency_samples(self):
        return fb.measure_delay(self.filterbank) + self.selection * self.filterbank.hop

    def latency_ms(self):
        return fb.latency_report(self.filterbank, self.selection)


@dataclass
class EnhanceResult:
    output: np.ndarray
    report: MetricReport
    latency_samples: int
    singular_events: int = 0
    degenerate_events: int = 0


def _recursive_psd(spec, smoothing):
    power = spec.real**2 + spec.imag**2
    return lfilter([1.0 - smoothing], [1.0, -smoothing], power, axis=0)


def _validate_refs(noisy, clean_ref, noise_ref, cfg, tol):
    if cfg.estimator != "oracle":
        return
    if clean_ref is None or noise_ref is None:
        raise MissingReference("oracle estimation needs clean and noise references")
    if not (len(clean_ref) == len(noise_ref) == len(noisy)):
        raise RefMismatch("noisy, clean and noise signals differ in length")
    err = np.max(np.abs(noisy - (clean_ref + noise_ref)))
    if err > tol:
        raise RefMismatch(f"noisy differs from clean + noise by up to {err:.3g} (tolerance {tol:g})")


def process_spectra(X, cfg, S=None, Z=None, weights=None, frame_offset=0):
    """Filter a noisy spectrogram frame by frame.

    Output frame ``k`` is produced once frame ``k`` has been analyzed; it holds
    the filtered estimate of frame ``k - selection``. Weight-file frame ``j``
    drives spectrogram frame ``j + frame_offset``; earlier frames reuse the
    first weights.

    Returns ``(Y, singular_events, degenerate_events)``.
    """
    n_frames, n_bins = X.shape
    m = cfg.mf_bins()
    n, look, sel = cfg.order, cfg.lookahead, cfg.selection
    Y = np.zeros_like(X)

    # bands above f_mf: aligned passthrough, optionally with an oracle single-tap gain
    high = X[: n_frames - sel, m:] if sel else X[:, m:]
    if cfg.high_band == "wiener":
        if S is None or Z is None:
            raise MissingReference("the Wiener high-band policy needs clean and noise references")
        phi_s = _recursive_psd(S[:, m:], cfg.smoothing)
        phi_z = _recursive_psd(Z[:, m:], cfg.smoothing)
        total = phi_s + phi_z
        gain = np.divide(phi_s, total, out=np.zeros_like(total), where=total > 0)
        high = high * gain[: n_frames - sel]
    Y[sel:, m:] = high
    if m == 0:
        return Y, 0, 0

    xs = stack_frames(X[:, :m], n)
    singular = degenerate = 0
    if cfg.estimator == "oracle":
        ss = stack_frames(S[:, :m], n)
        zs = stack_frames(Z[:, :m], n)
        est = OracleEstimator(m, n, sel, cfg.smoothing, cfg.filter_kind, cfg.cov_kind)
        # frames before the first emitted output still feed the statistics
        for k in range(min(look, n_frames)):
            est.speech.update(ss[k])
            est.noise.update(zs[k])
    elif weights is None:
        raise MissingReference("deep filtering needs a weight sequence")
    strict = cfg.on_singular == "raise"
    passthrough = np.zeros((m, n), dtype=np.complex128)
    passthrough[:, sel] = 1.0

    for k in range(look, n_frames):
        t = k - look
        if cfg.estimator == "weights":
            w = weights.at(max(t - frame_offset, 0), m, n).df_raw
        else:
            out = est.update(ss[k], zs[k])
            resolved = resolve_cov(out.cov, cfg.loading, strict=strict)
            if cfg.filter_kind is FilterKind.WIENER:
                w = wf_weights(resolved, out.gamma, out.phi_s, cfg.wf_mode)
            elif strict:
                w = mvdr_weights(resolved, out.gamma)
            else:
                w = mvdr_weights(resolved, out.gamma, on_degenerate="mask")
                bad = ~np.any(w != 0, axis=1)
                degenerate += int(np.count_nonzero(bad & resolved.ok))
                w[bad] = passthrough[bad]
            if not strict:
                failed = ~resolved.ok
                if np.any(failed):
                    singular += int(np.count_nonzero(failed))
                    w[failed] = passthrough[failed]
        Y[k, :m] = apply_weights(w, xs[k])
    return Y, singular, degenerate


def enhance_stream(noisy, clean_ref=None, noise_ref=None, cfg=None, weights=None,
                   ref_tol=REF_TOLERANCE, rtf_runs=0):
    """Enhance a mono signal; returns an :class:`EnhanceResult`.

    The output has the input's length and lags it by the algorithmic latency
    (filter-bank delay plus ``selection`` hops). Metrics against ``clean_ref``
    are computed after compensating that lag. With ``rtf_runs > 0`` the chain
    is re-run that many times to report a median real-time factor.
    """
    cfg = cfg or PipelineConfig()
    noisy = np.asarray(noisy, dtype=np.float64)
    clean_ref = None if clean_ref is None else np.asarray(clean_ref, dtype=np.float64)
    noise_ref = None if noise_ref is None else np.asarray(noise_ref, dtype=np.float64)
    _validate_refs(noisy, clean_ref, noise_ref, cfg, ref_tol)
    if cfg.estimator == "weights" and weights is None:
        raise MissingReference("deep filtering needs a weight file")
    if weights is not None and not isinstance(weights, WeightSequence):
        weights = WeightSequence(weights)

    bank = cfg.filterbank
    # a streaming bank starts from a zeroed window buffer: prepend that history
    # so the first output samples see a complete overlap-add
    pad = bank.window_len - bank.hop
    n_out = len(noisy)

    def spectrum(sig):
        return fb.analyze(np.concatenate([np.zeros(pad), sig]), bank).frames

    def run():
        X = spectrum(noisy)
        S = Z = None
        if clean_ref is not None and noise_ref is not None:
            S = spectrum(clean_ref)
            Z = spectrum(noise_ref)
        Y, n_sing, n_deg = process_spectra(X, cfg, S, Z, weights, pad // bank.hop)
        y = fb.synthesize(fb.ComplexSpectrogram(Y, bank, n_out + pad), bank)
        return y[pad:], n_sing, n_deg

    t0 = time.perf_counter()
    y, n_sing, n_deg = run()
    elapsed = time.perf_counter() - t0
    delay = cfg.latency_samples()
    duration = len(noisy) / bank.sample_rate

    report = MetricReport(latency_ms=1000.0 * delay / bank.sample_rate, rtf=elapsed / duration, rtf_runs=1)
    if rtf_runs > 0:
        rtf = measure_rtf(run, duration, runs=rtf_runs, warmup=0)
        report.rtf, report.rtf_runs, report.rtf_spread = rtf.median, rtf.runs, rtf.spread
    if clean_ref is not None and np.any(clean_ref[: len(noisy) - delay]):
        ref = clean_ref[: len(noisy) - delay]
        report.si_sdr = si_sdr(ref, y[delay:])
        report.seg_snr = seg_snr(ref, y[delay:], bank.sample_rate)
        report.si_sdr_input = si_sdr(clean_ref, noisy)
    return EnhanceResult(y, report, delay, n_sing, n_deg)
