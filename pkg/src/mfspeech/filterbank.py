"""Uniform DFT analysis/synthesis filter bank for the hearing-aid regime.

Default: 24 kHz, 96-sample (4 ms) square-root Hann windows, 24-sample (1 ms)
hop, 49 one-sided bins of 250 Hz (DC..Nyquist).

Synthesis emits samples in streaming order: an output block leaves the
overlap-add buffer only once every frame covering it has been added, so the
round trip is a pure delay of ``window_len - hop`` samples.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigInvalid, ConfigMismatch, SignalTooShort


def sqrt_hann(n):
    """Periodic square-root Hann window of length ``n``."""
    return np.sqrt(0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n))


@dataclass(frozen=True)
class FilterbankConfig:
    sample_rate: int = 24000
    window_len: int = 96
    hop: int = 24
    analysis_window: np.ndarray = field(default=None, compare=False, repr=False)
    synthesis_window: np.ndarray = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.window_len % self.hop != 0:
            raise ConfigInvalid("hop must divide window_len")
        if self.window_len % 2 != 0:
            raise ConfigInvalid("window_len must be even")
        if self.analysis_window is None:
            object.__setattr__(self, "analysis_window", sqrt_hann(self.window_len))
        if self.synthesis_window is None:
            win = sqrt_hann(self.window_len)
            # scale so the overlap-added product window sums to one
            ola = self.overlap_sum(self.analysis_window, win)
            object.__setattr__(self, "synthesis_window", win / ola.mean())
        for w in (self.analysis_window, self.synthesis_window):
            if len(w) != self.window_len:
                raise ConfigInvalid("window length mismatch")
        ola = self.overlap_sum(self.analysis_window, self.synthesis_window)
        if np.max(np.abs(ola - ola[0])) > 1e-10:
            raise ConfigInvalid("analysis/synthesis windows violate constant overlap-add")

    def overlap_sum(self, a, s):
        """Sum of ``a*s`` over all hop shifts, one value per phase in ``[0, hop)``."""
        prod = np.asarray(a) * np.asarray(s)
        return prod.reshape(-1, self.hop).sum(axis=0)

    @property
    def num_bands(self):
        return self.window_len // 2

    @property
    def num_bins(self):
        return self.num_bands + 1

    @property
    def bin_width(self):
        return self.sample_rate / self.window_len

    @property
    def frame_rate(self):
        return self.sample_rate / self.hop

    @property
    def delay(self):
        """Round-trip delay in samples of the streaming synthesis."""
        return self.window_len - self.hop

    def bin_centers(self):
        return np.arange(self.num_bins) * self.bin_width

    def num_frames(self, length):
        return -(-(length - self.window_len) // self.hop) + 1

    def __eq__(self, other):
        if not isinstance(other, FilterbankConfig):
            return NotImplemented
        return (
            (self.sample_rate, self.window_len, self.hop) == (other.sample_rate, other.window_len, other.hop)
            and np.array_equal(self.analysis_window, other.analysis_window)
            and np.array_equal(self.synthesis_window, other.synthesis_window)
        )

    __hash__ = None


@dataclass
class ComplexSpectrogram:
    """Frames of one-sided spectra, shape ``(frames, bins)``."""

    frames: np.ndarray
    config: FilterbankConfig
    length: int

    @property
    def frame_rate(self):
        return self.config.frame_rate

    @property
    def bin_width(self):
        return self.config.bin_width

    @property
    def shape(self):
        return self.frames.shape


def analyze(signal, config=None):
    """Windowed uniform DFT analysis; frame ``t`` covers ``[t*hop, t*hop + window_len)``.

    The tail is zero-padded so the last sample is covered by at least one frame.
    """
    config = config or FilterbankConfig()
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    if len(x) < config.window_len:
        raise SignalTooShort(f"need at least {config.window_len} samples, got {len(x)}")
    n_frames = config.num_frames(len(x))
    padded = np.zeros((n_frames - 1) * config.hop + config.window_len)
    padded[: len(x)] = x
    idx = np.arange(config.window_len)[None, :] + config.hop * np.arange(n_frames)[:, None]
    frames = np.fft.rfft(padded[idx] * config.analysis_window, axis=1)
    return ComplexSpectrogram(frames, config, len(x))


def synthesize(spec, config=None, length=None):
    """Overlap-add synthesis in streaming order.

    Output sample ``n`` equals the overlap-added sample ``n - config.delay``;
    the result is truncated or zero-padded to ``length`` (default: the analyzed length).
    """
    config = config or spec.config
    if config != spec.config:
        raise ConfigMismatch("spectrogram was produced with a different filter bank configuration")
    frames = np.asarray(spec.frames)
    if frames.ndim != 2 or frames.shape[1] != config.num_bins:
        raise ConfigMismatch(f"expected {config.num_bins} bins, got shape {frames.shape}")
    length = spec.length if length is None else length
    n_frames = frames.shape[0]
    blocks = np.fft.irfft(frames, n=config.window_len, axis=1) * config.synthesis_window
    ola = np.zeros(config.delay + max(length, (n_frames - 1) * config.hop + config.window_len))
    for r in range(config.window_len // config.hop):
        seg = blocks[:, r * config.hop : (r + 1) * config.hop]
        start = config.delay + r * config.hop
        view = ola[start : start + n_frames * config.hop].reshape(n_frames, config.hop)
        view += seg
    return ola[:length].copy()


def measure_delay(config=None, length=None, seed=0):
    """Round-trip delay in samples, from the cross-correlation peak of a white-noise probe."""
    config = config or FilterbankConfig()
    length = length or 16 * config.window_len
    rng = np.random.default_rng(seed)
    probe = rng.standard_normal(length)
    out = synthesize(analyze(probe, config), config, length)
    return xcorr_lag(probe, out, max_lag=4 * config.window_len)


def xcorr_lag(reference, delayed, max_lag):
    """Lag in ``[0, max_lag]`` maximizing the cross-correlation of ``delayed`` against ``reference``."""
    reference = np.asarray(reference, dtype=np.float64)
    delayed = np.asarray(delayed, dtype=np.float64)
    n = min(len(reference), len(delayed))
    scores = [np.dot(reference[: n - k], delayed[k:n]) for k in range(max_lag + 1)]
    return int(np.argmax(scores))


def latency_report(config=None, lookahead_frames=0):
    """Algorithmic latency in ms: measured filter-bank delay plus look-ahead frames."""
    config = config or FilterbankConfig()
    delay = measure_delay(config)
    return 1000.0 * (delay + lookahead_frames * config.hop) / config.sample_rate
