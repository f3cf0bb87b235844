"""Objective quality and speed measures: SI-SDR, segmental SNR, real-time factor."""

import json
import statistics
import time
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import LengthMismatch, ZeroReference

SI_SDR_CAP_DB = 100.0
SEG_SNR_RANGE_DB = (-10.0, 35.0)


def _check_pair(reference, estimate):
    s = np.asarray(reference, dtype=np.float64)
    e = np.asarray(estimate, dtype=np.float64)
    if s.shape != e.shape or s.ndim != 1 or len(s) < 1:
        raise LengthMismatch(f"reference {s.shape} and estimate {e.shape} must be equal-length 1-D signals")
    if not np.any(s):
        raise ZeroReference("reference signal is all zeros")
    return s, e


def si_sdr(reference, estimate):
    """Scale-invariant SDR in dB, capped at +100 dB when the residual vanishes.

    The estimate is projected onto the reference; the projection is the target
    and the remainder the distortion. Any nonzero scaling of the estimate,
    including a sign flip, leaves the value unchanged.
    """
    s, e = _check_pair(reference, estimate)
    alpha = np.dot(e, s) / np.dot(s, s)
    target = alpha * s
    residual = target - e
    t_energy = float(np.dot(target, target))
    r_energy = float(np.dot(residual, residual))
    if r_energy <= 0.0 or r_energy <= t_energy * 10 ** (-SI_SDR_CAP_DB / 10):
        return SI_SDR_CAP_DB
    if t_energy <= 0.0:
        return -SI_SDR_CAP_DB
    return 10.0 * np.log10(t_energy / r_energy)


def seg_snr(reference, estimate, sample_rate=24000, frame_ms=10.0):
    """Mean of per-frame SNRs, each clamped to [-10, 35] dB; a trailing partial frame is dropped
    unless the signal is shorter than one frame."""
    s, e = _check_pair(reference, estimate)
    lo, hi = SEG_SNR_RANGE_DB
    frame = max(1, int(round(sample_rate * frame_ms / 1000.0)))
    n_frames = max(1, len(s) // frame)
    values = []
    for i in range(n_frames):
        seg_s = s[i * frame : (i + 1) * frame]
        seg_n = seg_s - e[i * frame : (i + 1) * frame]
        sig = float(np.dot(seg_s, seg_s))
        noise = float(np.dot(seg_n, seg_n))
        if noise == 0.0:
            values.append(hi)
        elif sig == 0.0:
            values.append(lo)
        else:
            values.append(float(np.clip(10.0 * np.log10(sig / noise), lo, hi)))
    return float(np.mean(values))


@dataclass
class RtfResult:
    median: float
    runs: int
    minimum: float
    maximum: float
    times_s: list

    @property
    def spread(self):
        return self.maximum - self.minimum


def measure_rtf(run, duration_s, runs=5, warmup=1, clock=time.perf_counter):
    """Real-time factor of ``run()`` for audio lasting ``duration_s`` seconds.

    The callable is executed ``warmup`` times untimed, then ``runs`` times; the
    median ratio is reported along with its range.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    for _ in range(warmup):
        run()
    ratios = []
    times = []
    for _ in range(runs):
        t0 = clock()
        run()
        dt = clock() - t0
        times.append(dt)
        ratios.append(dt / duration_s)
    return RtfResult(statistics.median(ratios), runs, min(ratios), max(ratios), times)


@dataclass
class MetricReport:
    si_sdr: Optional[float] = None
    seg_snr: Optional[float] = None
    rtf: Optional[float] = None
    latency_ms: Optional[float] = None
    rtf_runs: int = 0
    rtf_spread: Optional[float] = None
    si_sdr_input: Optional[float] = None

    def to_json_line(self, file, filter_name, order, lookahead):
        """One JSON-lines record with the report schema."""
        record = {
            "file": str(file),
            "filter": filter_name,
            "N": order,
            "lookahead": lookahead,
            "si_sdr_db": self.si_sdr,
            "seg_snr_db": self.seg_snr,
            "rtf": self.rtf,
            "latency_ms": self.latency_ms,
            "rtf_runs": self.rtf_runs,
            "rtf_spread": self.rtf_spread,
        }
        return json.dumps(record)

    def as_dict(self):
        return asdict(self)
