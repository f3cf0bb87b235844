"""Covariance-parameterization grid on the synthetic corpus.

Each row is one (filter, parameterization, order) configuration averaged over
the suite. A configuration that fails on any clip is reported with NaN metrics
and the error name; the sweep itself keeps going.
"""

import csv
import itertools

import numpy as np

from .corpus import synthetic_corpus
from .errors import MfError
from .filters import CovKind
from .pipeline import PipelineConfig, enhance_stream

CSV_HEADER = ("filter", "param", "order", "lookahead", "si_sdr_db", "seg_snr_db", "rtf")
FILTERS = ("wf", "mvdr")
PARAMS = tuple(k.value for k in CovKind)
GRIDS = {
    "default": {"orders": (5,)},
    "full": {"orders": (1, 3, 5, 8)},
}


def suite_clips(suite="synthetic", n_clips=2, duration_s=3.0, snr_db=0.0, seed=1234):
    if suite != "synthetic":
        raise ValueError(f"unknown suite {suite!r}")
    return synthetic_corpus(n_clips, duration_s, snrs=(snr_db,), seed=seed)


def grid_configs(grid="default", lookahead=2, loading=None, base=None):
    if grid not in GRIDS:
        raise ValueError(f"unknown grid {grid!r}; choose from {sorted(GRIDS)}")
    base = base or {}
    for filt, param, order in itertools.product(FILTERS, PARAMS, GRIDS[grid]["orders"]):
        opts = dict(base, filter=filt, param=param, order=order, lookahead=min(lookahead, order - 1))
        if loading is not None:
            opts["loading"] = loading
        yield PipelineConfig(**opts)


def run_config(cfg, clips):
    """Mean SI-SDR / segSNR and median RTF of one configuration over ``clips``."""
    row = {
        "filter": cfg.filter,
        "param": cfg.param,
        "order": cfg.order,
        "lookahead": cfg.lookahead,
        "error": None,
    }
    sdr, seg, rtf = [], [], []
    try:
        for clip in clips:
            res = enhance_stream(clip.noisy, clip.clean, clip.noise, cfg)
            sdr.append(res.report.si_sdr)
            seg.append(res.report.seg_snr)
            rtf.append(res.report.rtf)
    except MfError as exc:
        row["error"] = type(exc).__name__
        row["message"] = str(exc)
        sdr = seg = rtf = []
    row["si_sdr_db"] = float(np.mean(sdr)) if sdr else float("nan")
    row["seg_snr_db"] = float(np.mean(seg)) if seg else float("nan")
    row["rtf"] = float(np.median(rtf)) if rtf else float("nan")
    return row


def run_bench(suite="synthetic", grid="default", loading=None, clips=None, base=None, progress=None):
    clips = clips if clips is not None else suite_clips(suite)
    rows = []
    for cfg in grid_configs(grid, loading=loading, base=base):
        row = run_config(cfg, clips)
        rows.append(row)
        if progress:
            progress(row)
    return rows


def write_csv(rows, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_fmt(row[k]) for k in CSV_HEADER])


def _fmt(v):
    if isinstance(v, float):
        return "nan" if np.isnan(v) else f"{v:.4f}"
    return v
