"""Command line entry point: ``mfspeech enhance | evaluate | bench``."""

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import bench as benchmod
from .errors import MfError
from .estimators import WeightSequence
from .pipeline import REF_TOLERANCE, PipelineConfig, enhance_stream
from .wavio import read_wav, write_wav

# int16 quantization of three independently rounded files
PCM16_REF_TOLERANCE = 1.5 / 32768


def _config(args):
    overrides = {
        "filter": args.filter,
        "order": args.order,
        "lookahead": args.lookahead,
        "param": args.param,
        "loading": getattr(args, "loading", None),
        "high_band": getattr(args, "high_band", None),
    }
    if args.config:
        return PipelineConfig.from_toml(args.config, **overrides)
    return PipelineConfig.from_mapping({}, **overrides)


def _load_triplet(noisy_path, clean_path=None, noise_path=None):
    noisy, pcm = read_wav(noisy_path)
    clean = noise = None
    tol = REF_TOLERANCE
    if clean_path:
        clean, c_pcm = read_wav(clean_path)
        pcm = pcm or c_pcm
    if noise_path:
        noise, n_pcm = read_wav(noise_path)
        pcm = pcm or n_pcm
    if pcm:
        tol = PCM16_REF_TOLERANCE
    return noisy, clean, noise, tol


def _enhance_one(noisy_path, clean_path, noise_path, cfg, weights_path=None, rtf_runs=0):
    noisy, clean, noise, tol = _load_triplet(noisy_path, clean_path, noise_path)
    weights = WeightSequence.from_file(weights_path) if weights_path else None
    return enhance_stream(noisy, clean, noise, cfg, weights=weights, ref_tol=tol, rtf_runs=rtf_runs), clean


def cmd_enhance(args):
    cfg = _config(args)
    res, _ = _enhance_one(args.inp, args.clean, args.noise, cfg, args.weights, rtf_runs=args.rtf_runs)
    write_wav(args.out, res.output, cfg.filterbank.sample_rate)
    line = res.report.to_json_line(args.inp, cfg.filter, cfg.order, cfg.lookahead)
    if args.report:
        with open(args.report, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
    print(line)
    return 0


def read_manifest(path):
    """Tab-separated rows ``noisy [clean [noise]]``; a header row starting with 'noisy' is skipped."""
    rows = []
    base = os.path.dirname(os.path.abspath(path))
    with open(path, encoding="utf-8") as fh:
        for rec in csv.reader(fh, delimiter="\t"):
            rec = [r.strip() for r in rec if r.strip()]
            if not rec or rec[0].startswith("#") or rec[0].lower() == "noisy":
                continue
            rows.append([p if os.path.isabs(p) else os.path.join(base, p) for p in rec[:3]])
    return rows


def _evaluate_row(row, cfg, out_dir):
    noisy, clean, noise = (row + [None, None])[:3]
    try:
        res, clean_sig = _enhance_one(noisy, clean, noise, cfg)
    except (MfError, OSError, ValueError) as exc:
        return json.dumps({"file": noisy, "error": type(exc).__name__, "message": str(exc)})
    stem = os.path.splitext(os.path.basename(noisy))[0]
    if out_dir:
        d = res.latency_samples
        n = len(res.output) - d
        write_wav(os.path.join(out_dir, "enhanced", stem + ".wav"), res.output[d:], cfg.filterbank.sample_rate)
        if clean_sig is not None:
            write_wav(os.path.join(out_dir, "clean", stem + ".wav"), clean_sig[:n], cfg.filterbank.sample_rate)
    return res.report.to_json_line(noisy, cfg.filter, cfg.order, cfg.lookahead)


def cmd_evaluate(args):
    cfg = _config(args)
    rows = read_manifest(args.manifest)
    if args.pairs:
        os.makedirs(os.path.join(args.pairs, "enhanced"), exist_ok=True)
        os.makedirs(os.path.join(args.pairs, "clean"), exist_ok=True)
    failures = 0
    with open(args.out, "w", encoding="utf-8") as fh:
        if args.jobs > 1:
            with ProcessPoolExecutor(args.jobs) as pool:
                lines = pool.map(_evaluate_row, rows, [cfg] * len(rows), [args.pairs] * len(rows))
                for line in lines:
                    failures += '"error"' in line
                    fh.write(line + "\n")
                    fh.flush()
        else:
            for row in rows:
                line = _evaluate_row(row, cfg, args.pairs)
                failures += '"error"' in line
                fh.write(line + "\n")
                fh.flush()
    if failures:
        print(f"error: {failures} of {len(rows)} manifest rows failed", file=sys.stderr)
        return 1
    return 0


def cmd_bench(args):
    base = {}
    if args.config:
        base = {k: v for k, v in vars(PipelineConfig.from_toml(args.config)).items()
                if k in ("smoothing", "f_mf", "wf_mode", "high_band")}
    clips = benchmod.suite_clips(args.suite, n_clips=args.clips, duration_s=args.duration)

    def progress(row):
        if row["error"]:
            print(f"{row['filter']}/{row['param']}/N={row['order']}: {row['error']}: {row['message']}",
                  file=sys.stderr)

    rows = benchmod.run_bench(args.suite, args.grid, loading=args.loading, clips=clips, base=base,
                              progress=progress)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            benchmod.write_csv(rows, fh)
    else:
        benchmod.write_csv(rows, sys.stdout)
    return 0


def _filter_args(p):
    p.add_argument("--filter", choices=["df", "wf", "mvdr", "mvdr-noisy"])
    p.add_argument("--order", type=int)
    p.add_argument("--lookahead", type=int)
    p.add_argument("--param", choices=benchmod.PARAMS)
    p.add_argument("--loading", type=float)
    p.add_argument("--high-band", dest="high_band", choices=["passthrough", "wiener"])
    p.add_argument("--config", help="TOML file with PipelineConfig fields")


def build_parser():
    parser = argparse.ArgumentParser(prog="mfspeech", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", help="enhance one WAV file")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--clean")
    p.add_argument("--noise")
    p.add_argument("--weights", help="MFW1 weight file for --filter df")
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="append the JSON report line to this file")
    p.add_argument("--rtf-runs", dest="rtf_runs", type=int, default=5)
    _filter_args(p)
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("evaluate", help="enhance every row of a TSV manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default="report.jsonl")
    p.add_argument("--pairs", help="directory for enhanced/ and clean/ WAV pairs")
    p.add_argument("--jobs", type=int, default=1)
    _filter_args(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="covariance parameterization grid")
    p.add_argument("--suite", default="synthetic", choices=["synthetic"])
    p.add_argument("--grid", default="default", choices=sorted(benchmod.GRIDS))
    p.add_argument("--loading", type=float)
    p.add_argument("--clips", type=int, default=2)
    p.add_argument("--duration", type=float, default=3.0)
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MfError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
