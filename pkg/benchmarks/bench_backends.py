"""Compare the compiled and numpy kernel backends.

Kernel timings use the pipeline's batch shape (16 bins, order 5); the chain
timing runs the default oracle MVDR configuration on 10 s of audio with each
backend selected through MFSPEECH_PURE_PYTHON in a fresh interpreter.

    python benchmarks/bench_backends.py [--repeat 2000] [--seconds 10]
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from mfspeech import kernels

CHAIN = """
import json, time
from mfspeech.corpus import make_clip
from mfspeech.kernels import BACKEND
from mfspeech.metrics import measure_rtf
from mfspeech.pipeline import PipelineConfig, enhance_stream
clip = make_clip(99, {seconds}, 0.0)
cfg = PipelineConfig()
res = measure_rtf(lambda: enhance_stream(clip.noisy, clip.clean, clip.noise, cfg), {seconds}, runs=5)
print(json.dumps({{"backend": BACKEND, "rtf": res.median, "min": res.minimum, "max": res.maximum}}))
"""


def kernel_table(repeat, bins=16, order=5):
    rng = np.random.default_rng(0)
    h = rng.standard_normal((bins, order, order)) + 1j * rng.standard_normal((bins, order, order))
    a = np.ascontiguousarray(h @ np.conj(np.swapaxes(h, 1, 2)))
    x = np.ascontiguousarray(h[:, :, 0])
    b = np.ascontiguousarray(x[:, :, None])
    rows = []
    for name in ("python", "cython"):
        try:
            impl = kernels.get_backend(name)
        except ImportError:
            print(f"{name} backend not available", file=sys.stderr)
            continue
        lo, _ = impl.hpd_factor(a, 1e-7, 1e-14)
        cov = a.copy()
        cases = {
            "hpd_factor": lambda: impl.hpd_factor(a, 1e-7, 1e-14),
            "factor_solve": lambda: impl.factor_solve(lo, b),
            "lower_inverse": lambda: impl.lower_inverse(lo),
            "compose": lambda: impl.compose(h),
            "outer_update": lambda: impl.outer_update(cov, x, 0.96, 0.04),
        }
        for kernel, fn in cases.items():
            t = min(timeit.repeat(fn, number=repeat, repeat=3)) / repeat
            rows.append((kernel, name, t * 1e6))
    return rows


def chain_rtf(seconds):
    out = {}
    for pure in (False, True):
        env = dict(os.environ)
        env.pop("MFSPEECH_PURE_PYTHON", None)
        if pure:
            env["MFSPEECH_PURE_PYTHON"] = "1"
        proc = subprocess.run([sys.executable, "-c", CHAIN.format(seconds=seconds)], env=env,
                              capture_output=True, text=True, check=True)
        rec = json.loads(proc.stdout.strip().splitlines()[-1])
        out[rec["backend"]] = rec
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=2000)
    ap.add_argument("--seconds", type=float, default=10.0)
    ap.add_argument("--skip-chain", action="store_true")
    args = ap.parse_args(argv)

    rows = kernel_table(args.repeat)
    by_kernel = {}
    for kernel, backend, us in rows:
        by_kernel.setdefault(kernel, {})[backend] = us
    print(f"{'kernel':<14}{'python us':>12}{'cython us':>12}{'speedup':>10}")
    for kernel, t in by_kernel.items():
        py, cy = t.get("python"), t.get("cython")
        speed = f"{py / cy:9.1f}x" if py and cy else "      n/a"
        print(f"{kernel:<14}{py or float('nan'):12.2f}{cy or float('nan'):12.2f}{speed}")

    if not args.skip_chain:
        print(f"\nfull oracle MVDR chain, {args.seconds:g} s audio (median of 5 runs)")
        for backend, rec in chain_rtf(args.seconds).items():
            print(f"  {backend:<8} RTF {rec['rtf']:.3f}  (range {rec['min']:.3f}-{rec['max']:.3f})")


if __name__ == "__main__":
    main()
