"""Acceptance gate: one test per primary criterion, each recording a PASS/FAIL line.

The lines are printed in the terminal summary (see conftest.py) and also to
stdout as each criterion finishes.
"""

import time

import numpy as np
import pytest
from scipy.signal import lfilter

from conftest import crandn, random_gamma, random_hpd, record
from mfspeech import filterbank as fb
from mfspeech.bench import run_bench, suite_clips
from mfspeech.corpus import synthetic_corpus
from mfspeech.filters import CovKind, CovParameterization, mvdr_weights, wf_weights
from mfspeech.metrics import measure_rtf, si_sdr
from mfspeech.mfmodel import compose_phixx
from mfspeech.pipeline import PipelineConfig, enhance_stream

pytestmark = pytest.mark.acceptance


def report(name, passed, detail):
    record(name, passed, detail)
    print(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
    assert passed, f"{name}: {detail}"


def test_distortionless_suite():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    count = 0
    for n in (1, 2, 5, 8):
        m = 2500
        uu = random_hpd(rng, n, (m,))
        g = random_gamma(rng, n, (m,))
        xx = compose_phixx(rng.uniform(0, 10, m), g, uu)
        for phi in (xx, uu):
            w = mvdr_weights(phi, g)
            worst = max(worst, np.max(np.abs(np.einsum("ki,ki->k", w.conj(), g) - 1)))
        count += m
    elapsed = time.perf_counter() - t0
    report("distortionless", count == 10000 and worst <= 1e-9 and elapsed < 5.0,
           f"{count} instances x 2 forms, max |w^H g - 1| = {worst:.2e} (<= 1e-9), {elapsed:.2f} s (< 5 s)")


def test_mvdr_form_equivalence():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = 0.0
    for n in (1, 2, 3, 5, 8):
        m = 200
        uu = random_hpd(rng, n, (m,))
        g = random_gamma(rng, n, (m,))
        xx = compose_phixx(rng.uniform(0, 10, m), g, uu)
        a, b = mvdr_weights(xx, g), mvdr_weights(uu, g)
        worst = max(worst, np.max(np.abs(a - b) / np.abs(b)))
    elapsed = time.perf_counter() - t0
    report("noisy/undesired MVDR equivalence", worst <= 1e-8 and elapsed < 5.0,
           f"1000 instances, max per-entry rel. error = {worst:.2e} (<= 1e-8), {elapsed:.2f} s (< 5 s)")


def _mse(w, xx, g, phi_s):
    return phi_s - 2 * np.real(np.vdot(w, phi_s * g)) + np.real(np.vdot(w, xx @ w))


def test_wiener_optimality():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    violations = 0
    worst_gap = 0.0
    for k in range(200):
        n = 1 + k % 3
        g = random_gamma(rng, n)
        phi_s = rng.uniform(0.05, 5)
        xx = compose_phixx(phi_s, g, random_hpd(rng, n))
        w = wf_weights(xx, g, phi_s)
        best = _mse(w, xx, g, phi_s)
        analytic = phi_s - phi_s**2 * np.real(np.vdot(g, np.linalg.solve(xx, g)))
        worst_gap = max(worst_gap, abs(best - analytic) / phi_s)
        dirs = crandn(rng, 100, n)
        dirs *= 1e-3 / np.linalg.norm(dirs, axis=1, keepdims=True)
        violations += sum(_mse(w + d, xx, g, phi_s) < best for d in dirs)
    elapsed = time.perf_counter() - t0
    report("Wiener optimality", violations == 0 and worst_gap <= 1e-6 and elapsed < 10.0,
           f"200 instances x 100 directions, {violations} violations, "
           f"max |MSE - analytic|/phi_s = {worst_gap:.1e}, {elapsed:.2f} s (< 10 s)")


def test_single_tap_reductions():
    rng = np.random.default_rng(4)
    phi_s = rng.uniform(0, 10, 1000)
    phi_z = rng.uniform(1e-3, 10, 1000)
    total = (phi_s + phi_z)[:, None, None]
    g = np.ones((1000, 1))
    # inverse kinds are never loaded; direct/hermitian kinds only match with loading off
    cases = {
        "hermitian-inverse": (CovParameterization(CovKind.HERMITIAN_INVERSE, 1 / np.sqrt(total)), 1e-7),
        "inverse": (CovParameterization(CovKind.INVERSE, 1 / total), 1e-7),
        "direct": (CovParameterization(CovKind.DIRECT, total), 0.0),
        "hermitian": (CovParameterization(CovKind.HERMITIAN, np.sqrt(total)), 0.0),
    }
    wf_err = 0.0
    mvdr_exact = True
    for p, loading in cases.values():
        w = wf_weights(p, g, phi_s, loading=loading)[:, 0]
        wf_err = max(wf_err, np.max(np.abs(w - phi_s / (phi_s + phi_z))))
        mvdr_exact &= bool(np.all(mvdr_weights(p, g, loading=loading) == 1.0))
    report("single-tap reductions", wf_err <= 1e-12 and mvdr_exact,
           f"N=1 WF max error {wf_err:.1e} (<= 1e-12), N=1 MVDR == 1 exactly: {mvdr_exact}")


def _round_trip_db(x, cfg, d):
    y = fb.synthesize(fb.analyze(x, cfg), cfg)
    edge = cfg.window_len
    ref = x[edge : len(x) - d - edge]
    err = y[edge + d : len(x) - edge] - ref
    return 10 * np.log10(np.sum(err**2) / np.sum(ref**2))


def test_filterbank_round_trip():
    cfg = fb.FilterbankConfig()
    rng = np.random.default_rng(5)
    d = fb.measure_delay(cfg)
    t = np.arange(cfg.sample_rate) / cfg.sample_rate
    signals = {
        "white": rng.standard_normal(cfg.sample_rate),
        "speech-shaped": lfilter([1.0], [1.0, -0.9], rng.standard_normal(cfg.sample_rate)),
    }
    for b in range(1, cfg.num_bands + 1):
        signals[f"tone{b}"] = np.cos(2 * np.pi * b * cfg.bin_width * t + 0.3)
    errs = {k: _round_trip_db(v, cfg, d) for k, v in signals.items()}
    worst = max(errs, key=errs.get)
    x = rng.standard_normal(4800)
    lag = fb.xcorr_lag(x, fb.synthesize(fb.analyze(x, cfg), cfg), 4 * cfg.window_len)
    consistent = lag == d and fb.latency_report(cfg, 2) == pytest.approx(1000 * (lag + 2 * cfg.hop) / cfg.sample_rate)
    report("filter-bank round trip", errs[worst] <= -50 and consistent and len(signals) == 50,
           f"worst {errs[worst]:.1f} dB ({worst}; white {errs['white']:.1f}, speech-shaped "
           f"{errs['speech-shaped']:.1f}, 48 tones) <= -50 dB; measured lag {lag} == reported {d}")


@pytest.mark.slow
def test_end_to_end_oracle_corpus():
    t0 = time.perf_counter()
    clips = synthetic_corpus(n_clips=10, duration_s=5.0)
    configs = {
        "MF-MVDR": PipelineConfig(filter="mvdr", high_band="wiener"),
        "MF-WF": PipelineConfig(filter="wf", high_band="wiener"),
        "WF (single-tap)": PipelineConfig(filter="wf", order=1, lookahead=0, high_band="wiener"),
    }
    sdr = {k: [] for k in configs}
    gain = {k: [] for k in configs}
    for clip in clips:
        for name, cfg in configs.items():
            rep = enhance_stream(clip.noisy, clip.clean, clip.noise, cfg).report
            sdr[name].append(rep.si_sdr)
            gain[name].append(rep.si_sdr - rep.si_sdr_input)
    elapsed = time.perf_counter() - t0
    at0 = np.array([c.snr_db == 0.0 for c in clips])
    mean_gain0 = {k: float(np.mean(np.array(v)[at0])) for k, v in gain.items()}
    mean_sdr = {k: float(np.mean(v)) for k, v in sdr.items()}
    base = mean_sdr["WF (single-tap)"]
    parts = []
    ok = elapsed < 120.0
    for name in ("MF-MVDR", "MF-WF"):
        good_gain = mean_gain0[name] > 5.0
        good_order = mean_sdr[name] > base
        ok &= good_gain and good_order
        parts.append(f"{name}: +{mean_gain0[name]:.2f} dB at 0 dB ({'ok' if good_gain else 'NOT > 5'}), "
                     f"mean {mean_sdr[name]:.2f} dB vs single-tap {base:.2f} ({'ok' if good_order else 'NOT above'})")
    for name, v in sdr.items():
        by_snr = {s: np.mean([x for x, c in zip(v, clips) if c.snr_db == s]) for s in (-5.0, 0.0, 5.0)}
        print(f"    {name}: mean SI-SDR by input SNR " + ", ".join(f"{s:+.0f} dB: {x:.2f}" for s, x in by_snr.items()))
    report("end-to-end oracle corpus", ok, "; ".join(parts) + f"; {elapsed:.0f} s (< 120 s)")


def test_parameterization_grid():
    clips = suite_clips("synthetic", n_clips=2, duration_s=2.0)
    rows = run_bench("synthetic", "default", loading=0.0, clips=clips)
    kinds = {(r["filter"], r["param"]) for r in rows}
    full = kinds == {(f, k.value) for f in ("wf", "mvdr") for k in CovKind}
    direct_mvdr = [r for r in rows if r["filter"] == "mvdr" and r["param"] == "direct"]
    surfaced = any(r["error"] == "NotPositiveDefinite" for r in direct_mvdr)
    herm = [r for r in rows if r["param"] in ("hermitian", "hermitian-inverse")]
    herm_ok = all(r["error"] is None and np.isfinite(r["si_sdr_db"]) for r in herm)
    report("parameterization grid", full and surfaced and herm_ok,
           f"{len(rows)} rows; Direct-MVDR without loading: {direct_mvdr[0]['error']}; "
           f"Hermitian rows complete: {herm_ok}")


@pytest.mark.slow
def test_real_time_factor():
    rng = np.random.default_rng(6)
    from mfspeech.corpus import make_clip

    clip = make_clip(99, 10.0, 0.0)
    cfg = PipelineConfig(filter="mvdr", order=5, lookahead=2)

    def run():
        enhance_stream(clip.noisy, clip.clean, clip.noise, cfg)

    res = measure_rtf(run, 10.0, runs=5, warmup=1)
    from mfspeech.kernels import BACKEND

    report("real-time factor", res.median < 1.0,
           f"median RTF {res.median:.3f} over {res.runs} runs (range {res.minimum:.3f}-{res.maximum:.3f}, "
           f"{BACKEND} kernels, 10 s audio, 48 bands) < 1.0")


def test_si_sdr_examples():
    rng = np.random.default_rng(7)
    s = rng.standard_normal(24000)
    n = rng.standard_normal(24000)
    n -= np.dot(n, s) / np.dot(s, s) * s
    n *= np.sqrt(np.dot(s, s) / (100 * np.dot(n, n)))
    a, b, c = si_sdr(s, 2 * s), si_sdr(s, s + n), si_sdr(s, -s)
    report("SI-SDR examples", a == 100.0 and abs(b - 20.0) <= 1e-9 and c == 100.0,
           f"2s -> {a} dB, orthogonal 1% noise -> {b:.12f} dB, -s -> {c} dB")
