import numpy as np
import pytest
from scipy.signal import lfilter

from conftest import crandn
from mfspeech import filterbank as fb
from mfspeech.errors import OrderMismatch, WeightFileError
from mfspeech.estimators import (
    OracleEstimator,
    RecursiveCovEstimator,
    WeightSequence,
    parameterize,
    passthrough_df,
    read_weight_file,
    write_weight_file,
)
from mfspeech.filters import CovKind, FilterKind, resolve_cov, wf_weights
from mfspeech.linalg import hermitian_compose
from mfspeech.mfmodel import stack_frames


def test_zero_memory_single_update(rng):
    est = OracleEstimator(2, 3, smoothing=0.0)
    c = crandn(rng, 2, 3)
    est.update(c, np.zeros((2, 3)))
    # scalar products: numpy's vectorized complex multiply may fuse and round differently
    ref = np.array([[[complex(a) * complex(b).conjugate() for b in row] for a in row] for row in c])
    assert np.array_equal(est.phi_ss, ref)


def test_clean_zero_stream(rng):
    est = OracleEstimator(4, 3, selection_index=1, filter_kind=FilterKind.WIENER)
    for _ in range(20):
        out = est.update(np.zeros((4, 3)), crandn(rng, 4, 3))
    assert not np.any(out.phi_s)
    assert np.array_equal(out.gamma, np.tile([0, 1, 0], (4, 1)))
    assert not np.any(wf_weights(resolve_cov(out.cov), out.gamma, out.phi_s))


def test_order_mismatch():
    with pytest.raises(OrderMismatch):
        RecursiveCovEstimator(2, 3).update(np.zeros((2, 4)))


def test_state_stays_hermitian(rng):
    est = RecursiveCovEstimator(5, 4)
    for _ in range(50):
        cov = est.update(crandn(rng, 5, 4))
    assert np.array_equal(cov, np.conj(np.swapaxes(cov, 1, 2)))
    assert np.all(np.linalg.eigvalsh(cov) >= -1e-12)


@pytest.mark.parametrize("kind", list(CovKind))
def test_parameterizations_agree(rng, kind):
    h = crandn(rng, 6, 4, 4)
    cov = hermitian_compose(h)
    p = parameterize(cov, kind)
    b = crandn(rng, 6, 4)
    ref = np.linalg.solve(cov + 1e-7 * np.eye(4), b[..., None])[..., 0]
    loading = 0.0 if kind is CovKind.HERMITIAN else 1e-7
    assert np.allclose(resolve_cov(p, loading).apply_inverse(b), ref, rtol=1e-7)


def test_parameterize_rank_deficient(rng):
    x = crandn(rng, 3, 4)
    cov = x[:, :, None] * x[:, None, :].conj()
    for kind in (CovKind.HERMITIAN, CovKind.HERMITIAN_INVERSE, CovKind.INVERSE):
        assert resolve_cov(parameterize(cov, kind), 0.0).ok.all()


def _stationary_streams(rng, seconds=3.0):
    n = int(24000 * seconds)
    clean = lfilter([1.0], [1.0, -0.95], rng.standard_normal(n))
    noise = lfilter([1.0, 0.5], [1.0], rng.standard_normal(n))
    return clean, noise


def test_uncorrelated_source_consistency(rng):
    clean, noise = _stationary_streams(rng)
    S = fb.analyze(clean).frames[:, :16]
    Z = fb.analyze(noise).frames[:, :16]
    X = fb.analyze(clean + noise).frames[:, :16]
    ss, zs, xs = (stack_frames(a, 5) for a in (S, Z, X))
    oracle = OracleEstimator(16, 5, smoothing=0.99)
    mix = RecursiveCovEstimator(16, 5, smoothing=0.99)
    # Frobenius error of the time-averaged estimate over the last second
    acc_x = acc_sum = 0.0
    for k in range(len(xs)):
        oracle.update(ss[k], zs[k])
        mix.update(xs[k])
        if k >= len(xs) - 1000:
            acc_x = acc_x + mix.cov
            acc_sum = acc_sum + oracle.phi_ss + oracle.phi_zz
    err = np.linalg.norm(acc_x - acc_sum, axis=(1, 2)) / np.linalg.norm(acc_sum, axis=(1, 2))
    assert np.all(err <= 0.10)


def test_undesired_covariance_solves(rng):
    clean, noise = _stationary_streams(rng, 2.0)
    S = fb.analyze(clean).frames[:, :16]
    Z = fb.analyze(noise).frames[:, :16]
    ss, zs = stack_frames(S, 5), stack_frames(Z, 5)
    est = OracleEstimator(16, 5, selection_index=2, filter_kind=FilterKind.MVDR_NOISE, cov_kind=CovKind.DIRECT)
    ok = total = 0
    for k in range(100, len(ss)):
        out = est.update(ss[k], zs[k])
        r = resolve_cov(out.cov, strict=False)
        ok += np.count_nonzero(r.ok)
        total += r.ok.size
    assert ok / total >= 0.99


def test_deterministic(rng):
    c, z = crandn(rng, 50, 3, 4), crandn(rng, 50, 3, 4)
    runs = []
    for _ in range(2):
        est = OracleEstimator(3, 4, selection_index=2)
        runs.append([est.update(c[k], z[k]).cov.payload.copy() for k in range(50)])
    assert all(np.array_equal(a, b) for a, b in zip(*runs))


def test_passthrough_df():
    assert np.array_equal(passthrough_df([1, 0, 0]).df_raw, [1, 0, 0])
    assert not np.any(passthrough_df(np.zeros(3)).df_raw)
    with pytest.raises(OrderMismatch):
        passthrough_df([1, 0], order=3)


def test_weight_file_round_trip(tmp_path, rng):
    w = crandn(rng, 7, 5, 3).astype(np.complex64).astype(np.complex128)
    path = tmp_path / "w.mfw"
    write_weight_file(path, w)
    raw = path.read_bytes()
    assert raw[:4] == b"MFW1" and len(raw) == 16 + w.size * 8
    assert np.array_equal(read_weight_file(path), w)
    seq = WeightSequence.from_file(path)
    assert len(seq) == 7
    assert np.array_equal(seq.at(4, 5, 3).df_raw, w[4])


def test_weight_file_errors(tmp_path):
    bad = tmp_path / "bad.mfw"
    bad.write_bytes(b"NOPE" + bytes(12))
    with pytest.raises(WeightFileError):
        read_weight_file(bad)
    short = tmp_path / "short.mfw"
    short.write_bytes(b"MFW1" + np.array([2, 2, 2], "<u4").tobytes() + bytes(8))
    with pytest.raises(WeightFileError):
        read_weight_file(short)
