"""Per-bin statistics providers for the multi-frame filters.

The oracle estimator reads time-aligned clean and noise references and
recursively averages their stacked outer products. It fills the slot a
learned estimator would occupy; its contract is :class:`EstimatorOutput`
per frame, batched over frequency bins.
"""

import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import OrderMismatch, WeightFileError
from .filters import DIAG_LOADING, CovKind, CovParameterization, FilterKind
from .linalg import PIVOT_REL_TOL, hermitize
from .mfmodel import ifc_batch

WEIGHT_MAGIC = b"MFW1"
_HEADER = struct.Struct("<4sIII")


@dataclass
class EstimatorOutput:
    """Statistics for one frame, batched over ``M`` bins.

    gamma: (M, N) IFC vectors, entry at the selection index equal to 1.
    phi_s: (M,) speech PSD.
    cov: covariance required by the configured filter (noisy for Wiener and
        noisy-MVDR, undesired for MVDR).
    df_raw: (M, N) raw deep-filter coefficients.
    """

    gamma: Optional[np.ndarray] = None
    phi_s: Optional[np.ndarray] = None
    cov: Optional[CovParameterization] = None
    df_raw: Optional[np.ndarray] = None
    speech_present: Optional[np.ndarray] = None


def parameterize(cov, kind, loading=DIAG_LOADING):
    """Express a batch of covariances in one of the four parameterizations.

    Inverse and factor forms are computed from ``cov + loading*I`` so that they
    exist for rank-deficient estimates, the way a learned estimate is full rank.
    """
    kind = CovKind(kind)
    if kind is CovKind.DIRECT:
        return CovParameterization(kind, hermitize(cov))
    lo, ok = kernels.hpd_factor(cov, loading, PIVOT_REL_TOL)
    if not ok.all():
        # indefinite beyond the loading (rounding on near-singular input): clip to PSD
        w, v = np.linalg.eigh(cov[~ok])
        fixed = (v * np.maximum(w, 0.0)[:, None, :]) @ np.conj(np.swapaxes(v, -1, -2))
        fixed_lo, _ = kernels.hpd_factor(hermitize(fixed), max(loading, 1e-12), PIVOT_REL_TOL)
        lo[~ok] = fixed_lo
    if kind is CovKind.HERMITIAN:
        return CovParameterization(kind, lo)
    inv_lo = kernels.lower_inverse(lo)
    h = np.conj(np.swapaxes(inv_lo, -1, -2))
    if kind is CovKind.HERMITIAN_INVERSE:
        return CovParameterization(kind, h)
    return CovParameterization(kind, hermitize(h @ inv_lo))


class RecursiveCovEstimator:
    """Recursively averaged covariance per bin, ``Phi <- lam*Phi + (1-lam) x x^H``."""

    def __init__(self, num_bins, order, smoothing=0.96):
        if not 0.0 <= smoothing < 1.0:
            raise ValueError("smoothing must lie in [0, 1)")
        self.smoothing = smoothing
        self.cov = np.zeros((num_bins, order, order), dtype=np.complex128)

    def update(self, x):
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != self.cov.shape[:2]:
            raise OrderMismatch(f"expected stacked vectors of shape {self.cov.shape[:2]}, got {x.shape}")
        kernels.outer_update(self.cov, x, self.smoothing, 1.0 - self.smoothing)
        return self.cov


class OracleEstimator:
    """Oracle statistics from clean and noise references.

    Speech and noise covariances are averaged separately; the noisy covariance
    is their sum and the undesired covariance removes the correlated speech
    term, ``Phi_uu = Phi_xx - phi_s gamma gamma^H``. Bins without speech get
    ``gamma = e`` and ``phi_s = 0``.
    """

    def __init__(self, num_bins, order, selection_index=0, smoothing=0.96,
                 filter_kind=FilterKind.MVDR_NOISE, cov_kind=CovKind.HERMITIAN_INVERSE,
                 oracle_loading=DIAG_LOADING):
        self.order = order
        self.selection_index = selection_index
        self.filter_kind = FilterKind(filter_kind)
        self.cov_kind = CovKind(cov_kind)
        self.oracle_loading = oracle_loading
        self.speech = RecursiveCovEstimator(num_bins, order, smoothing)
        self.noise = RecursiveCovEstimator(num_bins, order, smoothing)

    @property
    def phi_ss(self):
        return self.speech.cov

    @property
    def phi_zz(self):
        return self.noise.cov

    def statistics(self):
        """Current ``(gamma, phi_s, phi_xx, phi_uu, present)`` without parameterization."""
        gamma, phi_s, present = ifc_batch(self.speech.cov, self.selection_index)
        phi_xx = self.speech.cov + self.noise.cov
        rank1 = phi_s[:, None, None] * gamma[:, :, None] * np.conj(gamma[:, None, :])
        # both terms are exactly Hermitian, so is their difference
        phi_uu = phi_xx - rank1
        return gamma, phi_s, phi_xx, phi_uu, present

    def update(self, clean_mf, noise_mf):
        self.speech.update(clean_mf)
        self.noise.update(noise_mf)
        gamma, phi_s, phi_xx, phi_uu, present = self.statistics()
        target = phi_uu if self.filter_kind is FilterKind.MVDR_NOISE else phi_xx
        cov = parameterize(target, self.cov_kind, self.oracle_loading)
        return EstimatorOutput(gamma=gamma, phi_s=phi_s, cov=cov, speech_present=present)


def passthrough_df(oracle_w, order=None):
    """Wrap externally supplied deep-filter coefficients."""
    w = np.asarray(oracle_w, dtype=np.complex128)
    if order is not None and w.shape[-1] != order:
        raise OrderMismatch(f"expected {order} taps, got {w.shape[-1]}")
    return EstimatorOutput(df_raw=w)


def write_weight_file(path, weights):
    """Write ``(frames, bins, N)`` complex weights as little-endian float32 pairs behind an MFW1 header."""
    w = np.asarray(weights, dtype=np.complex128)
    if w.ndim != 3:
        raise WeightFileError("weights must have shape (frames, bins, N)")
    frames, bins, order = w.shape
    data = np.empty((frames, bins, order, 2), dtype="<f4")
    data[..., 0] = w.real
    data[..., 1] = w.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(WEIGHT_MAGIC, order, bins, frames))
        fh.write(data.tobytes())


def read_weight_file(path):
    """Read an MFW1 weight file into a ``(frames, bins, N)`` complex array."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise WeightFileError("truncated header")
        magic, order, bins, frames = _HEADER.unpack(head)
        if magic != WEIGHT_MAGIC:
            raise WeightFileError(f"bad magic {magic!r}")
        payload = fh.read()
    expected = frames * bins * order * 2 * 4
    if len(payload) != expected:
        raise WeightFileError(f"expected {expected} payload bytes, got {len(payload)}")
    data = np.frombuffer(payload, dtype="<f4").reshape(frames, bins, order, 2)
    return data[..., 0].astype(np.float64) + 1j * data[..., 1].astype(np.float64)


class WeightSequence:
    """Frame-synchronous deep-filter coefficients, e.g. loaded from a weight file."""

    def __init__(self, weights):
        self.weights = np.asarray(weights, dtype=np.complex128)

    @classmethod
    def from_file(cls, path):
        return cls(read_weight_file(path))

    def __len__(self):
        return self.weights.shape[0]

    def at(self, t, num_bins, order):
        if t >= len(self):
            raise WeightFileError(f"weight file has {len(self)} frames, frame {t} requested")
        w = self.weights[t]
        if w.shape[0] < num_bins or w.shape[1] != order:
            raise WeightFileError(
                f"weight file holds {w.shape[0]} bins x {w.shape[1]} taps, need {num_bins} x {order}"
            )
        return passthrough_df(w[:num_bins], order)
