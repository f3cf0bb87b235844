"""Multi-frame filter synthesis and application.

All functions accept a single filter (vectors of shape ``(N,)``) or a batch
with leading axes, e.g. one filter per frequency bin ``(M, N)``.
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateDenominator, NotPositiveDefinite, OrderMismatch
from .linalg import PIVOT_REL_TOL, hermitian_compose, hermitize

DIAG_LOADING = 1e-7
DENOMINATOR_FLOOR = 1e-30


class CovKind(enum.Enum):
    DIRECT = "direct"
    INVERSE = "inverse"
    HERMITIAN = "hermitian"
    HERMITIAN_INVERSE = "hermitian-inverse"

    @property
    def is_inverse(self):
        return self in (CovKind.INVERSE, CovKind.HERMITIAN_INVERSE)

    @property
    def is_factor(self):
        return self in (CovKind.HERMITIAN, CovKind.HERMITIAN_INVERSE)


class FilterKind(enum.Enum):
    DEEP_FILTER = "df"
    WIENER = "wf"
    MVDR_NOISY = "mvdr-noisy"
    MVDR_NOISE = "mvdr"

    @property
    def is_mvdr(self):
        return self in (FilterKind.MVDR_NOISY, FilterKind.MVDR_NOISE)


@dataclass
class CovParameterization:
    """A covariance as delivered by an estimator.

    ``payload`` is the covariance (``DIRECT``), its inverse (``INVERSE``), or a
    factor ``H`` with ``H H^H`` equal to the covariance (``HERMITIAN``) or to its
    inverse (``HERMITIAN_INVERSE``).
    """

    kind: CovKind
    payload: np.ndarray

    def __post_init__(self):
        self.kind = CovKind(self.kind)
        self.payload = np.asarray(self.payload, dtype=np.complex128)


class ResolvedCov:
    """Apply ``Phi^{-1}`` to vectors, via a triangular factor or a stored inverse.

    ``ok`` flags, per batch entry, whether the factorization succeeded; failed
    entries map every vector to zero.
    """

    def __init__(self, factor=None, inverse=None, ok=None):
        if (factor is None) == (inverse is None):
            raise ValueError("exactly one of factor or inverse is required")
        self.factor = factor
        self.inverse = inverse
        base = factor if factor is not None else inverse
        self.single = base.ndim == 2
        self.ok = np.ones(base.shape[:-2], dtype=bool) if ok is None else ok

    @property
    def order(self):
        base = self.factor if self.factor is not None else self.inverse
        return base.shape[-1]

    def apply_inverse(self, rhs):
        rhs = np.asarray(rhs, dtype=np.complex128)
        if rhs.shape[-1] != self.order:
            raise OrderMismatch(f"vector length {rhs.shape[-1]} != order {self.order}")
        if self.inverse is not None:
            return np.einsum("...ij,...j->...i", self.inverse, rhs)
        if self.single:
            return kernels.factor_solve(self.factor[None], rhs[None])[0]
        out = kernels.factor_solve(self.factor, rhs)
        out[~self.ok] = 0.0
        return out


def resolve_cov(p, loading=DIAG_LOADING, strict=True):
    """Turn a parameterized covariance into something that applies ``Phi^{-1}``.

    Direct and Hermitian kinds are loaded by ``loading`` and factorized;
    inverse kinds are used by multiplication only and never loaded.

    Raises:
        NotPositiveDefinite: if ``strict`` and any factorization fails.
    """
    kind = p.kind
    if kind is CovKind.INVERSE:
        return ResolvedCov(inverse=p.payload)
    if kind is CovKind.HERMITIAN_INVERSE:
        return ResolvedCov(inverse=hermitian_compose(p.payload))
    cov = hermitian_compose(p.payload) if kind is CovKind.HERMITIAN else p.payload
    single = cov.ndim == 2
    lo, ok = kernels.hpd_factor(cov[None] if single else cov, loading, PIVOT_REL_TOL)
    if strict and not ok.all():
        raise NotPositiveDefinite(
            f"{np.count_nonzero(~ok)} of {ok.size} covariance(s) not invertible (kind={kind.value}, loading={loading:g})"
        )
    if single:
        return ResolvedCov(factor=lo[0], ok=ok[0])
    return ResolvedCov(factor=lo, ok=ok)


def _as_resolved(phi, loading):
    if isinstance(phi, ResolvedCov):
        return phi
    if isinstance(phi, CovParameterization):
        return resolve_cov(phi, loading)
    return resolve_cov(CovParameterization(CovKind.DIRECT, hermitize(phi)), loading)


def wf_weights(phi_xx, gamma, phi_s, mode="scaled", loading=DIAG_LOADING):
    """Multi-frame Wiener filter ``phi_s * Phi_xx^{-1} gamma``.

    ``mode="strict"`` drops the ``phi_s`` factor. A raw matrix for ``phi_xx``
    is treated as a direct estimate and loaded before factorization.
    """
    resolved = _as_resolved(phi_xx, loading)
    w = resolved.apply_inverse(gamma)
    if mode == "scaled":
        w = np.asarray(phi_s, dtype=np.float64)[..., None] * w
    elif mode != "strict":
        raise ValueError(f"unknown Wiener mode {mode!r}")
    return w


def mvdr_weights(phi, gamma, loading=DIAG_LOADING, on_degenerate="raise"):
    """MVDR filter ``Phi^{-1} gamma / (gamma^H Phi^{-1} gamma)``.

    The same expression serves the noisy-covariance and the undesired-covariance
    forms; only the covariance passed in differs. ``on_degenerate="mask"`` zeroes
    filters whose denominator magnitude is below ``1e-30`` instead of raising.
    """
    resolved = _as_resolved(phi, loading)
    gamma = np.asarray(gamma, dtype=np.complex128)
    num = resolved.apply_inverse(gamma)
    den = np.einsum("...i,...i->...", np.conj(gamma), num)
    bad = ~(np.abs(den) > DENOMINATOR_FLOOR)
    if np.any(bad):
        if on_degenerate == "raise":
            raise DegenerateDenominator("gamma^H Phi^-1 gamma vanishes")
        den = np.where(bad, 1.0, den)
        num = np.where(bad[..., None], 0.0, num)
    w = num / den[..., None]
    # numpy's complex division is not exact even for real divisors (a/a != 1);
    # where the denominator is real, divide the components separately
    real = den.imag == 0
    if np.any(real):
        d = den.real[real][..., None]
        w.real[real] = num.real[real] / d
        w.imag[real] = num.imag[real] / d
    return w


def df_weights(raw):
    """Deep-filter path: the estimated coefficients are used as they are."""
    return np.asarray(raw, dtype=np.complex128)


def apply_weights(w, x):
    """Filter output ``w^H x`` along the last axis."""
    w = np.asarray(w)
    x = np.asarray(x)
    if w.shape[-1] != x.shape[-1]:
        raise OrderMismatch(f"filter order {w.shape[-1]} != vector length {x.shape[-1]}")
    return np.einsum("...i,...i->...", np.conj(w), x)


def selection_vector(order, index=0):
    e = np.zeros(order, dtype=np.complex128)
    e[index] = 1.0
    return e
