"""Small complex Hermitian linear algebra (order N <= 16).

Covariances are plain ``(N, N)`` complex arrays; batched variants take a
leading batch axis. Only the lower triangle of a covariance is treated as
authoritative; the upper triangle is always rebuilt as its conjugate.
"""

import functools

import numpy as np

from . import kernels
from .errors import NotPositiveDefinite, OrderMismatch

MAX_ORDER = 16
PIVOT_REL_TOL = 1e-14


def _check_square(a):
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise OrderMismatch(f"expected square matrices, got shape {a.shape}")
    if a.shape[-1] < 1 or a.shape[-1] > MAX_ORDER:
        raise OrderMismatch(f"order must be in [1, {MAX_ORDER}], got {a.shape[-1]}")


@functools.lru_cache(maxsize=None)
def _strict_lower(n):
    rows, cols = np.tril_indices(n, -1)
    return rows, cols, np.arange(n)


def hermitize(a):
    """Rebuild the upper triangle from the lower one; the diagonal is made real."""
    out = np.array(a, dtype=np.complex128)
    rows, cols, diag = _strict_lower(out.shape[-1])
    out[..., cols, rows] = np.conj(out[..., rows, cols])
    out[..., diag, diag] = out[..., diag, diag].real
    return out


def is_hermitian(a, atol=1e-12):
    a = np.asarray(a)
    return bool(np.all(np.abs(a - np.conj(np.swapaxes(a, -1, -2))) <= atol))


def hermitian_compose(factor):
    """Return ``H @ H^H``, a Hermitian PSD matrix for any square factor ``H``."""
    h = np.asarray(factor, dtype=np.complex128)
    _check_square(h)
    if h.ndim == 2:
        return kernels.compose(h[None])[0]
    return kernels.compose(h.reshape(-1, *h.shape[-2:])).reshape(h.shape)


def diag_load(cov, epsilon):
    """Return ``cov + epsilon * I``."""
    if not np.isfinite(epsilon):
        raise ValueError("epsilon must be finite")
    cov = np.array(cov, dtype=np.complex128)
    n = cov.shape[-1]
    idx = np.arange(n)
    cov[..., idx, idx] += epsilon
    return cov


def accumulate_outer(cov, x, old_weight, new_weight):
    """Recursive average ``old_weight * cov + new_weight * x x^H``.

    Works on a single ``(N, N)`` matrix or an ``(M, N, N)`` batch; the input is not modified.
    """
    cov = np.array(cov, dtype=np.complex128, order="C")
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != cov.shape[:-1]:
        raise OrderMismatch(f"vector shape {x.shape} does not match covariance {cov.shape}")
    single = cov.ndim == 2
    batch = cov[None] if single else cov
    kernels.outer_update(batch, x[None] if single else x, old_weight, new_weight)
    return batch[0] if single else batch


def hpd_factor(cov, loading=0.0):
    """Lower Cholesky factor of a Hermitian positive-definite matrix.

    Raises:
        NotPositiveDefinite: if a pivot is at or below ``1e-14 * trace / N``.
    """
    cov = np.asarray(cov, dtype=np.complex128)
    _check_square(cov)
    single = cov.ndim == 2
    lo, ok = kernels.hpd_factor(cov[None] if single else cov.reshape(-1, *cov.shape[-2:]), loading, PIVOT_REL_TOL)
    if not ok.all():
        raise NotPositiveDefinite(f"{np.count_nonzero(~ok)} matrix(es) not positive definite; apply diagonal loading")
    return lo[0] if single else lo.reshape(cov.shape)


def solve_hpd(cov, rhs):
    """Solve ``cov @ v = rhs`` through a Hermitian triangular factorization.

    >>> solve_hpd(np.array([[2, 1], [1, 2]]), np.array([3, 3]))
    array([1.+0.j, 1.+0.j])
    """
    cov = np.asarray(cov, dtype=np.complex128)
    rhs = np.asarray(rhs, dtype=np.complex128)
    if rhs.shape != cov.shape[:-1]:
        raise OrderMismatch(f"rhs shape {rhs.shape} does not match covariance {cov.shape}")
    lo = hpd_factor(cov)
    if cov.ndim == 2:
        return kernels.factor_solve(lo[None], rhs[None])[0]
    return kernels.factor_solve(lo, rhs)

