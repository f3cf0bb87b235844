"""Pure numpy fallback for the per-bin kernels.

Loops run over the matrix order only (N <= 16); the batch axis is vectorized.
"""

import numpy as np


def hpd_factor(a, loading, rel_tol):
    a = np.asarray(a, dtype=np.complex128)
    m_count, n, _ = a.shape
    lo = np.zeros_like(a)
    diag = a[:, np.arange(n), np.arange(n)].real + loading
    tol = rel_tol * diag.sum(axis=1) / n
    ok = np.ones(m_count, dtype=bool)
    for j in range(n):
        row = lo[:, j, :j]
        d = diag[:, j] - np.sum(row.real**2 + row.imag**2, axis=1)
        bad = (d <= tol) | (d <= 0.0)
        ok &= ~bad
        d = np.sqrt(np.where(ok, d, 1.0))
        lo[:, j, j] = d
        if j + 1 < n:
            acc = a[:, j + 1 :, j] - np.einsum("mik,mk->mi", lo[:, j + 1 :, :j], row.conj())
            lo[:, j + 1 :, j] = acc / d[:, None]
    lo[~ok] = 0.0
    return lo, ok


def factor_solve(lo, b):
    lo = np.asarray(lo, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    n = lo.shape[1]
    x = np.empty_like(b)
    # failed entries carry an all-zero factor; their results are masked by the caller
    with np.errstate(divide="ignore", invalid="ignore"):
        _substitute(lo, b, x, n)
    return x


def _substitute(lo, b, x, n):
    for i in range(n):
        acc = b[:, i, :] - np.einsum("mk,mkc->mc", lo[:, i, :i], x[:, :i, :])
        x[:, i, :] = acc / lo[:, i, i, None]
    for i in range(n - 1, -1, -1):
        acc = x[:, i, :] - np.einsum("mk,mkc->mc", lo[:, i + 1 :, i].conj(), x[:, i + 1 :, :])
        x[:, i, :] = acc / lo[:, i, i, None].conj()


def lower_inverse(lo):
    lo = np.asarray(lo, dtype=np.complex128)
    n = lo.shape[1]
    y = np.zeros_like(lo)
    for j in range(n):
        y[:, j, j] = 1.0 / lo[:, j, j]
        for i in range(j + 1, n):
            acc = np.einsum("mk,mk->m", lo[:, i, j:i], y[:, j:i, j])
            y[:, i, j] = -acc / lo[:, i, i]
    return y


def outer_update(cov, x, old_weight, new_weight):
    n = cov.shape[1]
    lower = np.tril_indices(n, -1)
    # real arithmetic: numpy's vectorized complex multiply may fuse operations
    xr, xi = x.real, x.imag
    outer = (xr[:, :, None] * xr[:, None, :] + xi[:, :, None] * xi[:, None, :]) + 1j * (
        xi[:, :, None] * xr[:, None, :] - xr[:, :, None] * xi[:, None, :]
    )
    low = old_weight * cov[:, lower[0], lower[1]] + new_weight * outer[:, lower[0], lower[1]]
    cov[:, lower[0], lower[1]] = low
    cov[:, lower[1], lower[0]] = low.conj()
    idx = np.arange(n)
    cov[:, idx, idx] = old_weight * cov[:, idx, idx].real + new_weight * (
        x.real**2 + x.imag**2
    )


def compose(h):
    h = np.asarray(h, dtype=np.complex128)
    n = h.shape[1]
    phi = h @ np.conj(np.swapaxes(h, -1, -2))
    rows, cols = np.tril_indices(n, -1)
    phi[:, cols, rows] = np.conj(phi[:, rows, cols])
    idx = np.arange(n)
    phi[:, idx, idx] = np.sum(h.real**2 + h.imag**2, axis=2)
    return phi
