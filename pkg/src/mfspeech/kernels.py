"""Backend selection for the hot per-bin kernels.

The compiled Cython module is used when it was built; otherwise the numpy
fallback is imported. Set ``MFSPEECH_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _pykernels

if os.environ.get("MFSPEECH_PURE_PYTHON"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

__all__ = ["BACKEND", "hpd_factor", "factor_solve", "lower_inverse", "outer_update", "compose", "get_backend"]


def get_backend(name=None):
    """Return the kernel module by name ("cython" or "python"); default is the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def hpd_factor(a, loading=0.0, rel_tol=1e-14):
    """Batched lower Cholesky factor of ``a + loading*I``.

    Args:
        a: (M, N, N) Hermitian matrices; only the lower triangle is read.
        loading: diagonal loading added before factorization.
        rel_tol: a pivot at or below ``rel_tol * trace/N`` marks the matrix as
            not positive definite.

    Returns:
        (factor, ok): factor is (M, N, N) lower triangular, zero where ``ok`` is False.
    """
    return _impl.hpd_factor(np.ascontiguousarray(a, dtype=np.complex128), float(loading), float(rel_tol))


def factor_solve(lo, b):
    """Solve ``L L^H x = b`` for (M, N, N) factors and (M, N) or (M, N, K) right-hand sides."""
    b = np.asarray(b, dtype=np.complex128)
    vec = b.ndim == 2
    if vec:
        b = b[:, :, None]
    x = _impl.factor_solve(np.ascontiguousarray(lo, dtype=np.complex128), np.ascontiguousarray(b))
    return x[:, :, 0] if vec else x


def lower_inverse(lo):
    return _impl.lower_inverse(np.ascontiguousarray(lo, dtype=np.complex128))


def outer_update(cov, x, old_weight, new_weight):
    """In-place recursive average ``cov <- old*cov + new*x x^H`` over a batch."""
    if not (cov.flags.c_contiguous and cov.dtype == np.complex128):
        raise TypeError("cov must be a C-contiguous complex128 array")
    _impl.outer_update(cov, np.ascontiguousarray(x, dtype=np.complex128), float(old_weight), float(new_weight))
    return cov


def compose(h):
    """Batched ``H H^H`` with an exactly Hermitian result."""
    return _impl.compose(np.ascontiguousarray(h, dtype=np.complex128))
