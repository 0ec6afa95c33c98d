"""Shrinkage kernels with a compiled fast path and a NumPy fallback.

The compiled backend (``rotsync._native_kernels``, built from Cython) is
selected automatically at import when available; otherwise the NumPy
implementation is used.  :func:`use_backend` switches explicitly, which
the benchmark and the backend-equivalence tests rely on.

Backends agree to floating-point roundoff (1e-12 relative), not bitwise:
the blockwise norm accumulates in a different order.  Within one backend
every kernel is deterministic.
"""

from __future__ import annotations

import numpy as np

from . import numpy_backend

try:
    from rotsync import _native_kernels as _native
except ImportError:
    _native = None

HAVE_NATIVE = _native is not None

_active = "native" if HAVE_NATIVE else "numpy"


def available_backends() -> tuple[str, ...]:
    return ("numpy", "native") if HAVE_NATIVE else ("numpy",)


def active_backend() -> str:
    return _active


def use_backend(name: str) -> None:
    if name not in available_backends():
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    global _active
    _active = name


def _as_c(M):
    return np.ascontiguousarray(M, dtype=np.float64)


def soft_threshold(M, lam: float, mask=None) -> np.ndarray:
    """Entrywise shrinkage sign(x) * max(|x| - lam, 0) of ``M`` (or
    ``M * mask`` when a 0/1 mask is given)."""
    if _active == "numpy":
        return numpy_backend.soft_threshold(M, lam, mask)
    M = _as_c(M)
    out = np.empty_like(M)
    if mask is None:
        _native.soft_threshold(M, float(lam), out)
    else:
        _native.soft_threshold_masked(M, _as_c(mask), float(lam), out)
    return out


def block_soft_threshold(M, lam: float, mask=None) -> np.ndarray:
    """Shrink each 3x3 block B of ``M`` (or ``M * mask``) to
    ``B * max(1 - lam/||B||_F, 0)``; zero blocks stay zero."""
    if _active == "numpy":
        return numpy_backend.block_soft_threshold(M, lam, mask)
    M = _as_c(M)
    out = np.empty_like(M)
    if mask is None:
        _native.block_soft_threshold(M, float(lam), out)
    else:
        _native.block_soft_threshold_masked(M, _as_c(mask), float(lam), out)
    return out


def soft_threshold_stats(M, lam: float, mask=None):
    """Entrywise shrinkage fused with its residual statistics.

    Returns ``(S, fit, shrunk_sum)`` where ``fit = sum min(lam, |x|)^2``
    (the squared norm of what shrinkage leaves behind) and
    ``shrunk_sum = ||S||_1``.
    """
    if _active == "numpy":
        return numpy_backend.soft_threshold_stats(M, lam, mask)
    M = _as_c(M)
    out = np.empty_like(M)
    if mask is None:
        fit, shrunk = _native.soft_threshold_stats(M, float(lam), out)
    else:
        fit, shrunk = _native.soft_threshold_stats_masked(M, _as_c(mask), float(lam), out)
    return out, fit, shrunk


def block_soft_threshold_stats(M, lam: float, mask=None):
    """Blockwise shrinkage fused with its residual statistics.

    Returns ``(S, fit, shrunk_sum)`` where ``fit = sum min(lam, ||B||)^2``
    and ``shrunk_sum`` is the block-norm sum of ``S``.
    """
    if _active == "numpy":
        return numpy_backend.block_soft_threshold_stats(M, lam, mask)
    M = _as_c(M)
    out = np.empty_like(M)
    if mask is None:
        fit, shrunk = _native.block_soft_threshold_stats(M, float(lam), out)
    else:
        fit, shrunk = _native.block_soft_threshold_stats_masked(
            M, _as_c(mask), float(lam), out
        )
    return out, fit, shrunk


def build_residual_target(X, S1, Lcomp, out):
    """``out = X - S1 + Lcomp`` in one pass; returns ||out||_F^2."""
    if _active == "numpy":
        np.subtract(X, S1, out=out)
        out += Lcomp
        return float(np.einsum("ij,ij->", out, out))
    return float(_native.build_residual_target(_as_c(X), _as_c(S1), _as_c(Lcomp), out))
