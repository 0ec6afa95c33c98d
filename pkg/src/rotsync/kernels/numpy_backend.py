"""Pure-NumPy implementations of the shrinkage kernels.

These mirror the compiled kernels in ``rotsync._native_kernels`` and are
the fallback when the extension is not built.
"""

import numpy as np


def soft_threshold(M, lam, mask=None):
    """Entrywise shrinkage sign(x) * max(|x| - lam, 0).

    With ``mask`` given, operates on ``M * mask`` (a 0/1 array).
    """
    X = M if mask is None else M * mask
    return np.sign(X) * np.maximum(np.abs(X) - lam, 0.0)


def block_soft_threshold(M, lam, mask=None):
    """Shrink each 3x3 block B to B * max(1 - lam/||B||_F, 0).

    Zero blocks stay zero.  With ``mask`` given, operates on ``M * mask``.
    The caller guarantees dimensions divisible by 3.
    """
    X = M if mask is None else M * mask
    nb, mb = X.shape[0] // 3, X.shape[1] // 3
    B = X.reshape(nb, 3, mb, 3)
    norms = np.sqrt(np.einsum("iajb,iajb->ij", B, B))
    factor = np.zeros_like(norms)
    nz = norms > 0.0
    factor[nz] = np.maximum(1.0 - lam / norms[nz], 0.0)
    return (B * factor[:, None, :, None]).reshape(X.shape)


def soft_threshold_stats(M, lam, mask=None):
    """Entrywise shrinkage plus its residual statistics.

    Returns ``(S, fit, shrunk_sum)``: the shrunk matrix, the squared norm
    of what shrinkage leaves behind (``sum min(lam, |x|)^2``, which equals
    ``||X - S||_F^2``), and ``sum |S|`` (the L1 norm of the output).
    """
    X = M if mask is None else M * mask
    a = np.abs(X)
    kept = np.minimum(a, lam)
    fit = float(np.einsum("ij,ij->", kept, kept))
    S = np.sign(X) * (a - kept)
    shrunk = float((a - kept).sum())
    return S, fit, shrunk


def block_soft_threshold_stats(M, lam, mask=None):
    """Blockwise shrinkage plus its residual statistics.

    Returns ``(S, fit, shrunk_sum)`` with ``fit = sum min(lam, ||B||)^2``
    (the squared Frobenius norm of the un-shrunk remainder) and
    ``shrunk_sum = sum max(||B|| - lam, 0)`` (the block-norm sum of S).
    """
    X = M if mask is None else M * mask
    nb, mb = X.shape[0] // 3, X.shape[1] // 3
    B = X.reshape(nb, 3, mb, 3)
    norms = np.sqrt(np.einsum("iajb,iajb->ij", B, B))
    kept = np.minimum(norms, lam)
    fit = float(np.einsum("ij,ij->", kept, kept))
    over = norms - kept
    shrunk = float(over.sum())
    factor = np.zeros_like(norms)
    nz = norms > 0.0
    factor[nz] = over[nz] / norms[nz]
    S = (B * factor[:, None, :, None]).reshape(X.shape)
    return S, fit, shrunk
