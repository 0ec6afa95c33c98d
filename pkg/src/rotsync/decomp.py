"""Low-rank and sparse matrix decomposition kernels and solvers.

Builds the pieces used by the synchronization pipeline: a randomized
rank-r approximation (bilateral random projections with a power scheme),
truncated SVD as oracle and fallback, entrywise / top-k / 3x3-blockwise
shrinkage, and three alternating block-coordinate solvers:

* :func:`godec` -- low-rank plus sparse splitting of a complete matrix,
  with the sparse term constrained either by cardinality or by an L1
  weight;
* :func:`godec_mc` -- low-rank completion of a partially observed matrix,
  where the sparse term carries the filled-in unobserved entries;
* :func:`rgodec` -- the robust combination of both: one sparse term for
  outliers on the observed pattern, one for the completion of the
  unobserved complement.

Every solver performs at least one iteration, checks its relative
residual after each sweep, and records the objective value per sweep.
Because each coordinate block is minimized exactly (the randomized
rank-r step is refreshed with a truncated SVD whenever it would regress
the fit), the recorded objective is non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import BadBlockShape

DEFAULT_POWER_ITERS = 2
DEFAULT_EPS = 1e-10
DEFAULT_MAX_ITER = 100

_PROJ_COND_TOL = 1e-12
_PROJ_RETRIES = 3
_GUARD_RTOL = 1e-12


@dataclass
class DecompositionResult:
    """Triple (L, S1, S2) with per-iteration objective values.

    ``S2`` is all-zero for :func:`godec` and ``S1`` is all-zero for
    :func:`godec_mc`.  ``brp_fallbacks`` counts how often the randomized
    rank-r step was replaced by a truncated SVD (singular projection
    basis, or a fit regression caught by the monotonicity guard).
    """

    L: np.ndarray
    S1: np.ndarray
    S2: np.ndarray
    objective_trace: list = field(default_factory=list)
    iterations: int = 0
    max_iter_exceeded: bool = False
    brp_fallbacks: int = 0

    @property
    def converged(self) -> bool:
        return not self.max_iter_exceeded


def _sq_norm(A) -> float:
    return float(np.einsum("ij,ij->", A, A))


def truncated_svd_approx(M, r: int) -> np.ndarray:
    """Best rank-r approximation of ``M`` in the Frobenius norm."""
    M = np.asarray(M, dtype=float)
    if r > min(M.shape):
        raise ValueError(f"r={r} exceeds min shape {min(M.shape)}")
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    return (U[:, :r] * s[:r]) @ Vt[:r]


def _lowrank_step(target, target_sq, r, power_iters, rng, prev_fit):
    """Rank-r approximation via bilateral random projection.

    Draws a Gaussian test matrix, runs the power scheme
    ``Y1 = (M M^T)^q M A1`` by alternating multiplications, and projects
    ``M`` onto the span of ``Y1`` through its QR factor.  A numerically
    singular basis triggers up to 3 fresh draws, then a truncated-SVD
    fallback.

    With ``prev_fit`` given, guards monotonicity: since the projection
    residual is ``||M||^2 - ||Q^T M||^2``, a randomized step that would
    fit its target worse than the previous iterate did is replaced by the
    exact truncated-SVD minimizer.  Returns ``(L, fallbacks)``.
    """
    cols = target.shape[1]
    for _ in range(_PROJ_RETRIES):
        A1 = rng.standard_normal((cols, r))
        Y1 = target @ A1
        for _ in range(power_iters):
            Y1 = target @ (target.T @ Y1)
        Q, R = np.linalg.qr(Y1)
        d = np.abs(np.diag(R))
        if not (d.size and d.max() > 0.0 and d.min() / d.max() > _PROJ_COND_TOL):
            continue
        B = Q.T @ target
        if prev_fit is not None:
            fit_mid = target_sq - float(np.einsum("ij,ij->", B, B))
            # The comparison noise scales with ||target||^2 (both sides
            # are computed by large cancelling sums), not with the fit.
            if fit_mid > prev_fit * (1.0 + _GUARD_RTOL) + _GUARD_RTOL * target_sq:
                return truncated_svd_approx(target, r), 1
        return Q @ B, 0
    return truncated_svd_approx(target, r), 1


def brp_lowrank_approx(M, r: int, power_iters: int = DEFAULT_POWER_ITERS, rng=None) -> np.ndarray:
    """Randomized rank-r approximation of ``M``; deterministic given seed."""
    M = np.asarray(M, dtype=float)
    if r > min(M.shape):
        raise ValueError(f"r={r} exceeds min shape {min(M.shape)}")
    rng = np.random.default_rng(rng)
    L, _ = _lowrank_step(M, None, int(r), int(power_iters), rng, None)
    return L


def soft_threshold(M, lam: float) -> np.ndarray:
    """Entrywise shrinkage sign(x) * max(|x| - lam, 0)."""
    if lam < 0.0:
        raise ValueError("lam must be nonnegative")
    return kernels.soft_threshold(np.asarray(M, dtype=float), float(lam))


def hard_threshold_topk(M, k: int) -> np.ndarray:
    """Keep the k entries of largest absolute value, zero the rest.

    Ties are broken by row-major position, smaller index first.
    """
    M = np.asarray(M, dtype=float)
    if k < 0 or k > M.size:
        raise ValueError(f"k={k} out of range for {M.size} entries")
    out = np.zeros_like(M)
    if k == 0:
        return out
    flat = M.ravel()
    order = np.argsort(-np.abs(flat), kind="stable")[:k]
    out.ravel()[order] = flat[order]
    return out


def block_soft_threshold(M, lam: float) -> np.ndarray:
    """Shrink each 3x3 block B to B * max(1 - lam/||B||_F, 0).

    Raises:
        BadBlockShape: if the dimensions are not multiples of 3.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] % 3 or M.shape[1] % 3:
        raise BadBlockShape(f"shape {M.shape} is not blockwise 3x3")
    if lam < 0.0:
        raise ValueError("lam must be nonnegative")
    return kernels.block_soft_threshold(M, float(lam))


def block_norms(M) -> np.ndarray:
    """Frobenius norm of each 3x3 block, as an (n/3, m/3) array."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] % 3 or M.shape[1] % 3:
        raise BadBlockShape(f"shape {M.shape} is not blockwise 3x3")
    B = M.reshape(M.shape[0] // 3, 3, M.shape[1] // 3, 3)
    return np.sqrt(np.einsum("iajb,iajb->ij", B, B))


def auto_lambda(sigma: float, m: int) -> float:
    """Shrinkage weight sigma * sqrt(2 ln m) for m observed entries."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    return float(sigma) * float(np.sqrt(2.0 * np.log(m)))


def godec(
    X,
    r: int,
    *,
    card: int | None = None,
    lam: float | None = None,
    eps: float = DEFAULT_EPS,
    max_iter: int = DEFAULT_MAX_ITER,
    power_iters: int = DEFAULT_POWER_ITERS,
    rng=None,
) -> DecompositionResult:
    """Low-rank plus sparse splitting of a complete data matrix.

    Alternates the rank-r approximation of ``X - S`` with the sparse
    update of ``X - L``: top-``card`` hard thresholding in cardinality
    mode, entrywise shrinkage by ``lam`` in weighted mode.  Stops when
    ``||X - L - S||_F^2 / ||X||_F^2 <= eps`` or after ``max_iter``
    sweeps (flagged, not fatal).
    """
    if (card is None) == (lam is None):
        raise ValueError("give exactly one of card= or lam=")
    X = np.ascontiguousarray(X, dtype=float)
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    rng = np.random.default_rng(rng)
    norm2 = _sq_norm(X)

    L = X.copy()
    S = np.zeros_like(X)
    zeros = np.zeros_like(X)
    target = np.empty_like(X)
    resid = np.empty_like(X)
    trace: list[float] = []
    prev_fit = None
    fallbacks = 0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        target_sq = kernels.build_residual_target(X, S, zeros, target)
        L, fb = _lowrank_step(target, target_sq, r, power_iters, rng, prev_fit)
        fallbacks += fb
        np.subtract(X, L, out=resid)
        if card is not None:
            S = hard_threshold_topk(resid, card)
            fit = _sq_norm(resid - S)
            obj = fit
        else:
            S, fit, shrunk = kernels.soft_threshold_stats(resid, float(lam))
            obj = 0.5 * fit + lam * shrunk
        trace.append(obj)
        prev_fit = fit
        if (fit / norm2 if norm2 > 0.0 else 0.0) <= eps:
            converged = True
            break
    return DecompositionResult(
        L=L,
        S1=S,
        S2=np.zeros_like(X),
        objective_trace=trace,
        iterations=it,
        max_iter_exceeded=not converged,
        brp_fallbacks=fallbacks,
    )


def _check_pattern(X, omega):
    X = np.ascontiguousarray(X, dtype=float)
    omega = np.ascontiguousarray(omega, dtype=float)
    if omega.shape != X.shape:
        raise ValueError(f"pattern shape {omega.shape} != data shape {X.shape}")
    if not np.all((omega == 0.0) | (omega == 1.0)):
        raise ValueError("pattern entries must be 0 or 1")
    if np.any(X[omega == 0.0] != 0.0):
        raise ValueError("data must be zero outside the observed pattern")
    return X, omega


def godec_mc(
    X,
    omega,
    r: int,
    *,
    eps: float = DEFAULT_EPS,
    max_iter: int = DEFAULT_MAX_ITER,
    power_iters: int = DEFAULT_POWER_ITERS,
    rng=None,
) -> DecompositionResult:
    """Low-rank completion of a partially observed matrix.

    ``X`` must be zero outside the 0/1 pattern ``omega``.  Alternates the
    rank-r approximation of ``X - S`` with ``S = -L`` on the unobserved
    complement, so the residual is only measured on the pattern.
    """
    X, omega = _check_pattern(X, omega)
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    rng = np.random.default_rng(rng)
    comp = 1.0 - omega
    norm2 = _sq_norm(X)

    L = X.copy()
    S = np.zeros_like(X)
    target = np.empty_like(X)
    resid = np.empty_like(X)
    trace: list[float] = []
    prev_fit = None
    fallbacks = 0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        np.subtract(X, S, out=target)
        target_sq = _sq_norm(target)
        L, fb = _lowrank_step(target, target_sq, r, power_iters, rng, prev_fit)
        fallbacks += fb
        np.multiply(L, comp, out=S)
        np.negative(S, out=S)
        np.subtract(X, L, out=resid)
        resid *= omega
        fit = _sq_norm(resid)
        trace.append(fit)
        prev_fit = fit
        if (fit / norm2 if norm2 > 0.0 else 0.0) <= eps:
            converged = True
            break
    return DecompositionResult(
        L=L,
        S1=np.zeros_like(X),
        S2=S,
        objective_trace=trace,
        iterations=it,
        max_iter_exceeded=not converged,
        brp_fallbacks=fallbacks,
    )


def rgodec(
    X,
    omega,
    r: int,
    lam: float,
    *,
    eps: float = DEFAULT_EPS,
    max_iter: int = DEFAULT_MAX_ITER,
    mode: str = "l21",
    power_iters: int = DEFAULT_POWER_ITERS,
    rng=None,
) -> DecompositionResult:
    """Robust completion: low-rank term, outlier term, completion term.

    Each sweep updates, in order: the rank-r approximation of
    ``X - S1 - S2``; the outlier term ``S1`` by shrinking the residual on
    the observed pattern (entrywise in ``mode="l1"``, per 3x3 block in
    ``mode="l21"``); and the completion term ``S2 = -L`` on the
    unobserved complement.  The support constraints (``S1`` zero off the
    pattern, ``S2`` zero on it) hold after every sweep by construction.
    """
    if mode not in ("l1", "l21"):
        raise ValueError(f"mode must be 'l1' or 'l21', got {mode!r}")
    X, omega = _check_pattern(X, omega)
    if mode == "l21" and (X.shape[0] % 3 or X.shape[1] % 3):
        raise BadBlockShape(f"shape {X.shape} is not blockwise 3x3")
    if lam < 0.0:
        raise ValueError("lam must be nonnegative")
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    rng = np.random.default_rng(rng)
    comp = 1.0 - omega
    norm2 = _sq_norm(X)

    # The completion term is carried as Lcomp = L * comp (so S2 = -Lcomp);
    # the next low-rank target X - S1 - S2 is then X - S1 + Lcomp, built
    # in one fused pass together with its squared norm.
    L = X.copy()
    S1 = np.zeros_like(X)
    Lcomp = np.zeros_like(X)
    target = np.empty_like(X)
    resid = np.empty_like(X)
    trace: list[float] = []
    prev_fit = None
    fallbacks = 0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        target_sq = kernels.build_residual_target(X, S1, Lcomp, target)
        L, fb = _lowrank_step(target, target_sq, r, power_iters, rng, prev_fit)
        fallbacks += fb
        np.subtract(X, L, out=resid)
        if mode == "l1":
            S1, fit, shrunk = kernels.soft_threshold_stats(resid, float(lam), mask=omega)
        else:
            S1, fit, shrunk = kernels.block_soft_threshold_stats(resid, float(lam), mask=omega)
        np.multiply(L, comp, out=Lcomp)
        trace.append(0.5 * fit + lam * shrunk)
        prev_fit = fit
        if (fit / norm2 if norm2 > 0.0 else 0.0) <= eps:
            converged = True
            break
    return DecompositionResult(
        L=L,
        S1=S1,
        S2=-Lcomp,
        objective_trace=trace,
        iterations=it,
        max_iter_exceeded=not converged,
        brp_fallbacks=fallbacks,
    )
