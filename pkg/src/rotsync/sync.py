"""Recovery of absolute rotations from pairwise relative measurements.

The measurement graph is carried as an edge list over 1-based frame
indices.  :func:`assemble` packs it into the symmetric 3n x 3n block
observation matrix (identity diagonal blocks, each measurement and its
transpose, and the matching 0/1 pattern).  Three solvers share that
input:

* :func:`solve_rgodec` -- robust low-rank + group-sparse decomposition
  with rank 3, blockwise shrinkage of the outlier term, and rotation
  extraction from a block column of the low-rank factor;
* :func:`solve_eig` -- spectral relaxation: the three leading
  eigenvectors of the degree-normalized observation matrix;
* :func:`solve_eig_irls` -- the spectral solver wrapped in iteratively
  reweighted least squares with Cauchy weights on the residuals.

All solutions are gauge-fixed so the first frame's rotation is the
identity, which makes raw outputs comparable before any alignment.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import decomp, so3
from .errors import (
    DisconnectedGraph,
    DuplicateEdge,
    ExtractionDegenerate,
    RankDeficientInput,
    ZeroDegreeNode,
)

DEFAULT_SIGMA = 0.02
DEFAULT_OUTLIER_TOL = 1e-9
DEFAULT_IRLS_ROUNDS = 20
DEFAULT_CAUCHY_C = 2.385
_IRLS_WEIGHT_TOL = 1e-6


@dataclass
class RelativeMeasurementSet:
    """Pairwise rotation estimates over ``n`` frames.

    ``edges`` holds ``(i, j, Rij)`` tuples with 1-based indices and
    ``i < j``; ``Rij`` maps frame j's coordinates into frame i's, so the
    ideal value is ``R_i @ R_j.T``.
    """

    n: int
    edges: list

    def edge_pairs(self) -> list:
        return [(i, j) for i, j, _ in self.edges]


def check_measurements(ms: RelativeMeasurementSet, require_connected: bool = True) -> None:
    """Validate index ranges, uniqueness, and (optionally) connectivity."""
    if ms.n < 1:
        raise ValueError("need at least one frame")
    seen = set()
    parent = list(range(ms.n + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j, _ in ms.edges:
        if not (1 <= i < j <= ms.n):
            raise ValueError(f"edge ({i}, {j}) out of range for n={ms.n}")
        if (i, j) in seen:
            raise DuplicateEdge(f"edge ({i}, {j}) appears twice")
        seen.add((i, j))
        parent[find(i)] = find(j)
    if require_connected and ms.n > 1:
        root = find(1)
        for k in range(2, ms.n + 1):
            if find(k) != root:
                raise DisconnectedGraph(f"frame {k} is not reachable from frame 1")


@dataclass
class BlockObservationMatrix:
    """3n x 3n data matrix, its 0/1 pattern, and the n x n adjacency
    (diagonal set to 1)."""

    n: int
    data: np.ndarray
    pattern: np.ndarray
    adjacency: np.ndarray

    def edge_list(self) -> list:
        """Measured pairs (i, j) with i < j, 1-based, sorted."""
        bi, bj = np.nonzero(np.triu(self.adjacency, k=1))
        return [(int(a) + 1, int(b) + 1) for a, b in zip(bi, bj)]

    def block(self, i: int, j: int) -> np.ndarray:
        """3x3 block for the 1-based frame pair (i, j)."""
        return self.data[3 * (i - 1) : 3 * i, 3 * (j - 1) : 3 * j]

    def observed_entry_count(self) -> int:
        return int(round(float(self.pattern.sum())))


@dataclass
class SyncSolution:
    """Solver output: absolute rotations, per-edge labels, diagnostics.

    ``edge_labels`` maps each measured pair (i, j) to True when the edge
    was classified as an outlier.
    """

    rotations: np.ndarray
    edge_labels: dict
    method: str
    iterations: int
    runtime_seconds: float
    objective_trace: list = field(default_factory=list)
    lambda_value: float | None = None
    weights: np.ndarray | None = None
    brp_fallbacks: int = 0
    max_iter_exceeded: bool = False


def assemble(measurements: RelativeMeasurementSet) -> BlockObservationMatrix:
    """Pack a measurement set into the block observation matrix.

    Diagonal blocks are identity; block (i, j) holds the measurement and
    block (j, i) its transpose; the pattern marks the diagonal and every
    measured block.
    """
    check_measurements(measurements)
    n = measurements.n
    data = np.zeros((3 * n, 3 * n))
    pattern = np.zeros((3 * n, 3 * n))
    adjacency = np.eye(n)
    for k in range(n):
        data[3 * k : 3 * k + 3, 3 * k : 3 * k + 3] = np.eye(3)
        pattern[3 * k : 3 * k + 3, 3 * k : 3 * k + 3] = 1.0
    for i, j, R in measurements.edges:
        R = np.asarray(R, dtype=float)
        a, b = i - 1, j - 1
        data[3 * a : 3 * a + 3, 3 * b : 3 * b + 3] = R
        data[3 * b : 3 * b + 3, 3 * a : 3 * a + 3] = R.T
        pattern[3 * a : 3 * a + 3, 3 * b : 3 * b + 3] = 1.0
        pattern[3 * b : 3 * b + 3, 3 * a : 3 * a + 3] = 1.0
        adjacency[a, b] = adjacency[b, a] = 1.0
    return BlockObservationMatrix(n=n, data=data, pattern=pattern, adjacency=adjacency)


def _extract_rotations(stacked: np.ndarray) -> np.ndarray:
    """Project each 3x3 block of a 3n x 3 stack onto the rotation group
    and gauge-fix so the first frame is the identity."""
    n = stacked.shape[0] // 3
    rotations = np.empty((n, 3, 3))
    for k in range(n):
        try:
            rotations[k] = so3.project_to_so3(stacked[3 * k : 3 * k + 3])
        except RankDeficientInput as exc:
            raise ExtractionDegenerate(f"block {k + 1} is rank-deficient: {exc}") from exc
    return rotations @ rotations[0].T


def dof_check(n: int) -> tuple:
    """Parameter count of the ideal observation matrix and the minimal
    number of specified entries: both 9(2n - 1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 9 * (2 * n - 1), 9 * (2 * n - 1)


def solve_rgodec(
    obs: BlockObservationMatrix,
    lam="auto",
    sigma: float = DEFAULT_SIGMA,
    eps: float = decomp.DEFAULT_EPS,
    max_iter: int = decomp.DEFAULT_MAX_ITER,
    rng=None,
    outlier_tol: float = DEFAULT_OUTLIER_TOL,
) -> SyncSolution:
    """Robust synchronization via rank-3 + group-sparse decomposition.

    With ``lam="auto"`` the shrinkage weight is ``sigma * sqrt(2 ln m)``
    for ``m`` observed scalar entries.  Rotations are read off the block
    column of the low-rank factor at the node of maximal graph degree
    (lowest index on ties); an edge is labeled an outlier when its block
    of the sparse term has Frobenius norm above ``outlier_tol``.
    """
    t0 = time.perf_counter()
    if isinstance(lam, str):
        if lam != "auto":
            raise ValueError(f"lam must be 'auto' or a number, got {lam!r}")
        lam_value = decomp.auto_lambda(sigma, obs.observed_entry_count())
    else:
        lam_value = float(lam)
        if lam_value < 0.0:
            raise ValueError("lam must be nonnegative")

    result = decomp.rgodec(
        obs.data,
        obs.pattern,
        3,
        lam_value,
        eps=eps,
        max_iter=max_iter,
        mode="l21",
        rng=rng,
    )

    degrees = obs.adjacency.sum(axis=1) - 1.0
    col = int(np.argmax(degrees))
    rotations = _extract_rotations(result.L[:, 3 * col : 3 * col + 3])

    s1_norms = decomp.block_norms(result.S1)
    labels = {
        (i, j): bool(s1_norms[i - 1, j - 1] > outlier_tol) for i, j in obs.edge_list()
    }
    return SyncSolution(
        rotations=rotations,
        edge_labels=labels,
        method="rgodec",
        iterations=result.iterations,
        runtime_seconds=time.perf_counter() - t0,
        objective_trace=result.objective_trace,
        lambda_value=lam_value,
        brp_fallbacks=result.brp_fallbacks,
        max_iter_exceeded=result.max_iter_exceeded,
    )


def _effective_weights(obs: BlockObservationMatrix, weights) -> tuple:
    """Weighted adjacency (diagonal forced to 1, zero off the measured
    pattern) and its row-sum degrees."""
    if weights is None:
        W = obs.adjacency.copy()
    else:
        W = np.asarray(weights, dtype=float)
        if W.shape != (obs.n, obs.n):
            raise ValueError(f"weights shape {W.shape} != ({obs.n}, {obs.n})")
        if np.any(W < 0.0) or np.any(W > 1.0):
            raise ValueError("weights must lie in [0, 1]")
        if not np.allclose(W, W.T, atol=1e-12):
            raise ValueError("weights must be symmetric")
        W = W * obs.adjacency
        np.fill_diagonal(W, 1.0)
    degrees = W.sum(axis=1)
    if np.any(degrees <= 0.0):
        k = int(np.argmin(degrees))
        raise ZeroDegreeNode(f"node {k + 1} has nonpositive total weight")
    return W, degrees


def _edge_residuals(obs: BlockObservationMatrix, rotations: np.ndarray, edges) -> np.ndarray:
    """Frobenius residual ||R_i R_j^T - Rhat_ij|| per measured edge."""
    if not edges:
        return np.empty(0)
    idx_i = np.array([i - 1 for i, _ in edges])
    idx_j = np.array([j - 1 for _, j in edges])
    predicted = np.matmul(rotations[idx_i], np.transpose(rotations[idx_j], (0, 2, 1)))
    blocks = obs.data.reshape(obs.n, 3, obs.n, 3).transpose(0, 2, 1, 3)[idx_i, idx_j]
    return np.linalg.norm((predicted - blocks).reshape(len(edges), 9), axis=1)


def solve_eig(obs: BlockObservationMatrix, weights=None) -> SyncSolution:
    """Spectral synchronization.

    Normalizes the (optionally weighted) observation matrix by the degree
    matrix, takes the three leading eigenvectors (largest magnitude of
    the real spectrum), projects each stacked 3x3 block onto the rotation
    group, and gauge-fixes the first frame.  Labels every edge an inlier.
    """
    t0 = time.perf_counter()
    W, degrees = _effective_weights(obs, weights)
    dexp = np.repeat(degrees, 3)
    K = obs.data * np.repeat(np.repeat(W, 3, axis=0), 3, axis=1)
    # D^-1 K is similar to the symmetric D^-1/2 K D^-1/2: same (real)
    # eigenvalues, eigenvectors recovered by unscaling.
    sq = np.sqrt(dexp)
    sym = K / np.outer(sq, sq)
    evals, evecs = np.linalg.eigh(sym)
    top = np.argsort(-np.abs(evals), kind="stable")[:3]
    stacked = evecs[:, top] / sq[:, None]
    # The eigenbasis spans the rotations only up to an invertible 3x3
    # mixing; a reflection in it would make the blockwise nearest-rotation
    # problem degenerate (tied singular values), so orient the basis by
    # the determinant consensus of the blocks before projecting.
    if float(np.linalg.det(stacked.reshape(obs.n, 3, 3)).sum()) < 0.0:
        stacked = stacked * np.array([1.0, 1.0, -1.0])
    rotations = _extract_rotations(stacked)

    edges = obs.edge_list()
    residuals = _edge_residuals(obs, rotations, edges)
    weighted_cost = float(
        sum(W[i - 1, j - 1] * r * r for (i, j), r in zip(edges, residuals))
    )
    return SyncSolution(
        rotations=rotations,
        edge_labels={e: False for e in edges},
        method="eig",
        iterations=1,
        runtime_seconds=time.perf_counter() - t0,
        objective_trace=[weighted_cost],
    )


def cauchy_weight(residual, c: float = DEFAULT_CAUCHY_C):
    """Cauchy influence weight 1 / (1 + (r/c)^2)."""
    r = np.asarray(residual, dtype=float)
    return 1.0 / (1.0 + (r / c) ** 2)


def robust_scale(residuals) -> float:
    """Gaussian-consistent robust scale of nonnegative residuals,
    ``median(r) / 0.6745``, floored away from zero."""
    return max(float(np.median(np.asarray(residuals, dtype=float))) / 0.6745, 1e-12)


def solve_eig_irls(
    obs: BlockObservationMatrix,
    max_rounds: int = DEFAULT_IRLS_ROUNDS,
    c: float = DEFAULT_CAUCHY_C,
) -> SyncSolution:
    """Spectral solver under iteratively reweighted least squares.

    Each round re-solves with the current edge weights, then updates them
    with the Cauchy weight function applied to the residuals standardized
    by their robust scale (the tuning constant ``c`` is calibrated for
    unit-scale residuals); the degree matrix is recomputed from the
    weights every round.  Stops when the largest weight change falls
    below 1e-6 or after ``max_rounds``.  An edge ends up labeled an
    outlier when its final weight is below 0.5.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    if c <= 0.0:
        raise ValueError("c must be positive")
    t0 = time.perf_counter()
    edges = obs.edge_list()
    weights = obs.adjacency.copy()
    trace: list[float] = []
    sol = None
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        sol = solve_eig(obs, weights=weights)
        residuals = _edge_residuals(obs, sol.rotations, edges)
        trace.append(float(np.sum(residuals**2)))
        new_weights = weights.copy()
        scaled = residuals / robust_scale(residuals) if len(edges) else residuals
        for (i, j), w in zip(edges, cauchy_weight(scaled, c)):
            new_weights[i - 1, j - 1] = new_weights[j - 1, i - 1] = w
        delta = float(np.abs(new_weights - weights).max())
        weights = new_weights
        if delta < _IRLS_WEIGHT_TOL:
            break
    labels = {(i, j): bool(weights[i - 1, j - 1] < 0.5) for i, j in edges}
    return SyncSolution(
        rotations=sol.rotations,
        edge_labels=labels,
        method="eig-irls",
        iterations=rounds,
        runtime_seconds=time.perf_counter() - t0,
        objective_trace=trace,
        weights=weights,
    )
