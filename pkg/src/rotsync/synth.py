"""Synthetic synchronization instances with controlled noise, outliers,
and missing data.

An instance starts from ``n`` ground-truth rotations (random Euler angles
or Haar-uniform).  The edge set always contains a uniformly random
spanning tree, so the graph stays connected by construction; the
remaining pairs are kept independently with the probability that makes
the expected retained fraction of all n(n-1)/2 pairs equal to
``1 - missing_fraction``.  A ``floor(outlier_fraction * |edges|)``-sized
uniform subset of the edges (tree edges included) is replaced by
Haar-uniform rotations; every other edge carries the true relative
rotation right-multiplied by a perturbation with angle uniform in the
noise range and axis uniform on the sphere.

Generation is a pure function of the configuration: identical configs
give bitwise identical instances.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig
from .so3 import rotation_from_quaternion
from .sync import RelativeMeasurementSet

_MODES = ("euler", "haar")


@dataclass(frozen=True)
class SynthConfig:
    n: int
    missing_fraction: float = 0.0
    outlier_fraction: float = 0.0
    noise_min_deg: float = 0.0
    noise_max_deg: float = 0.0
    ground_truth_mode: str = "euler"
    seed: int = 0

    def validate(self) -> None:
        if self.n < 1:
            raise InvalidConfig("n must be >= 1")
        if not (0.0 <= self.missing_fraction < 1.0):
            raise InvalidConfig("missing_fraction must lie in [0, 1)")
        if not (0.0 <= self.outlier_fraction <= 1.0):
            raise InvalidConfig("outlier_fraction must lie in [0, 1]")
        if not (0.0 <= self.noise_min_deg <= self.noise_max_deg <= 180.0):
            raise InvalidConfig("need 0 <= noise_min_deg <= noise_max_deg <= 180")
        if self.ground_truth_mode not in _MODES:
            raise InvalidConfig(f"ground_truth_mode must be one of {_MODES}")


@dataclass
class GroundTruth:
    rotations: np.ndarray        # (n, 3, 3)
    outlier_edges: set           # {(i, j)} subset of the generated edges


def spanning_tree_uniform(n: int, rng: np.random.Generator) -> list:
    """Uniformly random labeled spanning tree on n nodes (decoded from a
    random Pruefer sequence); edges are 1-based with i < j."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return []
    if n == 2:
        return [(1, 2)]
    prufer = rng.integers(0, n, size=n - 2)
    degree = np.ones(n, dtype=int)
    for x in prufer:
        degree[x] += 1
    leaves = [k for k in range(n) if degree[k] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in prufer:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, x) + 1, max(leaf, x) + 1))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, int(x))
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((min(u, v) + 1, max(u, v) + 1))
    return sorted(edges)


def _haar_rotations(rng: np.random.Generator, count: int) -> np.ndarray:
    q = rng.standard_normal((count, 4))
    norms = np.linalg.norm(q, axis=1)
    for k in np.nonzero(norms < 1e-12)[0]:
        v = rng.standard_normal(4)
        while np.linalg.norm(v) < 1e-12:
            v = rng.standard_normal(4)
        q[k] = v
        norms[k] = np.linalg.norm(v)
    q /= norms[:, None]
    return np.stack([rotation_from_quaternion(row) for row in q]) if count else np.empty((0, 3, 3))


def _euler_rotations(rng: np.random.Generator, count: int) -> np.ndarray:
    u = rng.random((count, 3))
    alpha = 2.0 * np.pi * u[:, 0]
    beta = np.pi * (u[:, 1] - 0.5)
    gamma = 2.0 * np.pi * u[:, 2]
    ca, sa = np.cos(alpha), np.sin(alpha)
    cb, sb = np.cos(beta), np.sin(beta)
    cg, sg = np.cos(gamma), np.sin(gamma)
    R = np.empty((count, 3, 3))
    R[:, 0, 0] = ca * cb
    R[:, 0, 1] = ca * sb * sg - sa * cg
    R[:, 0, 2] = ca * sb * cg + sa * sg
    R[:, 1, 0] = sa * cb
    R[:, 1, 1] = sa * sb * sg + ca * cg
    R[:, 1, 2] = sa * sb * cg - ca * sg
    R[:, 2, 0] = -sb
    R[:, 2, 1] = cb * sg
    R[:, 2, 2] = cb * cg
    return R


def _perturbations(rng: np.random.Generator, count: int, min_deg: float, max_deg: float) -> np.ndarray:
    """Batch of rotations with angle uniform in [min_deg, max_deg] and
    axis uniform on the sphere (Rodrigues form)."""
    axes = rng.standard_normal((count, 3))
    norms = np.linalg.norm(axes, axis=1)
    for k in np.nonzero(norms < 1e-12)[0]:
        v = rng.standard_normal(3)
        while np.linalg.norm(v) < 1e-12:
            v = rng.standard_normal(3)
        axes[k] = v
        norms[k] = np.linalg.norm(v)
    axes /= norms[:, None]
    angles = np.radians(min_deg + (max_deg - min_deg) * rng.random(count))
    c, s = np.cos(angles), np.sin(angles)
    x, y, z = axes[:, 0], axes[:, 1], axes[:, 2]
    one_c = 1.0 - c
    R = np.empty((count, 3, 3))
    R[:, 0, 0] = c + x * x * one_c
    R[:, 0, 1] = x * y * one_c - z * s
    R[:, 0, 2] = x * z * one_c + y * s
    R[:, 1, 0] = y * x * one_c + z * s
    R[:, 1, 1] = c + y * y * one_c
    R[:, 1, 2] = y * z * one_c - x * s
    R[:, 2, 0] = z * x * one_c - y * s
    R[:, 2, 1] = z * y * one_c + x * s
    R[:, 2, 2] = c + z * z * one_c
    return R


def noise_entry_sigma(noise_min_deg: float, noise_max_deg: float) -> float:
    """RMS of a single residual entry under the perturbation noise model.

    A perturbation by angle t moves a rotation by Frobenius norm
    ``2 sqrt(2) sin(t/2)`` spread over 9 entries; this averages
    ``sin^2(t/2)`` over the angle range.
    """
    a = np.radians(noise_min_deg)
    b = np.radians(noise_max_deg)
    if b > a:
        mean_sin2 = 0.5 * (1.0 - (np.sin(b) - np.sin(a)) / (b - a))
    else:
        mean_sin2 = np.sin(0.5 * a) ** 2
    return float(2.0 * np.sqrt(2.0) / 3.0 * np.sqrt(mean_sin2))


def generate(config: SynthConfig) -> tuple:
    """Sample one synchronization instance; returns the measurement set
    and its ground truth."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    n = config.n

    if config.ground_truth_mode == "haar":
        rotations = _haar_rotations(rng, n)
    else:
        rotations = _euler_rotations(rng, n)

    tree = spanning_tree_uniform(n, rng)
    tree_set = set(tree)
    extras = [
        (i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1) if (i, j) not in tree_set
    ]
    total_pairs = n * (n - 1) // 2
    target = (1.0 - config.missing_fraction) * total_pairs
    if extras:
        p = min(max((target - len(tree)) / len(extras), 0.0), 1.0)
        keep = rng.random(len(extras)) < p
        edges = sorted(tree + [e for e, k in zip(extras, keep) if k])
    else:
        edges = list(tree)

    m = len(edges)
    n_out = int(np.floor(config.outlier_fraction * m))
    out_idx = set(int(k) for k in rng.choice(m, size=n_out, replace=False)) if n_out else set()

    outlier_rots = _haar_rotations(rng, n_out)
    inlier_noise = _perturbations(rng, m - n_out, config.noise_min_deg, config.noise_max_deg)

    measured = []
    outlier_edges = set()
    oi = ii = 0
    for k, (i, j) in enumerate(edges):
        if k in out_idx:
            measured.append((i, j, outlier_rots[oi]))
            outlier_edges.add((i, j))
            oi += 1
        else:
            true_rel = rotations[i - 1] @ rotations[j - 1].T
            measured.append((i, j, true_rel @ inlier_noise[ii]))
            ii += 1

    ms = RelativeMeasurementSet(n=n, edges=measured)
    return ms, GroundTruth(rotations=rotations, outlier_edges=outlier_edges)
