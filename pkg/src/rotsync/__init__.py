"""Robust synchronization of 3D rotations.

Recovers absolute orientations from a sparse, noisy, outlier-contaminated
set of pairwise relative rotations by decomposing the block observation
matrix into a rank-3 term, a group-sparse outlier term, and a completion
term; spectral and IRLS baselines, a synthetic benchmark harness, and a
small CLI round out the package.
"""

from . import decomp, evaluate, fileio, kernels, so3, sync, synth
from .decomp import (
    DecompositionResult,
    auto_lambda,
    block_soft_threshold,
    brp_lowrank_approx,
    godec,
    godec_mc,
    hard_threshold_topk,
    rgodec,
    soft_threshold,
    truncated_svd_approx,
)
from .evaluate import ErrorReport, SweepSpec, align, error_report, run_sweep
from .so3 import (
    chordal_distance,
    geodesic_distance,
    l1_single_average,
    project_to_so3,
    random_perturbation,
    random_rotation_euler,
    random_rotation_uniform,
)
from .sync import (
    BlockObservationMatrix,
    RelativeMeasurementSet,
    SyncSolution,
    assemble,
    dof_check,
    solve_eig,
    solve_eig_irls,
    solve_rgodec,
)
from .synth import GroundTruth, SynthConfig, generate, spanning_tree_uniform

__version__ = "0.1.0"
