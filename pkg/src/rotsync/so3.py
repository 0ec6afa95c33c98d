"""Operations on 3D rotation matrices.

Rotations are plain ``(3, 3)`` float64 arrays with ``R @ R.T = I`` and
``det(R) = 1``.  The module provides the nearest-rotation projection,
angular and chordal metrics, Haar / Euler / perturbation sampling, the
matrix exponential and logarithm with stable small-angle and near-pi
branches, and a Weiszfeld-style geodesic L1 mean.

All sampling functions take a ``numpy.random.Generator`` and are
bit-reproducible for a fixed seed; nothing here keeps global state.
"""

from __future__ import annotations

import numpy as np

from .errors import EmptyInput, InvalidRange, RankDeficientInput

ORTHONORMALITY_TOL = 1e-12

_RANK_TOL = 1e-12
_SMALL_ANGLE = 1e-6       # radians; below this, use series for log/exp factors
_NEAR_PI = 1e-6           # radians from pi; below this, use the quaternion branch
_MEDIAN_FLOOR = 1e-8      # radians; Weiszfeld weight regularization
_MEDIAN_STEP_TOL = 1e-10  # radians; Weiszfeld stopping threshold
_MEDIAN_MAX_ITER = 100


def is_rotation(R, tol: float = ORTHONORMALITY_TOL) -> bool:
    """True if ``R`` is a 3x3 rotation matrix within ``tol``."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    return orthonormality_defect(R) <= tol


def orthonormality_defect(R) -> float:
    """Max of the entrywise defect of ``R R^T - I`` and ``|det(R) - 1|``."""
    R = np.asarray(R, dtype=float)
    return float(max(np.abs(R @ R.T - np.eye(3)).max(), abs(np.linalg.det(R) - 1.0)))


def hat(v) -> np.ndarray:
    """Skew-symmetric matrix of a 3-vector."""
    v = np.asarray(v, dtype=float).reshape(3)
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def vee(S) -> np.ndarray:
    """Inverse of :func:`hat`."""
    S = np.asarray(S, dtype=float)
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def rot_x(angle_rad: float) -> np.ndarray:
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle_rad: float) -> np.ndarray:
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle_rad: float) -> np.ndarray:
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def project_to_so3(M) -> np.ndarray:
    """Nearest rotation matrix to ``M`` in the Frobenius norm.

    Uses the sign-corrected orthogonal factor of the SVD, so inputs whose
    closest orthogonal matrix has negative determinant still map into the
    rotation group.

    Raises:
        RankDeficientInput: if the smallest singular value is <= 1e-12.
    """
    M = np.asarray(M, dtype=float)
    U, s, Vt = np.linalg.svd(M)
    if s[-1] <= _RANK_TOL:
        raise RankDeficientInput(f"smallest singular value {s[-1]:.3e} <= {_RANK_TOL:.0e}")
    d = np.sign(np.linalg.det(U @ Vt))
    return (U * np.array([1.0, 1.0, d])) @ Vt


def rotation_angle_rad(R) -> float:
    """Rotation angle of ``R`` in radians, in [0, pi].

    Computed as atan2 of the norm of the skew part against the trace term,
    which stays accurate near both 0 and pi.
    """
    R = np.asarray(R, dtype=float)
    s = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    c = 0.5 * (R[0, 0] + R[1, 1] + R[2, 2] - 1.0)
    return float(np.arctan2(np.linalg.norm(s), c))


def geodesic_distance(A, B) -> float:
    """Angular distance between two rotations in degrees, in [0, 180].

    This is the rotation angle of ``B A^T``.
    """
    C = np.asarray(B, dtype=float) @ np.asarray(A, dtype=float).T
    return float(np.degrees(rotation_angle_rad(C)))


def chordal_distance(A, B) -> float:
    """Frobenius distance between the two rotation matrices."""
    return float(np.linalg.norm(np.asarray(A, dtype=float) - np.asarray(B, dtype=float)))


def so3_exp(v) -> np.ndarray:
    """Rodrigues exponential of an axis-angle vector, with small-angle series."""
    v = np.asarray(v, dtype=float).reshape(3)
    theta = float(np.linalg.norm(v))
    K = hat(v)
    if theta < _SMALL_ANGLE:
        a = 1.0 - theta**2 / 6.0 + theta**4 / 120.0
        b = 0.5 - theta**2 / 24.0 + theta**4 / 720.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / theta**2
    return np.eye(3) + a * K + b * (K @ K)


def _quaternion_from_rotation(R) -> np.ndarray:
    """Unit quaternion (w, x, y, z) with w >= 0, via the stable branch on
    the largest of trace and diagonal entries."""
    R = np.asarray(R, dtype=float)
    t = R[0, 0] + R[1, 1] + R[2, 2]
    if t > 0.0:
        r = np.sqrt(1.0 + t)
        w = 0.5 * r
        s = 0.5 / r
        q = np.array([w, (R[2, 1] - R[1, 2]) * s, (R[0, 2] - R[2, 0]) * s, (R[1, 0] - R[0, 1]) * s])
    else:
        i = int(np.argmax(np.diag(R)))
        j, k = (i + 1) % 3, (i + 2) % 3
        r = np.sqrt(max(1.0 + R[i, i] - R[j, j] - R[k, k], 0.0))
        s = 0.5 / r
        q = np.empty(4)
        q[0] = (R[k, j] - R[j, k]) * s
        q[1 + i] = 0.5 * r
        q[1 + j] = (R[j, i] + R[i, j]) * s
        q[1 + k] = (R[k, i] + R[i, k]) * s
    q /= np.linalg.norm(q)
    if q[0] < 0.0:
        q = -q
    return q


def rotation_from_quaternion(q) -> np.ndarray:
    """Rotation matrix of a unit quaternion ``(w, x, y, z)``."""
    w, x, y, z = np.asarray(q, dtype=float).reshape(4)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def so3_log(R) -> np.ndarray:
    """Axis-angle vector of a rotation matrix.

    Switches to a series for angles below 1e-6 rad and to a quaternion
    branch within 1e-6 rad of pi, where the sin-based formula blows up.
    """
    R = np.asarray(R, dtype=float)
    theta = rotation_angle_rad(R)
    if theta < _SMALL_ANGLE:
        # vee(R - R^T)/2 = sin(theta) * axis; expand theta/sin(theta).
        u = 0.5 * vee(R - R.T)
        return u * (1.0 + theta**2 / 6.0 + 7.0 * theta**4 / 360.0)
    if np.pi - theta < _NEAR_PI:
        q = _quaternion_from_rotation(R)
        axis = q[1:] / np.linalg.norm(q[1:])
        return theta * axis
    u = 0.5 * vee(R - R.T)
    return u * (theta / np.sin(theta))


def random_rotation_uniform(rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform rotation, from a normalized Gaussian quaternion."""
    q = rng.standard_normal(4)
    n = np.linalg.norm(q)
    while n < 1e-12:
        q = rng.standard_normal(4)
        n = np.linalg.norm(q)
    return rotation_from_quaternion(q / n)


def random_rotation_euler(rng: np.random.Generator) -> np.ndarray:
    """Rotation from random Euler angles, ZYX intrinsic convention.

    Draws, in order, alpha ~ U[0, 2pi), beta ~ U[-pi/2, pi/2],
    gamma ~ U[0, 2pi) and returns ``Rz(alpha) @ Ry(beta) @ Rx(gamma)``.
    """
    u = rng.random(3)
    alpha = 2.0 * np.pi * u[0]
    beta = np.pi * (u[1] - 0.5)
    gamma = 2.0 * np.pi * u[2]
    return rot_z(alpha) @ rot_y(beta) @ rot_x(gamma)


def random_unit_vector(rng: np.random.Generator) -> np.ndarray:
    """Uniform point on the unit sphere."""
    v = rng.standard_normal(3)
    n = np.linalg.norm(v)
    while n < 1e-12:
        v = rng.standard_normal(3)
        n = np.linalg.norm(v)
    return v / n


def random_perturbation(
    rng: np.random.Generator, angle_min_deg: float, angle_max_deg: float
) -> np.ndarray:
    """Rotation with angle uniform in ``[angle_min_deg, angle_max_deg]``
    and axis uniform on the sphere.

    Raises:
        InvalidRange: unless 0 <= angle_min_deg <= angle_max_deg <= 180.
    """
    if not (0.0 <= angle_min_deg <= angle_max_deg <= 180.0):
        raise InvalidRange(f"bad angle range [{angle_min_deg}, {angle_max_deg}]")
    axis = random_unit_vector(rng)
    angle = np.radians(angle_min_deg + (angle_max_deg - angle_min_deg) * rng.random())
    return so3_exp(axis * angle)


def l1_single_average(rotations) -> np.ndarray:
    """Geodesic L1 mean of a set of rotations (Weiszfeld iteration).

    Starts from the input with minimal summed angular distance to the
    rest, then iterates ``R <- R exp(sum_i w_i log(R^T R_i) / sum_i w_i)``
    with ``w_i = 1 / max(angle(R, R_i), 1e-8 rad)`` until the update step
    falls below 1e-10 rad or 100 iterations.

    Raises:
        EmptyInput: for an empty list.
    """
    Rs = np.asarray(rotations, dtype=float)
    if Rs.size == 0:
        raise EmptyInput("need at least one rotation")
    Rs = Rs.reshape(-1, 3, 3)
    m = Rs.shape[0]
    if m == 1:
        return Rs[0].copy()

    tr = np.einsum("iab,jab->ij", Rs, Rs)
    ang = np.arccos(np.clip((tr - 1.0) / 2.0, -1.0, 1.0))
    R = Rs[int(np.argmin(ang.sum(axis=1)))].copy()

    for _ in range(_MEDIAN_MAX_ITER):
        logs = np.empty((m, 3))
        for i in range(m):
            logs[i] = so3_log(R.T @ Rs[i])
        dists = np.linalg.norm(logs, axis=1)
        w = 1.0 / np.maximum(dists, _MEDIAN_FLOOR)
        step = (w[:, None] * logs).sum(axis=0) / w.sum()
        R = R @ so3_exp(step)
        if np.linalg.norm(step) < _MEDIAN_STEP_TOL:
            break
    return R
