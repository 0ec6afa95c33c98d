import numpy as np
import pytest

from rotsync import so3
from rotsync.errors import EmptyInput, InvalidRange, RankDeficientInput


def rand_rot(seed):
    return so3.random_rotation_uniform(np.random.default_rng(seed))


class TestProjectToSO3:
    def test_identity_fixed_point(self):
        assert np.allclose(so3.project_to_so3(np.eye(3)), np.eye(3), atol=1e-15)

    def test_positive_scaling_invariant(self):
        for seed in range(10):
            R = rand_rot(seed)
            assert np.allclose(so3.project_to_so3(2.5 * R), R, atol=1e-12)

    def test_small_perturbation_stays_close(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            R = so3.random_rotation_uniform(rng)
            E = rng.standard_normal((3, 3))
            E *= 1e-6 / np.linalg.norm(E)
            P = so3.project_to_so3(R + E)
            assert so3.is_rotation(P)
            assert so3.geodesic_distance(P, R) < 1e-4

    def test_minimizes_frobenius_against_local_mesh(self):
        # Oracle: no rotation on a local axis-angle mesh around the
        # projection is closer to the input.
        rng = np.random.default_rng(7)
        M = rand_rot(0) + 0.1 * rng.standard_normal((3, 3))
        P = so3.project_to_so3(M)
        best = np.linalg.norm(P - M)
        for ax in np.eye(3):
            for ang in np.linspace(-0.3, 0.3, 31):
                cand = P @ so3.so3_exp(ax * ang)
                assert np.linalg.norm(cand - M) >= best - 1e-12

    def test_rank_deficient_raises(self):
        M = np.outer([1.0, 0.0, 0.0], [1.0, 0.0, 0.0])
        with pytest.raises(RankDeficientInput):
            so3.project_to_so3(M)

    def test_reflection_input_gets_det_plus_one(self):
        F = np.diag([1.0, 1.0, -1.0])
        P = so3.project_to_so3(F + 0.01 * np.random.default_rng(0).standard_normal((3, 3)))
        assert so3.is_rotation(P)

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            M = rng.standard_normal((3, 3))
            if np.linalg.svd(M, compute_uv=False)[-1] < 1e-6:
                continue
            P = so3.project_to_so3(M)
            assert np.abs(so3.project_to_so3(P) - P).max() < 1e-12


class TestMetrics:
    def test_geodesic_identity(self):
        assert so3.geodesic_distance(np.eye(3), np.eye(3)) == 0.0

    def test_geodesic_quarter_turn(self):
        assert abs(so3.geodesic_distance(np.eye(3), so3.rot_z(np.pi / 2)) - 90.0) < 1e-12

    def test_geodesic_symmetry(self):
        A, B = rand_rot(1), rand_rot(2)
        assert abs(so3.geodesic_distance(A, B) - so3.geodesic_distance(B, A)) < 1e-12

    def test_geodesic_bi_invariance(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            A = so3.random_rotation_uniform(rng)
            B = so3.random_rotation_uniform(rng)
            Q = so3.random_rotation_uniform(rng)
            d = so3.geodesic_distance(A, B)
            assert abs(so3.geodesic_distance(Q @ A, Q @ B) - d) < 1e-9
            assert abs(so3.geodesic_distance(A @ Q, B @ Q) - d) < 1e-9

    def test_chordal_identity_case(self):
        assert so3.chordal_distance(np.eye(3), np.eye(3)) == 0.0

    def test_chordal_quarter_turn_is_two(self):
        assert abs(so3.chordal_distance(np.eye(3), so3.rot_z(np.pi / 2)) - 2.0) < 1e-12

    def test_chordal_half_turn_is_two_sqrt_two(self):
        for axis in np.eye(3):
            R = so3.so3_exp(axis * np.pi)
            assert abs(so3.chordal_distance(np.eye(3), R) - 2.0 * np.sqrt(2.0)) < 1e-12

    def test_chordal_geodesic_identity(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            A = so3.random_rotation_uniform(rng)
            B = so3.random_rotation_uniform(rng)
            theta = np.radians(so3.geodesic_distance(A, B))
            assert abs(so3.chordal_distance(A, B) - 2.0 * np.sqrt(2.0) * np.sin(theta / 2.0)) < 1e-9


class TestExpLog:
    @pytest.mark.parametrize("angle", [0.0, 1e-9, 1e-7, 1e-3, 0.5, 2.0, np.pi - 1e-7, np.pi - 1e-9, np.pi])
    def test_roundtrip_across_branches(self, angle):
        axis = np.array([1.0, 2.0, -0.5])
        axis /= np.linalg.norm(axis)
        R = so3.so3_exp(axis * angle)
        v = so3.so3_log(R)
        assert np.allclose(so3.so3_exp(v), R, atol=1e-9)
        assert abs(np.linalg.norm(v) - angle) < 1e-7

    def test_log_of_identity_is_zero(self):
        assert np.allclose(so3.so3_log(np.eye(3)), 0.0)

    def test_random_roundtrip(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            R = so3.random_rotation_uniform(rng)
            assert np.abs(so3.so3_exp(so3.so3_log(R)) - R).max() < 1e-11


class TestSampling:
    def test_uniform_deterministic(self):
        a = so3.random_rotation_uniform(np.random.default_rng(123))
        b = so3.random_rotation_uniform(np.random.default_rng(123))
        assert np.array_equal(a, b)

    def test_uniform_valid_rotations(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            assert so3.is_rotation(so3.random_rotation_uniform(rng), tol=1e-12)

    def test_uniform_mean_trace(self):
        # Haar expectation of the trace is 0: the trace is 1 + 2 cos(t)
        # with angle density (1 - cos t)/pi, and the integral of
        # (1 + 2 cos t)(1 - cos t)/pi over [0, pi] vanishes.
        rng = np.random.default_rng(2024)
        traces = np.empty(100_000)
        for k in range(traces.size):
            traces[k] = np.trace(so3.random_rotation_uniform(rng))
        assert abs(traces.mean() - 0.0) <= 0.02

    def test_uniform_angle_density(self):
        # Chi-square against the Haar angle density (1 - cos t)/pi.
        rng = np.random.default_rng(99)
        n = 100_000
        angles = np.empty(n)
        for k in range(n):
            angles[k] = so3.rotation_angle_rad(so3.random_rotation_uniform(rng))
        edges = np.linspace(0.0, np.pi, 19)
        counts, _ = np.histogram(angles, bins=edges)
        probs = (np.diff(edges) - (np.sin(edges[1:]) - np.sin(edges[:-1]))) / np.pi
        expected = n * probs
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        # df = 17; 40.8 is the 0.1% quantile, test is seeded so not flaky
        assert chi2 < 40.8

    def test_euler_all_zero_angles_gives_identity(self):
        class StubRng:
            def random(self, size):
                return np.array([0.0, 0.5, 0.0])

        assert np.array_equal(so3.random_rotation_euler(StubRng()), np.eye(3))

    def test_euler_valid_and_deterministic(self):
        rng = np.random.default_rng(4)
        for _ in range(10_000):
            R = so3.random_rotation_euler(rng)
            assert so3.is_rotation(R, tol=1e-12)
        a = so3.random_rotation_euler(np.random.default_rng(55))
        b = so3.random_rotation_euler(np.random.default_rng(55))
        assert np.array_equal(a, b)

    def test_perturbation_zero_range_is_identity(self):
        R = so3.random_perturbation(np.random.default_rng(0), 0.0, 0.0)
        assert np.allclose(R, np.eye(3), atol=1e-15)

    def test_perturbation_fixed_angle(self):
        for seed in range(20):
            R = so3.random_perturbation(np.random.default_rng(seed), 5.0, 5.0)
            assert abs(so3.geodesic_distance(R, np.eye(3)) - 5.0) < 1e-9

    def test_perturbation_range_containment(self):
        rng = np.random.default_rng(17)
        for _ in range(10_000):
            R = so3.random_perturbation(rng, 1.0, 10.0)
            d = so3.geodesic_distance(R, np.eye(3))
            assert 1.0 - 1e-9 <= d <= 10.0 + 1e-9

    @pytest.mark.parametrize("lo,hi", [(-1.0, 5.0), (5.0, 1.0), (0.0, 181.0)])
    def test_perturbation_invalid_range(self, lo, hi):
        with pytest.raises(InvalidRange):
            so3.random_perturbation(np.random.default_rng(0), lo, hi)


class TestL1Average:
    def test_empty_raises(self):
        with pytest.raises(EmptyInput):
            so3.l1_single_average([])

    def test_copies_return_same(self):
        R = rand_rot(9)
        out = so3.l1_single_average([R] * 5)
        assert np.array_equal(out, R)

    def test_collinear_median_is_middle(self):
        # On a common geodesic the L1 mean is the 1-D median; the dense
        # search over Rz(t) confirms t = 20 minimizes the summed distance.
        rots = [so3.rot_z(np.radians(a)) for a in (10.0, 20.0, 30.0)]
        ts = np.linspace(0.0, 40.0, 4001)
        sums = np.abs(ts - 10.0) + np.abs(ts - 20.0) + np.abs(ts - 30.0)
        assert ts[int(np.argmin(sums))] == pytest.approx(20.0)
        out = so3.l1_single_average(rots)
        assert so3.geodesic_distance(out, so3.rot_z(np.radians(20.0))) < 1e-6

    def test_breakdown_resists_single_far_point(self):
        R = rand_rot(21)
        far = R @ so3.rot_x(np.pi / 2)
        rots = [R] * 9 + [far]
        # 1-D oracle along the connecting geodesic: with nine points at
        # t=0 and one at t=90, the summed distance 9|t| + |90 - t| is
        # minimized at t=0.
        ts = np.linspace(0.0, 90.0, 9001)
        sums = 9.0 * np.abs(ts) + np.abs(90.0 - ts)
        assert ts[int(np.argmin(sums))] == 0.0
        out = so3.l1_single_average(rots)
        assert so3.geodesic_distance(out, R) < 1e-6

    def test_left_equivariance(self):
        rng = np.random.default_rng(31)
        rots = [so3.random_rotation_uniform(rng) for _ in range(7)]
        Q = so3.random_rotation_uniform(rng)
        lhs = so3.l1_single_average([Q @ R for R in rots])
        rhs = Q @ so3.l1_single_average(rots)
        assert so3.geodesic_distance(lhs, rhs) < 1e-6
