import numpy as np
import pytest

from rotsync import fileio, so3, sync, synth
from rotsync.errors import FileFormatError


def random_measurements(seed, n=None):
    rng = np.random.default_rng(seed)
    if n is None:
        n = int(rng.integers(2, 9))
    tree = synth.spanning_tree_uniform(n, rng)
    extras = [
        (i, j)
        for i in range(1, n + 1)
        for j in range(i + 1, n + 1)
        if (i, j) not in set(tree) and rng.random() < 0.4
    ]
    edges = [(i, j, so3.random_rotation_uniform(rng)) for i, j in sorted(tree + extras)]
    return sync.RelativeMeasurementSet(n=n, edges=edges)


class TestMeasurementRoundTrip:
    def test_exact_round_trip(self, tmp_path):
        ms = random_measurements(0)
        path = tmp_path / "a.rel"
        fileio.write_measurements(path, ms)
        back, projected = fileio.read_measurements(path)
        assert projected == 0
        assert back.n == ms.n
        assert back.edge_pairs() == ms.edge_pairs()
        for (_, _, Ra), (_, _, Rb) in zip(ms.edges, back.edges):
            assert np.array_equal(Ra, Rb)

    def test_fuzz_1000_round_trips(self, tmp_path):
        path = tmp_path / "fuzz.rel"
        for seed in range(1000):
            ms = random_measurements(seed)
            fileio.write_measurements(path, ms)
            back, projected = fileio.read_measurements(path)
            assert projected == 0
            assert back.n == ms.n
            assert back.edge_pairs() == ms.edge_pairs()
            for (_, _, Ra), (_, _, Rb) in zip(ms.edges, back.edges):
                assert np.array_equal(Ra, Rb)

    def test_write_is_byte_deterministic(self, tmp_path):
        ms = random_measurements(1)
        p1, p2 = tmp_path / "b1.rel", tmp_path / "b2.rel"
        fileio.write_measurements(p1, ms)
        fileio.write_measurements(p2, ms)
        assert p1.read_bytes() == p2.read_bytes()

    def test_mildly_invalid_block_projected_with_count(self, tmp_path):
        ms = random_measurements(2, n=3)
        bad = [(i, j, R + 1e-3) for (i, j, R) in ms.edges[:1]] + ms.edges[1:]
        path = tmp_path / "c.rel"
        fileio.write_measurements(path, sync.RelativeMeasurementSet(n=3, edges=bad))
        back, projected = fileio.read_measurements(path)
        assert projected == 1
        assert so3.is_rotation(back.edges[0][2], tol=1e-9)

    def test_block_within_tolerance_kept_bitwise(self, tmp_path):
        R = so3.rot_z(0.4)
        R_off = R + 1e-8  # within the 1e-6 validation tolerance
        ms = sync.RelativeMeasurementSet(n=2, edges=[(1, 2, R_off)])
        path = tmp_path / "d.rel"
        fileio.write_measurements(path, ms)
        back, projected = fileio.read_measurements(path)
        assert projected == 0
        assert np.array_equal(back.edges[0][2], R_off)


class TestMeasurementMalformed:
    def write(self, tmp_path, text):
        path = tmp_path / "bad.rel"
        path.write_text(text)
        return path

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "2\n",
            "2 1\n1 2 1 0 0 0 1 0 0 0\n",
            "2 1\n1 2 1 0 0 0 1 0 0 0 x\n",
            "2 1\n2 1 1 0 0 0 1 0 0 0 1\n",
            "2 1\n1 3 1 0 0 0 1 0 0 0 1\n",
            "2 2\n1 2 1 0 0 0 1 0 0 0 1\n",
            "2 2\n1 2 1 0 0 0 1 0 0 0 1\n1 2 1 0 0 0 1 0 0 0 1\n",
            "2 1\n1 2 1 0 0 0 1 0 0 0 nan\n",
            "2 1\n1 2 0 0 0 0 0 0 0 0 0\n",
        ],
    )
    def test_malformed_raises_file_format_error(self, tmp_path, text):
        with pytest.raises(FileFormatError):
            fileio.read_measurements(self.write(tmp_path, text))


class TestRotationFiles:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        rots = np.stack([so3.random_rotation_uniform(rng) for _ in range(7)])
        path = tmp_path / "a.gt"
        fileio.write_rotations(path, rots)
        back, projected = fileio.read_rotations(path)
        assert projected == 0
        assert np.array_equal(back, rots)

    def test_out_of_order_indices_normalized(self, tmp_path):
        path = tmp_path / "b.est"
        path.write_text("2\n2 1 0 0 0 1 0 0 0 1\n1 1 0 0 0 1 0 0 0 1\n")
        back, _ = fileio.read_rotations(path)
        assert back.shape == (2, 3, 3)

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "0\n",
            "2\n1 1 0 0 0 1 0 0 0 1\n",
            "1\n1 1 0 0 0 1 0 0 0\n",
            "1\n2 1 0 0 0 1 0 0 0 1\n",
            "2\n1 1 0 0 0 1 0 0 0 1\n1 1 0 0 0 1 0 0 0 1\n",
        ],
    )
    def test_malformed(self, tmp_path, text):
        path = tmp_path / "bad.gt"
        path.write_text(text)
        with pytest.raises(FileFormatError):
            fileio.read_rotations(path)


class TestOutlierFile:
    def test_round_trip_sorted(self, tmp_path):
        path = tmp_path / "a.outliers"
        fileio.write_outlier_edges(path, {(3, 5), (1, 2), (2, 7)})
        assert path.read_text() == "1 2\n2 7\n3 5\n"
        assert fileio.read_outlier_edges(path) == {(1, 2), (2, 7), (3, 5)}

    def test_malformed(self, tmp_path):
        path = tmp_path / "bad.outliers"
        path.write_text("1 2 3\n")
        with pytest.raises(FileFormatError):
            fileio.read_outlier_edges(path)


class TestEvalCsv:
    def test_header_once_and_append(self, tmp_path):
        path = tmp_path / "out.csv"
        fileio.append_eval_csv(path, "eig", 10, 1.25, 1.0, 3.5, 0.0)
        fileio.append_eval_csv(path, "rgodec", 10, 0.5, 0.4, 1.0, 0.0)
        lines = path.read_text().splitlines()
        assert lines[0] == fileio.EVAL_CSV_HEADER
        assert len(lines) == 3
        assert lines[1].startswith("eig,10,1.25,")
        assert "." in lines[1] and "," in lines[1]
