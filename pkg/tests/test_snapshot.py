import numpy as np
import pytest

from rvm.phase_space import DistributionFunction, PhaseGrid
from rvm.snapshot import (HEADER_BYTES, read_distribution, read_snapshot,
                          read_xfield, write_distribution, write_snapshot,
                          write_xfield)


def test_header_layout(tmp_path):
    path = tmp_path / "x.rvmf"
    write_snapshot(path, (2, 1, 1, 3, 1, 1), (1.0, 2.0, 3.0, 4.0), 0.5,
                   np.arange(6.0))
    raw = path.read_bytes()
    assert raw[:4] == b"RVMF"
    assert len(raw) == HEADER_BYTES + 6 * 8
    assert HEADER_BYTES == 72
    dims, box, time, data = read_snapshot(path)
    assert dims == (2, 1, 1, 3, 1, 1)
    assert box == (1.0, 2.0, 3.0, 4.0)
    assert time == 0.5
    assert np.array_equal(data.ravel(), np.arange(6.0))


def test_distribution_roundtrip(tmp_path):
    g = PhaseGrid((4, 2, 1), (1.0, 2.0, 3.0), (5, 3, 1), 2.5)
    rng = np.random.default_rng(0)
    vals = rng.random(g.shape)
    vals.reshape(g.spatial_cells + (-1,))[..., g.boundary_layer_mask().ravel()] = 0
    f = DistributionFunction(g, vals, time=1.25)
    path = tmp_path / "f.rvmf"
    write_distribution(path, f)
    back = read_distribution(path, PhaseGrid, DistributionFunction)
    assert back.grid == g
    assert back.time == 1.25
    assert np.array_equal(back.values, f.values)


def test_xfield_roundtrip(tmp_path):
    g = PhaseGrid((4, 2, 2), (1.0, 1.0, 1.0), (3, 3, 3), 1.0)
    rng = np.random.default_rng(1)
    field = rng.random((3,) + g.spatial_cells)
    path = tmp_path / "E.rvmf"
    write_xfield(path, field, g, 0.75)
    back, box, time = read_xfield(path)
    assert np.array_equal(back, field)
    assert time == 0.75
    assert box[3] == 1.0


def test_corruption_detected(tmp_path):
    path = tmp_path / "bad.rvmf"
    write_snapshot(path, (1, 1, 1, 2, 1, 1), (1, 1, 1, 1), 0.0, np.zeros(2))
    raw = bytearray(path.read_bytes())
    raw[:4] = b"XXXX"
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError):
        read_snapshot(path)
    truncated = tmp_path / "trunc.rvmf"
    write_snapshot(truncated, (1, 1, 1, 2, 1, 1), (1, 1, 1, 1), 0.0, np.zeros(2))
    truncated.write_bytes(truncated.read_bytes()[:-8])
    with pytest.raises(ValueError):
        read_snapshot(truncated)


def test_size_mismatch_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_snapshot(tmp_path / "y.rvmf", (2, 2, 2, 2, 2, 2), (1, 1, 1, 1),
                       0.0, np.zeros(7))
