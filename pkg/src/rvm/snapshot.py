"""Binary snapshot format shared across the package.

Layout (little-endian):

    bytes  0..3   magic "RVMF"
    bytes  4..7   format version, u32 (currently 1)
    bytes  8..31  grid dims, 6 x u32
    bytes 32..63  box parameters, 4 x f64 (three torus lengths, momentum
                  halfwidth)
    bytes 64..71  time stamp, f64
    bytes 72..    payload: row-major f64 array, x-major then p

The header is 72 bytes.  Distribution snapshots use the actual six grid
dims.  Vector fields over x store the component axis in the first momentum
slot: dims = (nx1, nx2, nx3, 3, 1, 1) with payload ordered x-major then
component.  Scalar x-fields use (nx1, nx2, nx3, 1, 1, 1).
"""

import struct

import numpy as np

MAGIC = b"RVMF"
VERSION = 1
HEADER_BYTES = 72
_HEADER = struct.Struct("<4sI6I4dd")


def write_snapshot(path, dims, box, time, payload):
    """Write one array with its 72-byte header."""
    dims = tuple(int(d) for d in dims)
    box = tuple(float(b) for b in box)
    if len(dims) != 6 or len(box) != 4:
        raise ValueError("dims must have 6 entries and box 4")
    payload = np.ascontiguousarray(payload, dtype="<f8")
    if payload.size != int(np.prod(dims)):
        raise ValueError("payload size %d does not match dims %s"
                         % (payload.size, dims))
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, *dims, *box, float(time)))
        fh.write(payload.tobytes())


def read_snapshot(path):
    """Read a snapshot; returns (dims, box, time, array shaped to dims)."""
    with open(path, "rb") as fh:
        head = fh.read(HEADER_BYTES)
        if len(head) != HEADER_BYTES:
            raise ValueError("truncated snapshot header in %s" % path)
        fields = _HEADER.unpack(head)
        if fields[0] != MAGIC:
            raise ValueError("bad magic %r in %s" % (fields[0], path))
        if fields[1] != VERSION:
            raise ValueError("unsupported snapshot version %d" % fields[1])
        dims = fields[2:8]
        box = fields[8:12]
        time = fields[12]
        data = np.frombuffer(fh.read(), dtype="<f8")
    expected = int(np.prod(dims))
    if data.size != expected:
        raise ValueError("payload size %d does not match dims %s"
                         % (data.size, dims))
    return dims, box, time, data.reshape(dims).astype(float)


def write_distribution(path, f):
    """Snapshot a DistributionFunction."""
    g = f.grid
    write_snapshot(path, g.shape, g.spatial_lengths + (g.momentum_halfwidth,),
                   f.time, f.values)


def read_distribution(path, grid_cls, df_cls):
    """Rebuild a DistributionFunction (classes passed to avoid an import cycle)."""
    dims, box, time, data = read_snapshot(path)
    grid = grid_cls(dims[:3], box[:3], dims[3:], box[3])
    return df_cls(grid, data, time)


def write_xfield(path, field, grid, time):
    """Snapshot a (3, nx) vector field over x (component axis in the p slot)."""
    field = np.asarray(field, dtype=float)
    dims = grid.spatial_cells + (3, 1, 1)
    payload = np.moveaxis(field, 0, -1)
    write_snapshot(path, dims, grid.spatial_lengths + (grid.momentum_halfwidth,),
                   time, payload)


def read_xfield(path):
    """Read back a vector x-field as ((3, nx) array, box, time)."""
    dims, box, time, data = read_snapshot(path)
    if dims[3] != 3 or dims[4] != 1 or dims[5] != 1:
        raise ValueError("snapshot %s is not a vector x-field" % path)
    return np.moveaxis(data.reshape(dims[:4]), -1, 0), box, time
