"""Pure-numpy reference implementation of the interpolation kernels.

These are the hot inner loops of the semi-Lagrangian transport: shifting
grid lines by per-line-constant offsets with cubic Lagrange interpolation,
and gathering a momentum block at arbitrary backward-traced coordinates.
The compiled extension in ``_core.pyx`` implements the same arithmetic in
the same per-element evaluation order, so results agree bit-for-bit.
"""

import numpy as np


def cubic_weights(t):
    """Cubic Lagrange weights on the stencil {-1, 0, 1, 2} at offset t in [0,1)."""
    w0 = -t * (t - 1.0) * (t - 2.0) / 6.0
    w1 = (t * t - 1.0) * (t - 2.0) / 2.0
    w2 = -t * (t + 1.0) * (t - 2.0) / 2.0
    w3 = t * (t * t - 1.0) / 6.0
    return w0, w1, w2, w3


def shift_lines_2d(values, base, frac, periodic):
    """Shift each row of ``values`` by a constant offset with cubic interpolation.

    values : (M, N) array, rows are the lines being shifted.
    base, frac : per-row integer node offset and fractional part in [0, 1);
        row r is sampled at positions i + base[r] + frac[r] - (-1..2 stencil),
        i.e. out[r, i] interpolates values[r] at the point i - shift[r] where
        base = floor(-shift) and frac = -shift - base.
    periodic : wrap indices if True, else treat out-of-range samples as 0.
    """
    M, N = values.shape
    w0, w1, w2, w3 = cubic_weights(frac)
    cols = np.arange(M)[:, None]
    idx = np.arange(N)[None, :] + base[:, None] - 1
    out = np.zeros_like(values)
    for j, w in enumerate((w0, w1, w2, w3)):
        k = idx + j
        if periodic:
            out += w[:, None] * values[cols, np.mod(k, N)]
        else:
            valid = (k >= 0) & (k < N)
            out += w[:, None] * np.where(valid, values[cols, np.clip(k, 0, N - 1)], 0.0)
    return out


def gather_cubic(block, coords):
    """Tensor-product cubic Lagrange interpolation of ``block`` at ``coords``.

    block : d-dimensional array (d = 1, 2 or 3), sample values on the
        integer lattice.  Points outside the lattice count as 0.
    coords : (d, M) float index coordinates of the evaluation points.
    Returns a length-M array.
    """
    d = block.ndim
    if coords.shape[0] != d:
        raise ValueError("coords first axis must match block dimensionality")
    M = coords.shape[1]
    bases, weights = [], []
    for a in range(d):
        b = np.floor(coords[a]).astype(np.int64)
        t = coords[a] - b
        bases.append(b)
        weights.append(cubic_weights(t))
    out = np.zeros(M)
    shape = block.shape
    flat = block.ravel()
    strides = np.array([int(np.prod(shape[a + 1:], dtype=np.int64)) for a in range(d)],
                       dtype=np.int64)
    for offs in np.ndindex(*(4,) * d):
        w = np.ones(M)
        lin = np.zeros(M, dtype=np.int64)
        valid = np.ones(M, dtype=bool)
        for a, o in enumerate(offs):
            k = bases[a] + (o - 1)
            valid &= (k >= 0) & (k < shape[a])
            w = w * weights[a][o]
            lin = lin + np.clip(k, 0, shape[a] - 1) * strides[a]
        out += np.where(valid, w * flat[lin], 0.0)
    return out
