"""Interpolation kernel dispatch: compiled core with pure-numpy fallback.

The Cython extension ``rvm._kernels._core`` is used when it has been built
(``python setup.py build_ext --inplace`` or a regular pip install); otherwise
the numpy reference in ``_ref`` serves the same API.  Selection happens at
import time and can be forced with the environment variable
``RVM_KERNELS=numpy|cython`` or at runtime with :func:`set_backend`.
Both backends produce identical floating-point results.
"""

import os

import numpy as np

from . import _ref

try:
    from . import _core
except ImportError:
    _core = None

_BACKENDS = {"numpy": _ref}
if _core is not None:
    _BACKENDS["cython"] = _core

_forced = os.environ.get("RVM_KERNELS", "").strip().lower()
if _forced:
    if _forced not in ("numpy", "cython"):
        raise RuntimeError("RVM_KERNELS must be 'numpy' or 'cython', got %r" % _forced)
    if _forced not in _BACKENDS:
        raise RuntimeError("RVM_KERNELS=cython requested but the compiled "
                           "extension is not built")
    _active = _forced
else:
    _active = "cython" if "cython" in _BACKENDS else "numpy"


def backend_name():
    """Name of the active kernel backend ('cython' or 'numpy')."""
    return _active


def available_backends():
    return sorted(_BACKENDS)


def set_backend(name):
    """Switch the kernel backend at runtime (mainly for tests/benchmarks)."""
    global _active
    if name not in _BACKENDS:
        raise RuntimeError("backend %r not available (built: %s)"
                           % (name, ", ".join(sorted(_BACKENDS))))
    _active = name


def shift_lines(values, shift, axis, periodic):
    """Cubic-Lagrange shift of ``values`` along ``axis`` by per-line offsets.

    shift : array broadcastable to ``values`` with ``axis`` removed, in units
        of cells; every line (fixed indices on the other axes) is displaced by
        its own constant amount, sampling at position i - shift.  The integer
        part of the displacement is handled exactly (index arithmetic), so
        arbitrarily large shifts lose no accuracy; only the sub-cell fraction
        is interpolated.
    periodic : wrap around (torus axis) if True, zero-fill otherwise.
    """
    values = np.asarray(values, dtype=float)
    N = values.shape[axis]
    moved = np.moveaxis(values, axis, -1)
    lead_shape = moved.shape[:-1]
    shift = np.asarray(shift, dtype=float)
    if shift.ndim == values.ndim:
        if shift.shape[axis] != 1:
            raise ValueError("shift must be constant along the shifted axis")
        shift = np.moveaxis(shift, axis, -1)[..., 0]
    s = np.broadcast_to(shift, lead_shape)
    flat = np.ascontiguousarray(moved).reshape(-1, N)
    sflat = np.ascontiguousarray(s).reshape(-1)
    base = np.floor(-sflat).astype(np.int64)
    frac = -sflat - base
    impl = _BACKENDS[_active]
    if impl is _ref:
        out = _ref.shift_lines_2d(flat, base, frac, bool(periodic))
    else:
        out = np.empty_like(flat)
        impl.shift_lines_2d(flat, base, frac, bool(periodic), out)
    out = out.reshape(lead_shape + (N,))
    return np.moveaxis(out, -1, axis).copy()


def gather_cubic(block, coords):
    """Tensor-product cubic interpolation of a 1/2/3-d block at float
    index coordinates ``coords`` of shape (ndim, ...); zero outside."""
    block = np.ascontiguousarray(block, dtype=float)
    coords = np.asarray(coords, dtype=float)
    d = block.ndim
    if coords.shape[0] != d:
        raise ValueError("coords first axis must match block dimensionality")
    out_shape = coords.shape[1:]
    cflat = np.ascontiguousarray(coords.reshape(d, -1))
    impl = _BACKENDS[_active]
    if impl is _ref or d == 1:
        out = _ref.gather_cubic(block, cflat)
    else:
        out = np.empty(cflat.shape[1])
        if d == 2:
            impl.gather_cubic_2d(block, cflat[0], cflat[1], out)
        else:
            impl.gather_cubic_3d(block, cflat[0], cflat[1], cflat[2], out)
    return out.reshape(out_shape)
