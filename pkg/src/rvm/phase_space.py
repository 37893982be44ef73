"""Phase-space grids, the distribution function, and momentum integrals.

The kinetic unknown f(t, x, p) lives on a tensor grid: a periodic box in x
(cell-centered, torus topology) times a truncated momentum box [-P, P]^3.
Degenerate directions (a single cell) are allowed so 1D-in-x / 2D-in-p
configurations run through the same code path as full 3D3V.

All momentum integrals use midpoint quadrature on cell centers, which is
second order, positivity preserving, and makes the pointwise current bound
|j| <= rho hold exactly in the discrete sums.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


def momentum_map(p):
    """Relativistic velocity of momentum p: p / sqrt(1 + |p|^2).

    Accepts a single 3-vector or an array whose last axis has length 3.
    The result always has Euclidean norm strictly below 1.
    """
    p = np.asarray(p, dtype=float)
    gamma = np.sqrt(1.0 + np.sum(p * p, axis=-1, keepdims=True))
    return p / gamma


@dataclass(frozen=True)
class PhaseGrid:
    """Tensor grid: periodic x-box times truncated momentum box."""

    spatial_cells: tuple
    spatial_lengths: tuple
    momentum_cells: tuple
    momentum_halfwidth: float

    def __post_init__(self):
        object.__setattr__(self, "spatial_cells", tuple(int(n) for n in self.spatial_cells))
        object.__setattr__(self, "spatial_lengths", tuple(float(l) for l in self.spatial_lengths))
        object.__setattr__(self, "momentum_cells", tuple(int(n) for n in self.momentum_cells))
        object.__setattr__(self, "momentum_halfwidth", float(self.momentum_halfwidth))
        if len(self.spatial_cells) != 3 or len(self.spatial_lengths) != 3 or len(self.momentum_cells) != 3:
            raise ValueError("grid needs three spatial and three momentum axes")
        if any(n < 1 for n in self.spatial_cells + self.momentum_cells):
            raise ValueError("cell counts must be >= 1")
        if any(l <= 0 for l in self.spatial_lengths):
            raise ValueError("spatial lengths must be positive")
        if self.momentum_halfwidth <= 0:
            raise ValueError("momentum halfwidth must be positive")

    @property
    def shape(self):
        return self.spatial_cells + self.momentum_cells

    @property
    def dx(self):
        return tuple(l / n for l, n in zip(self.spatial_lengths, self.spatial_cells))

    @property
    def dp(self):
        return tuple(2.0 * self.momentum_halfwidth / n for n in self.momentum_cells)

    @property
    def cell_volume_x(self):
        d = self.dx
        return d[0] * d[1] * d[2]

    @property
    def cell_volume_p(self):
        d = self.dp
        return d[0] * d[1] * d[2]

    @property
    def cell_volume(self):
        return self.cell_volume_x * self.cell_volume_p

    @cached_property
    def x_axes(self):
        """Cell-center coordinates along each spatial axis.

        Centers sit at i * dx (cells [i*dx - dx/2, i*dx + dx/2)), the
        standard FFT layout, so an even initial profile is even on the grid
        and its extremum lands on a cell center.
        """
        return tuple(np.arange(n) * d
                     for n, d in zip(self.spatial_cells, self.dx))

    @cached_property
    def p_axes(self):
        """Cell-center coordinates along each momentum axis."""
        P = self.momentum_halfwidth
        return tuple(-P + (np.arange(n) + 0.5) * d
                     for n, d in zip(self.momentum_cells, self.dp))

    @cached_property
    def p_mesh(self):
        """Momentum components on the p-grid, each shaped like the p-box."""
        return tuple(np.meshgrid(*self.p_axes, indexing="ij"))

    @cached_property
    def gamma_mesh(self):
        p1, p2, p3 = self.p_mesh
        return np.sqrt(1.0 + p1 * p1 + p2 * p2 + p3 * p3)

    @cached_property
    def phat_mesh(self):
        """Velocity components p_hat = p / sqrt(1+|p|^2) on the p-grid."""
        g = self.gamma_mesh
        return tuple(p / g for p in self.p_mesh)

    @cached_property
    def kx(self):
        """Angular spatial frequencies of the torus FFT, one array per axis."""
        return tuple(2.0 * np.pi * np.fft.fftfreq(n, d=d)
                     for n, d in zip(self.spatial_cells, self.dx))

    def x_mesh(self):
        return tuple(np.meshgrid(*self.x_axes, indexing="ij"))

    def boundary_layer_mask(self):
        """True on the outermost momentum-cell layer of non-degenerate p-axes."""
        mask = np.zeros(self.momentum_cells, dtype=bool)
        for axis, n in enumerate(self.momentum_cells):
            if n < 2:
                continue
            idx = [slice(None)] * 3
            idx[axis] = 0
            mask[tuple(idx)] = True
            idx[axis] = n - 1
            mask[tuple(idx)] = True
        return mask


@dataclass
class DistributionFunction:
    """f sampled on the phase grid; values are a 6D array (x-axes, p-axes)."""

    grid: PhaseGrid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError("values shape %s does not match grid %s"
                             % (self.values.shape, self.grid.shape))

    @classmethod
    def zeros(cls, grid, time=0.0):
        return cls(grid, np.zeros(grid.shape), time)

    @classmethod
    def from_sampler(cls, grid, fn, time=0.0):
        """Sample fn(x1, x2, x3, p1, p2, p3) on cell centers (broadcasting)."""
        x = [ax.reshape([-1 if i == j else 1 for j in range(6)])
             for i, ax in enumerate(grid.x_axes)]
        p = [ax.reshape([-1 if i + 3 == j else 1 for j in range(6)])
             for i, ax in enumerate(grid.p_axes)]
        vals = np.broadcast_to(fn(x[0], x[1], x[2], p[0], p[1], p[2]), grid.shape)
        return cls(grid, np.array(vals, dtype=float), time)

    def copy(self):
        return DistributionFunction(self.grid, self.values.copy(), self.time)

    def validate(self):
        """Check nonnegativity and the zero momentum boundary layer."""
        if np.any(self.values < 0):
            raise ValueError("distribution function has negative values")
        layer = self.grid.boundary_layer_mask()
        flat = self.values.reshape(self.grid.spatial_cells + (-1,))
        if np.any(flat[..., layer.ravel()] != 0.0):
            raise ValueError("momentum boundary layer is not zero")

    def charge(self):
        return float(np.sum(self.values)) * self.grid.cell_volume

    def support_margin_cells(self):
        """Smallest count of clear cells between supp f and the momentum box
        edge, minus the one mandatory layer; negative means the layer is hit.
        Support means values above 1e-14 of the maximum (interpolation
        spreads harmless sub-threshold dust).  Degenerate axes are skipped;
        returns +inf if f == 0 or no active axis.
        """
        peak = float(np.max(np.abs(self.values))) if self.values.size else 0.0
        nz = np.abs(self.values) > 1e-14 * peak
        if not nz.any():
            return float("inf")
        margin = float("inf")
        for axis, n in enumerate(self.grid.momentum_cells):
            if n < 2:
                continue
            other = tuple(i for i in range(6) if i != axis + 3)
            line = nz.any(axis=other)
            idx = np.nonzero(line)[0]
            margin = min(margin, idx[0] - 1, (n - 1 - idx[-1]) - 1)
        return float(margin)


@dataclass
class MomentFields:
    """Velocity moments of f^q: density rho_q and current j_q."""

    rho: np.ndarray
    j: np.ndarray
    q: float = 1.0


@dataclass
class EnergyDensities:
    """Energy density e and flux sigma on the spatial grid."""

    e: np.ndarray
    sigma: np.ndarray


def compute_moments(f, q=1.0):
    """Midpoint-quadrature moments rho_q = int f^q dp, j_q = int p_hat f^q dp.

    The discrete sums satisfy |j_q| <= rho_q pointwise exactly because
    |p_hat| < 1 at every quadrature node and f >= 0.
    """
    if q < 1.0:
        raise ValueError("moment exponent q must be >= 1")
    g = f.grid
    w = f.values if q == 1.0 else f.values ** q
    dpvol = g.cell_volume_p
    rho = w.sum(axis=(3, 4, 5)) * dpvol
    phat = g.phat_mesh
    j = np.stack([np.tensordot(w, ph, axes=([3, 4, 5], [0, 1, 2])) * dpvol
                  for ph in phat])
    return MomentFields(rho=rho, j=j, q=float(q))


def compute_energy_densities(f, E, B):
    """Energy density int sqrt(1+|p|^2) f dp + (|E|^2+|B|^2)/8pi and flux
    int p f dp + (E x B)/4pi, both per spatial cell."""
    g = f.grid
    E = np.asarray(E, dtype=float)
    B = np.asarray(B, dtype=float)
    if E.shape != (3,) + g.spatial_cells or B.shape != (3,) + g.spatial_cells:
        raise ValueError("field arrays must have shape (3,) + spatial cells")
    dpvol = g.cell_volume_p
    e = np.tensordot(f.values, g.gamma_mesh, axes=([3, 4, 5], [0, 1, 2])) * dpvol
    e = e + (np.sum(E * E, axis=0) + np.sum(B * B, axis=0)) / (8.0 * np.pi)
    sigma = np.stack([np.tensordot(f.values, pm, axes=([3, 4, 5], [0, 1, 2])) * dpvol
                      for pm in g.p_mesh])
    sigma = sigma + np.cross(E, B, axisa=0, axisb=0, axisc=0) / (4.0 * np.pi)
    return EnergyDensities(e=e, sigma=sigma)


def lq_norm(f, q):
    """Discrete L^q norm of f over phase space (max of |f| for q = inf)."""
    if q == np.inf or q == float("inf"):
        return float(np.max(np.abs(f.values))) if f.values.size else 0.0
    q = float(q)
    if q < 1.0:
        raise ValueError("norm exponent q must be >= 1 or inf")
    vol = f.grid.cell_volume
    return float(np.sum(np.abs(f.values) ** q) * vol) ** (1.0 / q)


def kinetic_norm(f):
    """Weighted L^1 norm sum sqrt(1+|p|^2) f dp dx; requires f >= 0."""
    if np.any(f.values < 0):
        raise ValueError("kinetic norm requires a nonnegative distribution")
    g = f.grid
    s = np.tensordot(f.values, g.gamma_mesh, axes=([3, 4, 5], [0, 1, 2])).sum()
    return float(s) * g.cell_volume
