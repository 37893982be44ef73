"""Semi-Lagrangian transport of the distribution function.

One full step is the Strang composition x-advection(dt/2), p-advection(dt),
x-advection(dt/2) with fields frozen at the half step.  Both advections are
backward semi-Lagrangian with cubic Lagrange interpolation:

* in x each momentum slice moves rigidly by -p_hat dt, a per-line constant
  shift along each torus axis (the three axis shifts commute exactly);
* in p the force E + p_hat x B acts per spatial cell.  With a negligible
  magnetic field that is a rigid translation by E dt (again per-line
  constant, hence charge conserving to roundoff); otherwise characteristics
  are traced backward with a midpoint step and the momentum block is
  gathered tricubically.

Negative interpolation undershoots are clipped to zero and the removed
(negative) mass is tallied, so conservation accounting can separate scheme
error from limiter bookkeeping.  The momentum box has a mandatory zero
boundary layer: any step that would move more than a 1e-14 fraction of the
total mass into the layer (or silently off the box) raises
MomentumSupportBreach.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .phase_space import DistributionFunction

BREACH_FRACTION = 1e-14
# magnetic force below this fraction of the force scale is treated as zero,
# keeping the exactly-conservative translation path on electrostatic runs
NEGLIGIBLE_B = 1e-13


class MomentumSupportBreach(RuntimeError):
    """Mass reached the momentum-box boundary layer; aborting instead of
    silently losing charge."""


@dataclass
class ForceField:
    """Mollified electromagnetic fields driving the momentum advection."""

    E: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        self.E = np.asarray(self.E, dtype=float)
        self.B = np.asarray(self.B, dtype=float)
        if self.E.shape != self.B.shape or self.E.shape[0] != 3:
            raise ValueError("force fields must both have shape (3, nx)")


@dataclass
class ClipTally:
    """Accumulated limiter bookkeeping, in charge units."""

    negative: float = 0.0

    @property
    def total(self):
        return self.negative

    def add(self, other):
        self.negative += other.negative


def _clip(values, vol, tally):
    neg = values < 0.0
    if neg.any():
        if tally is not None:
            tally.negative += -float(values[neg].sum()) * vol
        values[neg] = 0.0
    return values


def _check_boundary_layer(values, grid, total_charge):
    """Raise on mass in the zero layer, then re-zero the sub-threshold rest."""
    vol = grid.cell_volume
    tol = BREACH_FRACTION * max(total_charge, np.finfo(float).tiny)
    layer = grid.boundary_layer_mask()
    if layer.any():
        flat = values.reshape(grid.spatial_cells + (-1,))
        layer_mass = float(np.abs(flat[..., layer.ravel()]).sum()) * vol
        if layer_mass > tol:
            raise MomentumSupportBreach(
                "mass %.3e in the momentum boundary layer exceeds %.3e"
                % (layer_mass, tol))
        flat[..., layer.ravel()] = 0.0
    return tol


def advect_x(f, dt, tally=None):
    """Free-streaming update: each p-slice shifts by -p_hat dt, periodically.

    Axis shifts are per-line constant, so the cubic interpolation conserves
    the slice sums to roundoff, and the integer part of any displacement is
    handled exactly (no substepping is ever needed for large dt).
    """
    g = f.grid
    out = f.values.copy()
    if dt != 0.0:
        phat = g.phat_mesh
        for axis in range(3):
            if g.spatial_cells[axis] < 2:
                continue
            shift = (phat[axis] * (dt / g.dx[axis])).reshape(
                (1, 1, 1) + g.momentum_cells)
            if np.all(shift == 0.0):
                continue
            out = _kernels.shift_lines(out, shift, axis=axis, periodic=True)
        _clip(out, g.cell_volume, tally)
    return DistributionFunction(g, out, f.time + dt)


def _guard_degenerate_axes(grid, fmag_by_axis, dt):
    """Reject forces that would push mass along a single-cell momentum axis.

    A displacement below 1e-12 cells is indistinguishable from FFT roundoff
    in the fields and is ignored.
    """
    for axis in range(3):
        if grid.momentum_cells[axis] < 2 and \
                fmag_by_axis[axis] * abs(dt) > 1e-12 * grid.dp[axis]:
            raise ValueError(
                "force along degenerate momentum axis %d" % axis)


def _translate_p(values, grid, E, dt):
    _guard_degenerate_axes(grid, [float(np.max(np.abs(E[a]))) for a in range(3)], dt)
    for axis in range(3):
        if grid.momentum_cells[axis] < 2:
            continue
        shift = (E[axis] * (dt / grid.dp[axis])).reshape(
            grid.spatial_cells + (1, 1, 1))
        if np.all(shift == 0.0):
            continue
        values = _kernels.shift_lines(values, shift, axis=axis + 3,
                                      periodic=False)
    return values


def _trace_and_gather(values, grid, E, B, dt, total_charge):
    """General Lorentz-force path: midpoint backward trace + cubic gather.

    Substepped so each substep displaces at most half a momentum cell; the
    boundary layer is checked after every substep, which makes it impossible
    for mass to cross the layer unnoticed.
    """
    active = [a for a in range(3) if grid.momentum_cells[a] > 1]
    if len(active) < 2:
        raise ValueError("magnetic advection needs at least two momentum axes")
    p = grid.p_mesh
    dp = grid.dp

    def force(px, py, pz, Ec, Bc):
        gam = np.sqrt(1.0 + px * px + py * py + pz * pz)
        vx, vy, vz = px / gam, py / gam, pz / gam
        return (Ec[0] + vy * Bc[2] - vz * Bc[1],
                Ec[1] + vz * Bc[0] - vx * Bc[2],
                Ec[2] + vx * Bc[1] - vy * Bc[0])

    nsub = max(1, int(np.ceil(2.0 * abs(dt) * _max_force(E, B)
                              / min(dp[a] for a in active))))
    sub = dt / nsub
    out = values
    squeeze_axes = tuple(a for a in range(3) if a not in active)
    for _ in range(nsub):
        new = np.empty_like(out)
        for ix in np.ndindex(*grid.spatial_cells):
            Ec = E[(slice(None),) + ix]
            Bc = B[(slice(None),) + ix]
            f1 = force(p[0], p[1], p[2], Ec, Bc)
            mid = [p[a] - 0.5 * sub * f1[a] for a in range(3)]
            f2 = force(mid[0], mid[1], mid[2], Ec, Bc)
            _guard_degenerate_axes(
                grid, [float(np.max(np.abs(f2[a]))) for a in range(3)], sub)
            back = [p[a] - sub * f2[a] for a in range(3)]
            coords = np.stack([
                (back[a] - grid.p_axes[a][0]) / dp[a] for a in active])
            block = out[ix].squeeze(axis=squeeze_axes)
            gathered = _kernels.gather_cubic(
                block, coords.squeeze(axis=tuple(1 + a for a in squeeze_axes)))
            new[ix] = gathered.reshape(out[ix].shape)
        out = new
        _check_boundary_layer(out, grid, total_charge)
    return out


def _max_force(E, B):
    emax = float(np.max(np.sqrt(np.sum(E * E, axis=0))))
    bmax = float(np.max(np.sqrt(np.sum(B * B, axis=0))))
    return emax + bmax  # |p_hat| < 1


def advect_p(f, force, dt, tally=None):
    """Momentum advection by the Lorentz force at frozen fields.

    Aborts with MomentumSupportBreach if mass would reach the zero boundary
    layer of the momentum box.  The time stamp is left unchanged: within a
    Strang step the x half-steps carry the clock.
    """
    g = f.grid
    if force.E.shape[1:] != g.spatial_cells:
        raise ValueError("force field shape does not match the spatial grid")
    out = f.values.copy()
    if dt != 0.0:
        emax = float(np.max(np.abs(force.E)))
        bmax = float(np.max(np.abs(force.B)))
        if emax == 0.0 and bmax == 0.0:
            return DistributionFunction(g, out, f.time)
        charge_before = float(out.sum()) * g.cell_volume
        total = abs(charge_before)
        if bmax <= NEGLIGIBLE_B * max(emax, 1.0):
            # rigid translation: exactly conservative, so any charge change
            # means support was pushed off the momentum box
            out = _translate_p(out, g, force.E, dt)
            tol = _check_boundary_layer(out, g, total)
            charge_after = float(out.sum()) * g.cell_volume
            if abs(charge_after - charge_before) > tol:
                raise MomentumSupportBreach(
                    "charge changed by %.3e across a momentum translation; "
                    "support left the box" % (charge_after - charge_before))
        else:
            out = _trace_and_gather(out, g, force.E, force.B, dt, total)
        _clip(out, g.cell_volume, tally)
    return DistributionFunction(g, out, f.time)


def vlasov_step(f, force, dt, tally=None):
    """Strang-split transport step: advect_x(dt/2) o advect_p(dt) o advect_x(dt/2)."""
    half = advect_x(f, 0.5 * dt, tally)
    kicked = advect_p(half, force, dt, tally)
    return advect_x(kicked, 0.5 * dt, tally)
