import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from rvm.phase_space import (PhaseGrid, DistributionFunction,  # noqa: E402
                             compute_moments)
from rvm import regularized as reg  # noqa: E402

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="session")
def small_grid():
    """Reduced-geometry grid small enough for per-test use."""
    return PhaseGrid((32, 1, 1), (TWO_PI,) * 3, (33, 33, 1), 4.0)


@pytest.fixture(scope="session")
def micro3d_grid():
    """Micro 3D3V grid for full-geometry smoke tests."""
    return PhaseGrid((8, 8, 8), (TWO_PI,) * 3, (8, 8, 8), 4.0)


def gaussian_bump_df(grid, width=0.8, center=(0.0, 0.0, 0.0), time=0.0):
    """Smooth compactly supported distribution with generous clearance
    between its support (cut at 0.55 P) and the momentum boundary layer."""
    from rvm.profiles import radial_taper
    p1, p2, p3 = grid.p_mesh
    r = np.sqrt((p1 - center[0]) ** 2 + (p2 - center[1]) ** 2
                + (p3 - center[2]) ** 2)
    P = grid.momentum_halfwidth
    pm = np.sqrt(p1 * p1 + p2 * p2 + p3 * p3)
    vals = np.exp(-0.5 * (r / width) ** 2) * radial_taper(pm, 0.35 * P, 0.55 * P)
    full = np.broadcast_to(vals, grid.shape).copy()
    return DistributionFunction(grid, full, time)


@pytest.fixture(scope="session")
def short_run():
    """One short maxwellian-bump run shared by diagnostics-style tests."""
    cfg = reg.preset_config("maxwellian-bump", nx=(32, 1, 1), np_=(49, 49, 1),
                            t_final=0.4, dt=0.02, save_every=2)
    return reg.run(cfg)


@pytest.fixture(scope="session")
def short_run_dense():
    """Short run saved every step (weak-form and triple construction)."""
    cfg = reg.preset_config("maxwellian-bump", nx=(32, 1, 1), np_=(49, 49, 1),
                            t_final=0.5, dt=0.02, save_every=1)
    return reg.run(cfg)


def compact_x_run(t_final=0.3, nx=64, npc=49, save_every=2):
    """Initial data compactly supported in x (for finite propagation)."""
    from rvm.profiles import bump, radial_taper
    from rvm.maxwell import solve_initial_fields
    from rvm.mollifier import make_kernel, scale as mscale

    cfg = reg.preset_config("maxwellian-bump", nx=(nx, 1, 1), np_=(npc, npc, 1),
                            t_final=t_final, dt=0.02, save_every=save_every)
    grid = cfg.grid()
    L = grid.spatial_lengths[0]
    x = grid.x_axes[0].reshape(-1, 1, 1, 1, 1, 1)
    d = (x - L / 2.0)
    xprof = bump(d / (0.22 * L))
    p1, p2, p3 = grid.p_mesh
    pm = np.sqrt(p1 * p1 + p2 * p2 + p3 * p3)
    P = grid.momentum_halfwidth
    pprof = np.exp(-12.0 * (np.sqrt(1 + pm * pm) - 1)) \
        * radial_taper(pm, reg.TAPER_INNER * P, reg.TAPER_OUTER * P)
    # weak blob: the strong-form propagation test probes ballistic transport,
    # and a small self-field keeps momentum support far from the box
    vals = 0.02 * xprof * pprof.reshape((1, 1, 1) + grid.momentum_cells)
    f = DistributionFunction(grid, np.ascontiguousarray(
        np.broadcast_to(vals, grid.shape)), 0.0)
    smoother = mscale(make_kernel(), cfg.n, grid)
    fields = solve_initial_fields(compute_moments(f).rho, grid, smoother)
    state = reg.SimulationState(f=f, fields=fields, smoother=smoother,
                                step_index=0, config=cfg)
    history = []
    rows = []
    nsteps = int(round(t_final / cfg.dt))
    history.append(reg.SnapshotRecord(0, 0.0, f.copy(), fields.copy(), 0.0))
    rows.append(reg.diagnostics_row(state))
    for step in range(1, nsteps + 1):
        state = reg.coupled_step(state)
        if step % save_every == 0 or step == nsteps:
            history.append(reg.SnapshotRecord(step, state.time, state.f.copy(),
                                              state.fields.copy(),
                                              state.tally.total))
            rows.append(reg.diagnostics_row(state))
    return reg.RunResult(config=cfg, grid=grid, smoother=smoother,
                         history=history, rows=rows)
