"""Space-time Fourier analysis of kinetic transport triples and the
quantitative momentum-averaging estimate.

A transport triple (h, g0, g1) satisfies
    d_t h + p_hat . grad_x h = g0 + div_p g1
on a time window (h compactly supported inside it) times the torus times
the momentum box.  Fourier transforming in (t, x) turns transport into the
algebraic identity i (tau + p_hat . xi) h_hat = g0_hat + div_p g1_hat.

The momentum average I(tau, xi) = int h_hat psi dp is split into
    I1: the near-resonant part, cut off where |tau + p_hat . xi| <= 2 kappa,
    I2: the rest, controlled through the transport identity,
with kappa = 1 for |xi| <= 1 and sqrt(|xi|) beyond.  The weighted integral
of |I|^2 with weight (1 + sqrt|tau| + sqrt|xi|) is the squared H^{1/4} norm
of the momentum average; its budget decomposes into five pieces A1..A5
whose expected controls (by the combined L2 data norm N and by |h_hat|
alone) are measured, not derived.

All discrete norms follow the unitary convention: physical sums carry
dt dx dp cell measures, Fourier sums carry 1/(T V_x) per (tau, xi) mode,
making Parseval exact to roundoff.
"""

import math
from dataclasses import dataclass

import numpy as np

from .phase_space import PhaseGrid
from .profiles import bump, cutoff, plateau, plateau3, plateau_prime

TIME_MARGIN = 0.1     # fraction of the window kept identically zero
TIME_PLATEAU = 0.3    # |t - T/2| <= 0.3 T is the flat part of the cutoff


def time_cutoff(times, window):
    """The window cutoff: 1 on the middle 60%, 0 on the outer 10% margins."""
    s = (np.asarray(times, dtype=float) - 0.5 * window) / window
    return plateau(s, TIME_PLATEAU, 0.5 - TIME_MARGIN)


def time_cutoff_prime(times, window):
    s = (np.asarray(times, dtype=float) - 0.5 * window) / window
    return plateau_prime(s, TIME_PLATEAU, 0.5 - TIME_MARGIN) / window


@dataclass
class TransportTriple:
    """Sampled transport data on (time window) x (torus) x (momentum box)."""

    grid: PhaseGrid
    times: np.ndarray
    h: np.ndarray
    g0: np.ndarray
    g1: np.ndarray
    support_radius: float

    def __post_init__(self):
        shape = (len(self.times),) + self.grid.shape
        if self.h.shape != shape or self.g0.shape != shape \
                or self.g1.shape != (3,) + shape:
            raise ValueError("triple arrays do not match (Nt,) + grid shape")
        dts = np.diff(self.times)
        if len(dts) and not np.allclose(dts, dts[0], rtol=1e-12, atol=0.0):
            raise ValueError("triple requires uniformly spaced time samples")

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])

    @property
    def window(self):
        return len(self.times) * self.dt

    def edge_samples(self):
        m = int(math.floor(TIME_MARGIN * len(self.times)))
        return max(m, 1)

    def validate_window(self):
        m = self.edge_samples()
        if np.any(self.h[:m] != 0.0) or np.any(self.h[-m:] != 0.0):
            raise ValueError("h does not vanish on the 10% time-window margins")

    def norms(self):
        """Physical L2 norms (|h|, |g0|, |g1|)."""
        w = self.dt * self.grid.cell_volume

        def l2(a):
            return float(np.sqrt(np.sum(a * a) * w))

        return l2(self.h), l2(self.g0), l2(self.g1)


@dataclass
class SpaceTimeSpectrum:
    """Fourier transform of a triple in (t, x), per momentum cell."""

    grid: PhaseGrid
    tau: np.ndarray
    xi: tuple
    h_hat: np.ndarray
    g0_hat: np.ndarray
    g1_hat: np.ndarray
    window: float
    dt: float

    @property
    def mode_measure(self):
        """Fourier measure per (tau, xi) mode: 1 / (T V_x)."""
        vx = 1.0
        for L in self.grid.spatial_lengths:
            vx *= L
        return 1.0 / (self.window * vx)

    def xi_mag(self):
        X = np.meshgrid(*self.xi, indexing="ij")
        return np.sqrt(sum(x * x for x in X))

    def phase_speed(self):
        """tau + p_hat . xi over (tau-modes, xi-modes, p-cells)."""
        nt = len(self.tau)
        shape_t = (nt, 1, 1, 1, 1, 1, 1)
        arg = self.tau.reshape(shape_t).astype(float).copy()
        arg = np.broadcast_to(arg, (nt,) + self.grid.shape).copy()
        phat = self.grid.phat_mesh
        for a in range(3):
            xi_a = self.xi[a].reshape(
                [1] + [-1 if i == a else 1 for i in range(3)] + [1, 1, 1])
            pa = phat[a].reshape((1, 1, 1, 1) + self.grid.momentum_cells)
            arg = arg + xi_a * pa
        return arg

    def hhat_l2(self):
        """Full L2 norm of h_hat (equals |h| by Parseval)."""
        w = self.mode_measure * self.grid.cell_volume_p
        return float(np.sqrt(np.sum(np.abs(self.h_hat) ** 2) * w))


def spectrum(triple):
    """FFT of the triple in (t, x); window margins must be exactly zero."""
    triple.validate_window()
    g = triple.grid
    dt = triple.dt
    vx = g.cell_volume_x
    scale = dt * vx
    axes = (0, 1, 2, 3)
    h_hat = np.fft.fftn(triple.h, axes=axes) * scale
    g0_hat = np.fft.fftn(triple.g0, axes=axes) * scale
    g1_hat = np.fft.fftn(triple.g1, axes=(1, 2, 3, 4)) * scale
    tau = 2.0 * np.pi * np.fft.fftfreq(len(triple.times), d=dt)
    xi = tuple(2.0 * np.pi * np.fft.fftfreq(n, d=d)
               for n, d in zip(g.spatial_cells, g.dx))
    return SpaceTimeSpectrum(grid=g, tau=tau, xi=xi, h_hat=h_hat,
                             g0_hat=g0_hat, g1_hat=g1_hat,
                             window=triple.window, dt=dt)


def _div_p(arr, grid, comp_axis_offset):
    """Centered momentum divergence with zero closure at the boundary layer.

    arr has a leading component axis; momentum axes are the trailing three.
    Degenerate axes contribute nothing.
    """
    out = np.zeros(arr.shape[1:], dtype=arr.dtype)
    nd = arr.ndim - 1
    for a in range(3):
        n = grid.momentum_cells[a]
        if n < 2:
            continue
        axis = nd - 3 + a
        comp = arr[a]
        d = np.zeros_like(comp)
        sl_mid = [slice(None)] * nd
        sl_p = [slice(None)] * nd
        sl_m = [slice(None)] * nd
        sl_mid[axis] = slice(1, n - 1)
        sl_p[axis] = slice(2, n)
        sl_m[axis] = slice(0, n - 2)
        d[tuple(sl_mid)] = comp[tuple(sl_p)] - comp[tuple(sl_m)]
        # one-sided closure with zero ghosts: data vanish on the layer
        sl_mid[axis] = 0
        sl_p[axis] = 1
        d[tuple(sl_mid)] = comp[tuple(sl_p)]
        sl_mid[axis] = n - 1
        sl_m[axis] = n - 2
        d[tuple(sl_mid)] = -comp[tuple(sl_m)]
        out = out + d / (2.0 * grid.dp[a])
    return out


def fourier_transport_residual(spec):
    """L2 norm of i(tau + p_hat . xi) h_hat - g0_hat - div_p g1_hat."""
    arg = spec.phase_speed()
    res = 1j * arg * spec.h_hat - spec.g0_hat - _div_p(spec.g1_hat, spec.grid, 1)
    w = spec.mode_measure * spec.grid.cell_volume_p
    return float(np.sqrt(np.sum(np.abs(res) ** 2) * w))


def physical_transport_residual(triple):
    """Same residual assembled in physical space (spectral t, x derivatives,
    centered momentum differences); equals the Fourier norm by Parseval.

    The residual field is kept complex: unpaired Nyquist modes make the
    spectral derivative of a real field slightly non-Hermitian, and the
    exact Parseval dual of the Fourier-side residual keeps that content.
    """
    spec = spectrum(triple)
    axes = (0, 1, 2, 3)
    dth = np.fft.ifftn(spec.h_hat * (1j * spec.tau.reshape(-1, 1, 1, 1, 1, 1, 1)),
                       axes=axes)
    adv = np.zeros_like(dth)
    phat = triple.grid.phat_mesh
    for a in range(3):
        xi_a = spec.xi[a].reshape(
            [1] + [-1 if i == a else 1 for i in range(3)] + [1, 1, 1])
        dxa = np.fft.ifftn(spec.h_hat * (1j * xi_a), axes=axes)
        adv += phat[a].reshape((1, 1, 1, 1) + triple.grid.momentum_cells) * dxa
    scale = spec.dt * triple.grid.cell_volume_x
    res = (dth + adv) / scale - triple.g0 - _div_p(triple.g1, triple.grid, 1)
    w = triple.dt * triple.grid.cell_volume
    return float(np.sqrt(np.sum(np.abs(res) ** 2) * w))


@dataclass
class MomentumBump:
    """Radial momentum test function from the repo cutoff class: 1 inside
    half its radius, 0 beyond it."""

    radius: float

    def sample(self, grid):
        p1, p2, p3 = grid.p_mesh
        r = np.sqrt(p1 * p1 + p2 * p2 + p3 * p3)
        return cutoff(2.0 * r / self.radius)

    def check_support(self, grid):
        P = grid.momentum_halfwidth
        active = [d for d, n in zip(grid.dp, grid.momentum_cells) if n > 1]
        layer = 1.5 * max(active) if active else 0.0
        if self.radius >= P - layer:
            raise ValueError("momentum test function touches the box "
                             "(radius %g vs halfwidth %g)" % (self.radius, P))

    @property
    def velocity_bound(self):
        """r = R_psi / sqrt(1 + R_psi^2): top speed on the support."""
        return self.radius / math.sqrt(1.0 + self.radius * self.radius)


@dataclass
class AveragingReport:
    """All Fourier-side objects of one momentum-average analysis."""

    psi_radius: float
    r: float
    tau: np.ndarray
    xi_mag: np.ndarray
    kappa: np.ndarray
    I: np.ndarray
    I1: np.ndarray
    I2: np.ndarray
    N: np.ndarray
    mode_measure: float
    psi_l2sq: float
    hhat_l2: float
    input_norms: tuple
    i1_violation: float
    split_defect: float          # max |I - (I1 + I2)| / max |I|

    def h14_norm(self):
        """Discrete H^{1/4} norm of the momentum average and its announced
        majorant |psi|^2 |h_hat|^2 + int |I|^2 (sqrt|tau| + sqrt|xi|)."""
        Tm, Xm = np.meshgrid(np.sqrt(np.abs(self.tau)),
                             np.sqrt(self.xi_mag).ravel(), indexing="ij")
        w = np.abs(self.I.reshape(len(self.tau), -1)) ** 2
        base = float(np.sum(w) * self.mode_measure)
        weighted = float(np.sum(w * (Tm + Xm)) * self.mode_measure)
        norm = math.sqrt(base + weighted)
        majorant = math.sqrt(self.psi_l2sq * self.hhat_l2 ** 2 + weighted)
        return norm, majorant

    def a_decomposition(self):
        """A1..A5 split of the weighted integral (exact partition)."""
        nt = len(self.tau)
        t_half = np.sqrt(np.abs(self.tau)).reshape(-1, 1)
        xi = self.xi_mag.ravel().reshape(1, -1)
        x_half = np.sqrt(xi)
        w = np.abs(self.I.reshape(nt, -1)) ** 2 * self.mode_measure
        big_xi = xi > 1.0
        tau_col = np.abs(self.tau).reshape(-1, 1)
        thresh = self.r + 2.0
        a1 = float(np.sum(w * t_half * big_xi))
        a2 = float(np.sum(w * t_half * (~big_xi) * (tau_col > thresh)))
        a3 = float(np.sum(w * t_half * (~big_xi) * (tau_col <= thresh)))
        a4 = float(np.sum(w * x_half * (~big_xi)))
        a5 = float(np.sum(w * x_half * big_xi))
        return a1, a2, a3, a4, a5

    def n_l2sq(self):
        """int N^2 over (tau, xi)."""
        return float(np.sum(self.N ** 2) * self.mode_measure)

    def bound_ratio(self):
        h, g0, g1 = self.input_norms
        denom = h + g0 + g1
        if denom == 0.0:
            return 0.0
        return self.h14_norm()[0] / denom


def split_I(spec, psi, input_norms=None):
    """Momentum average I and its near-resonant / off-resonant split.

    kappa follows the frequency rule (1 for |xi| <= 1, sqrt(|xi|) above);
    the splitting cutoff is the repo-wide plateau, so I1 vanishes exactly
    wherever every momentum in supp psi keeps |tau + p_hat . xi| > 2 kappa,
    i.e. on the cone |tau| > r |xi| + 2 kappa.
    """
    g = spec.grid
    psi.check_support(g)
    psi_vals = psi.sample(g)
    vp = g.cell_volume_p

    def p_avg(a):
        return np.tensordot(a, psi_vals, axes=([4, 5, 6], [0, 1, 2])) * vp

    I = p_avg(spec.h_hat)
    xi_mag = spec.xi_mag()
    kappa = np.where(xi_mag <= 1.0, 1.0, np.sqrt(xi_mag))
    arg = spec.phase_speed() / kappa.reshape((1,) + g.spatial_cells + (1, 1, 1))
    zeta = cutoff(arg)
    I1 = p_avg(spec.h_hat * zeta)
    I2 = p_avg(spec.h_hat * (1.0 - zeta))
    scale = max(float(np.max(np.abs(I))), np.finfo(float).tiny)
    split_defect = float(np.max(np.abs(I - (I1 + I2)))) / scale

    r = psi.velocity_bound
    outside = np.abs(spec.tau).reshape(-1, 1, 1, 1) \
        > (r * xi_mag + 2.0 * kappa)[None, ...]
    i1_violation = float(np.max(np.abs(I1)[outside])) if outside.any() else 0.0

    vp_norm = lambda a: np.sqrt(np.sum(np.abs(a) ** 2, axis=(-3, -2, -1)) * vp)
    N = vp_norm(spec.h_hat) + vp_norm(spec.g0_hat) \
        + np.sqrt(np.sum(np.abs(spec.g1_hat) ** 2, axis=(0, -3, -2, -1)) * vp)

    if input_norms is None:
        input_norms = (spec.hhat_l2(), 0.0, 0.0)
    return AveragingReport(
        psi_radius=psi.radius, r=r, tau=spec.tau, xi_mag=xi_mag, kappa=kappa,
        I=I, I1=I1, I2=I2, N=N, mode_measure=spec.mode_measure,
        psi_l2sq=float(np.sum(psi_vals ** 2) * vp), hhat_l2=spec.hhat_l2(),
        input_norms=tuple(input_norms), i1_violation=i1_violation,
        split_defect=split_defect)


def analyze_triple(triple, psi):
    """Spectrum + split + norms for one triple; returns the report."""
    spec = spectrum(triple)
    return split_I(spec, psi, input_norms=triple.norms())


@dataclass
class LemmaVerification:
    """Ensemble verification of the averaging estimate."""

    rows: list
    max_ratio: float
    max_split_defect: float
    max_i1_violation: float
    c_combined: float
    c_hhat: float

    def csv_text(self):
        header = ("triple_id,grid_level,h_norm,g0_norm,g1_norm,h14,ratio,"
                  "a1,a2,a3,a4,a5,i1_violation")
        lines = [header]
        for row in self.rows:
            lines.append(",".join(["%s" % row["id"], "%d" % row["level"]]
                                  + ["%.17g" % row[k] for k in
                                     ("h_norm", "g0_norm", "g1_norm", "h14",
                                      "ratio", "a1", "a2", "a3", "a4", "a5",
                                      "i1_violation")]))
        return "\n".join(lines) + "\n"


def verify_lemma(triples, psi, level=0, ids=None):
    """Analyze an ensemble of transport triples against the averaging bound.

    Reports per-triple bound ratios, the A1..A5 budget, measured control
    constants, and the exact-algebra defects (split identity, I1 support).
    """
    rows = []
    c_combined = 0.0
    c_hhat = 0.0
    for k, triple in enumerate(triples):
        rep = analyze_triple(triple, psi)
        h14, majorant = rep.h14_norm()
        a1, a2, a3, a4, a5 = rep.a_decomposition()
        n2 = rep.n_l2sq()
        if n2 > 0.0:
            c_combined = max(c_combined, (a1 + a2 + a5) / n2)
        if rep.hhat_l2 > 0.0:
            c_hhat = max(c_hhat, max(a3, a4) / rep.hhat_l2 ** 2)
        h, g0, g1 = rep.input_norms
        rows.append({
            "id": ids[k] if ids else "triple%02d" % k, "level": level,
            "h_norm": h, "g0_norm": g0, "g1_norm": g1, "h14": h14,
            "majorant": majorant, "ratio": rep.bound_ratio(),
            "a1": a1, "a2": a2, "a3": a3, "a4": a4, "a5": a5,
            "i1_violation": rep.i1_violation,
            "split_defect": rep.split_defect,
        })
    return LemmaVerification(
        rows=rows,
        max_ratio=max((r["ratio"] for r in rows), default=0.0),
        max_split_defect=max((r["split_defect"] for r in rows), default=0.0),
        max_i1_violation=max((r["i1_violation"] for r in rows), default=0.0),
        c_combined=c_combined, c_hhat=c_hhat)


def make_triple_from_run(result, support_radius=None):
    """Clothe a run history in the time cutoff: h = zeta f, g0 = zeta' f,
    g1 = (E + p_hat x B) zeta f with the run's mollified fields.

    The history must have been saved every step (uniform cadence).
    """
    hist = result.history
    if len(hist) < 8:
        raise ValueError("run history too short for a transport triple")
    times = np.array([s.time for s in hist[:-1]])
    grid = result.grid
    nt = len(times)
    window = nt * (times[1] - times[0])
    zeta = time_cutoff(times - times[0], window)
    dzeta = time_cutoff_prime(times - times[0], window)
    shape = (nt,) + grid.shape
    h = np.zeros(shape)
    g0 = np.zeros(shape)
    g1 = np.zeros((3,) + shape)
    phat = grid.phat_mesh
    pshape = (1, 1, 1) + grid.momentum_cells
    for k in range(nt):
        f = hist[k].f.values
        h[k] = zeta[k] * f
        g0[k] = dzeta[k] * f
        if zeta[k] != 0.0:
            E, B = hist[k].fields.E, hist[k].fields.B
            zf = zeta[k] * f
            for a in range(3):
                b, c = (a + 1) % 3, (a + 2) % 3
                force_a = (E[a][..., None, None, None]
                           + phat[b].reshape(pshape) * B[c][..., None, None, None]
                           - phat[c].reshape(pshape) * B[b][..., None, None, None])
                g1[a, k] = force_a * zf
    if support_radius is None:
        support_radius = grid.momentum_halfwidth
    return TransportTriple(grid=grid, times=times, h=h, g0=g0, g1=g1,
                           support_radius=support_radius)


# --- triple generators (grid-transferable recipes) ---


@dataclass
class RandomTripleRecipe:
    """Random smooth triple: a few torus modes times momentum bumps, with
    g0 defined by the discrete transport operator so the Fourier identity
    holds exactly at any sampling resolution.

    Use an odd number of time samples: with no unpaired Nyquist mode the
    spectral transport of real data is real, so the real-valued g0 satisfies
    the identity to roundoff (spatial content stays below the x-Nyquist by
    construction)."""

    seed: int
    modes: int = 3
    with_g1: bool = True
    p_radius_frac: float = 0.55

    def sample(self, nt, window, grid):
        rng = np.random.default_rng(self.seed)
        times = np.arange(nt) * (window / nt)
        w = time_cutoff(times, window)
        P = grid.momentum_halfwidth
        p1, p2, p3 = grid.p_mesh
        shape = (nt,) + grid.shape
        h = np.zeros(shape)
        active = [a for a in range(3) if grid.spatial_cells[a] > 1]
        x_mesh = grid.x_mesh()
        for _ in range(self.modes):
            kvec = np.zeros(3)
            for a in active:
                kvec[a] = rng.integers(-3, 4) * 2.0 * np.pi / grid.spatial_lengths[a]
            phase = rng.uniform(0, 2 * np.pi)
            amp = rng.uniform(0.3, 1.0)
            cx = sum(kvec[a] * x_mesh[a] for a in range(3))
            center = rng.uniform(-0.25, 0.25, size=3) * P
            width = rng.uniform(0.3, self.p_radius_frac) * P
            for a in range(3):
                if grid.momentum_cells[a] < 2:
                    center[a] = 0.0
            rr = np.sqrt((p1 - center[0]) ** 2 + (p2 - center[1]) ** 2
                         + (p3 - center[2]) ** 2)
            gp = bump(rr / width)
            prof = np.cos(cx + phase)[None, ..., None, None, None] \
                * gp[None, None, None, None, ...]
            h += amp * w.reshape(-1, 1, 1, 1, 1, 1, 1) * prof
        g1 = np.zeros((3,) + shape)
        if self.with_g1:
            center = rng.uniform(-0.2, 0.2, size=3) * P
            width = rng.uniform(0.3, self.p_radius_frac) * P
            for a in range(3):
                if grid.momentum_cells[a] < 2:
                    center[a] = 0.0
            rr = np.sqrt((p1 - center[0]) ** 2 + (p2 - center[1]) ** 2
                         + (p3 - center[2]) ** 2)
            gp = bump(rr / width)
            for a in range(3):
                if grid.momentum_cells[a] < 2:
                    continue
                kvec = rng.integers(-2, 3)
                ax = active[0]
                cx = kvec * 2.0 * np.pi / grid.spatial_lengths[ax] * x_mesh[ax]
                amp = rng.uniform(0.1, 0.5)
                g1[a] = amp * w.reshape(-1, 1, 1, 1, 1, 1, 1) \
                    * np.cos(cx)[None, ..., None, None, None] \
                    * gp[None, None, None, None, ...]
        g0 = _discrete_transport(h, grid, window) - _div_p(g1, grid, 1)
        radius = self.p_radius_frac * P + 0.3 * P
        return TransportTriple(grid=grid, times=times, h=h, g0=g0, g1=g1,
                               support_radius=min(radius, 0.95 * P))


def _discrete_transport(h, grid, window):
    """d_t h + p_hat . grad_x h with spectral derivatives in (t, x)."""
    nt = h.shape[0]
    dt = window / nt
    axes = (0, 1, 2, 3)
    hh = np.fft.fftn(h, axes=axes)
    tau = 2.0 * np.pi * np.fft.fftfreq(nt, d=dt)
    out = np.fft.ifftn(hh * (1j * tau.reshape(-1, 1, 1, 1, 1, 1, 1)),
                       axes=axes).real
    phat = grid.phat_mesh
    for a in range(3):
        if grid.spatial_cells[a] < 2:
            continue
        k = 2.0 * np.pi * np.fft.fftfreq(grid.spatial_cells[a], d=grid.dx[a])
        kshape = [1] + [-1 if i == a else 1 for i in range(3)] + [1, 1, 1]
        d = np.fft.ifftn(hh * (1j * k.reshape(kshape)), axes=axes).real
        out += phat[a].reshape((1, 1, 1, 1) + grid.momentum_cells) * d
    return out


def _poly_window(times, window, power=20):
    """Band-limited time window sin(pi t / T)^power with analytic derivative.

    A trig polynomial of degree ``power``: as long as the time sampling
    resolves that degree, the discrete spectral time derivative reproduces
    the analytic one exactly, so manufactured residuals carry no time floor.
    Values on the 10% margins (below sin(0.1 pi)^power ~ 1e-10 for the
    default power) are zeroed to honor the window invariant.
    """
    t = np.asarray(times, dtype=float)
    s = np.sin(np.pi * t / window)
    w = s ** power
    dw = power * (np.pi / window) * s ** (power - 1) * np.cos(np.pi * t / window)
    mask = (t >= TIME_MARGIN * window) & (t <= (1.0 - TIME_MARGIN) * window)
    return np.where(mask, w, 0.0), np.where(mask, dw, 0.0)


@dataclass
class FreeStreamingRecipe:
    """Manufactured exact solution h = w(t) H(x - p_hat t, p), g0 = w' H,
    g1 = 0.  The x profile is a C^3 plateau bump (septic transition), so the
    sampled residual decays beyond third order in the spatial grid; the
    band-limited time window contributes no time floor."""

    x_width_frac: float = 0.22
    p_radius_frac: float = 0.5

    def _xprofile(self, y, L):
        d = (y + L / 2.0) % L - L / 2.0
        return 0.5 + plateau3(d / (self.x_width_frac * L), 0.5, 1.0)

    def sample(self, nt, window, grid):
        times = np.arange(nt) * (window / nt)
        w, dw = _poly_window(times, window)
        P = grid.momentum_halfwidth
        p1, p2, p3 = grid.p_mesh
        rr = np.sqrt(p1 * p1 + p2 * p2 + p3 * p3)
        gp = bump(rr / (self.p_radius_frac * P))
        ax = next(a for a in range(3) if grid.spatial_cells[a] > 1)
        L = grid.spatial_lengths[ax]
        x = grid.x_axes[ax]
        phat_ax = grid.phat_mesh[ax]
        shape = (nt,) + grid.shape
        h = np.zeros(shape)
        g0 = np.zeros(shape)
        xshape = tuple(-1 if i == ax else 1 for i in range(3)) + (1, 1, 1)
        for k in range(nt):
            y = x.reshape(xshape) - phat_ax[None, None, None, ...] * times[k]
            prof = np.broadcast_to(
                self._xprofile(y, L) * gp[None, None, None, ...], grid.shape)
            h[k] = w[k] * prof
            g0[k] = dw[k] * prof
        g1 = np.zeros((3,) + shape)
        return TransportTriple(grid=grid, times=times, h=h, g0=g0, g1=g1,
                               support_radius=self.p_radius_frac * P)


def _inf_window(times, window):
    """C-infinity time window: 0 on the 10% margins, 1 in the middle."""
    from .profiles import smoothstep_inf
    u = np.asarray(times) / window
    return (smoothstep_inf((u - TIME_MARGIN) / 0.15)
            * smoothstep_inf((1.0 - TIME_MARGIN - u) / 0.15))


def _inf_window_prime(times, window):
    from .profiles import smoothstep_inf, smoothstep_inf_prime
    u = np.asarray(times) / window
    a = smoothstep_inf((u - TIME_MARGIN) / 0.15)
    b = smoothstep_inf((1.0 - TIME_MARGIN - u) / 0.15)
    da = smoothstep_inf_prime((u - TIME_MARGIN) / 0.15) / 0.15
    db = -smoothstep_inf_prime((1.0 - TIME_MARGIN - u) / 0.15) / 0.15
    return (da * b + a * db) / window


@dataclass
class ForcedRecipe:
    """Manufactured triple with a nonzero momentum flux: h = w c(x) G(p),
    g1 = 0.4 w c(x) G1(p) e_axis, and g0 chosen in closed form so the
    transport equation holds in the continuum.

    The window and the x profile are trig polynomials (exact under the
    discrete spectral derivatives), so the sampled residual isolates the
    centered-difference momentum divergence: it decays at second order in
    the momentum grid."""

    x_power: int = 4
    p_radius_frac: float = 0.45

    def sample(self, nt, window, grid):
        times = np.arange(nt) * (window / nt)
        w, dw = _poly_window(times, window)
        P = grid.momentum_halfwidth
        p1, p2, p3 = grid.p_mesh
        rr = np.sqrt(p1 * p1 + p2 * p2 + p3 * p3)
        G = bump(rr / (self.p_radius_frac * P))
        safe = np.where(rr == 0.0, 1.0, rr)
        ax = next(a for a in range(3) if grid.spatial_cells[a] > 1)
        L = grid.spatial_lengths[ax]
        x = grid.x_axes[ax]
        xshape = tuple(-1 if i == ax else 1 for i in range(3)) + (1, 1, 1)
        theta = (2.0 * np.pi / L) * (x - L / 2.0).reshape(xshape)
        base = 0.5 * (1.0 + np.cos(theta))
        c = base ** self.x_power
        dc = -self.x_power * base ** (self.x_power - 1) \
            * 0.5 * np.sin(theta) * (2.0 * np.pi / L)
        # momentum flux along the first active momentum axis; the flux
        # profile is the piecewise-polynomial plateau, whose bounded low
        # derivatives keep the centered-difference constant tame
        pax = next(a for a in range(3) if grid.momentum_cells[a] > 1)
        R1 = self.p_radius_frac * P
        G1 = plateau(rr / R1, 0.5, 1.0)
        dG1 = (plateau_prime(rr / R1, 0.5, 1.0) / R1) * (grid.p_mesh[pax] / safe)
        shape = (nt,) + grid.shape
        h = np.zeros(shape)
        g0 = np.zeros(shape)
        g1 = np.zeros((3,) + shape)
        phat_ax = grid.phat_mesh[ax]
        hk = np.broadcast_to(c * G[None, None, None, ...], grid.shape)
        adv = np.broadcast_to(dc * (phat_ax * G)[None, None, None, ...], grid.shape)
        flux = np.broadcast_to(c * G1[None, None, None, ...], grid.shape)
        dflux = np.broadcast_to(c * dG1[None, None, None, ...], grid.shape)
        for k in range(nt):
            h[k] = w[k] * hk
            g1[pax, k] = 0.4 * w[k] * flux
            g0[k] = dw[k] * hk + w[k] * adv - 0.4 * w[k] * dflux
        return TransportTriple(grid=grid, times=times, h=h, g0=g0, g1=g1,
                               support_radius=self.p_radius_frac * P)
