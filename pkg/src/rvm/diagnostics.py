"""Conservation laws, a-priori bounds, and weak-form residuals evaluated on
run histories.

Inequality checks (current domination |j| <= rho, the density interpolation
bound with its explicit constant, finite propagation of charge, energy
domination) hold snapshot by snapshot.  Conservation and residual checks
(charge, local conservation laws, the distributional pairing) are measured
as time series whose drift must vanish under refinement; the acceptance
harness pins the orders.
"""

import math
from dataclasses import dataclass

import numpy as np

from .maxwell import field_energy, spectral_divergence
from .phase_space import compute_moments, compute_energy_densities, kinetic_norm, lq_norm
from .profiles import bump, bump_prime


@dataclass
class ConservationReport:
    """Per-snapshot conserved-quantity series and their worst relative drifts."""

    times: np.ndarray
    series: dict
    drifts: dict
    linf_monotone: bool
    clip_final: float


def conservation_suite(result):
    """Track every conserved quantity along a run history."""
    if len(result.history) < 2:
        raise ValueError("conservation suite needs at least two snapshots")
    names = ("charge", "l1", "l2", "linf", "kin_norm", "mod_energy",
             "phys_energy", "rho43", "j43")
    series = {n: [] for n in names}
    for snap in result.history:
        f = snap.f
        mom = compute_moments(f)
        volx = f.grid.cell_volume_x
        jmag = np.sqrt(np.sum(mom.j * mom.j, axis=0))
        kin = kinetic_norm(f)
        series["charge"].append(f.charge())
        series["l1"].append(lq_norm(f, 1))
        series["l2"].append(lq_norm(f, 2))
        series["linf"].append(lq_norm(f, np.inf))
        series["kin_norm"].append(kin)
        series["mod_energy"].append(kin + field_energy(snap.fields, tilde=True))
        series["phys_energy"].append(kin + field_energy(snap.fields, tilde=False))
        series["rho43"].append(float(np.sum(mom.rho ** (4.0 / 3.0)) * volx) ** 0.75)
        series["j43"].append(float(np.sum(jmag ** (4.0 / 3.0)) * volx) ** 0.75)
    series = {n: np.array(v) for n, v in series.items()}
    drifts = {}
    for n, v in series.items():
        scale = abs(v[0]) if v[0] != 0 else 1.0
        drifts[n] = float(np.max(np.abs(v - v[0]))) / scale
    linf = series["linf"]
    monotone = bool(np.all(linf[1:] <= linf[:-1]))
    return ConservationReport(times=np.array(result.times), series=series,
                              drifts=drifts, linf_monotone=monotone,
                              clip_final=result.history[-1].clip_total)


def rho_interpolation_check(f):
    """Pointwise density bound rho <= C_f K^{3/4} with the explicit constant
    C_f = (4 pi / 3) |f|_inf + 1, where K is the kinetic-weight moment.

    Returns (per-cell margin array, min margin); margins are bound - rho.
    """
    g = f.grid
    mom = compute_moments(f)
    K = np.tensordot(f.values, g.gamma_mesh, axes=([3, 4, 5], [0, 1, 2])) \
        * g.cell_volume_p
    cf = 4.0 * np.pi / 3.0 * lq_norm(f, np.inf) + 1.0
    margin = cf * K ** 0.75 - mom.rho
    return margin, float(margin.min())


def current_domination_margin(f, q=1.0):
    """min over cells of rho_q - |j_q|; exact nonnegativity is the contract."""
    mom = compute_moments(f, q)
    jmag = np.sqrt(np.sum(mom.j * mom.j, axis=0))
    return float(np.min(mom.rho - jmag))


def energy_domination_check(state_or_snap):
    """Modified energy minus (kinetic + mollified-field energy); >= 0 up to
    roundoff by the smoothing contraction."""
    fields = state_or_snap.fields
    kin = kinetic_norm(state_or_snap.f)
    return (kin + field_energy(fields, tilde=True)) \
        - (kin + field_energy(fields, tilde=False))


@dataclass
class LocalConservationResiduals:
    """L2 norms of the discrete local conservation laws at interior snapshots."""

    times: np.ndarray
    charge: np.ndarray
    charge_q2: np.ndarray
    energy: np.ndarray


def local_conservation_residuals(result):
    """Centered-in-time residuals of the local charge laws (q = 1, 2) and of
    the regularized energy law.

    The energy law uses the modified accounting: the tilde-field energy
    density plus kinetic density obeys
    d_t e + div sigma = j . E - (d_n * j) . E~, with E the mollified field,
    so the pointwise exchange term is subtracted before taking the norm.
    """
    hist = result.history
    if len(hist) < 3:
        raise ValueError("need at least three snapshots for centered differences")
    grid = result.grid
    volx = grid.cell_volume_x
    sm = result.smoother

    def l2(a):
        return float(np.sqrt(np.sum(a * a) * volx))

    times, rc, rc2, re = [], [], [], []
    for k in range(1, len(hist) - 1):
        tm, t0, tp = hist[k - 1].time, hist[k].time, hist[k + 1].time
        dt2 = tp - tm
        f0 = hist[k].f
        mom_m = compute_moments(hist[k - 1].f)
        mom_p = compute_moments(hist[k + 1].f)
        mom_0 = compute_moments(f0)
        drho = (mom_p.rho - mom_m.rho) / dt2
        rc.append(l2(drho + spectral_divergence(mom_0.j, grid)))

        mom2_m = compute_moments(hist[k - 1].f, 2.0)
        mom2_p = compute_moments(hist[k + 1].f, 2.0)
        mom2_0 = compute_moments(f0, 2.0)
        drho2 = (mom2_p.rho - mom2_m.rho) / dt2
        rc2.append(l2(drho2 + spectral_divergence(mom2_0.j, grid)))

        def e_sigma(snap):
            en = compute_energy_densities(
                snap.f, snap.fields.E_tilde, snap.fields.B_tilde)
            return en.e, en.sigma

        em, _ = e_sigma(hist[k - 1])
        ep, _ = e_sigma(hist[k + 1])
        e0, sig0 = e_sigma(hist[k])
        de = (ep - em) / dt2
        fields0 = hist[k].fields
        jmoll = sm.convolve(mom_0.j)
        exchange = np.sum(mom_0.j * fields0.E, axis=0) \
            - np.sum(jmoll * fields0.E_tilde, axis=0)
        re.append(l2(de + spectral_divergence(sig0, grid) - exchange))
        times.append(t0)
    return LocalConservationResiduals(
        times=np.array(times), charge=np.array(rc),
        charge_q2=np.array(rc2), energy=np.array(re))


def _center_distance(grid):
    """Periodic distance of each x-cell center from the box center, using
    non-degenerate axes only."""
    axes = []
    for ax, (n, L) in enumerate(zip(grid.spatial_cells, grid.spatial_lengths)):
        if n < 2:
            axes.append(np.zeros(1))
            continue
        x = grid.x_axes[ax] - L / 2.0
        x = (x + L / 2.0) % L - L / 2.0
        axes.append(x)
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    return np.sqrt(X * X + Y * Y + Z * Z)


@dataclass
class FinitePropagationReport:
    """Margins for the expanding-ball charge inequality."""

    radii: list
    times: np.ndarray
    margins: np.ndarray        # (radius, time): rhs - lhs
    slacks: np.ndarray         # (radius, time): boundary-band charge
    ok: bool
    worst: float


def finite_propagation_check(result, R_list, rel_tol=1e-8):
    """Charge outside the ball of radius R + |t| never exceeds the initial
    charge outside radius R, up to one-cell quadrature slack.

    Distances are measured from the box center with periodic wrap; every
    R + |t| must stay below half the smallest active torus period.
    """
    grid = result.grid
    dist = _center_distance(grid)
    half_diag = 0.5 * math.sqrt(sum(
        d * d for d, n in zip(grid.dx, grid.spatial_cells) if n > 1))
    active_L = [L for L, n in zip(grid.spatial_lengths, grid.spatial_cells) if n > 1]
    tmax = max(abs(s.time - result.history[0].time) for s in result.history)
    for R in R_list:
        if R + tmax >= 0.5 * min(active_L):
            raise ValueError("radius %g plus horizon %g exceeds half the "
                             "torus period" % (R, tmax))
    volx = grid.cell_volume_x
    rho0 = compute_moments(result.history[0].f).rho
    total = float(np.sum(rho0)) * volx
    t0 = result.history[0].time
    margins = np.zeros((len(R_list), len(result.history)))
    slacks = np.zeros_like(margins)
    for i, R in enumerate(R_list):
        rhs = float(np.sum(rho0[dist > R])) * volx
        band0 = float(np.sum(rho0[np.abs(dist - R) <= half_diag])) * volx
        for k, snap in enumerate(result.history):
            r_t = R + abs(snap.time - t0)
            rho = compute_moments(snap.f).rho
            lhs = float(np.sum(rho[dist > r_t])) * volx
            band = float(np.sum(rho[np.abs(dist - r_t) <= half_diag])) * volx
            margins[i, k] = rhs - lhs
            slacks[i, k] = band + band0
    worst = float(np.min(margins + slacks + rel_tol * max(total, 1e-300)))
    return FinitePropagationReport(radii=list(R_list), times=np.array(result.times),
                                   margins=margins, slacks=slacks,
                                   ok=bool(worst >= 0.0), worst=worst)


@dataclass
class TestFunction:
    """Factorized smooth test function phi0(t) phi1(x) phi2(p).

    Each factor is the classical C-infinity bump with closed-form gradient;
    degenerate axes are skipped (constant factor 1).  Supports must stay
    strictly inside the domain: (0, T) in time, the momentum box interior
    in p; x bumps live on the torus chart centered at their center.
    """

    t_center: float
    t_width: float
    x_center: tuple
    x_width: float
    p_center: tuple
    p_width: float

    def value_t(self, t):
        return bump((np.asarray(t, dtype=float) - self.t_center) / self.t_width)

    def dvalue_t(self, t):
        return bump_prime((np.asarray(t, dtype=float) - self.t_center)
                          / self.t_width) / self.t_width

    def _offsets(self, grid, centers, axes, lengths=None):
        out = []
        for ax in range(3):
            n = (grid.spatial_cells if lengths else grid.momentum_cells)[ax]
            coords = axes[ax]
            if n < 2:
                out.append(np.zeros(1))
                continue
            d = coords - centers[ax]
            if lengths:
                L = lengths[ax]
                d = (d + L / 2.0) % L - L / 2.0
            out.append(d)
        return np.meshgrid(*out, indexing="ij")

    def value_x(self, grid):
        dx = self._offsets(grid, self.x_center, grid.x_axes, grid.spatial_lengths)
        r = np.sqrt(sum(d * d for d in dx))
        return bump(r / self.x_width)

    def grad_x(self, grid):
        dx = self._offsets(grid, self.x_center, grid.x_axes, grid.spatial_lengths)
        r = np.sqrt(sum(d * d for d in dx))
        safe = np.where(r == 0.0, 1.0, r)
        db = bump_prime(r / self.x_width) / self.x_width
        return np.stack([db * d / safe for d in dx])

    def value_p(self, grid):
        dp = self._offsets(grid, self.p_center, grid.p_axes)
        r = np.sqrt(sum(d * d for d in dp))
        return bump(r / self.p_width)

    def grad_p(self, grid):
        dp = self._offsets(grid, self.p_center, grid.p_axes)
        r = np.sqrt(sum(d * d for d in dp))
        safe = np.where(r == 0.0, 1.0, r)
        db = bump_prime(r / self.p_width) / self.p_width
        return np.stack([db * d / safe for d in dp])


def default_test_bank(grid, t_final, count=5, seed=0):
    """Bank of factorized test functions with randomized centers/widths."""
    rng = np.random.default_rng(seed)
    P = grid.momentum_halfwidth
    bank = []
    for _ in range(count):
        bank.append(TestFunction(
            t_center=float(rng.uniform(0.35, 0.65)) * t_final,
            t_width=float(rng.uniform(0.25, 0.34)) * t_final,
            x_center=tuple(float(rng.uniform(0, L)) for L in grid.spatial_lengths),
            x_width=float(rng.uniform(0.25, 0.45)) * min(
                L for L, n in zip(grid.spatial_lengths, grid.spatial_cells) if n > 1),
            p_center=tuple(float(rng.uniform(-0.2, 0.2)) * P for _ in range(3)),
            p_width=float(rng.uniform(0.35, 0.6)) * P,
        ))
    return bank


@dataclass
class WeakResidualReport:
    """Distributional-pairing residuals, one row per test function."""

    representative: np.ndarray   # |<f(T), phi> - time-integrated form|
    spacetime: np.ndarray        # full weak residual with the d_t phi term
    pairing_scale: np.ndarray    # max_t |<f(t), phi1 phi2>| per test function


def weak_residual(result, phis):
    """Residuals of the weak form of the transport equation along a history.

    For phi = phi1(x) phi2(p) the representative pairing compares
    int f(t) phi with its announced value int f0 phi + int_0^t int
    [p_hat . grad_x phi + (E + p_hat x B) . grad_p phi] f, integrated by the
    composite trapezoid over snapshots.  The space-time residual additionally
    carries phi0(t) and its derivative, so it vanishes for exact solutions.
    """
    hist = result.history
    grid = result.grid
    vol = grid.cell_volume
    phat = grid.phat_mesh
    times = np.array([s.time for s in hist])
    rep, st_res, scales = [], [], []
    for phi in phis:
        px = phi.value_x(grid)
        pp = phi.value_p(grid)
        gx = phi.grad_x(grid)
        gp = phi.grad_p(grid)
        pairings = []
        rates = []
        st_rates = []
        for snap in hist:
            f = snap.f.values
            pairings.append(float(np.einsum("abcijk,abc,ijk->", f, px, pp)) * vol)
            # p_hat . grad_x phi term
            adv = sum(np.einsum("abcijk,abc,ijk->", f, gx[a], phat[a] * pp)
                      for a in range(3))
            E, B = snap.fields.E, snap.fields.B
            # Lorentz force . grad_p phi term; p-divergence-free force
            force_term = 0.0
            for a in range(3):
                b, c = (a + 1) % 3, (a + 2) % 3
                # (E + p_hat x B)_a
                force_a = (E[a][..., None, None, None]
                           + phat[b] * B[c][..., None, None, None]
                           - phat[c] * B[b][..., None, None, None])
                force_term += float(np.sum(f * force_a
                                           * (px[..., None, None, None] * gp[a])))
            rate = float(adv) + force_term
            rates.append(rate * vol)
            w = float(phi.value_t(snap.time))
            dw = float(phi.dvalue_t(snap.time))
            st_rates.append((dw * pairings[-1] + w * rates[-1]))
        pairings = np.array(pairings)
        rates = np.array(rates)
        integ = np.concatenate([[0.0], np.cumsum(
            0.5 * (rates[1:] + rates[:-1]) * np.diff(times))])
        rep.append(float(np.max(np.abs(pairings - (pairings[0] + integ)))))
        st_res.append(abs(float(np.trapezoid(np.array(st_rates), times))))
        scales.append(float(np.max(np.abs(pairings))))
    return WeakResidualReport(representative=np.array(rep),
                              spacetime=np.array(st_res),
                              pairing_scale=np.array(scales))


@dataclass
class CheckLine:
    name: str
    value: float
    threshold: float
    ok: bool

    def format(self):
        return "%-24s %14.6e %14.6e %s" % (
            self.name, self.value, self.threshold,
            "PASS" if self.ok else "FAIL")


def run_checks(result, charge_tol=1e-10, clip_tol=1e-10, divb_tol=1e-12):
    """Machine-readable PASS/FAIL summary of the per-run inequality and
    conservation checks (the refinement-order criteria live in the
    acceptance harness)."""
    rep = conservation_suite(result)
    lines = [
        CheckLine("charge_drift", rep.drifts["charge"], charge_tol,
                  rep.drifts["charge"] <= charge_tol),
        CheckLine("clip_tally", rep.clip_final / (rep.series["charge"][0] or 1.0),
                  clip_tol, rep.clip_final <= clip_tol * (rep.series["charge"][0] or 1.0)),
        CheckLine("linf_monotone", 0.0 if rep.linf_monotone else 1.0, 0.5,
                  rep.linf_monotone),
    ]
    dom_worst = np.inf
    interp_worst = np.inf
    jdom_worst = np.inf
    divb_worst = 0.0
    gauss_res = 0.0
    margin_worst = np.inf
    from .maxwell import constraint_residual
    for snap in result.history:
        scale = max(abs(kinetic_norm(snap.f)
                        + field_energy(snap.fields, tilde=True)), 1e-300)
        dom_worst = min(dom_worst, energy_domination_check(snap) / scale)
        interp_worst = min(interp_worst, rho_interpolation_check(snap.f)[1])
        jdom_worst = min(jdom_worst, current_domination_margin(snap.f))
        res = constraint_residual(snap.fields, compute_moments(snap.f).rho, "tilde")
        divb_worst = max(divb_worst, res.divb_norm)
        gauss_res = max(gauss_res, res.gauss_norm)
        margin_worst = min(margin_worst, snap.f.support_margin_cells())
    lines += [
        CheckLine("energy_domination", dom_worst, -1e-12, dom_worst >= -1e-12),
        CheckLine("interp_bound_margin", interp_worst, 0.0, interp_worst >= 0.0),
        CheckLine("current_domination", jdom_worst, 0.0, jdom_worst >= 0.0),
        CheckLine("divb_residual", divb_worst, divb_tol, divb_worst <= divb_tol),
        CheckLine("support_margin", margin_worst, 0.0, margin_worst >= 0.0),
    ]
    return lines
