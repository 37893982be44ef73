import numpy as np
import pytest

from rvm import regularized as reg
from rvm.averaging import (ForcedRecipe, FreeStreamingRecipe, MomentumBump,
                           RandomTripleRecipe, TransportTriple, analyze_triple,
                           fourier_transport_residual, make_triple_from_run,
                           physical_transport_residual, spectrum, split_I,
                           time_cutoff, time_cutoff_prime, verify_lemma)
from rvm.phase_space import PhaseGrid

TWO_PI = 2.0 * np.pi
NT, WINDOW = 33, 4.0


@pytest.fixture(scope="module")
def grid():
    return PhaseGrid((16, 1, 1), (TWO_PI,) * 3, (17, 17, 1), 4.0)


@pytest.fixture(scope="module")
def psi():
    return MomentumBump(radius=2.2)


@pytest.fixture(scope="module")
def random_triple(grid):
    return RandomTripleRecipe(seed=3).sample(NT, WINDOW, grid)


def zero_triple(grid):
    times = np.arange(NT) * (WINDOW / NT)
    shape = (NT,) + grid.shape
    return TransportTriple(grid=grid, times=times, h=np.zeros(shape),
                           g0=np.zeros(shape), g1=np.zeros((3,) + shape),
                           support_radius=2.0)


class TestTripleInvariants:
    def test_window_margins(self, random_triple):
        m = random_triple.edge_samples()
        assert not random_triple.h[:m].any()
        assert not random_triple.h[-m:].any()

    def test_margin_breach_detected(self, grid, random_triple):
        bad = TransportTriple(grid=grid, times=random_triple.times,
                              h=random_triple.h.copy(), g0=random_triple.g0,
                              g1=random_triple.g1, support_radius=2.0)
        bad.h[0, 0, 0, 0, 8, 8] = 1.0
        with pytest.raises(ValueError):
            spectrum(bad)

    def test_nonuniform_times_rejected(self, grid):
        times = np.arange(NT) * (WINDOW / NT)
        times[5] += 0.01
        shape = (NT,) + grid.shape
        with pytest.raises(ValueError):
            TransportTriple(grid=grid, times=times, h=np.zeros(shape),
                            g0=np.zeros(shape), g1=np.zeros((3,) + shape),
                            support_radius=1.0)

    def test_time_cutoff_shape(self):
        t = np.linspace(0, 1, 101)
        z = time_cutoff(t, 1.0)
        assert np.all(z[t <= 0.1] == 0.0) and np.all(z[t >= 0.9] == 0.0)
        mid = (t >= 0.2) & (t <= 0.8)
        assert np.allclose(z[mid], 1.0)
        dz = time_cutoff_prime(t, 1.0)
        num = np.gradient(z, t)
        assert np.max(np.abs(dz - num)[5:-5]) < 0.05 * np.max(np.abs(dz))


class TestSpectrum:
    def test_zero(self, grid):
        spec = spectrum(zero_triple(grid))
        assert not spec.h_hat.any()

    def test_parseval(self, random_triple):
        spec = spectrum(random_triple)
        h_l2 = random_triple.norms()[0]
        assert abs(spec.hhat_l2() - h_l2) < 1e-12 * h_l2

    def test_single_mode_support(self, grid):
        times = np.arange(NT) * (WINDOW / NT)
        w = time_cutoff(times, WINDOW)
        x = grid.x_axes[0]
        p1, p2, p3 = grid.p_mesh
        from rvm.profiles import bump
        chi = bump(np.sqrt(p1 ** 2 + p2 ** 2 + p3 ** 2) / 2.0)
        h = (w[:, None, None, None, None, None, None]
             * np.cos(2.0 * x).reshape(1, -1, 1, 1, 1, 1, 1)
             * chi[None, None, None, None])
        shape = (NT,) + grid.shape
        tri = TransportTriple(grid=grid, times=times, h=np.ascontiguousarray(
            np.broadcast_to(h, shape)), g0=np.zeros(shape),
            g1=np.zeros((3,) + shape), support_radius=2.0)
        spec = spectrum(tri)
        power = np.sum(np.abs(spec.h_hat) ** 2, axis=(0, 2, 3, 4, 5, 6))
        live = np.nonzero(power > 1e-20 * power.max())[0]
        assert set(live) == {2, len(x) - 2}


class TestTransportResidual:
    def test_zero(self, grid):
        assert fourier_transport_residual(spectrum(zero_triple(grid))) == 0.0

    def test_self_consistent_random(self, random_triple):
        res = fourier_transport_residual(spectrum(random_triple))
        assert res < 1e-10

    def test_parseval_duality(self, grid, random_triple):
        fr = fourier_transport_residual(spectrum(random_triple))
        pr = physical_transport_residual(random_triple)
        assert abs(fr - pr) < 1e-10 * max(fr, 1.0)
        fs = FreeStreamingRecipe().sample(NT, WINDOW, grid)
        fr2 = fourier_transport_residual(spectrum(fs))
        pr2 = physical_transport_residual(fs)
        assert abs(fr2 - pr2) < 1e-10 * max(fr2, 1.0)

    def test_free_streaming_space_order(self):
        nt = 129
        res = []
        for nx in (16, 32):
            g = PhaseGrid((nx, 1, 1), (TWO_PI,) * 3, (17, 17, 1), 4.0)
            res.append(fourier_transport_residual(
                spectrum(FreeStreamingRecipe().sample(nt, WINDOW, g))))
        assert np.log2(res[0] / res[1]) >= 2.5

    def test_forced_momentum_order(self):
        nt = 65
        res = []
        for npc in (33, 65):
            g = PhaseGrid((32, 1, 1), (TWO_PI,) * 3, (npc, npc, 1), 4.0)
            res.append(fourier_transport_residual(
                spectrum(ForcedRecipe().sample(nt, WINDOW, g))))
        assert np.log2(res[0] / res[1]) >= 1.6  # asymptotic rate is 2


class TestSplit:
    def test_zero(self, grid, psi):
        rep = analyze_triple(zero_triple(grid), psi)
        assert rep.bound_ratio() == 0.0
        assert rep.i1_violation == 0.0

    def test_partition_exact(self, random_triple, psi):
        rep = analyze_triple(random_triple, psi)
        assert rep.split_defect <= 1e-12

    def test_i1_vanishes_outside_cone(self, random_triple, psi):
        rep = analyze_triple(random_triple, psi)
        assert rep.i1_violation == 0.0

    def test_i1_slab_bound(self, random_triple, psi):
        # Cauchy-Schwarz against the measured resonant-slab volume:
        # |I1|^2 <= |psi|_inf^2 |h_hat|_2^2 * vol{p in supp psi :
        #                                        |tau + p_hat . xi| <= 2 kappa}
        spec = spectrum(random_triple)
        rep = split_I(spec, psi, input_norms=random_triple.norms())
        g = spec.grid
        vp = g.cell_volume_p
        psi_vals = psi.sample(g)
        arg = spec.phase_speed()
        kappa = rep.kappa.reshape((1,) + g.spatial_cells + (1, 1, 1))
        slab = np.sum((np.abs(arg) <= 2.0 * kappa) & (psi_vals != 0.0),
                      axis=(-3, -2, -1)) * vp
        hnorm = np.sqrt(np.sum(np.abs(spec.h_hat) ** 2, axis=(-3, -2, -1)) * vp)
        bound = float(np.max(psi_vals)) * hnorm * np.sqrt(slab)
        assert np.all(np.abs(rep.I1) <= bound * (1 + 1e-12) + 1e-300)

    def test_i1_kappa_constant_stable(self, psi):
        # fitted constant in |I1| <= C |h_hat|_2 sqrt(kappa/|xi|) moves by
        # less than 20% under a momentum-grid refinement
        cs = []
        for npc in (17, 33):
            g = PhaseGrid((16, 1, 1), (TWO_PI,) * 3, (npc, npc, 1), 4.0)
            tri = RandomTripleRecipe(seed=12).sample(NT, WINDOW, g)
            spec = spectrum(tri)
            rep = split_I(spec, psi)
            vp = g.cell_volume_p
            hnorm = np.sqrt(np.sum(np.abs(spec.h_hat) ** 2,
                                   axis=(-3, -2, -1)) * vp)
            xi = rep.xi_mag[None, ...]
            mask = (xi > 0) & (hnorm > 1e-12 * hnorm.max())
            ratio = np.abs(rep.I1) / np.maximum(
                hnorm * np.sqrt(rep.kappa[None, ...] / np.where(xi == 0, 1, xi)),
                1e-300)
            cs.append(float(np.max(ratio[mask])))
        assert abs(cs[1] - cs[0]) <= 0.2 * cs[0]

    def test_psi_support_guard(self, grid):
        with pytest.raises(ValueError):
            MomentumBump(radius=3.9).check_support(grid)


class TestH14:
    def test_zero(self, grid, psi):
        rep = analyze_triple(zero_triple(grid), psi)
        assert rep.h14_norm() == (0.0, 0.0)

    def test_weight_dominates_l2(self, random_triple, psi):
        rep = analyze_triple(random_triple, psi)
        norm, _ = rep.h14_norm()
        l2 = np.sqrt(float(np.sum(np.abs(rep.I) ** 2)) * rep.mode_measure)
        assert norm >= l2

    def test_majorant(self, grid, psi):
        for seed in range(5):
            tri = RandomTripleRecipe(seed=seed).sample(NT, WINDOW, grid)
            rep = analyze_triple(tri, psi)
            norm, majorant = rep.h14_norm()
            assert norm <= majorant * (1 + 1e-12)

    def test_a_decomposition_exact(self, random_triple, psi):
        rep = analyze_triple(random_triple, psi)
        a = rep.a_decomposition()
        t_half = np.sqrt(np.abs(rep.tau)).reshape(-1, 1)
        x_half = np.sqrt(rep.xi_mag).ravel()[None, :]
        w = np.abs(rep.I.reshape(len(rep.tau), -1)) ** 2 * rep.mode_measure
        direct = float(np.sum(w * (t_half + x_half)))
        assert abs(sum(a) - direct) <= 1e-12 * max(direct, 1.0)


class TestVerifyLemma:
    def test_small_ensemble(self, grid, psi):
        triples = [RandomTripleRecipe(seed=s).sample(NT, WINDOW, grid)
                   for s in range(3)]
        triples.append(FreeStreamingRecipe().sample(NT, WINDOW, grid))
        ver = verify_lemma(triples, psi)
        assert ver.max_ratio > 0 and np.isfinite(ver.max_ratio)
        assert ver.max_i1_violation == 0.0
        assert len(ver.rows) == 4
        text = ver.csv_text()
        assert text.splitlines()[0].startswith("triple_id,")

    def test_zero_triple_ratio(self, grid, psi):
        ver = verify_lemma([zero_triple(grid)], psi)
        assert ver.rows[0]["ratio"] == 0.0


class TestRunTriple:
    def test_from_run(self, grid, psi):
        cfg = reg.preset_config("maxwellian-bump", nx=(16, 1, 1),
                                np_=(17, 17, 1), amplitude=2000.0, beta=14.0,
                                t_final=2.0, dt=2.0 / 32, save_every=1)
        res = reg.run(cfg)
        tri = make_triple_from_run(res)
        tri.validate_window()
        spec = spectrum(tri)
        scale = tri.norms()[0] + tri.norms()[1] + tri.norms()[2]
        resid = fourier_transport_residual(spec)
        # run triples satisfy transport to the scheme's discretization error
        assert resid < 0.1 * scale
        rep = split_I(spec, psi, input_norms=tri.norms())
        assert rep.i1_violation == 0.0
        norm, majorant = rep.h14_norm()
        assert norm <= majorant * (1 + 1e-12)

    def test_field_free_run_has_zero_flux(self):
        # alpha = 0: the Poisson field vanishes identically, so the run
        # triple's momentum flux is zero up to FFT roundoff in the currents
        cfg = reg.preset_config("maxwellian-bump", nx=(16, 1, 1),
                                np_=(17, 17, 1), amplitude=2000.0, beta=14.0,
                                alpha=0.0, t_final=1.0, dt=0.1, save_every=1)
        tri = make_triple_from_run(reg.run(cfg))
        assert np.max(np.abs(tri.g1)) <= 1e-14 * np.max(tri.h)

    def test_mismatched_cadence(self, grid):
        cfg = reg.preset_config("maxwellian-bump", nx=(16, 1, 1),
                                np_=(17, 17, 1), amplitude=2000.0, beta=14.0,
                                t_final=0.5, dt=0.05, save_every=2)
        res = reg.run(cfg)
        res.history = res.history[:3] + res.history[4:]  # break uniformity
        with pytest.raises(ValueError):
            make_triple_from_run(res)
