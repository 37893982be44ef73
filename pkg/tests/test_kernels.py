import numpy as np
import pytest

from rvm import _kernels as K


requires_cython = pytest.mark.skipif(
    "cython" not in K.available_backends(),
    reason="compiled kernels not built")


@pytest.fixture
def both_backends():
    saved = K.backend_name()
    yield
    K.set_backend(saved)


def _run_both(fn):
    outs = {}
    for name in K.available_backends():
        K.set_backend(name)
        outs[name] = fn()
    return outs


class TestShiftLines:
    def test_zero_shift_identity(self):
        rng = np.random.default_rng(0)
        v = rng.random((4, 12, 3))
        out = K.shift_lines(v, np.zeros((4, 1, 3)), axis=1, periodic=True)
        assert np.array_equal(out, v)

    def test_integer_shift_is_roll(self):
        rng = np.random.default_rng(1)
        v = rng.random((2, 16))
        for s in (-5, -1, 1, 3, 17, 33):
            out = K.shift_lines(v, np.full((2, 1), float(s)), axis=1, periodic=True)
            assert np.array_equal(out, np.roll(v, s, axis=1))

    def test_cubic_polynomial_exact(self):
        # cubic Lagrange reproduces cubics exactly away from boundaries
        i = np.arange(24, dtype=float)
        poly = lambda x: 0.3 * x ** 3 - x ** 2 + 2.0 * x + 1.0
        v = poly(i)[None, :]
        out = K.shift_lines(v, np.full((1, 1), 0.375), axis=1, periodic=False)
        expect = poly(i - 0.375)
        assert np.allclose(out[0, 3:-3], expect[3:-3], rtol=1e-13, atol=1e-12)

    def test_periodic_line_sum_conserved(self):
        rng = np.random.default_rng(2)
        v = rng.random((6, 64))
        s = rng.uniform(-10, 10, (6, 1))
        out = K.shift_lines(v, s, axis=1, periodic=True)
        assert np.allclose(out.sum(axis=1), v.sum(axis=1), rtol=1e-14)

    def test_zerofill_interior_support_conserved(self):
        v = np.zeros((1, 40))
        v[0, 15:25] = np.exp(-np.linspace(-2, 2, 10) ** 2)
        out = K.shift_lines(v, np.full((1, 1), 2.3), axis=1, periodic=False)
        assert np.isclose(out.sum(), v.sum(), rtol=1e-14)

    def test_zerofill_drops_offgrid_mass(self):
        v = np.zeros((1, 8))
        v[0, 6] = 1.0
        out = K.shift_lines(v, np.full((1, 1), 4.0), axis=1, periodic=False)
        assert out.sum() < 1e-15

    def test_backends_bit_identical(self, both_backends):
        if "cython" not in K.available_backends():
            pytest.skip("compiled kernels not built")
        rng = np.random.default_rng(3)
        v = rng.random((5, 3, 32, 4))
        s = rng.uniform(-6, 6, (5, 3, 1, 4))
        for per in (True, False):
            outs = _run_both(lambda: K.shift_lines(v, s, axis=2, periodic=per))
            assert np.array_equal(outs["numpy"], outs["cython"])


class TestGatherCubic:
    def test_lattice_points_reproduced(self):
        rng = np.random.default_rng(4)
        blk = rng.random((7, 9, 5))
        idx = np.stack(np.meshgrid(np.arange(7), np.arange(9), np.arange(5),
                                   indexing="ij")).reshape(3, -1).astype(float)
        out = K.gather_cubic(blk, idx)
        assert np.allclose(out, blk.ravel(), rtol=1e-14, atol=0)

    def test_outside_is_zero(self):
        blk = np.ones((4, 4))
        out = K.gather_cubic(blk, np.array([[-5.0, 10.0], [1.0, 1.0]]))
        assert np.array_equal(out, np.zeros(2))

    def test_separable_cubic_exact(self):
        i = np.arange(16, dtype=float)
        f1 = 0.5 * i ** 3 - i
        f2 = i ** 2 + 1.0
        blk = np.outer(f1, f2)
        pts = np.array([[4.25, 7.5], [3.75, 9.125]])
        out = K.gather_cubic(blk, pts)
        expect = (0.5 * pts[0] ** 3 - pts[0]) * (pts[1] ** 2 + 1.0)
        assert np.allclose(out, expect, rtol=1e-12)

    def test_backends_bit_identical(self, both_backends):
        if "cython" not in K.available_backends():
            pytest.skip("compiled kernels not built")
        rng = np.random.default_rng(5)
        for shape in ((12, 14), (9, 8, 7)):
            blk = rng.random(shape)
            pts = rng.uniform(-2, 15, (len(shape), 400))
            outs = _run_both(lambda: K.gather_cubic(blk, pts))
            assert np.array_equal(outs["numpy"], outs["cython"])

    def test_1d_gather(self):
        blk = np.arange(10, dtype=float) ** 3
        out = K.gather_cubic(blk, np.array([[4.5]]))
        assert np.isclose(out[0], 4.5 ** 3, rtol=1e-13)


@requires_cython
def test_backend_selection(both_backends):
    K.set_backend("numpy")
    assert K.backend_name() == "numpy"
    K.set_backend("cython")
    assert K.backend_name() == "cython"
    with pytest.raises(RuntimeError):
        K.set_backend("fortran")
