import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patchcontact import factorization as fz
from patchcontact import symbol as sy
from patchcontact.errors import IndexNonzero, NonPositiveTau

A, B = 2.0, 0.5


def rational(t):
    return (t - 1j * A) / (t + 1j * A) * (t + 1j * B) / (t - 1j * B)


def rational_X(z):
    z = np.asarray(z, dtype=complex)
    return np.where(z.imag > 0, (z + 1j * B) / (z + 1j * A), (z - 1j * B) / (z - 1j * A))


@pytest.fixture(scope="module")
def rgrid():
    return fz.build_grid(rational, extent=1e5, step=0.01)


@pytest.fixture(scope="module")
def cgrid():
    return fz.constant_grid()


def test_constant_symbol_gives_unit_factor(cgrid):
    z = np.array([0.3 + 0.7j, -2 - 0.2j, 5 + 1j])
    np.testing.assert_allclose(fz.factor_X(z, cgrid), 1.0, atol=1e-14)
    np.testing.assert_allclose(fz.boundary_X(np.linspace(-5, 5, 11), "above", cgrid), 1.0, atol=1e-14)


def test_rational_oracle(rgrid):
    zs = np.array([0.3 + 0.7j, -2 + 0.2j, 5 - 1j, 0.1 - 0.05j, 10 + 3j, -0.4 - 2j, 1 + 0.01j])
    assert np.max(np.abs(fz.factor_X(zs, rgrid) - rational_X(zs))) <= 1e-8
    t = np.linspace(-20, 20, 101)
    assert np.max(np.abs(fz.boundary_X(t, "above", rgrid) - (t + 1j * B) / (t + 1j * A))) <= 1e-8
    assert np.max(np.abs(fz.boundary_X(t, "below", rgrid) - (t - 1j * B) / (t - 1j * A))) <= 1e-8


@settings(max_examples=60, deadline=None)
@given(x=st.floats(-50, 50), y=st.floats(0.02, 20))
def test_rational_oracle_random(x, y, rgrid):
    for z in (x + 1j * y, x - 1j * y):
        assert abs(fz.factor_X(z, rgrid)[0] - rational_X(z)) <= 1e-8


def test_rational_plemelj(rgrid):
    t = np.linspace(-20, 20, 100)
    assert fz.plemelj_defect(rgrid, t) <= 1e-8
    assert fz.plemelj_defect(rgrid, t, reference=rational) <= 1e-8
    assert fz.plemelj_defect_offaxis(rgrid, t) <= 1e-6


def test_nonzero_index_is_refused():
    with pytest.raises(IndexNonzero):
        fz.build_grid(lambda t: (t - 1j) / (t + 1j), extent=1e4)


@pytest.mark.parametrize("key", [1, 2, 3, "demo"])
def test_plemelj_on_cases(results, problems, demo, key):
    grid = results.grid(key)
    p = (demo if key == "demo" else problems[key]).params
    t = np.concatenate([-np.geomspace(1e-2, 1e4, 60), np.geomspace(1e-2, 1e4, 60)])
    assert fz.plemelj_defect(grid, t, reference=lambda s: sy.eval_G0(s, p)) <= 1e-6


@pytest.mark.parametrize("key", [1, "demo"])
def test_factor_tends_to_one(results, key):
    grid = results.grid(key)
    R = np.array([1e3, 1e4, 1e5]) * max(1.0, grid.rational_a)
    for sgn in (1, -1):
        X = fz.factor_X(sgn * 1j * R, grid)
        assert np.all(np.diff(np.abs(X - 1)) < 0)
        assert abs(X[-1] - 1) <= 1e-3


@pytest.mark.parametrize("key", [1, "demo"])
def test_boundary_reflection(results, key):
    grid = results.grid(key)
    t = np.linspace(0.1, 30, 50)
    for side in ("above", "below"):
        xp = fz.boundary_X(t, side, grid)
        xn = fz.boundary_X(-t, side, grid)
        assert np.max(np.abs(xn - np.conj(xp)) / np.abs(xp)) <= 1e-10


def test_load_linearity(results):
    grid = results.grid("demo")
    xi = np.linspace(-5, -1e-3, 40)
    one = fz.invert_tau(grid, 1.0, xi=xi)
    three = fz.invert_tau(grid, 3.0, xi=xi)
    np.testing.assert_allclose(three.tau, 3 * one.tau, rtol=1e-12, atol=1e-14)
    zero = fz.invert_tau(grid, 0.0, xi=xi)
    assert np.all(zero.tau == 0) and zero.equilibrium == 0


def test_equilibrium_and_refinement(results, demo):
    coarse = results.profile("demo")
    fine = results.profile("demo", refined=True)
    e1 = abs(coarse.equilibrium - demo.cfg.P)
    e2 = abs(fine.equilibrium - demo.cfg.P)
    assert e2 <= 1e-3
    assert e2 < e1


def test_exponent_fit_synthetic():
    x = np.geomspace(1e-4, 1e-2, 50)
    fit = fz.fit_endpoint_exponent((x, 3 * x**2.5), (1e-4, 1e-2))
    assert fit.slope == pytest.approx(2.5, abs=1e-12)
    assert fit.sign == "positive"
    assert fit.stderr < 1e-10
    with pytest.raises(NonPositiveTau):
        fz.fit_endpoint_exponent((x, np.where(x > 1e-3, 0.0, x)), (1e-4, 1e-2))
    with pytest.raises(ValueError):
        fz.fit_endpoint_exponent((x[:5], x[:5]), (1e-4, 1e-2))


@pytest.mark.parametrize("xi", [0.0, 0.7, 2.5, -4.0])
def test_filon_gaussian(xi):
    expect = np.sqrt(np.pi) * np.exp(-xi * xi / 4) / (2 * np.pi)
    errs = []
    for m in (2001, 4001):
        t = np.linspace(-12, 12, m)
        errs.append(abs(fz.filon(np.exp(-t * t), t, xi)[0] - expect))
    assert errs[1] <= 2e-6
    # piecewise-linear data: second order in the node spacing (xi = 0 is exact)
    if errs[1] > 1e-12:
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_filon_small_phase_series():
    p0, p1 = fz._phi(np.array([1e-9, 0.29, 0.31, 5.0]))
    th = np.array([1e-9, 0.29, 0.31, 5.0])
    e = np.exp(1j * th)
    np.testing.assert_allclose(p0, (e - 1) / (1j * th), rtol=1e-7)
    np.testing.assert_allclose(p1[1:], (e / (1j * th) + (e - 1) / th**2)[1:], rtol=1e-12)


def test_assemble_M_basics(cgrid, results):
    z = np.array([0.5 - 0.3j, -2 - 1j])
    assert np.all(fz.assemble_M(z, cgrid, 0.0, 1.0, 1.0) == 0)
    with pytest.raises(ValueError):
        fz.assemble_M(np.array([1 + 0.1j]), cgrid, 1.0, 0.0, 1.0)
    # constant grid, no lambda: C + K2 - P/(2 sqrt(2 pi)) tends to C at infinity
    far = fz.assemble_M(np.array([-1e6j]), cgrid, 1.0, 0.0, 1.0)[0]
    assert abs(far - 1 / fz.SQ2PI) <= 1e-5
    grid = results.grid("demo")
    m = fz.assemble_M(z, grid, 1.0, 0.3, 0.05)
    assert np.all(np.isfinite(m))
