import mpmath as mp
import numpy as np
import pytest
import scipy.integrate
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from patchcontact import symbol as sy
from patchcontact.coupling import couple
from patchcontact.elastic_params import RawMaterial, half_plane
from patchcontact.errors import PoleAtEvaluation, UnresolvedWinding, ValidationError

C1 = couple(half_plane(RawMaterial(55.917e9, 36.735e9, 5.592e9, 0.32)),
            half_plane(RawMaterial(19.236e9, 30.145e9, 4.902e9, 0.30)))
CASE1 = sy.SymbolParams.from_coupling(C1, 0.1, 5e-4 / 0.117e9)
# same materials in GPa with a soft glue: coefficients of order one
DEMO = sy.SymbolParams(h=1.0, k0=0.05, lam=tuple(C1.lam * 1e9), mu_log=C1.mu_log)
GLUE = DEMO.replace(lam=(0.0, 0.0, 0.0, 0.0))


def G_mp(z, p, dps=40):
    """The displayed symbol evaluated in extended precision."""
    with mp.workdps(dps):
        z = mp.mpc(z.real, z.imag)
        l1, l2, l3, l4 = (mp.mpf(v) for v in p.lam)
        h, kh, mu = mp.mpf(p.h), mp.mpf(p.k0) * mp.mpf(p.h), mp.mpf(p.mu_log)
        s = mp.sinh(mp.pi * z)
        g = (1 + h * l1 * z / 2 * mp.cosh(mp.pi * z) / s
             - h * z * (l2 + l3 * mp.exp(1j * mu * z) + l4 * mp.exp(-1j * mu * z)) / (2 * s)
             + kh * z * z)
        return complex(g)


points = st.builds(complex, st.floats(-30, 30), st.floats(-12, 12))


def off_lattice(z):
    return abs(z.imag - round(z.imag)) > 1e-3 or abs(z.real) > 1e-3


def test_params_validation():
    with pytest.raises(ValidationError):
        sy.SymbolParams(h=0.0, k0=1.0, lam=(0, 0, 0, 0), mu_log=1.0)
    with pytest.raises(ValidationError):
        sy.SymbolParams(h=1.0, k0=1.0, lam=(0, 0, 0), mu_log=1.0)


@pytest.mark.parametrize("p", [CASE1, DEMO], ids=["case1", "demo"])
def test_value_at_zero(p):
    l1, l2, l3, l4 = p.lam
    g0 = 1 + p.h * (l1 - l2 - l3 - l4) / (2 * np.pi)
    assert sy.eval_G(0.0, p) == g0
    assert sy.G_at_zero(p) == g0
    s1, s2 = 1e-4, 1e-5
    rich = (s1 * sy.eval_G(s2, p) - s2 * sy.eval_G(s1, p)) / (s1 - s2)
    # the pair leaves an O(s1 s2 G'') remainder, of order 1e-9 for the demo set
    tol = 1e-10 if p is CASE1 else 1e-8
    assert abs(rich - g0) <= tol * max(1.0, abs(g0))


def test_glue_only_symbol():
    zs = np.array([0.3, 2 + 1j, -4 + 7.5j, 0.1 + 30j])
    np.testing.assert_allclose(sy.eval_G(zs, GLUE), 1 + GLUE.kh * zs**2, rtol=1e-15)


def test_case1_real_axis():
    g = sy.eval_G(1.0, CASE1)
    assert abs(g - 1) < 1e-9
    assert sy.eval_G(-1.0, CASE1) == pytest.approx(np.conj(g), rel=1e-15)


def test_pole_detection():
    with pytest.raises(PoleAtEvaluation):
        sy.eval_G(3j, DEMO)


@settings(max_examples=150, deadline=None)
@given(points)
def test_against_extended_precision(z):
    assume(off_lattice(z))
    for p in (DEMO, CASE1):
        ref = G_mp(z, p)
        assert abs(sy.eval_G(z, p) - ref) <= 1e-12 * max(1.0, abs(ref))


@pytest.mark.parametrize("n, w", [(1, 1e-12j), (3, 2e-10 + 1e-13j), (8, -4e-9j)])
def test_near_lattice_with_offset(n, w):
    # the lattice form keeps the offset at full precision
    with mp.workdps(60):
        zz = mp.mpc(w.real, mp.mpf(n) + mp.mpf(w.imag))
        l1, l2, l3, l4 = (mp.mpf(v) for v in CASE1.lam)
        h, kh, mu = mp.mpf(CASE1.h), mp.mpf(CASE1.k0) * mp.mpf(CASE1.h), mp.mpf(CASE1.mu_log)
        s = mp.sinh(mp.pi * zz)
        ref = complex(1 + h * l1 * zz / 2 * mp.cosh(mp.pi * zz) / s
                      - h * zz * (l2 + l3 * mp.exp(1j * mu * zz) + l4 * mp.exp(-1j * mu * zz)) / (2 * s)
                      + kh * zz * zz)
    got = sy.eval_G(w, CASE1, lattice=n)
    assert abs(got - ref) <= 1e-12 * abs(ref)


@settings(max_examples=150, deadline=None)
@given(points)
def test_schwarz_symmetry(z):
    assume(off_lattice(z))
    for p in (DEMO, CASE1):
        assert sy.schwarz_defect(z, p) <= 1e-12


def test_H_vanishes_at_zero():
    assert sy.eval_H(0.0, DEMO) == 0
    assert sy.eval_H(0.0, CASE1) == 0


@pytest.mark.parametrize("p", [CASE1, DEMO], ids=["case1", "demo"])
def test_H_matches_G(p):
    z = 0.5 + 0.5j
    g = sy.eval_G(z, p)
    assert abs(sy.eval_H(z, p) / np.sinh(np.pi * z) - g) <= 1e-12 * abs(g)


@settings(max_examples=150, deadline=None)
@given(points)
def test_H_derivative_finite_difference(z):
    d = 1e-6
    for p in (DEMO, CASE1):
        dh = sy.eval_H_prime(z, p)
        fd = (sy.eval_H(z + d, p) - sy.eval_H(z - d, p)) / (2 * d)
        assert abs(dh - fd) <= 1e-6 * abs(dh) + 1e-9 * abs(sy.eval_H(z, p)) / d


def test_scaled_H_has_no_overflow():
    zs = np.array([1e3 + 100j, -800 + 99.5j, 5 - 100j, 1e4 + 0.5j])
    for p in (DEMO, CASE1):
        H, dH = sy.eval_H_scaled(zs, p)
        assert np.all(np.isfinite(H)) and np.all(np.isfinite(dH))
        assert np.all(np.isfinite(sy.eval_G(zs, p)))


def test_G0_values():
    assert sy.eval_G0(0.0, GLUE) == pytest.approx(1 / GLUE.kh, rel=1e-15)
    g = sy.eval_G0(3.7, DEMO)
    assert sy.eval_G0(-3.7, DEMO) == pytest.approx(np.conj(g), rel=1e-15)


@pytest.mark.parametrize("p", [CASE1, DEMO], ids=["case1", "demo"])
def test_G0_tail_asymptote(p):
    # beyond |s| ~ 50 the sinh terms are below rounding, leaving the Cauchy tail
    for s in (1e6, -1e6, 1e9):
        expect = (1 + p.kh * s * s + 0.5 * p.h * p.lam[0] * abs(s)) / (p.kh * (1 + s * s))
        assert abs(sy.eval_G0(s, p) - expect) <= 1e-12 * abs(expect)
    assert abs(sy.eval_G0(1e14, p) - 1) < 1e-3


def test_winding_constant_and_synthetic():
    assert sy.phase_scan(lambda s: np.ones_like(s, dtype=complex)).index == 0
    sc = sy.phase_scan(lambda s: (1 + 1j * s) / (1 - 1j * s) * sy.eval_G0(s, DEMO))
    assert sc.index == 1


@pytest.mark.parametrize("p", [CASE1, DEMO], ids=["case1", "demo"])
def test_index_and_positivity(p):
    assert sy.winding_index(p) == 0
    m, _ = sy.re_positivity_scan(p)
    assert m > 0


def test_unresolved_winding():
    with pytest.raises(UnresolvedWinding):
        sy.phase_scan(lambda s: np.exp(1j * s))


@pytest.mark.parametrize("s", [0.25, 0.5, 1.0, 2.0, 3.5, 5.0])
def test_cauchy_term_fourier_transform(s):
    """Sine transform of the log-variable Cauchy kernel gives the coth profile.

    With t = x e^w the Cauchy kernel x / (t - x) becomes 1 / (e^w - 1), whose
    odd part is coth(w/2) / 2. Its sine transform is (pi/2) coth(pi s), the
    profile of the lambda_1 term. The constant 1 of coth (transform 1/s) and
    the pole 2/w (transform pi) are taken in closed form, leaving a smooth
    integrand for QAWF.
    """

    def g(w):
        if w < 1e-3:
            return -1 + w / 6 - w**3 / 360
        return 1 / np.tanh(w / 2) - 1 - 2 / w

    val, _ = scipy.integrate.quad(g, 0, np.inf, weight="sin", wvar=s, limlst=200)
    got = val + np.pi + 1 / s
    assert got == pytest.approx(np.pi / np.tanh(np.pi * s), rel=1e-2)
    assert got == pytest.approx(np.pi / np.tanh(np.pi * s), rel=1e-6)
