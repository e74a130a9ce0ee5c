import numpy as np
import pytest
import scipy.integrate
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from patchcontact import oracle as orc
from patchcontact.errors import EmptyOverlap, MeshTooCoarse
from patchcontact.factorization import StressProfile

LAM = (0.8, -0.3, 0.25, 0.1)
BETA, GAMMA = 3.03, 0.41


def Q(t, x):
    l1, l2, l3, l4 = LAM
    return l1 / (t - x) + l2 / (t + x) + l3 / (BETA * t + GAMMA * x) + l4 / (GAMMA * t + BETA * x)


def test_graded_mesh_shape():
    with pytest.raises(MeshTooCoarse):
        orc.graded_mesh(50, 1.08, 1e-6)
    for N in (200, 400, 800):
        x = orc.graded_mesh(N, 1.08, 1e-6)
        d = np.diff(x)
        assert x[0] == 0 and x[-1] == pytest.approx(1.0, abs=1e-14)
        assert abs((x.size - 1) - N) <= 2
        assert np.all(d > 0)
        assert d[0] == pytest.approx(1e-6)
        assert np.max(d[1:] / d[:-1]) <= 1.08 + 1e-9


@settings(max_examples=80, deadline=None)
@given(ta=st.floats(1e-4, 0.9), w=st.floats(1e-3, 0.1), x=st.floats(1e-4, 1.0))
def test_element_integrals_against_quadrature(ta, w, x):
    tb = ta + w
    assume(x < ta - 1e-3 or x > tb + 1e-3)
    Ia, Ib = orc.element_integrals([x], [ta], [tb], LAM, BETA, GAMMA)
    fa = lambda t: Q(t, x) * (tb - t) / w  # noqa: E731
    fb = lambda t: Q(t, x) * (t - ta) / w  # noqa: E731
    for got, f in ((Ia[0, 0], fa), (Ib[0, 0], fb)):
        ref, _ = scipy.integrate.quad(f, ta, tb, epsabs=1e-14, epsrel=1e-13)
        assert abs(got - ref) <= 1e-10 * max(1.0, abs(ref))


def test_element_integral_principal_value():
    ta, tb = 0.2, 0.3
    x = 0.5 * (ta + tb)
    Ia, Ib = orc.element_integrals([x], [ta], [tb], LAM, BETA, GAMMA)

    def smooth(t, hat):
        l1, l2, l3, l4 = LAM
        return (l2 / (t + x) + l3 / (BETA * t + GAMMA * x) + l4 / (GAMMA * t + BETA * x)) * hat(t)

    for got, hat in ((Ia[0, 0], lambda t: (tb - t) / (tb - ta)),
                     (Ib[0, 0], lambda t: (t - ta) / (tb - ta))):
        reg, _ = scipy.integrate.quad(smooth, ta, tb, args=(hat,), epsabs=1e-14)
        pv, _ = scipy.integrate.quad(lambda t: LAM[0] * hat(t), ta, tb, weight="cauchy", wvar=x)
        assert abs(got - (reg + pv)) <= 1e-10


@pytest.mark.parametrize("key", [1, "demo"])
def test_patch_test(problems, demo, key):
    prob = demo if key == "demo" else problems[key]
    c = prob.coupling
    sys = orc.assemble(c.lam, c.beta1, c.gamma1, prob.cfg.h, prob.cfg.k0, N=200)
    assert orc.patch_residual(sys, c.lam, c.beta1, c.gamma1) <= 1e-9


def test_patch_test_detects_wrong_kernel():
    sys = orc.assemble(LAM, BETA, GAMMA, 1.0, 0.05, N=200)
    with pytest.raises(MeshTooCoarse):
        orc.solve(sys, (0.9, -0.3, 0.25, 0.1), BETA, GAMMA)


def test_zero_load():
    prof = orc.solve_case(LAM, BETA, GAMMA, 1.0, 0.05, P=0.0, N=200)
    assert np.all(prof.tau == 0)
    assert prof.equilibrium == 0


def test_equilibrium_row(results, demo):
    prof = results.collocation("demo")
    assert prof.equilibrium == pytest.approx(demo.cfg.P, rel=1e-12)


def test_self_convergence(results):
    fine = results.collocation("demo")
    d400 = orc.compare(results.collocation("demo", 400), fine)
    d200 = orc.compare(results.collocation("demo", 200), fine)
    assert d400 < d200
    assert d400 <= 1e-3


def test_condition_number_finite(results):
    cond = results.collocation("demo", 400).info["condition"]
    assert np.isfinite(cond) and cond < 1e12


def test_compare_identity_and_overlap():
    x = np.linspace(0, 1, 11)
    a = StressProfile(x, x**2, x, 1.0, 1.0)
    assert orc.compare(a, a) == 0
    b = StressProfile(x + 2, x, x, 1.0, 1.0)
    with pytest.raises(EmptyOverlap):
        orc.compare(a, b)


def test_transform_matches_collocation_on_demo(results):
    prof = results.profile("demo", refined=True)
    assert orc.compare(prof, results.collocation("demo")) <= 0.02


def test_kernel_form_matches_collocation_closely(results):
    # the symbol that is the exact transform of the kernel agrees far better
    prof = results.profile("demo_kernel", refined=True)
    assert orc.compare(prof, results.collocation("demo_kernel")) <= 1e-4
