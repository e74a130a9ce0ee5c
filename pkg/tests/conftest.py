import time

import pytest

from patchcontact import cli
from patchcontact import oracle as orc
from patchcontact import rootfinder as rf
from patchcontact.config import builtin_case, builtin_case_path, load_config

_START = time.perf_counter()
SUITE_BUDGET = 60.0


def pytest_terminal_summary(terminalreporter):
    took = time.perf_counter() - _START
    tag = "PASS" if took <= SUITE_BUDGET else "FAIL"
    terminalreporter.write_line(
        f"{tag} criterion 8 (suite runtime): {took:.1f} s (budget {SUITE_BUDGET:.0f} s)")


def case_dir():
    return builtin_case_path(1).parent


@pytest.fixture(scope="session")
def cases():
    return {i: builtin_case(i) for i in (1, 2, 3)}


@pytest.fixture(scope="session")
def problems(cases):
    return {i: cli.build_problem(c) for i, c in cases.items()}


@pytest.fixture(scope="session")
def demo_cfg():
    return load_config(case_dir().joinpath("demo_gpa.cfg"))


@pytest.fixture(scope="session")
def demo(demo_cfg):
    return cli.build_problem(demo_cfg)


@pytest.fixture(scope="session")
def demo_kernel(demo_cfg):
    return cli.build_problem(demo_cfg, "kernel")


@pytest.fixture(scope="session")
def glue_cfg():
    return load_config(case_dir().joinpath("glue_only.cfg"))


class Lazy:
    """Per-session cache of expensive pipeline results keyed by name."""

    def __init__(self):
        self.store = {}
        self.timing = {}

    def get(self, key, fn):
        if key not in self.store:
            t0 = time.perf_counter()
            self.store[key] = fn()
            self.timing[key] = time.perf_counter() - t0
        return self.store[key]


@pytest.fixture(scope="session")
def lazy():
    return Lazy()


@pytest.fixture(scope="session")
def results(lazy, problems, demo, demo_kernel):
    """Accessors for cached zeros, grids, profiles and collocation solutions."""

    def prob(key):
        if isinstance(key, tuple):
            # (case, symbol form)
            i, form = key
            return lazy.get(("prob", key), lambda: cli.build_problem(problems[i].cfg, form))
        return {"demo": demo, "demo_kernel": demo_kernel}.get(key) or problems[key]

    class R:
        @staticmethod
        def zero(key):
            p = prob(key)
            return lazy.get(("zero", key), lambda: rf.minimal_zero(p.params, p.cfg.numerics["tau_max"]))

        @staticmethod
        def grid(key):
            p = prob(key)
            return lazy.get(("grid", key), lambda: cli.default_grid(p.params, p.cfg))

        @staticmethod
        def profile(key, refined=False):
            p = prob(key)
            n = p.cfg.numerics["refined_grid" if refined else "grid"]
            return lazy.get(("profile", key, refined),
                            lambda: cli.stress_profile(p, R.grid(key), n=n)[0])

        @staticmethod
        def collocation(key, N=None):
            p = prob(key)
            num = p.cfg.numerics
            N = num["collocation_n"] if N is None else N
            c = p.coupling
            lam = cli._collocation_lambda(p)
            return lazy.get(("col", key, N), lambda: orc.solve_case(
                lam, c.beta1, c.gamma1, p.cfg.h, p.cfg.k0, p.cfg.P, N=N,
                ratio=num["grading"], x_min=num["x_min"]))

        @staticmethod
        def reproduce(case):
            return lazy.get(("reproduce", case), lambda: cli.run_reproduce(case))

        @staticmethod
        def arbitration(key, other):
            """Arbitration rows for key, reusing the cached refined profiles of key and other."""
            p = prob(key)
            profiles = {p.form: R.profile(key, True), prob(other).form: R.profile(other, True)}
            return lazy.get(("arbitrate", key), lambda: cli.arbitrate(
                p, R.collocation(key), R.grid(key), profiles))

        problem = staticmethod(prob)
        timing = lazy.timing

    return R

