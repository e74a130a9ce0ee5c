"""Batch front end: configuration in, reports and CSV profiles out.

Subcommands: params, roots, stress, verify, reproduce. Exit codes: 0 on
success, 1 when a hard invariant fails in verify or reproduce, 2 on
invalid input, 3 when a numerical procedure does not converge.
"""

import argparse
import csv
import io
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import coupling as cp
from . import factorization as fz
from . import oracle as orc
from . import rootfinder as rf
from . import symbol as sy
from .config import builtin_case, config_hash, load_config
from .elastic_params import half_plane
from .errors import (IndexNonzero, MeshTooCoarse, NoZeroBelowTauMax, ParseError,
                     PatchContactError, SingularSystem, ValidationError)

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_NONCONVERGED = 0, 1, 2, 3
FAULTS = ("flip-lambda",)


# ------------------------------------------------------------------ report

@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool
    hard: bool
    note: str = ""


@dataclass
class RunReport:
    title: str
    items: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)

    def add(self, section, label, value):
        self.items.append((section, label, value))

    def check(self, name, value, tol, hard=True, note="", below=True):
        """Record value <= tol (or value >= tol with below=False)."""
        if isinstance(value, (bool, np.bool_)):
            ok = bool(value)
        else:
            ok = bool(np.isfinite(value) and (value <= tol if below else value >= tol))
        c = Check(name, value, tol, ok, hard, note)
        self.checks.append(c)
        return c

    @property
    def hard_failures(self):
        return [c for c in self.checks if c.hard and not c.passed]

    def format(self):
        out = [f"== {self.title}"]
        sec = None
        for s, label, value in self.items:
            if s != sec:
                out.append(f"[{s}]")
                sec = s
            out.append(f"  {label:<28s} {_show(value)}")
        if self.checks:
            out.append("[checks]")
            for c in self.checks:
                tag = "PASS" if c.passed else ("FAIL" if c.hard else "MISS")
                rel = "" if isinstance(c.value, (bool, np.bool_)) else f" {_show(c.value)} (tol {_show(c.tol)})"
                note = f"  {c.note}" if c.note else ""
                out.append(f"  {tag} {c.name}{rel}{note}")
        if self.timing:
            out.append("[timing]")
            out += [f"  {k:<28s} {v:.3f} s" for k, v in self.timing.items()]
        return "\n".join(out)


def _show(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.15g}"
    if isinstance(v, (complex, np.complexfloating)):
        v = complex(v)
        return f"{v.real:.15g}{v.imag:+.15g}i"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_show(x) for x in v) + "]"
    return str(v)


class _Timer:
    def __init__(self, report, key):
        self.report, self.key = report, key

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.report.timing[self.key] = time.perf_counter() - self.t0


# ----------------------------------------------------------------- problem

@dataclass(frozen=True)
class Problem:
    cfg: object
    hp1: object
    hp2: object
    coupling: object
    params: sy.SymbolParams
    form: str


def kernel_form_lambda(c):
    """Coefficients whose symbol is the exact Mellin transform of the kernel Q."""
    l1, l2, l3, l4 = c.lam
    return (l1, l2, l3 / c.gamma1, l4 / c.beta1)


def build_problem(cfg, form=None):
    hp1, hp2 = half_plane(cfg.halfplane1), half_plane(cfg.halfplane2)
    c = cp.couple(hp1, hp2)
    form = form or cfg.numerics["symbol_form"]
    if cfg.lambda_override is not None:
        lam, form = tuple(cfg.lambda_override), "override"
    elif form == "kernel":
        lam = kernel_form_lambda(c)
    else:
        lam = tuple(c.lam)
    p = sy.SymbolParams(h=cfg.h, k0=cfg.k0, lam=lam, mu_log=c.mu_log)
    return Problem(cfg, hp1, hp2, c, p, form)


def _collocation_lambda(prob):
    """Kernel coefficients for the direct solver (the kernel Q itself)."""
    if prob.form == "override":
        return prob.params.lam
    return tuple(prob.coupling.lam)


# -------------------------------------------------------------- operations

def run_params(cfg):
    prob = build_problem(cfg)
    rep = RunReport(f"params {cfg.name}".strip())
    for label, hp in (("halfplane1", prob.hp1), ("halfplane2", prob.hp2)):
        a, b = hp.raw.quartic_coefficients()
        rep.add(label, "beta", hp.beta)
        rep.add(label, "gamma", hp.gamma)
        rep.add(label, "rho", hp.rho)
        rep.add(label, "r", hp.r)
        rep.add(label, "sum identity error", abs(hp.beta**2 + hp.gamma**2 - a) / a)
        rep.add(label, "product identity error", abs(hp.beta**2 * hp.gamma**2 - b) / b)
    c = prob.coupling
    rep.add("coupling", "delta", c.delta)
    rep.add("coupling", "delta (LU)", c.delta_lu)
    rep.add("coupling", "lambda", c.lam)
    rep.add("coupling", "kappa", c.kappa)
    rep.add("coupling", "mu_log", c.mu_log)
    for k, v in c.I.items():
        rep.add("coupling", k, v)
    rep.add("glue", "k0", cfg.k0)
    rep.add("glue", "m0", "not given" if cfg.m0 is None else cfg.m0)
    p = prob.params
    rep.add("symbol", "form", prob.form)
    rep.add("symbol", "lambda used", p.lam)
    rep.add("symbol", "h * lambda", tuple(p.h * v for v in p.lam))
    rep.add("symbol", "k0 h", p.kh)
    rep.add("symbol", "G(0)", sy.G_at_zero(p))
    rep.data.update(problem=prob)
    return rep


def _index_section(rep, p):
    sc = sy.phase_scan(lambda s: sy.eval_G0(s, p))
    k = int(np.argmin(sc.values.real))
    rep.add("index", "winding of G0", sc.winding)
    rep.add("index", "index", sc.index)
    rep.add("index", "min Re G0", float(sc.values.real[k]))
    rep.add("index", "at s", float(sc.s[k]))
    rep.add("index", "scan nodes", sc.s.size)
    return sc.index, float(sc.values.real[k])


def _zero_section(rep, p, tau_max):
    zl = rf.minimal_zero(p, tau_max)
    z = zl.zero
    rep.add("zero", "omega0", zl.omega0)
    rep.add("zero", "tau0", zl.tau0)
    rep.add("zero", "lattice point", z.lattice)
    rep.add("zero", "offset from lattice", z.offset)
    rep.add("zero", "|G(z0)|", zl.residual)
    rep.add("zero", "scaled |H(z0)|", z.h_residual)
    rep.add("zero", "strip counts", [f"{n}:{c}" for n, c in zl.strip_counts])
    rep.add("zero", "strip 0<Im z<=1 clear", zl.strip1_clear)
    rep.add("zero", "count error estimate", zl.count_error)
    rep.add("zero", "scan half-width", zl.extent)
    rep.add("zero", "half-width certified", zl.extent_certified)
    if zl.axis_bracket is not None:
        rep.add("zero", "axis sign-change bracket", zl.axis_bracket)
    if zl.pole_separated is not None and zl.pole_separated is not z:
        rep.add("zero", "first pole-separated zero", zl.pole_separated.z)
    return zl


def run_roots(cfg):
    prob = build_problem(cfg)
    p = prob.params
    rep = RunReport(f"roots {cfg.name}".strip())
    rep.add("symbol", "form", prob.form)
    rep.add("symbol", "k0", p.k0)
    with _Timer(rep, "index scan"):
        _index_section(rep, p)
    with _Timer(rep, "zero search"):
        try:
            zl = _zero_section(rep, p, cfg.numerics["tau_max"])
        except NoZeroBelowTauMax as e:
            rep.add("zero", "result", str(e))
            zl = None
    if all(v == 0 for v in p.lam) and zl is not None:
        rep.add("zero", "closed form 1/sqrt(k0 h)", 1 / np.sqrt(p.kh))
    rep.data.update(problem=prob, zero=zl)
    return rep


def default_grid(p, cfg):
    idx = sy.winding_index(p)
    if idx != 0:
        raise IndexNonzero(f"index of G0 is {idx}")
    return fz.symbol_grid(p, step=cfg.numerics["node_step"])


def stress_profile(prob, grid=None, n=None):
    cfg = prob.cfg
    g = default_grid(prob.params, cfg) if grid is None else grid
    n = cfg.numerics["grid"] if n is None else n
    return fz.invert_tau(g, cfg.P, n=n, x_min=cfg.numerics["x_min"]), g


def _fits(rep, prof):
    for label, window in (("exponent near 0", (1e-4, 1e-2)), ("slope near 1", (0.95, 0.999))):
        try:
            f = fz.fit_endpoint_exponent(prof, window)
            rep.add("profile", label, f"{f.slope:.6g} +- {f.stderr:.2g} ({f.sign}, {f.n} points)")
        except (ValueError, PatchContactError) as e:
            rep.add("profile", label, f"unavailable: {e}")


def profile_csv(cfg, prof):
    buf = io.StringIO()
    buf.write(f"# patchcontact {__version__}\n")
    buf.write(f"# config-sha256 {config_hash(cfg)}\n")
    buf.write(f"# P {cfg.P!r} equilibrium {prof.equilibrium!r}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "tau", "psi"])
    for row in zip(prof.x, prof.tau, prof.psi):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def run_stress(cfg, out=None):
    prob = build_problem(cfg)
    rep = RunReport(f"stress {cfg.name}".strip())
    with _Timer(rep, "factorization and inversion"):
        prof, g = stress_profile(prob)
    rep.add("profile", "points", prof.x.size)
    rep.add("profile", "psi(1)", prof.equilibrium)
    rep.add("profile", "|psi(1) - P| / |P|", abs(prof.equilibrium - cfg.P) / abs(cfg.P) if cfg.P else 0.0)
    rep.add("profile", "inversion sub-grid check", prof.info.get("inversion_check"))
    rep.add("profile", "tau at x = 1", prof.info.get("tau_at_one", 0.0))
    rep.add("grid", "nodes", g.nodes.size)
    rep.add("grid", "tail coefficient", g.tail_coefficient)
    rep.add("grid", "tail fit residual", g.tail_residual)
    _fits(rep, prof)
    text = profile_csv(cfg, prof)
    if out is not None:
        with open(out, "w", newline="") as fh:
            fh.write(text)
        rep.add("output", "csv", str(out))
    rep.data.update(problem=prob, profile=prof, csv=text, grid=g)
    return rep


# ------------------------------------------------------------- verification

_Z_SAMPLES = np.array([0.5 + 0.5j, -1.3 + 0.25j, 2.2 + 3.7j, 0.01 + 6.4j, 7.5 - 0.3j, -0.4 + 12.6j])
_KERNEL_SAMPLES = [(0.3, 0.2), (2.0, 1.0), (0.05, 0.9), (0.7, 0.71)]


def _t_samples(grid):
    top = min(1e8, grid.extent / 10)
    s = np.geomspace(1e-2, top, 50)
    return np.concatenate([-s[::-1], s])


def arbitrate(prob, reference, grid=None, profiles=None):
    """Transform-path variants against the collocation profile on [0.05, 0.95].

    Factorized profiles use the refined grid; profiles maps a symbol form to
    an already computed refined profile.
    """
    cfg = prob.cfg
    rows = []
    g = default_grid(prob.params, cfg) if grid is None else grid
    n = cfg.numerics["refined_grid"]
    profiles = profiles or {}

    def add(label, fn):
        try:
            prof = fn()
            rows.append((label, orc.compare(prof, reference), prof.equilibrium, ""))
        except PatchContactError as e:
            rows.append((label, np.inf, np.nan, type(e).__name__))

    def factorized(form):
        if form in profiles:
            return profiles[form]
        if form == prob.form:
            return stress_profile(prob, g, n=n)[0]
        return stress_profile(build_problem(cfg, form), n=n)[0]

    forms = [prob.form]
    if prob.form != "override":
        forms.append("kernel" if prob.form == "printed" else "printed")
    for form in forms:
        add(f"factorized solution, {form} symbol", lambda: factorized(form))
    l1 = prob.coupling.lam[0]
    for lam_hat, lh_label in ((l1, "lambda1"), (0.0, "0")):
        for const in ("sqrt2pi", "2pi"):
            add(f"closed form, lam_hat={lh_label}, constant={const}",
                lambda: fz.invert_M(g, cfg.P, lam_hat, cfg.k0, const, x_min=cfg.numerics["x_min"]))
    best = min(rows, key=lambda r: r[1])
    return rows, best


def run_verify(cfg, fault=None):
    if fault is not None and fault not in FAULTS:
        raise ValidationError(f"unknown fault {fault!r}; choose from {FAULTS}")
    prob = build_problem(cfg)
    p, c = prob.params, prob.coupling
    rep = RunReport(f"verify {cfg.name}".strip() + (f" (fault: {fault})" if fault else ""))
    rep.add("symbol", "form", prob.form)

    err = 0.0
    for hp in (prob.hp1, prob.hp2):
        a, b = hp.raw.quartic_coefficients()
        err = max(err, abs(hp.beta**2 + hp.gamma**2 - a) / a, abs(hp.beta**2 * hp.gamma**2 - b) / b)
    rep.check("characteristic root identities", err, 1e-12)
    rep.check("determinant by cofactors vs LU", abs(c.delta - c.delta_lu) / abs(c.delta), 1e-12)

    hom = 0.0
    for t, x in _KERNEL_SAMPLES:
        for k in (cp.kernel_Q, cp.kernel_R):
            q = k(t, x, c)
            for s in (0.37, 7.0):
                hom = max(hom, abs(s * k(s * t, s * x, c) - q) / abs(q))
    rep.check("kernel homogeneity", hom, 1e-12)
    rep.check("Schwarz symmetry of G", float(np.max(sy.schwarz_defect(_Z_SAMPLES, p))), 1e-12)
    hg = np.abs(sy.eval_H(_Z_SAMPLES, p) / np.sinh(np.pi * _Z_SAMPLES) - sy.eval_G(_Z_SAMPLES, p))
    rep.check("H / sinh vs G", float(np.max(hg / np.abs(sy.eval_G(_Z_SAMPLES, p)))), 1e-12)

    with _Timer(rep, "index scan"):
        idx, min_re = _index_section(rep, p)
    rep.check("index of G0 is zero", idx == 0, 0)
    rep.check("min Re G0 positive", min_re > 0, 0)

    with _Timer(rep, "zero search"):
        zl = _zero_section(rep, p, cfg.numerics["tau_max"])
    rep.check("|G(z0)| certificate", zl.residual, 1e-10)
    mz = rf.mirrored(p, zl.zero)
    dist = abs(mz.z - (-np.conj(zl.zero.z)))
    rep.check("Schwarz zero pairing", dist, 1e-8 * (1 + abs(zl.zero.z)),
              note=f"mirror residual {mz.residual:.2g}")
    if all(v == 0 for v in p.lam):
        exact = 1 / np.sqrt(p.kh)
        rep.check("closed-form zero 1/sqrt(k0 h)", abs(zl.tau0 - exact) / exact + abs(zl.omega0), 1e-10)

    pf = p.replace(lam=tuple(-v for v in p.lam)) if fault == "flip-lambda" else p
    with _Timer(rep, "factorization"):
        try:
            g = default_grid(pf, cfg)
            ts = _t_samples(g)
            plem = fz.plemelj_defect_offaxis(g, ts, reference=lambda t: sy.eval_G0(t, p))
            note = ""
        except PatchContactError as e:
            g, plem, note = None, np.inf, f"{type(e).__name__}: {e}"
    rep.check("Plemelj jump X+/X- = G0", plem, 1e-6, note=note)

    num = cfg.numerics
    with _Timer(rep, "collocation"):
        lam_c = _collocation_lambda(prob)
        sysm = orc.assemble(lam_c, c.beta1, c.gamma1, cfg.h, cfg.k0, cfg.P,
                            N=num["collocation_n"], ratio=num["grading"], x_min=num["x_min"])
        rep.check("collocation patch test", orc.patch_residual(sysm, lam_c, c.beta1, c.gamma1), 1e-9)
        try:
            col = orc.solve(sysm)
        except SingularSystem as e:
            col = None
            rep.add("oracle", "collocation", str(e))
    if col is not None and g is not None and fault is None:
        with _Timer(rep, "arbitration"):
            rows, best = arbitrate(prob, col, g)
        for label, l2, eq, note in rows:
            rep.add("oracle", label, f"L2 {l2:.3g}  psi(1) {eq:.6g} {note}".rstrip())
        rep.check("transform vs collocation (best variant)", best[1], 0.02, hard=False, note=best[0])
        rep.data.update(arbitration=rows)
    rep.data.update(problem=prob, zero=zl, grid=g, collocation=col)
    return rep


# -------------------------------------------------------------- reproduction

def run_reproduce(case_id, tau_max=None):
    rep = RunReport(f"reproduce case {case_id}")
    rows = []
    for n in (4, 3, 2):
        cfg = builtin_case(case_id, n)
        prob = build_problem(cfg)
        p = prob.params
        t0 = time.perf_counter()
        zl = rf.minimal_zero(p, tau_max or cfg.numerics["tau_max"])
        rep.timing[f"n={n}"] = time.perf_counter() - t0
        ref_w, ref_t = cfg.reference.get(f"omega0_n{n}"), cfg.reference.get(f"tau0_n{n}")
        row = {"n": n, "k0": cfg.k0, "omega0": zl.omega0, "tau0": zl.tau0,
               "residual": zl.residual, "h_residual": zl.zero.h_residual,
               "offset": zl.zero.offset, "strip1_clear": zl.strip1_clear,
               "count_error": zl.count_error, "ref_omega0": ref_w, "ref_tau0": ref_t}
        if ref_t is not None:
            row["tau0_rel_delta"] = (zl.tau0 - ref_t) / ref_t
            zref = complex(ref_w, ref_t)
            row["implied_lambda4_ratio"] = complex(rf.implied_lambda4(p, zref)) / p.lam[3]
            row["G_at_reference"] = abs(complex(sy.eval_G(zref, p)))
        if zl.pole_separated is not None:
            row["pole_separated_zero"] = zl.pole_separated.z
        rows.append(row)
        sec = f"n={n}"
        for k, v in row.items():
            if k != "n":
                rep.add(sec, k, v)
        rep.check(f"n={n} |G(z0)| certificate", zl.residual, 1e-10)
        rep.check(f"n={n} strip 0<Im z<=1 clear", zl.strip1_clear, 0)
        if ref_t is not None:
            rep.check(f"n={n} tau0 within 1e-3 of reference", abs(row["tau0_rel_delta"]), 1e-3, hard=False)
    taus = [r["tau0"] for r in rows]
    rep.check("tau0(n=4) >= tau0(n=3) >= tau0(n=2)", taus[0] >= taus[1] >= taus[2], 0, hard=False)
    rep.check("tau0 spread over n", (max(taus) - min(taus)) / max(taus), 1e-6, hard=False)
    rep.data.update(rows=rows)
    return rep


# ---------------------------------------------------------------------- cli

def _parser():
    ap = argparse.ArgumentParser(prog="patchcontact", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"patchcontact {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("params", "roots", "stress", "verify", "reproduce"):
        sp = sub.add_parser(name)
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", metavar="FILE")
        src.add_argument("--case", type=int, choices=(1, 2, 3))
        sp.add_argument("--n", type=int, choices=(2, 3, 4), default=4)
        sp.add_argument("--out", metavar="FILE.csv")
        sp.add_argument("--grid", type=int, metavar="N")
        sp.add_argument("--tau-max", type=float, metavar="T")
        sp.add_argument("--symbol-form", choices=("printed", "kernel"))
        if name == "verify":
            sp.add_argument("--inject-fault", choices=FAULTS)
    return ap


def _config(args):
    cfg = load_config(args.config) if args.config else builtin_case(args.case, args.n)
    if args.config and args.n != 4:
        cfg = cfg.with_n(args.n)
    return cfg.with_numerics(grid=args.grid, tau_max=args.tau_max, symbol_form=args.symbol_form)


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        if args.command == "reproduce":
            if args.case is None:
                raise ValidationError("reproduce needs --case")
            rep = run_reproduce(args.case, args.tau_max)
        else:
            cfg = _config(args)
            if args.command == "params":
                rep = run_params(cfg)
            elif args.command == "roots":
                rep = run_roots(cfg)
            elif args.command == "stress":
                rep = run_stress(cfg, args.out)
                if args.out is None:
                    sys.stdout.write(rep.data["csv"])
                    return EXIT_OK
            else:
                rep = run_verify(cfg, args.inject_fault)
    except (ValidationError, ParseError, MeshTooCoarse) as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except PatchContactError as e:
        # ConvergenceError, UnresolvedWinding, IndexNonzero, SingularSystem and kin
        print(f"no convergence: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NONCONVERGED
    print(rep.format())
    return EXIT_FAILED if rep.hard_failures else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
