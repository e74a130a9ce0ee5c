"""Contact stress on the demonstration set, two ways.

The factorized solution and the direct collocation solve of the integral
equation are computed independently and compared on [0.05, 0.95]. The
kernel-consistent symbol is run as well to show how much of the gap is due
to the symbol form.

    python3 demos/02_stress_profile.py [out.csv]
"""

import sys

import numpy as np

from patchcontact import cli
from patchcontact import factorization as fz
from patchcontact import oracle as orc
from patchcontact.config import builtin_case_path, load_config

cfg = load_config(builtin_case_path(1).parent / "demo_gpa.cfg")
print(f"k0 h = {cfg.k0 * cfg.h:g}, a = {1 / np.sqrt(cfg.k0 * cfg.h):.4f}")

prob = cli.build_problem(cfg)
prof, grid = cli.stress_profile(prob, n=cfg.numerics["refined_grid"])
print(f"factorization: {grid.nodes.size} nodes, psi(1) = {prof.equilibrium:.8f}")
t = cli._t_samples(grid)
print(f"Plemelj defect {fz.plemelj_defect(grid, t):.2g}")

c = prob.coupling
col = orc.solve_case(c.lam, c.beta1, c.gamma1, cfg.h, cfg.k0, cfg.P, N=cfg.numerics["collocation_n"])
print(f"collocation: N = {col.info['N']}, condition {col.info['condition']:.3g}")

kern, _ = cli.stress_profile(cli.build_problem(cfg, "kernel"), n=cfg.numerics["refined_grid"])
print(f"L2 printed symbol vs collocation {orc.compare(prof, col):.3g}")
print(f"L2 kernel symbol  vs collocation {orc.compare(kern, col):.3g}")

print(f"\n{'x':>10} {'tau (printed)':>15} {'tau (kernel)':>15} {'collocation':>15}")
for x in (0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99):
    vals = [np.interp(x, pr.x, pr.tau) for pr in (prof, kern, col)]
    print(f"{x:10.3g} " + " ".join(f"{v:15.8g}" for v in vals))

f0 = fz.fit_endpoint_exponent(prof, (1e-4, 1e-2))
print(f"\nexponent near x = 0: {f0.slope:.4g} +- {f0.stderr:.2g} ({f0.sign})")

if len(sys.argv) > 1:
    with open(sys.argv[1], "w", newline="") as fh:
        fh.write(cli.profile_csv(cfg, prof))
    print(f"wrote {sys.argv[1]}")
