"""The kernel-free limit, where everything is known in closed form.

With every lambda set to zero the symbol is 1 + k0 h z**2, its only zero in
the upper half plane is i / sqrt(k0 h), and the tension equation reduces to
x (x psi')' = psi / (k0 h) with psi = P x**a.

    python3 demos/03_glue_only.py
"""

import numpy as np

from patchcontact import cli
from patchcontact import rootfinder as rf
from patchcontact.config import builtin_case_path, load_config

cfg = load_config(builtin_case_path(1).parent / "glue_only.cfg")
prob = cli.build_problem(cfg)
a = float(1 / np.sqrt(cfg.k0 * cfg.h))

zl = rf.minimal_zero(prob.params, cfg.numerics["tau_max"])
print(f"minimal zero {zl.tau0!r} i, closed form {a!r} i")

prof, _ = cli.stress_profile(prob)
exact = cfg.P * a * prof.x ** (a - 1)
print(f"max |tau - P a x^(a-1)| = {np.max(np.abs(prof.tau - exact)):.3g} (tau(1) = {a:g})")
print(f"psi(1) = {prof.equilibrium:.8f}")
