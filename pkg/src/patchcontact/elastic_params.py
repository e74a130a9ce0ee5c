"""Orthotropic half-plane constants and their complex-potential parameters.

For a half-plane with Young's moduli E (along OX), E* (along OY), shear
modulus G and Poisson ratio nu, the characteristic quartic

    mu**4 + a*mu**2 + b = 0,   a = E/G - 2*nu,  b = E/E*

has purely imaginary roots +-i*beta, +-i*gamma when a**2 > 4b. The
compliance parameters are rho = -(beta**2 + nu)/E and r = -(gamma**2 + nu)/E.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRoots, NonRealRoots, ValidationError

# a**2 - 4b below this fraction of a**2 counts as coincident roots
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class RawMaterial:
    """Engineering constants of one orthotropic half-plane (SI units)."""

    E: float
    E_star: float
    G: float
    nu: float

    def quartic_coefficients(self):
        return self.E / self.G - 2.0 * self.nu, self.E / self.E_star


@dataclass(frozen=True)
class OrthotropicHalfPlane:
    raw: RawMaterial
    beta: float
    gamma: float
    rho: float
    r: float


def validate_material(m):
    """Return a list of violated invariants (empty when valid)."""
    out = []
    for name in ("E", "E_star", "G", "nu"):
        v = getattr(m, name)
        if not np.isfinite(v):
            out.append(f"{name} must be finite, got {v!r}")
    for name in ("E", "E_star", "G"):
        v = getattr(m, name)
        if np.isfinite(v) and not v > 0:
            out.append(f"{name} must be positive, got {v!r}")
    if np.isfinite(m.nu) and not 0.0 <= m.nu < 0.5:
        out.append(f"nu must satisfy 0 <= nu < 0.5, got {m.nu!r}")
    return out


def characteristic_roots(m):
    """Return (beta, gamma) with beta > gamma > 0."""
    bad = validate_material(m)
    if bad:
        raise ValidationError(bad)
    a, b = m.quartic_coefficients()
    disc = a * a - 4.0 * b
    if abs(disc) < DEGENERACY_TOL * a * a:
        raise DegenerateRoots(f"coincident characteristic roots (a={a!r}, b={b!r})")
    if disc < 0:
        raise NonRealRoots(f"a**2 < 4b (a={a!r}, b={b!r}): roots are not purely imaginary")
    sq = np.sqrt(disc)
    beta2 = 0.5 * (a + sq)
    # beta2*gamma2 = b avoids cancellation in a - sq
    gamma2 = b / beta2
    if not gamma2 > 0:
        raise NonRealRoots(f"a <= 0 gives non-positive root squares (a={a!r})")
    return float(np.sqrt(beta2)), float(np.sqrt(gamma2))


def derived_moduli(m, beta, gamma):
    """Return (rho, r) in Pa**-1."""
    rho = -(beta * beta + m.nu) / m.E
    r = -(gamma * gamma + m.nu) / m.E
    return rho, r


def half_plane(m):
    """Build an OrthotropicHalfPlane from raw constants."""
    beta, gamma = characteristic_roots(m)
    rho, r = derived_moduli(m, beta, gamma)
    return OrthotropicHalfPlane(m, beta, gamma, rho, r)


def quartic_residual(m, root):
    """|mu**4 + a mu**2 + b| at mu = i*root; used as a back-substitution check."""
    a, b = m.quartic_coefficients()
    mu = 1j * root
    return abs(mu**4 + a * mu**2 + b)
