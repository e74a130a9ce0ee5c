"""Fourier symbol G of the tension problem and its pole-free companion H.

    G(z) = 1 + (h lam1 z / 2) coth(pi z)
             - h z (lam2 + lam3 e^{i mu z} + lam4 e^{-i mu z}) / (2 sinh(pi z))
             + k0 h z**2
    H(z) = sinh(pi z) G(z)                       (entire)
    G0(s) = G(s) / (k0 h (1 + s**2))             (G0 -> 1 at infinity)

Every evaluation splits z = i n + w with n an integer. sinh and cosh are
taken from the offset w (periodicity in i) and carry a common factor
exp(-pi |Re z|), so H stays finite in scaled form for any Re z and G is
accurate right next to the poles z = i n. Callers that hold a point as
(n, w) pass ``lattice=n`` with the offset, which keeps offsets far below
the spacing of doubles near i n (zeros of G hug the poles when the kernel
coefficients are small).
"""

from dataclasses import dataclass

import numpy as np

from .errors import PoleAtEvaluation, UnresolvedWinding, ValidationError


@dataclass(frozen=True)
class SymbolParams:
    h: float
    k0: float
    lam: tuple
    mu_log: float

    def __post_init__(self):
        object.__setattr__(self, "lam", tuple(float(v) for v in self.lam))
        bad = []
        if not self.h > 0:
            bad.append(f"h must be positive, got {self.h!r}")
        if not self.k0 > 0:
            bad.append(f"k0 must be positive, got {self.k0!r}")
        if not self.mu_log > 0:
            bad.append(f"mu_log must be positive, got {self.mu_log!r}")
        if len(self.lam) != 4 or not all(np.isfinite(self.lam)):
            bad.append("lam must hold four finite numbers")
        if bad:
            raise ValidationError(bad)

    @property
    def kh(self):
        return self.k0 * self.h

    @classmethod
    def from_coupling(cls, c, h, k0):
        return cls(h=h, k0=k0, lam=tuple(c.lam), mu_log=c.mu_log)

    def replace(self, **kw):
        d = dict(h=self.h, k0=self.k0, lam=self.lam, mu_log=self.mu_log)
        d.update(kw)
        return SymbolParams(**d)


def _split(z, lattice):
    z = np.asarray(z, dtype=complex)
    if lattice is None:
        n = np.round(z.imag)
        w = z - 1j * n
    else:
        n = np.broadcast_to(np.asarray(lattice, dtype=float), z.shape)
        w = z
    return n, w


class _Parts:
    """Scaled building blocks at z = i n + w; true value = scaled * exp(pi |Re w|)."""

    def __init__(self, p, z, lattice=None):
        n, w = _split(z, lattice)
        x = w.real
        sg = np.where(x >= 0, 1.0, -1.0)
        par = np.where(np.mod(n, 2) == 0, 1.0, -1.0)
        ph = np.exp(1j * sg * np.pi * w.imag)
        q = np.exp(-2 * sg * np.pi * w)
        self.n, self.w = n, w
        self.zfull = 1j * n + w
        self.sinh = par * (-sg * ph * np.expm1(-2 * sg * np.pi * w) / 2)
        self.cosh = par * (ph * (1 + q) / 2)
        im = n + w.imag
        base = -np.pi * np.abs(x)
        self.ep = np.exp(base - p.mu_log * im + 1j * p.mu_log * x)   # e^{i mu z}, scaled
        self.em = np.exp(base + p.mu_log * im - 1j * p.mu_log * x)   # e^{-i mu z}, scaled
        self.decay = np.exp(base)
        l1, l2, l3, l4 = p.lam
        self.S = l2 * self.decay + l3 * self.ep + l4 * self.em
        self.dS = 1j * p.mu_log * (l3 * self.ep - l4 * self.em)
        self.N = l1 * self.cosh - self.S
        self.dN = np.pi * l1 * self.sinh - self.dS


def eval_H_scaled(z, p, lattice=None):
    """Return (H, H') both multiplied by exp(-pi |Re z|)."""
    a = _Parts(p, z, lattice)
    z = a.zfull
    glue = 1 + p.kh * z * z
    H = a.sinh * glue + 0.5 * p.h * z * a.N
    dH = np.pi * a.cosh * glue + 2 * p.kh * z * a.sinh + 0.5 * p.h * (a.N + z * a.dN)
    return H, dH


def eval_H(z, p, lattice=None):
    a = _Parts(p, z, lattice)
    Hs, _ = eval_H_scaled(z, p, lattice)
    return Hs / a.decay


def eval_H_prime(z, p, lattice=None):
    a = _Parts(p, z, lattice)
    _, dHs = eval_H_scaled(z, p, lattice)
    return dHs / a.decay


def G_at_zero(p):
    l1, l2, l3, l4 = p.lam
    return 1 + p.h * (l1 - l2 - l3 - l4) / (2 * np.pi)


def eval_G(z, p, lattice=None):
    """Symbol G; removable points (z = 0, or i n where the numerator vanishes) use limits."""
    scalar = np.ndim(z) == 0
    a = _Parts(p, z, lattice)
    z = np.atleast_1d(a.zfull)
    sinh = np.atleast_1d(a.sinh)
    N = np.atleast_1d(a.N)
    dN = np.atleast_1d(a.dN)
    cosh = np.atleast_1d(a.cosh)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = N / sinh
    ratio = np.where(z == 0, 0, ratio)
    on = (sinh == 0) & (z != 0)
    if np.any(on):
        if np.any(on & (N != 0)):
            raise PoleAtEvaluation("G evaluated on a pole z = i n")
        ratio = np.where(on, dN / (np.pi * cosh), ratio)
    out = 1 + p.kh * z * z + 0.5 * p.h * z * ratio
    at0 = z == 0
    if np.any(at0):
        out = np.where(at0, G_at_zero(p), out)
    return out[0] if scalar else out.reshape(np.shape(a.zfull))


def eval_G0(s, p):
    s = np.asarray(s, dtype=float)
    return eval_G(s, p) / (p.kh * (1 + s * s))


def schwarz_defect(z, p):
    """|G(-conj z) - conj G(z)| / |G(z)|."""
    g = eval_G(z, p)
    return np.abs(eval_G(-np.conj(z), p) - np.conj(g)) / np.abs(g)


# ---------------------------------------------------------------- index scan

@dataclass(frozen=True)
class PhaseScan:
    s: np.ndarray
    values: np.ndarray
    winding: float
    index: int
    extent: float


def _settled_extent(f, start=10.0, rel=1e-6, limit=1e15):
    S = start
    while S < limit:
        a = f(np.array([-10 * S, -S, S, 10 * S]))
        if abs(a[0] / a[1] - 1) < rel and abs(a[3] / a[2] - 1) < rel:
            return 10 * S
        S *= 10
    raise UnresolvedWinding(f"symbol has not settled by |s| = {limit:g}")


def phase_scan(f, step=0.05, max_nodes=400_000, extent=None):
    """Adaptive scan of arg f along the real line with increments kept below pi/4.

    Nodes are s = sinh(v) with v uniform, refined by bisection in v.
    """
    S = _settled_extent(f) if extent is None else extent
    V = np.arcsinh(S)
    m = int(np.ceil(2 * V / step)) | 1
    v = np.linspace(-V, V, m)
    fv = f(np.sinh(v))
    while True:
        d = np.angle(fv[1:] / fv[:-1])
        bad = np.flatnonzero(np.abs(d) > np.pi / 4)
        if bad.size == 0:
            break
        if v.size + bad.size > max_nodes:
            raise UnresolvedWinding("phase refinement budget exhausted")
        vm = 0.5 * (v[bad] + v[bad + 1])
        fm = f(np.sinh(vm))
        v = np.insert(v, bad + 1, vm)
        fv = np.insert(fv, bad + 1, fm)
    total = np.sum(np.angle(fv[1:] / fv[:-1])) / (2 * np.pi)
    return PhaseScan(np.sinh(v), fv, float(total), int(np.round(total)), float(S))


def winding_index(p, **kw):
    return phase_scan(lambda s: eval_G0(s, p), **kw).index


def re_positivity_scan(p, **kw):
    """Minimum of Re G0 over the adaptive real-axis grid, and where it occurs."""
    sc = phase_scan(lambda s: eval_G0(s, p), **kw)
    k = int(np.argmin(sc.values.real))
    return float(sc.values.real[k]), float(sc.s[k])
