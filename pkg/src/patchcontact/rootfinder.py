"""Zeros of G in the upper half-plane via the argument principle on H.

Zeros are counted in cells bounded by the lines Im z = k + 1/2, which keep
contours away from the sinh lattice i n. Points i n where H itself
vanishes ("coincident" points, including the origin) are deflated from
the count with 1/(z - i n). Such a point is a removable point of G when
lim G = H'(i n) / (pi cosh(pi i n)) is nonzero; otherwise it is also a
zero of G and stays in the count.

Every zero is stored as (n, w) with z = i n + w, which keeps zeros lying
1e-12 from a pole resolved to full relative precision in w.
"""

from dataclasses import dataclass, field

import numpy as np

from . import symbol as sy
from .errors import (ContourThroughZero, DerivativeVanished, NewtonDiverged,
                     NoZeroBelowTauMax, QuadratureNotConverged, RemovablePoint)

_GX, _GW = np.polynomial.legendre.leggauss(16)
EPS = np.finfo(float).eps
POLE_GUARD = 1e-8


@dataclass(frozen=True)
class Zero:
    lattice: int
    offset: complex
    residual: float          # |G(z)|
    h_residual: float        # |H(z)| / (|sinh| + |cosh|) at z
    step: float              # last Newton correction
    multiplicity: int = 1

    @property
    def z(self):
        return complex(self.offset.real, self.lattice + self.offset.imag)

    @property
    def imag_key(self):
        return (self.lattice, self.offset.imag)

    @property
    def pole_distance(self):
        return abs(self.offset)


@dataclass(frozen=True)
class ZeroLocation:
    omega0: float
    tau0: float
    residual: float
    strip_counts: list
    zero: Zero
    zeros: list = field(repr=False)
    strip1_clear: bool = True
    count_error: float = 0.0
    extent: float = 0.0
    extent_certified: bool = True
    axis_bracket: tuple = None
    pole_separated: Zero = None


# ------------------------------------------------------------------ helpers

def coincident_points(p, lo, hi):
    """Lattice points i n with lo < n < hi where H vanishes to rounding."""
    out = []
    for n in range(int(np.floor(lo)) + 1, int(np.ceil(hi))):
        if not lo < n < hi:
            continue
        H, dH = sy.eval_H_scaled(0j, p, lattice=n)
        if abs(H) <= 8 * EPS * max(1, abs(n)) * (abs(dH) + 1e-300):
            lim = dH / (np.pi * (-1) ** n)
            out.append((n, complex(lim)))
    return out


def _logderiv(p, defl):
    dpts = np.array([1j * n for n in defl], dtype=complex)

    def f(z):
        H, dH = sy.eval_H_scaled(z, p)
        r = dH / H
        for d in dpts:
            r = r - 1.0 / (z - d)
        return r
    return f


def _edge(f, a, b, tol, weight=None, max_panels=4096):
    """Adaptive composite Gauss-Legendre integral of f (times weight) from a to b."""
    length = abs(b - a)
    n = max(2, int(np.ceil(length / 0.25)))

    def rule(n):
        k = np.arange(n)
        za = a + (b - a) * k[:, None] / n
        h = (b - a) / n
        z = za + h * (1 + _GX[None, :]) / 2
        v = f(z)
        if weight is not None:
            v = v * weight(z)
        return np.sum(v * _GW[None, :]) * h / 2, z

    prev, _ = rule(n)
    while True:
        n *= 2
        cur, z = rule(n)
        err = abs(cur - prev)
        if not np.isfinite(cur):
            raise ContourThroughZero(f"non-finite integrand on edge {a}->{b}")
        if err <= tol:
            return cur, err
        if n >= max_panels:
            raise QuadratureNotConverged(f"edge {a}->{b}: error {err:.3g}")
        prev = cur


def contour_integral(p, rect, defl=(), tol=1e-9, weight=None):
    """Counterclockwise integral of (H'/H - sum 1/(z - i n)) * weight over rect.

    rect = (x0, x1, y0, y1). Returns (value, error estimate).
    """
    x0, x1, y0, y1 = rect
    f = _logderiv(p, defl)
    c = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    tot, err = 0j, 0.0
    for k in range(4):
        v, e = _edge(f, c[k], c[(k + 1) % 4], tol, weight)
        tot += v
        err += e
    return tot, err


def _min_ratio_on_boundary(p, rect, m=400):
    """Smallest |H| / (|sinh| + |cosh|) on the rectangle edges (scaled)."""
    x0, x1, y0, y1 = rect
    t = np.linspace(0, 1, m)
    zs = np.concatenate([x0 + (x1 - x0) * t + 1j * y0, x1 + 1j * (y0 + (y1 - y0) * t),
                         x0 + (x1 - x0) * t + 1j * y1, x0 + 1j * (y0 + (y1 - y0) * t)])
    a = sy._Parts(p, zs)
    H, _ = sy.eval_H_scaled(zs, p)
    return float(np.min(np.abs(H) / (np.abs(a.sinh) + np.abs(a.cosh))))


def count_zeros(p, rect, turns=1, tol=1e-9):
    """Number of zeros of G inside rect = (x0, x1, y0, y1), y0 < y1.

    Returns (count, error) where error is the quadrature estimate plus the
    distance of the raw winding from the nearest integer.
    """
    x0, x1, y0, y1 = rect
    defl = [n for n, _ in coincident_points(p, y0, y1)]
    val, err = contour_integral(p, rect, defl, tol)
    raw = turns * val / (2j * np.pi)
    est = turns * err / (2 * np.pi)
    k = int(np.round(raw.real))
    gap = abs(raw - k)
    if est + gap >= 0.25:
        raise QuadratureNotConverged(f"winding {raw} not resolved (err {est + gap:.3g})")
    return k, est + gap


# ----------------------------------------------------------------- Newton

def _split(z):
    n = int(np.round(z.imag))
    return n, complex(z) - 1j * n


def _certify(p, n, w):
    a = sy._Parts(p, w, lattice=n)
    H, _ = sy.eval_H_scaled(w, p, lattice=n)
    scale = float(np.abs(a.sinh) + np.abs(a.cosh))
    try:
        g = abs(complex(sy.eval_G(w, p, lattice=n)))
    except ZeroDivisionError:
        g = np.inf
    return g, float(abs(H)) / scale


def refine_zero(p, z_guess, deflate=True, max_iter=60, defl=()):
    """Newton iteration on H (deflated by removable lattice points) from z_guess."""
    n, w = _split(complex(z_guess))
    defl = list(defl)
    coinc = {m: lim for m, lim in coincident_points(p, n - 1.5, n + 1.5)}
    for attempt in range(4):
        n, w = _split(complex(z_guess))
        if n in defl and abs(w) < 1e-6:
            w = w + 1e-3 * (1 + abs(n)) * 1j
        step = np.inf
        polish = 0
        for it in range(max_iter):
            H, dH = sy.eval_H_scaled(w, p, lattice=n)
            if H == 0:
                step = 0.0
                break
            r = dH / H
            for m in defl:
                r = r - 1.0 / (w + 1j * (n - m))
            if r == 0 or not np.isfinite(r):
                raise DerivativeVanished(f"vanishing Newton derivative at {1j * n + w}")
            dz = 1.0 / r
            w = w - dz
            if not np.isfinite(w) or abs(w) > 1e6:
                raise NewtonDiverged(f"Newton left the domain from {z_guess}")
            if abs(w.imag) > 0.5:
                z = 1j * n + w
                n, w = _split(z)
            step = abs(dz)
            if step <= 1e-13 * (1 + abs(1j * n + w)):
                polish += 1
                if polish > 2 or step <= 4 * EPS * abs(w):
                    break
        else:
            if step > 1e-8 * (1 + abs(1j * n + w)):
                raise NewtonDiverged(f"no convergence from {z_guess}; last step {step:.3g}")
        # snapped onto a lattice point: removable unless G also vanishes there
        if abs(w) <= 8 * EPS * max(1, abs(n)):
            w = 0j
            lim = coinc.get(n)
            if lim is None:
                coinc.update({m: l for m, l in coincident_points(p, n - 0.5, n + 0.5)})
                lim = coinc.get(n)
            if lim is not None and abs(lim) > 1e-8 and n not in defl:
                if not deflate:
                    raise RemovablePoint(f"i*{n} is a removable point of G, not a zero")
                defl.append(n)
                continue
        g, hr = _certify(p, n, w)
        return Zero(n, complex(w), g, hr, float(step))
    raise NewtonDiverged(f"deflation did not reach a zero from {z_guess}")


# ------------------------------------------------------------ far field

def far_extent(p, y0, y1, start=2.0, limit=1e4):
    """Smallest X such that |H - sinh(pi z)(1 + k0 h z^2)| < |main term| / 2 for |Re z| >= X.

    Returns (X, certified). Zeros of G in y0 <= Im z <= y1 then satisfy |Re z| < X.
    """
    l1, l2, l3, l4 = np.abs(p.lam)
    asym = p.h * l1 / (4 * np.sqrt(p.kh))
    if asym >= 0.5:
        return limit, False
    ys = np.linspace(y0, y1, 41)
    X = start
    while X < limit:
        xs = X * np.geomspace(1, 1e9 / X, 400) if X < 1e9 else np.array([X])
        xx, yy = np.meshgrid(xs, ys)
        z = xx + 1j * yy
        # bound in scaled form: divide numerator and denominator by e^{pi x}
        e2 = np.exp(-2 * np.pi * xx)
        sh = (1 - e2) / 2
        ch = (1 + e2) / 2
        other = (l2 + l3 * np.exp(-p.mu_log * yy) + l4 * np.exp(p.mu_log * yy)) * np.exp(-np.pi * xx)
        num = 0.5 * p.h * np.abs(z) * (l1 * ch + other)
        den = sh * np.abs(1 + p.kh * z * z)
        if np.max(num / den) < 0.5:
            return float(X), True
        X *= 1.25
    return limit, False


# ------------------------------------------------------------- scanning

def _cell_zeros(p, rect, count, defl, depth=0, max_depth=14):
    """Locate `count` zeros of G in rect by subdivision, moments and Newton."""
    if count == 0:
        return []
    x0, x1, y0, y1 = rect
    if count == 1:
        mom, _ = contour_integral(p, rect, defl, weight=lambda z: z)
        seed = mom / (2j * np.pi)
        # a coincident point that is also a zero of G
        for n in defl:
            lim = dict(coincident_points(p, n - 0.5, n + 0.5)).get(n, 1.0)
            if abs(seed - 1j * n) < 1e-6 and abs(lim) <= 1e-8:
                return [Zero(n, 0j, abs(lim), 0.0, 0.0)]
        try:
            zr = refine_zero(p, seed, defl=[n for n in defl])
            zc = zr.z
            if x0 - 1e-9 <= zc.real <= x1 + 1e-9 and y0 - 1e-9 <= zc.imag <= y1 + 1e-9:
                return [zr]
        except (NewtonDiverged, DerivativeVanished):
            pass
        if depth >= max_depth:
            raise NewtonDiverged(f"could not isolate zero in {rect}")
    if depth >= max_depth:
        n, w = _split(complex((x0 + x1) / 2, (y0 + y1) / 2))
        g, hr = _certify(p, n, w)
        return [Zero(n, complex(w), g, hr, np.inf, multiplicity=count)]
    # split along the longer side, slightly off-centre
    pieces = []
    if (x1 - x0) >= (y1 - y0):
        cuts = [0.5 + 0.0137 * k for k in (0, 1, -1, 2, -2, 3, -3)]
        for c in cuts:
            xm = x0 + c * (x1 - x0)
            try:
                if _min_ratio_on_boundary(p, (xm, xm, y0, y1), 200) < 1e-10:
                    continue
                a = (x0, xm, y0, y1)
                b = (xm, x1, y0, y1)
                ca, _ = count_zeros(p, a)
                cb, _ = count_zeros(p, b)
                pieces = [(a, ca), (b, cb)]
                break
            except (QuadratureNotConverged, ContourThroughZero):
                continue
    else:
        cuts = [0.5 + 0.0137 * k for k in (0, 1, -1, 2, -2, 3, -3)]
        for c in cuts:
            ym = y0 + c * (y1 - y0)
            try:
                if _min_ratio_on_boundary(p, (x0, x1, ym, ym), 200) < 1e-10:
                    continue
                a = (x0, x1, y0, ym)
                b = (x0, x1, ym, y1)
                ca, _ = count_zeros(p, a)
                cb, _ = count_zeros(p, b)
                pieces = [(a, ca), (b, cb)]
                break
            except (QuadratureNotConverged, ContourThroughZero):
                continue
    if not pieces:
        raise ContourThroughZero(f"could not split {rect}")
    out = []
    for r, c in pieces:
        dd = [n for n in defl if r[2] < n < r[3]]
        out += _cell_zeros(p, r, c, dd, depth + 1, max_depth)
    return out


def _line_positions(p, top, X):
    """Horizontal cut heights k + 1/2 (k = -1 .. top), nudged off near-zeros."""
    ys = []
    for k in range(-1, top + 1):
        for d in (0.0, 0.03, -0.03, 0.07, -0.07, 0.11, -0.11):
            y = k + 0.5 + d
            if _min_ratio_on_boundary(p, (-X, X, y, y), 800) > 1e-12:
                ys.append(y)
                break
        else:
            raise ContourThroughZero(f"no clean cut near Im z = {k + 0.5}")
    return ys


def strip_index(zr):
    """Strip n with n - 1 < Im z <= n."""
    return zr.lattice + 1 if zr.offset.imag > 0 else zr.lattice


def scan_zeros(p, tau_max, X=None):
    """All zeros of G with -1/2 < Im z <= about tau_max + 1/2.

    Returns (zeros, max count error, X, certified extent).
    """
    top = int(np.ceil(tau_max))
    if X is None:
        X, cert = far_extent(p, -0.5, top + 0.5)
    else:
        cert = False
    ys = _line_positions(p, top, X)
    zeros, worst = [], 0.0
    for y0, y1 in zip(ys[:-1], ys[1:]):
        rect = (-X, X, y0, y1)
        cnt, err = count_zeros(p, rect)
        worst = max(worst, err)
        defl = [n for n, _ in coincident_points(p, y0, y1)]
        zeros += _cell_zeros(p, rect, cnt, defl)
    zeros.sort(key=lambda z: (z.lattice, z.offset.imag, z.offset.real))
    return zeros, worst, X, cert


def axis_bracket(p, zr):
    """For a zero on the imaginary axis, a sign change of H(i tau)/i bracketing it."""
    if zr.offset.real != 0 or zr.offset.imag == 0:
        return None
    d = zr.offset.imag
    lo, hi = 0.5 * d, 1.5 * d
    a = complex(sy.eval_H(1j * lo, p, lattice=zr.lattice)) / 1j
    b = complex(sy.eval_H(1j * hi, p, lattice=zr.lattice)) / 1j
    if np.sign(a.real) != np.sign(b.real):
        return (zr.lattice + lo, zr.lattice + hi)
    return None


def minimal_zero(p, tau_max=20.0, X=None, separation=POLE_GUARD):
    """Zero of G with minimal positive imaginary part, with strip certificates."""
    if tau_max < 2:
        raise ValueError("tau_max must be at least 2")
    zeros, err, X, cert = scan_zeros(p, tau_max, X)
    up = [z for z in zeros if z.lattice > 0 or z.offset.imag > 0]
    up = [z for z in up if z.lattice + z.offset.imag <= tau_max]
    counts = {n: 0 for n in range(1, int(np.floor(tau_max)) + 1)}
    for z in up:
        s = strip_index(z)
        if s in counts:
            counts[s] += 1
    strip_counts = sorted(counts.items())
    if not up:
        raise NoZeroBelowTauMax(f"no zero of G with 0 < Im z <= {tau_max}")
    first = min(up, key=lambda z: (z.lattice, z.offset.imag, -z.offset.real))
    sep = [z for z in up if z.pole_distance > separation]
    sep = min(sep, key=lambda z: (z.lattice, z.offset.imag, -z.offset.real)) if sep else None
    zc = first.z
    return ZeroLocation(
        omega0=zc.real, tau0=first.lattice + first.offset.imag,
        residual=first.residual, strip_counts=strip_counts, zero=first,
        zeros=zeros, strip1_clear=counts.get(1, 0) == 0, count_error=err,
        extent=X, extent_certified=cert, axis_bracket=axis_bracket(p, first),
        pole_separated=sep)


def mirrored(p, zr):
    """Refine -conj(z) and return the resulting zero (Schwarz pairing check)."""
    w = -np.conj(zr.offset)
    return refine_zero(p, 1j * zr.lattice + w)


def implied_lambda4(p, z):
    """Value of lambda_4 that would make G(z) = 0 with the other data fixed."""
    z = complex(z)
    base = complex(sy.eval_G(z, p.replace(lam=p.lam[:3] + (0.0,))))
    b = -p.h * z * np.exp(-1j * p.mu_log * z) / (2 * np.sinh(np.pi * z))
    return -base / b
