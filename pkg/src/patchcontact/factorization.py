"""Canonical factorization of G0 and recovery of the contact stress.

G0 = G / (k0 h (1 + s^2)) is split as G0 = R_a * G1 with a = 1/sqrt(k0 h),

    R_a(s) = (s^2 + a^2) / (s^2 + 1),   X_R^+(z) = (z + i a)/(z + i),
                                        X_R^-(z) = (z - i)/(z - i a),

and G1 = G / (1 + k0 h s^2) -> 1, factorized numerically through the
Cauchy integral of L = ln G1 on the mapped nodes t = c sinh(v).

With u(xi) = x tau(x), x = e^xi, and U(s) = (2 pi)^-1/2 int u e^{i s xi} dxi,
the tension problem reduces to

    U(z) = P a X1^-(z) / (sqrt(2 pi) X1^-(0) (a + i z)),

so that

    u(xi) = P a / X1^-(0) * [e^{a xi} + (2 pi)^-1 int (X1^-(t) - 1)/(a + i t) e^{-i t xi} dt]

for xi < 0. ``assemble_M`` keeps the alternative closed form of the stress
transform with its two undetermined constants so it can be compared
against the collocation solution.
"""

from dataclasses import dataclass, field

import numpy as np

from . import symbol as sy
from .errors import (IndexNonzero, NonPositiveTau, OscillationUnderResolved,
                     TailUnresolved)

SQ2PI = np.sqrt(2 * np.pi)


# ------------------------------------------------------------------ engine

@dataclass
class FactorizationGrid:
    """Cauchy-integral data for a symbol g -> 1, optionally times R_a."""

    nodes: np.ndarray
    weights: np.ndarray
    log_symbol: np.ndarray
    dlog: np.ndarray
    tail_coefficient: tuple        # (A, B): L ~ A/|t| + B/t beyond the nodes
    tail_residual: float
    extent: float
    func: object = field(repr=False)
    rational_a: float = None

    # -- log symbol anywhere on the axis, on the continuous branch
    def log_at(self, t):
        t = np.asarray(t, dtype=float)
        g = self.func(t)
        L = np.log(np.abs(g)) + 1j * np.angle(g)
        ref = np.interp(t, self.nodes, self.log_symbol.imag)
        L = L + 2j * np.pi * np.round((ref - L.imag) / (2 * np.pi))
        A, B = self.tail_coefficient
        far = np.abs(t) > self.extent
        if np.any(far):
            tf = t[far]
            L = np.where(far, 0, L)
            L[far] = A / np.abs(tf) + B / tf
        return L

    def dlog_at(self, t):
        t = np.asarray(t, dtype=float)
        d = 1e-6 * (1 + np.abs(t))
        return (self.log_at(t + d) - self.log_at(t - d)) / (2 * d)

    def _tail(self, z):
        """Integral of the fitted tail over |t| > T against 1/(t - z)."""
        A, B = self.tail_coefficient
        T = self.extent
        z = np.asarray(z, dtype=complex)
        small = np.abs(z) < 1e-8 * T
        zs = np.where(small, 1.0, z)
        # A/|t|: -(A/z) ln(1 - z^2/T^2);  B/t: (B/z) ln((T + z)/(T - z))
        ta = -(A / zs) * np.log1p(-(zs / T) ** 2)
        tb = (B / zs) * (np.log1p(zs / T) - np.log1p(-zs / T))
        # small z limits: A z / T^2 and 2 B / T
        return np.where(small, A * z / T**2 + 2 * B / T, ta + tb)

    def cauchy(self, z, chunk=256):
        """(1/2 pi i) int L(t)/(t - z) dt for Im z != 0."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        shape = z.shape
        z = z.ravel()
        T = self.extent
        dv = np.arcsinh(self.nodes[-1]) * 2 / (self.nodes.size - 1)
        t0 = z.real
        inside = np.abs(t0) < T
        L0 = np.zeros(z.shape, dtype=complex)
        L0[inside] = self.log_at(t0[inside])
        near = inside & (np.abs(z.imag) < 20 * dv * np.hypot(1.0, t0))
        for k in np.flatnonzero(near):
            # subtract the continuation L(z): the integrand is then analytic at t = z
            L0[k] = self._continued(z[k], L0[k])
        out = np.empty(z.shape, dtype=complex)
        for s in range(0, z.size, chunk):
            zk = z[s:s + chunk]
            f = (self.log_symbol[None, :] - L0[s:s + chunk, None]) / (self.nodes[None, :] - zk[:, None])
            out[s:s + chunk] = f @ self.weights
        out += L0 * (np.log(T - z) - np.log(-T - z)) + self._tail(z)
        return (out / (2j * np.pi)).reshape(shape)

    def _continued(self, z, ref):
        try:
            g = complex(np.asarray(self.func(np.array([z])))[0])
        except (TypeError, ValueError):
            return ref
        if not np.isfinite(g) or g == 0:
            return ref
        L = np.log(abs(g)) + 1j * np.angle(g)
        return L + 2j * np.pi * np.round((ref.imag - L.imag) / (2 * np.pi))

    def principal_value(self, t, chunk=256):
        """PV int L(tau)/(tau - t) dtau for real t inside the node range.

        Nodes closer to t than a tiny gap take the derivative limit.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        T = self.extent
        L0 = self.log_at(t)
        out = np.empty(t.shape, dtype=complex)
        gap = 1e-9 * np.median(np.diff(self.nodes))
        for s in range(0, t.size, chunk):
            tk = t[s:s + chunk]
            diff = self.nodes[None, :] - tk[:, None]
            close = np.abs(diff) <= gap * (1 + np.abs(tk))[:, None]
            with np.errstate(divide="ignore", invalid="ignore"):
                f = (self.log_symbol[None, :] - L0[s:s + chunk, None]) / diff
            if np.any(close):
                r, c = np.nonzero(close)
                f[r, c] = self.dlog_at(self.nodes[c])
            out[s:s + chunk] = f @ self.weights
        out += L0 * np.log((T - t) / (T + t)) + self._tail(t + 0j)
        return out, L0


def build_grid(func, rational_a=None, scale=1.0, extent=None, step=0.01):
    """Factorization data for func (-> 1 at infinity), symmetric nodes avoiding t = 0."""
    if extent is None:
        extent = 1e4 * max(1.0, rational_a or 1.0)
    V = np.arcsinh(extent / scale)
    m = 2 * int(np.ceil(V / step))                  # even count: no node at t = 0
    v = np.linspace(-V, V, m)
    dv = v[1] - v[0]
    t = scale * np.sinh(v)
    w = scale * np.cosh(v) * dv
    w[[0, -1]] *= 0.5
    g = func(t)
    L = np.log(np.abs(g)) + 1j * np.unwrap(np.angle(g))
    jump = np.max(np.abs(np.diff(L.imag)))
    L = L - 2j * np.pi * np.round(L[-1].imag / (2 * np.pi))
    if abs(L[0].imag) > np.pi:
        raise IndexNonzero(f"unwrapped arg runs from {L[0].imag:.3f} to {L[-1].imag:.3f}")
    if max(abs(L[0]), abs(L[-1])) > 1e-3:
        raise TailUnresolved(f"|ln G| = {max(abs(L[0]), abs(L[-1])):.3g} at the node range end")
    dL = np.gradient(L, v) / (scale * np.cosh(v))
    sel = np.abs(t) >= extent / 2
    Amat = np.column_stack([1 / np.abs(t[sel]), 1 / t[sel]])
    coef, *_ = np.linalg.lstsq(Amat.astype(complex), L[sel], rcond=None)
    resid = float(np.max(np.abs(Amat @ coef - L[sel]))) if sel.any() else 0.0
    grid = FactorizationGrid(t, w, L, dL, (complex(coef[0]), complex(coef[1])), resid,
                             float(t[-1]), func, rational_a)
    grid.max_arg_jump = float(jump)
    return grid


def symbol_grid(p, step=0.01, extent=None):
    """Factorization grid for G0 of the tension problem."""
    a = 1 / np.sqrt(p.kh)

    def g1(t):
        return sy.eval_G(t, p) / (1 + p.kh * t * t)
    return build_grid(g1, rational_a=a, extent=extent, step=step)


def constant_grid(step=0.05, extent=1e3):
    return build_grid(lambda t: np.ones_like(t, dtype=complex), step=step, extent=extent)


# ---------------------------------------------------------------- factors

def _rational_X(z, a, upper):
    if a is None:
        return np.ones_like(z)
    if upper:
        return (z + 1j * a) / (z + 1j)
    return (z - 1j) / (z - 1j * a)


def factor_X(z, grid):
    """X(z) off the real axis: X+ above, X- below."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    X = np.exp(grid.cauchy(z))
    up = z.imag > 0
    Xr = np.where(up, _rational_X(z, grid.rational_a, True), _rational_X(z, grid.rational_a, False))
    return X * Xr


def boundary_X(t, side, grid):
    """Boundary values X^+(t) (side='above') or X^-(t) (side='below')."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    pv, L = grid.principal_value(t)
    sgn = 0.5 if side in ("above", "+") else -0.5
    X = np.exp(sgn * L + pv / (2j * np.pi))
    upper = side in ("above", "+")
    return X * _rational_X(t + 0j, grid.rational_a, upper)


def symbol_of(grid, t):
    """The full symbol factorized by grid (func times R_a)."""
    t = np.asarray(t, dtype=float)
    g = grid.func(t)
    if grid.rational_a is not None:
        a = grid.rational_a
        g = g * (t * t + a * a) / (t * t + 1)
    return g


def plemelj_defect(grid, t, reference=None):
    """max |X+/X- - G0| / |G0| on the sample t, with G0 evaluated independently.

    reference, if given, is a callable returning the symbol to compare with.
    """
    xp = boundary_X(t, "above", grid)
    xm = boundary_X(t, "below", grid)
    g = symbol_of(grid, t) if reference is None else reference(np.asarray(t, dtype=float))
    return float(np.max(np.abs(xp / xm - g) / np.abs(g)))


def plemelj_defect_offaxis(grid, t, eps=(1e-4, 5e-5), reference=None):
    """Same check with X+- taken as Richardson limits of off-axis values."""
    t = np.asarray(t, dtype=float)
    e1, e2 = eps
    r1 = factor_X(t + 1j * e1, grid) / factor_X(t - 1j * e1, grid)
    r2 = factor_X(t + 1j * e2, grid) / factor_X(t - 1j * e2, grid)
    r = (e1 * r2 - e2 * r1) / (e1 - e2)
    g = symbol_of(grid, t) if reference is None else reference(t)
    return float(np.max(np.abs(r - g) / np.abs(g)))


# --------------------------------------------------------- Fourier inversion

def _phi(theta):
    """int_0^1 e^{i theta u} du and int_0^1 u e^{i theta u} du, stable at small theta."""
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < 0.3
    ts = np.where(small, 1.0, theta)
    e = np.exp(1j * ts)
    p0 = (e - 1) / (1j * ts)
    p1 = e / (1j * ts) + (e - 1) / ts**2
    if np.any(small):
        it = 1j * theta[small]
        s0 = np.zeros_like(it)
        s1 = np.zeros_like(it)
        term = np.ones_like(it)
        for m in range(12):
            if m > 0:
                term = term * it / m
            s0 += term / (m + 1)
            s1 += term / (m + 2)
        p0[small] = s0
        p1[small] = s1
    return p0, p1


def filon(f, t, xi, chunk=64):
    """(1/2 pi) int f(t) e^{-i t xi} dt with f piecewise linear on nodes t."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    ta = t[:-1]
    fa, fb = f[:-1], f[1:]
    dt = np.diff(t)
    out = np.empty(xi.shape, dtype=complex)
    for s in range(0, xi.size, chunk):
        kk = -xi[s:s + chunk, None]
        p0, p1 = _phi(kk * dt[None, :])
        seg = (fa * dt)[None, :] * (p0 - p1) + (fb * dt)[None, :] * p1
        seg *= np.exp(1j * kk * ta[None, :])
        out[s:s + chunk] = seg.sum(axis=1)
    return out / (2 * np.pi)


# ---------------------------------------------------------- stress profile

@dataclass
class StressProfile:
    x: np.ndarray
    tau: np.ndarray
    psi: np.ndarray
    equilibrium: float
    P: float
    exponent_fit: object = None
    info: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    stderr: float
    intercept: float
    sign: str
    n: int


def fit_endpoint_exponent(profile, window):
    """Least-squares slope of ln|tau| against ln x on window = (lo, hi)."""
    x = np.asarray(profile.x if hasattr(profile, "x") else profile[0])
    tau = np.real(np.asarray(profile.tau if hasattr(profile, "tau") else profile[1]))
    lo, hi = window
    sel = (x >= lo) & (x <= hi)
    if sel.sum() < 8:
        raise ValueError(f"need at least 8 points in {window}, have {int(sel.sum())}")
    xs, ts = x[sel], tau[sel]
    if np.any(ts == 0) or not np.all(np.isfinite(ts)):
        raise NonPositiveTau(f"tau vanishes or is not finite in {window}")
    sign = "positive" if np.all(ts > 0) else "negative" if np.all(ts < 0) else "mixed"
    X = np.log(xs)
    Y = np.log(np.abs(ts))
    A = np.column_stack([X, np.ones_like(X)])
    coef, res, *_ = np.linalg.lstsq(A, Y, rcond=None)
    n = X.size
    r = Y - A @ coef
    s2 = float(r @ r) / max(n - 2, 1)
    cov = s2 * np.linalg.inv(A.T @ A)
    return ExponentFit(float(coef[0]), float(np.sqrt(cov[0, 0])), float(coef[1]), sign, n)


def default_xi_grid(a, n=400, x_min=1e-6, layer=None):
    """Log-variable grid: uniform in ln x, a boundary layer of width ~1/a at x = 1
    and a uniform cover of 0.95 <= x < 1."""
    xi_min = np.log(x_min)
    base = np.linspace(xi_min, 0, n + 1)[:-1]
    if layer is None:
        layer = n
    # layer of width 40/a graded towards xi = 0
    s = np.linspace(0, 1, layer + 1)[:-1]
    width = min(40.0 / a, abs(xi_min) / 4)
    lay = -width * (1 - s) ** 2
    # uniform cover of the last 5% of the patch for endpoint fits
    tail = np.log(np.linspace(0.95, 1.0, 65)[:-1])
    xi = np.unique(np.concatenate([base, lay, tail, [-width * 1e-6]]))
    xi = xi[xi < 0]
    return xi


def _profile_from_u(xi, u, P, info):
    x = np.exp(xi)
    tau = u / x
    # psi(x) = int_0^x tau = int_{-inf}^{xi} u dxi'
    u_re = u.real
    psi = np.concatenate([[0.0], np.cumsum(0.5 * (u_re[1:] + u_re[:-1]) * np.diff(xi))])
    head = 0.0
    if u_re[0] != 0 and u_re[1] != 0 and np.sign(u_re[0]) == np.sign(u_re[1]):
        s = np.log(u_re[1] / u_re[0]) / (xi[1] - xi[0])
        if s > 0:
            head = u_re[0] / s
    psi = psi + head
    # from the last grid point to xi = 0 (x = 1)
    end = psi[-1] + 0.5 * (u_re[-1] + info.get("u_at_one", u_re[-1])) * (0 - xi[-1])
    info = dict(info, psi_head=head, imag_max=float(np.max(np.abs(u.imag))))
    return StressProfile(x, tau.real, psi, float(end), P, None, info)


def solution_transform(t, grid, P):
    """U(t) on the real axis from below (transform of x tau(x))."""
    a = grid.rational_a
    xm = boundary_X(t, "below", grid) / _rational_X(np.asarray(t) + 0j, a, False)
    xm0 = boundary_X(np.array([0.0]), "below", grid)[0] / _rational_X(np.array([0j]), a, False)[0]
    return P * a * xm / (SQ2PI * xm0 * (a + 1j * np.asarray(t)))


def invert_tau(grid, P, xi=None, n=400, x_min=1e-6, node_stride=1, check=True):
    """Contact stress from the factorization; returns a StressProfile."""
    a = grid.rational_a
    if xi is None:
        xi = default_xi_grid(a, n=n, x_min=x_min)
    xi = np.asarray(xi, dtype=float)
    if P == 0:
        z = np.zeros_like(xi)
        return _profile_from_u(xi, z + 0j, 0.0, {"u_at_one": 0.0})
    T = grid.extent
    keep = np.abs(grid.nodes) <= T / 4
    t = grid.nodes[keep][::node_stride]
    xm = boundary_X(t, "below", grid) / _rational_X(t + 0j, a, False)
    xm0 = complex(boundary_X(np.array([0.0]), "below", grid)[0]
                  / _rational_X(np.array([0j]), a, False)[0])
    D = (xm - 1) / (a + 1j * t)
    R = filon(D, t, xi)
    if check:
        R2 = filon(D[::2], t[::2], xi)
        err = float(np.max(np.abs(R2 - R)) / (1 + np.max(np.abs(R))))
        if err > 1e-2:
            raise OscillationUnderResolved(f"inversion changes by {err:.2g} on the coarse sub-grid")
    else:
        err = np.nan
    c = P * a / xm0
    u = c * (np.exp(a * xi) + R)
    info = {"u_at_one": float((c * 1.0).real), "X1_minus_0": xm0,
            "inversion_check": err, "tau_at_one": float((c).real)}
    return _profile_from_u(xi, u, P, info)


# ------------------------------------------------- alternative closed form

def assemble_M(z, grid, P, lam_hat, k0, constant="sqrt2pi"):
    """Stress transform in the closed form with explicit constants (Im z < 0).

    K(z) = C + K1(z) + K2(z), M = K - P/(2 sqrt(2 pi)), with
    C = P/sqrt(2 pi) ('sqrt2pi') or P/(2 pi) ('2pi'),
    K2 = P z X(z) / (2 sqrt(2 pi) (z - i)),
    K1 = -(lam_hat P i z X(z)) / (2 pi sqrt(2 pi) k0 (z - i))
         * int coth(pi t) / (X+(t) (t + i) (t - z)) dt.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z.imag >= 0):
        raise ValueError("assemble_M needs Im z < 0")
    C = P / SQ2PI if constant == "sqrt2pi" else P / (2 * np.pi)
    X = factor_X(z, grid)
    K2 = P * z * X / (2 * SQ2PI * (z - 1j))
    if lam_hat != 0 and P != 0:
        J = _coth_integral(z, grid)
        K1 = -(lam_hat * P * 1j * z * X) / (2 * np.pi * SQ2PI * k0 * (z - 1j)) * J
    else:
        K1 = 0
    return C + K1 + K2 - P / (2 * SQ2PI)


def _coth_integral(z, grid, chunk=128):
    """int coth(pi t) / (X+(t) (t + i) (t - z)) dt by subtraction at t = Re z."""
    T = grid.extent
    keep = np.abs(grid.nodes) <= T / 4
    t = grid.nodes[keep]
    w = grid.weights[keep]
    Tq = t[-1] + 0.5 * (t[-1] - t[-2])

    def integrand(s):
        return 1 / (np.tanh(np.pi * s) * boundary_X(s, "above", grid) * (s + 1j))

    f = integrand(t)
    f0 = integrand(z.real)
    out = np.empty(z.shape, dtype=complex)
    for k in range(0, z.size, chunk):
        zk = z[k:k + chunk]
        d = (f[None, :] - f0[k:k + chunk, None]) / (t[None, :] - zk[:, None])
        out[k:k + chunk] = d @ w
    return out + f0 * (np.log(Tq - z) - np.log(-Tq - z))


def invert_M(grid, P, lam_hat, k0, constant="sqrt2pi", xi=None, n=200, x_min=1e-6,
             deltas=(1e-3, 5e-4), n_t=1200):
    """Contact stress from assemble_M, sampled just below the axis with Richardson.

    The constant limit of M at infinity is a point mass at x = 1 and is
    reported separately; the remaining c/(a + i t) tail is inverted in closed form.
    """
    a = grid.rational_a
    if xi is None:
        xi = default_xi_grid(a, n=n, x_min=x_min, layer=n)
    xi = np.asarray(xi, dtype=float)
    vmax = np.arcsinh(min(grid.extent / 8, 400 * a))
    v = np.linspace(-vmax, vmax, 2 * (n_t // 2))
    t = np.sinh(v)
    d1, d2 = deltas
    M1 = assemble_M(t - 1j * d1, grid, P, lam_hat, k0, constant)
    M2 = assemble_M(t - 1j * d2, grid, P, lam_hat, k0, constant)
    M = (d1 * M2 - d2 * M1) / (d1 - d2)
    Minf = 0.5 * (M[0] + M[-1])
    F = M - Minf
    # c/(sqrt(2 pi)(a + i t)) tail estimated from the ends
    c = 0.5 * SQ2PI * (F[0] * (a + 1j * t[0]) + F[-1] * (a + 1j * t[-1]))
    D = F - c / (SQ2PI * (a + 1j * t))
    u = SQ2PI * filon(D, t, xi) + c * np.exp(a * xi)
    info = {"point_mass": complex(SQ2PI * Minf), "tail_c": complex(c), "u_at_one": float(c.real),
            "lam_hat": lam_hat, "constant": constant}
    return _profile_from_u(xi, u, P, info)
