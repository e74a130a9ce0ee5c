"""Direct collocation solution of the tension equation

    psi(x)/(h x) - (1/2 pi) int_0^1 Q(t, x) psi'(t) dt - (k0 x psi'(x))' = 0,
    psi(0) = 0,  psi(1) = P,

on a mesh graded geometrically towards x = 0.

The unknowns are nodal values of tau = psi', continuous and piecewise
linear, so psi(0) = 0 holds by construction and psi(1) = P is the last row.
Collocation points are element midpoints, where the Cauchy term has a
principal value that the closed-form element integrals resolve exactly.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import EmptyOverlap, MeshTooCoarse, SingularSystem
from .factorization import StressProfile


def graded_mesh(N, ratio=1.08, x_min=1e-6):
    """N elements: geometric growth from x_min up to a uniform spacing d, then uniform."""

    def build(d):
        xs = [0.0, x_min]
        s = x_min
        while s * ratio < d and xs[-1] + s * ratio < 1:
            s *= ratio
            xs.append(xs[-1] + s)
        n_uni = max(1, int(round((1 - xs[-1]) / d)))
        return np.concatenate([xs[:-1], np.linspace(xs[-1], 1, n_uni + 1)])

    lo, hi = 1e-9, 1.0
    for _ in range(200):
        mid = np.sqrt(lo * hi)
        if len(build(mid)) - 1 > N:
            lo = mid
        else:
            hi = mid
    x = build(hi)
    if x.size - 1 > N:
        raise MeshTooCoarse(f"grading {ratio} from {x_min} needs at least {x.size - 1} elements, asked for {N}")
    return x


@dataclass
class CollocationSystem:
    mesh: np.ndarray
    midpoints: np.ndarray
    matrix: np.ndarray
    rhs: np.ndarray
    kernel_block: np.ndarray
    ratio: float
    h: float
    k0: float
    P: float

    @property
    def N(self):
        return self.mesh.size - 1


def _terms(lam, beta1, gamma1):
    l1, l2, l3, l4 = lam
    return [(l1, 1.0, -1.0), (l2, 1.0, 1.0), (l3, beta1, gamma1), (l4, gamma1, beta1)]


def element_integrals(x, ta, tb, lam, beta1, gamma1):
    """int_ta^tb Q(t, x) phi(t) dt for the two hat pieces phi_a, phi_b of each element.

    Uses int (c0 + c1 t)/(al t + B) dt = (c1/al)(tb - ta) + (c0 - c1 B/al)/al * ln|(al tb + B)/(al ta + B)|.
    Returns arrays (Ia, Ib) of shape (len(x), len(ta)).
    """
    X = np.asarray(x, dtype=float)[:, None]
    ta = np.asarray(ta, dtype=float)[None, :]
    tb = np.asarray(tb, dtype=float)[None, :]
    dl = tb - ta
    Ia = np.zeros(np.broadcast(X, ta).shape)
    Ib = np.zeros_like(Ia)
    for lk, al, be in _terms(lam, beta1, gamma1):
        if lk == 0:
            continue
        B = be * X
        with np.errstate(divide="ignore"):
            lg = np.log(np.abs((al * tb + B) / (al * ta + B)))
        c0, c1 = tb / dl, -1 / dl
        Ia += lk * ((c1 / al) * dl + (c0 - c1 * B / al) / al * lg)
        c0, c1 = -ta / dl, 1 / dl
        Ib += lk * ((c1 / al) * dl + (c0 - c1 * B / al) / al * lg)
    return Ia, Ib


def assemble(lam, beta1, gamma1, h, k0, P=1.0, N=800, ratio=1.08, x_min=1e-6, mesh=None):
    x = graded_mesh(N, ratio, x_min) if mesh is None else np.asarray(mesh, dtype=float)
    N = x.size - 1
    ta, tb = x[:-1], x[1:]
    dl = tb - ta
    xm = 0.5 * (ta + tb)
    Ia, Ib = element_integrals(xm, ta, tb, lam, beta1, gamma1)
    K = np.zeros((N, N + 1))
    K[:, :-1] += Ia
    K[:, 1:] += Ib
    # psi at midpoints: trapezoid over whole elements before e, plus the half element
    cumw = np.zeros((N, N + 1))
    upto = np.zeros(N + 1)
    for e in range(N):
        cumw[e] = upto
        cumw[e, e] += 0.75 * dl[e] / 2
        cumw[e, e + 1] += 0.25 * dl[e] / 2
        upto[e] += dl[e] / 2
        upto[e + 1] += dl[e] / 2
    W = upto
    A = np.zeros((N + 1, N + 1))
    A[:N] = cumw / (h * xm[:, None]) - K / (2 * np.pi)
    rows = np.arange(N)
    # (k0 x tau)' = k0 (tau + x tau') with tau linear on the element
    A[rows, rows] += -k0 * (0.5 - xm / dl)
    A[rows, rows + 1] += -k0 * (0.5 + xm / dl)
    A[N] = W
    b = np.zeros(N + 1)
    b[N] = P
    return CollocationSystem(x, xm, A, b, K, ratio, h, k0, P)


def patch_residual(sys, lam, beta1, gamma1):
    """Max mismatch between assembled rows and exact residuals for tau = 1 and tau = 2x."""
    xm = sys.midpoints
    h, k0 = sys.h, sys.k0
    out = 0.0
    # exact int_0^1 Q(t, x) dt and int_0^1 Q(t, x) 2t dt
    q0 = np.zeros_like(xm)
    q1 = np.zeros_like(xm)
    for lk, al, be in _terms(lam, beta1, gamma1):
        B = be * xm
        lg = np.log(np.abs((al + B) / B))
        q0 += lk * lg / al
        q1 += lk * 2 * (1 / al - B / al**2 * lg)
    x = sys.mesh
    for tau, psi_m, q, glue in ((np.ones_like(x), xm, q0, k0 * np.ones_like(xm)),
                                (2 * x, xm**2, q1, 4 * k0 * xm)):
        exact = psi_m / (h * xm) - q / (2 * np.pi) - glue
        got = sys.matrix[:-1] @ tau
        scale = np.abs(psi_m / (h * xm)) + np.abs(q) / (2 * np.pi) + np.abs(glue)
        out = max(out, float(np.max(np.abs(got - exact) / scale)))
    return out


def solve(sys, lam=None, beta1=None, gamma1=None, patch_tol=1e-9):
    """Dense LU solve; returns a StressProfile with tau at the mesh nodes."""
    if lam is not None:
        pr = patch_residual(sys, lam, beta1, gamma1)
        if pr > patch_tol:
            raise MeshTooCoarse(f"patch test residual {pr:.3g}")
    if sys.P == 0:
        tau = np.zeros(sys.N + 1)
        cond = np.nan
    else:
        lu, piv = scipy.linalg.lu_factor(sys.matrix)
        if np.any(np.diag(lu) == 0):
            raise SingularSystem("zero pivot in collocation matrix")
        tau = scipy.linalg.lu_solve((lu, piv), sys.rhs)
        cond = float(np.linalg.cond(sys.matrix, 1)) if sys.N <= 1200 else np.nan
    x = sys.mesh
    psi = np.concatenate([[0.0], np.cumsum(0.5 * (tau[1:] + tau[:-1]) * np.diff(x))])
    return StressProfile(x, tau, psi, float(psi[-1]), sys.P, None,
                         {"N": sys.N, "ratio": sys.ratio, "condition": cond})


def solve_case(lam, beta1, gamma1, h, k0, P=1.0, N=800, ratio=1.08, x_min=1e-6):
    sys = assemble(lam, beta1, gamma1, h, k0, P, N, ratio, x_min)
    return solve(sys, lam, beta1, gamma1)


def compare(a, b, region=(0.05, 0.95), samples=2001):
    """Relative L2 deviation ||a - b|| / ||b|| on region, both interpolated linearly."""
    lo, hi = region
    lo2 = max(lo, a.x.min(), b.x.min())
    hi2 = min(hi, a.x.max(), b.x.max())
    if not hi2 > lo2:
        raise EmptyOverlap(f"profiles do not overlap on {region}")
    xs = np.linspace(lo2, hi2, samples)
    ta = np.interp(xs, a.x, a.tau)
    tb = np.interp(xs, b.x, b.tau)
    nb = np.linalg.norm(tb)
    if nb == 0:
        return 0.0 if np.linalg.norm(ta) == 0 else np.inf
    return float(np.linalg.norm(ta - tb) / nb)
