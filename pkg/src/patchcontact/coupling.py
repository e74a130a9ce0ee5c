"""Bimaterial interface determinant, kernel coefficients and kernels Q, R.

The 4x4 interface matrix mixes dimensionless entries (rows 1-2) with
compliance entries of order 1e-10 Pa**-1 (rows 3-4). Assembly is done with
compliances rescaled by a power of ten and every derived quantity is then
unscaled by its homogeneity degree in the compliance unit:

    delta: 2   cofactor (i, j): 2 - d_i with d = (0, 0, 1, 1)   I: 3
    lambda_1, lambda_3, lambda_4, all kappa: 1   lambda_2: 2

lambda_2 is implemented exactly as its displayed formula, which is of
degree 2 (the other coefficients are of degree 1).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DegenerateCompliance, PoleAtEvaluation, SingularCoupling

ROW_DEGREE = np.array([0, 0, 1, 1])
I_NAMES = ("I1", "I2", "I3", "I4", "I1*", "I2*", "I3*", "I4*")


@dataclass(frozen=True)
class CouplingCoefficients:
    delta: float
    cof: np.ndarray
    I: dict
    lam: np.ndarray
    kappa: np.ndarray
    mu_log: float
    beta1: float
    gamma1: float
    matrix: np.ndarray = field(repr=False)
    delta_lu: float = field(repr=False)


def interface_matrix(hp1, hp2):
    b1, g1, p1, r1 = hp1.beta, hp1.gamma, hp1.rho, hp1.r
    b2, g2, p2, r2 = hp2.beta, hp2.gamma, hp2.rho, hp2.r
    return np.array([
        [b1 * b1, g1 * g1, -b2 * b2, -g2 * g2],
        [b1, g1, b2, g2],
        [p1 * b1, r1 * g1, p2 * b2, r2 * g2],
        [b1 * b1 * r1, g1 * g1 * p1, -b2 * b2 * r2, -g2 * g2 * p2],
    ])


def _det3(m):
    return (m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
            - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
            + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]))


def cofactors(a):
    """Signed cofactors from explicit 3x3 minors."""
    a = np.asarray(a, dtype=float)
    cof = np.empty((4, 4))
    for i in range(4):
        rows = [k for k in range(4) if k != i]
        for j in range(4):
            cols = [k for k in range(4) if k != j]
            cof[i, j] = (-1) ** (i + j) * _det3(a[np.ix_(rows, cols)])
    return cof


def det_lu(a):
    """Determinant by LU with partial pivoting (independent cross-check)."""
    lu, piv = scipy.linalg.lu_factor(np.asarray(a, dtype=float), check_finite=True)
    sign = (-1) ** int(np.sum(piv != np.arange(len(piv))))
    return float(sign * np.prod(np.diag(lu)))


def compliance_scale(hp1):
    """Power of ten bringing |rho_1| to order one."""
    return 10.0 ** np.round(-np.log10(abs(hp1.rho)))


def _scaled(hp, s):
    return type(hp)(hp.raw, hp.beta, hp.gamma, hp.rho * s, hp.r * s)


def build_delta(hp1, hp2, scale=None):
    """Return (delta, cofactors) in SI units, after a scaled assembly."""
    s = compliance_scale(hp1) if scale is None else scale
    a = interface_matrix(_scaled(hp1, s), _scaled(hp2, s))
    cof = cofactors(a)
    delta = float(a[0] @ cof[0])
    bound = np.prod(np.linalg.norm(a, axis=1))
    if not abs(delta) > 1e-14 * bound:
        raise SingularCoupling(f"interface determinant {delta!r} vs row-norm product {bound!r}")
    cof_si = cof / s ** (2 - ROW_DEGREE)[:, None]
    return delta / s**2, cof_si


def i_coefficients(cof, hp1):
    """The eight I-coefficients, keyed 'I1'..'I4', 'I1*'..'I4*'."""
    b, g, p, r = hp1.beta, hp1.gamma, hp1.rho, hp1.r

    def first(j):
        c = cof[:, j]
        return -c[0] * r * b * b + c[1] * r * b + c[2] * r * p * b - c[3] * b * b * r * r

    def second(j):
        c = cof[:, j]
        return c[0] * p * g * g - c[1] * p * g - c[2] * p * r * g + c[3] * p * p * g * g

    return {"I1": first(0), "I2": second(0), "I3": first(2), "I4": second(2),
            "I1*": first(1), "I2*": second(1), "I3*": first(3), "I4*": second(3)}


def _guard(hp1):
    if hp1.rho == 0 or hp1.r == 0 or hp1.rho == hp1.r:
        raise DegenerateCompliance(f"rho={hp1.rho!r}, r={hp1.r!r}")


def lambda_coefficients(I, hp1, delta):
    _guard(hp1)
    b, g, p, r = hp1.beta, hp1.gamma, hp1.rho, hp1.r
    d = p - r
    return np.array([
        (p * p * g - r * r * b) / (d * b * g),
        (p * p * g * I["I1"] + r * r * b * I["I2*"]) / (delta * b * g * d),
        -I["I2"] * p * p / (delta * r * d),
        -I["I1*"] * r * r / (delta * p * d),
    ])


def kappa_coefficients(I, hp1, delta):
    _guard(hp1)
    b, g, p, r = hp1.beta, hp1.gamma, hp1.rho, hp1.r
    d = p - r
    return np.array([
        (b * r * r + g * p * p) / d,
        (b * r * I["I1"] + g * p * I["I2*"]) / (delta * d),
        b * b * r * I["I2"] / (delta * d),
        g * g * p * I["I1*"] / (delta * d),
    ])


def couple(hp1, hp2, scale=None):
    """Assemble all coupling data for half-plane 1 (x > 0) and 2 (x < 0)."""
    s = compliance_scale(hp1) if scale is None else scale
    h1, h2 = _scaled(hp1, s), _scaled(hp2, s)
    delta_s, cof_s = build_delta(h1, h2, scale=1.0)
    I_s = i_coefficients(cof_s, h1)
    lam_s = lambda_coefficients(I_s, h1, delta_s)
    kap_s = kappa_coefficients(I_s, h1, delta_s)
    lam = lam_s / s**np.array([1, 2, 1, 1])
    matrix = interface_matrix(hp1, hp2)
    return CouplingCoefficients(
        delta=delta_s / s**2,
        cof=cof_s / s ** (2 - ROW_DEGREE)[:, None],
        I={k: v / s**3 for k, v in I_s.items()},
        lam=lam,
        kappa=kap_s / s,
        mu_log=float(np.log(hp1.beta / hp1.gamma)),
        beta1=hp1.beta,
        gamma1=hp1.gamma,
        matrix=matrix,
        delta_lu=det_lu(interface_matrix(h1, h2)) / s**2,
    )


def _kernel(coef, beta1, gamma1, t, x):
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    dens = (t - x, t + x, beta1 * t + gamma1 * x, gamma1 * t + beta1 * x)
    size = np.abs(t) + np.abs(x)
    for d in dens:
        if np.any(np.abs(d) <= 4 * np.finfo(float).eps * size) or np.any(size == 0):
            raise PoleAtEvaluation("kernel evaluated on a pole")
    return sum(c / d for c, d in zip(coef, dens))


def kernel_Q(t, x, c):
    """lam1/(t-x) + lam2/(t+x) + lam3/(b1 t + g1 x) + lam4/(g1 t + b1 x)."""
    return _kernel(c.lam, c.beta1, c.gamma1, t, x)


def kernel_R(t, x, c):
    """Same form as kernel_Q with the kappa coefficients."""
    return _kernel(c.kappa, c.beta1, c.gamma1, t, x)
