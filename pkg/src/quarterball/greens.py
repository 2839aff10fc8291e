"""Fundamental solution of the singular operator, its exact gradient, the
image-point Green's function for the quarter ball, the sphere normal
derivative, and the two closed-form flat-face kernels.

Everything funnels through one batched evaluator for the two-variable
hypergeometric family, routed between the product-series continuation and
the single-integral continuation by the size of the convergence ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _fast
from .errors import ConvergenceError, DomainError, SingularPointError
from .geometry import (
    Parameters,
    Point3,
    Region,
    domain_membership,
    invert_point,
)
from .specfun import DEFAULT_CONTROL, SeriesControl, _euler_rule, ln_gamma

__all__ = [
    "KernelContext",
    "make_kernel_context",
    "normalization_k",
    "q_fundamental",
    "q_fundamental_batch",
    "q_gradient",
    "q_gradient_batch",
    "g_green",
    "g_green_batch",
    "dG_dn_sphere",
    "dg_dn_sphere_batch",
    "kernel_g_star",
    "g_star_batch",
    "kernel_g_star_star",
    "g_star_star_batch",
    "kernel_g_star_limit",
    "g_weighted_neumann_limit",
]

# ratio of the product-series continuation above which the integral route
# takes over
_EULER_SPLIT = 0.8
_NEAR_DIAGONAL = 1e-12


def normalization_k(params: Parameters) -> float:
    """Constant making the weighted flux of q through a shrinking sphere 1."""
    al, be = params.alpha, params.beta
    lg = (ln_gamma(1.0 - al) + ln_gamma(be) + ln_gamma(2.0 - 2.0 * al + 2.0 * be)
          - ln_gamma(2.0 - 2.0 * al) - ln_gamma(2.0 * be)
          - ln_gamma(1.0 - al + be))
    return math.exp(lg) / (2.0 * math.pi)


@dataclass(frozen=True)
class KernelContext:
    """Immutable bundle: parameters, the normalization constant, series
    policy, and which inversion variant the image term uses."""

    params: Parameters
    k: float
    ctl: SeriesControl = DEFAULT_CONTROL
    inversion_sign: str = "kelvin"


def make_kernel_context(params: Parameters,
                        ctl: SeriesControl = DEFAULT_CONTROL,
                        inversion_sign: str = "kelvin") -> KernelContext:
    if inversion_sign not in ("kelvin", "paper"):
        raise DomainError(f"unknown inversion_sign {inversion_sign!r}")
    return KernelContext(params=params, k=normalization_k(params), ctl=ctl,
                         inversion_sign=inversion_sign)


def _base_family(params: Parameters):
    al, be = params.alpha, params.beta
    return (1.5 - al + be, 1.0 - al, be, 2.0 - 2.0 * al, 2.0 * be)


def _power_A(params: Parameters) -> float:
    return params.alpha - params.beta - 1.5


def _image_multiplier(params: Parameters) -> float:
    """Exponent of (R/R0) scaling the image term so the two terms cancel
    identically on the sphere: 1 + 2a + 2b."""
    return 1.0 + 2.0 * params.alpha + 2.0 * params.beta


def _raise_status(status: np.ndarray, what: str):
    bad = np.nonzero(status != 0)[0]
    if bad.size:
        err = ConvergenceError(
            f"{what} failed to converge at {bad.size} point(s), "
            f"first batch index {bad[0]}")
        err.index = int(bad[0])
        raise err


def _f2_family_batch(a, b1, b2, c1, c2, xi, eta, ctl: SeriesControl):
    """Two-variable function over arrays xi, eta <= 0.

    Zero arguments collapse to a single Gauss function; both negative go to
    the product series when its ratio is mild and to the slot-1 integral
    continuation when the ratio exceeds the split.
    """
    out = np.ones_like(xi)
    zx = xi == 0.0
    zy = eta == 0.0
    m = zx & ~zy
    if np.any(m):
        v, st = _fast.hyp2f1_batch(a, b2, c2, eta[m], ctl.rel_tol,
                                   ctl.max_terms)
        _raise_status(st, "Gauss series (eta slot)")
        out[m] = v
    m = zy & ~zx
    if np.any(m):
        v, st = _fast.hyp2f1_batch(a, b1, c1, xi[m], ctl.rel_tol,
                                   ctl.max_terms)
        _raise_status(st, "Gauss series (xi slot)")
        out[m] = v
    both = ~zx & ~zy
    if np.any(both):
        u = (xi / (xi - 1.0)) * (eta / (eta - 1.0))
        m = both & (u <= _EULER_SPLIT)
        if np.any(m):
            v, st = _fast.f2_decomp_batch(a, b1, b2, c1, c2, xi[m], eta[m],
                                          ctl.rel_tol, ctl.max_terms)
            _raise_status(st, "product-series continuation")
            out[m] = v
        m = both & (u > _EULER_SPLIT)
        if np.any(m):
            un, wn = _euler_rule(b1, c1, float(np.max(-xi[m])))
            norm = math.exp(ln_gamma(c1) - ln_gamma(b1) - ln_gamma(c1 - b1))
            v, st = _fast.f2_euler_batch(a, b2, c2, xi[m], eta[m], un, wn,
                                         norm, ctl.rel_tol, ctl.max_terms)
            _raise_status(st, "integral continuation")
            out[m] = v
    return out


def _bundle_arrays(pts: np.ndarray, m0: Point3, R: float):
    dx = pts[:, 0] - m0.x
    dy = pts[:, 1] - m0.y
    dz = pts[:, 2] - m0.z
    r2 = dx * dx + dy * dy + dz * dz
    if np.any(r2 < _NEAR_DIAGONAL * R * R):
        raise SingularPointError(
            "evaluation point coincides with the source within tolerance")
    xi = -4.0 * pts[:, 0] * m0.x / r2
    eta = -4.0 * pts[:, 1] * m0.y / r2
    return r2, xi, eta


def q_fundamental_batch(ctx: KernelContext, pts: np.ndarray,
                        m0: Point3) -> np.ndarray:
    """Fundamental solution at each row of pts for a common source m0."""
    params = ctx.params
    a, b1, b2, c1, c2 = _base_family(params)
    A = _power_A(params)
    r2, xi, eta = _bundle_arrays(pts, m0, params.R)
    F0 = _f2_family_batch(a, b1, b2, c1, c2, xi, eta, ctx.ctl)
    with np.errstate(invalid="ignore"):
        # negative-base powers (possible only for diagnostic image points
        # with inversion_sign="paper") propagate as nan rather than raising
        pref = (pts[:, 0] * m0.x) ** (1.0 - 2.0 * params.alpha)
    return ctx.k * r2 ** A * pref * F0


def q_fundamental(ctx: KernelContext, m: Point3, m0: Point3) -> float:
    """Scalar fundamental solution; zero whenever x or x0 is zero."""
    if m.x < 0.0 or m.y < 0.0 or m0.x < 0.0 or m0.y < 0.0:
        raise DomainError("q is defined for x, y >= 0 on both points")
    return float(q_fundamental_batch(ctx, m.as_array()[None, :], m0)[0])


def q_gradient_batch(ctx: KernelContext, pts: np.ndarray, m0: Point3):
    """Exact gradient of q at each row of pts; requires x > 0 there."""
    params = ctx.params
    a, b1, b2, c1, c2 = _base_family(params)
    A = _power_A(params)
    r2, xi, eta = _bundle_arrays(pts, m0, params.R)
    ctl = ctx.ctl
    F0 = _f2_family_batch(a, b1, b2, c1, c2, xi, eta, ctl)
    Fa = _f2_family_batch(a + 1.0, b1, b2, c1, c2, xi, eta, ctl)
    Fb = _f2_family_batch(a + 1.0, b1 + 1.0, b2, c1 + 1.0, c2, xi, eta, ctl)
    Fc = _f2_family_batch(a + 1.0, b1, b2 + 1.0, c1, c2 + 1.0, xi, eta, ctl)
    x = pts[:, 0]
    with np.errstate(invalid="ignore", divide="ignore"):
        kPP = ctx.k * r2 ** A * (x * m0.x) ** (1.0 - 2.0 * params.alpha)
        gx = (kPP / r2) * (2.0 * (x - m0.x) * A * Fa + 2.0 * m0.x * A * Fb) \
            + kPP * (1.0 - 2.0 * params.alpha) / x * F0
        gy = (kPP / r2) * (2.0 * (pts[:, 1] - m0.y) * A * Fa
                           + 2.0 * m0.y * A * Fc)
        gz = (kPP / r2) * (2.0 * (pts[:, 2] - m0.z) * A * Fa)
    return gx, gy, gz


def q_gradient(ctx: KernelContext, m: Point3, m0: Point3):
    if m.x <= 0.0:
        raise DomainError("gradient needs x > 0 (the drift term divides by x)")
    if m.y < 0.0 or m0.x < 0.0 or m0.y < 0.0:
        raise DomainError("q is defined for x, y >= 0 on both points")
    gx, gy, gz = q_gradient_batch(ctx, m.as_array()[None, :], m0)
    return float(gx[0]), float(gy[0]), float(gz[0])


def _image_term(ctx: KernelContext, m0: Point3):
    """Image source and the multiplier applied to its copy of q."""
    image, r0 = invert_point(m0, ctx.params.R, ctx.inversion_sign)
    C = (ctx.params.R / r0) ** _image_multiplier(ctx.params)
    return image, C


def _check_m0_interior(ctx: KernelContext, m0: Point3):
    if domain_membership(m0, ctx.params.R) is not Region.INTERIOR:
        raise DomainError(f"source point {m0} must be strictly interior")


def g_green_batch(ctx: KernelContext, pts: np.ndarray,
                  m0: Point3) -> np.ndarray:
    image, C = _image_term(ctx, m0)
    return q_fundamental_batch(ctx, pts, m0) \
        - C * q_fundamental_batch(ctx, pts, image)


def g_green(ctx: KernelContext, m: Point3, m0: Point3) -> float:
    """Green's function: q minus the scaled image copy, vanishing on the
    sphere and on x = 0."""
    _check_m0_interior(ctx, m0)
    tol = 1e-9 * max(1.0, ctx.params.R)
    if m.x < -tol or m.y < -tol or m.norm() > ctx.params.R + tol:
        raise DomainError(f"evaluation point {m} outside the closed domain")
    return float(g_green_batch(ctx, m.as_array()[None, :], m0)[0])


def dg_dn_sphere_batch(ctx: KernelContext, pts: np.ndarray,
                       m0: Point3) -> np.ndarray:
    image, C = _image_term(ctx, m0)
    gxd, gyd, gzd = q_gradient_batch(ctx, pts, m0)
    gxi, gyi, gzi = q_gradient_batch(ctx, pts, image)
    R = ctx.params.R
    nx, ny, nz = pts[:, 0] / R, pts[:, 1] / R, pts[:, 2] / R
    return (gxd - C * gxi) * nx + (gyd - C * gyi) * ny + (gzd - C * gzi) * nz


def dG_dn_sphere(ctx: KernelContext, m: Point3, m0: Point3) -> float:
    """Outer-normal derivative of the Green's function on the sphere."""
    _check_m0_interior(ctx, m0)
    if abs(m.norm() - ctx.params.R) > 1e-10:
        raise DomainError(f"point {m} is not on the sphere within 1e-10")
    return float(dg_dn_sphere_batch(ctx, m.as_array()[None, :], m0)[0])


def _gauss_batch(a, b, c, args, ctl):
    v, st = _fast.hyp2f1_batch(a, b, c, args, ctl.rel_tol, ctl.max_terms)
    _raise_status(st, "Gauss series (kernel)")
    return v


def g_star_batch(ctx: KernelContext, Y: np.ndarray, Z: np.ndarray,
                 m0: Point3) -> np.ndarray:
    """x=0 trace kernel lim x^2a dG/dx at the points (0, Y, Z).

    The image term reduces to the same closed form with the squared distance
    R^2 - 2(y y0 + z z0) + (y^2+z^2) R0^2/R^2 and unit coefficient; written
    with the true image distance the coefficient is (R/R0)^(3-2a+2b), not
    the 2-4a power a naive transcription would give.
    """
    params = ctx.params
    a, _, b2, _, c2 = _base_family(params)
    A = _power_A(params)
    if ctx.inversion_sign != "kelvin":
        return _g_star_batch_generic(ctx, Y, Z, m0)
    R = params.R
    r0_2 = m0.x ** 2 + (Y - m0.y) ** 2 + (Z - m0.z) ** 2
    rb_2 = R * R - 2.0 * (Y * m0.y + Z * m0.z) \
        + (Y * Y + Z * Z) * (m0.norm() / R) ** 2
    eta_d = -4.0 * Y * m0.y / r0_2
    eta_i = -4.0 * Y * m0.y / rb_2
    hd = _gauss_batch(a, b2, c2, eta_d, ctx.ctl)
    hi = _gauss_batch(a, b2, c2, eta_i, ctx.ctl)
    pref = ctx.k * (1.0 - 2.0 * params.alpha) \
        * m0.x ** (1.0 - 2.0 * params.alpha)
    return pref * (r0_2 ** A * hd - rb_2 ** A * hi)


def _g_star_batch_generic(ctx: KernelContext, Y, Z, m0):
    """Defining-limit form with an explicit image point; used for the
    diagnostic inversion variant (nan-producing on purpose)."""
    params = ctx.params
    a, _, b2, _, c2 = _base_family(params)
    A = _power_A(params)
    image, C = _image_term(ctx, m0)
    coef = ctx.k * (1.0 - 2.0 * params.alpha)
    r0_2 = m0.x ** 2 + (Y - m0.y) ** 2 + (Z - m0.z) ** 2
    ri_2 = image.x ** 2 + (Y - image.y) ** 2 + (Z - image.z) ** 2
    hd = _gauss_batch(a, b2, c2, -4.0 * Y * m0.y / r0_2, ctx.ctl)
    hi = _gauss_batch(a, b2, c2, -4.0 * Y * image.y / ri_2, ctx.ctl)
    with np.errstate(invalid="ignore"):
        td = m0.x ** (1.0 - 2.0 * params.alpha) * r0_2 ** A * hd
        ti = np.float64(image.x) ** (1.0 - 2.0 * params.alpha) \
            * ri_2 ** A * hi
    return coef * (td - C * ti)


def kernel_g_star(ctx: KernelContext, y: float, z: float,
                  m0: Point3) -> float:
    _check_m0_interior(ctx, m0)
    _check_flat_interior(y, z, ctx.params.R, "first flat face")
    return float(g_star_batch(ctx, np.array([float(y)]),
                              np.array([float(z)]), m0)[0])


def _check_flat_interior(u: float, z: float, R: float, name: str):
    if not u > 0.0:
        raise DomainError(f"point not strictly inside the {name}")
    rr = u * u + z * z
    if rr >= R * R * (1.0 - 1e-12):
        raise DomainError(f"point on or outside the rim of the {name}")


def g_star_star_batch(ctx: KernelContext, X: np.ndarray, Z: np.ndarray,
                      m0: Point3) -> np.ndarray:
    """y=0 trace of the Green's function at the points (X, 0, Z), in the
    reduced closed form (the eta slot collapses to a single Gauss factor)."""
    params = ctx.params
    a, b1, _, c1, _ = _base_family(params)
    A = _power_A(params)
    if ctx.inversion_sign != "kelvin":
        pts = np.column_stack([X, np.zeros_like(X), Z])
        return g_green_batch(ctx, pts, m0)
    R = params.R
    r0_2 = (X - m0.x) ** 2 + m0.y ** 2 + (Z - m0.z) ** 2
    rb_2 = R * R - 2.0 * (X * m0.x + Z * m0.z) \
        + (X * X + Z * Z) * (m0.norm() / R) ** 2
    xi_d = -4.0 * X * m0.x / r0_2
    xi_i = -4.0 * X * m0.x / rb_2
    gd = _gauss_batch(a, b1, c1, xi_d, ctx.ctl)
    gi = _gauss_batch(a, b1, c1, xi_i, ctx.ctl)
    pref = ctx.k * (X * m0.x) ** (1.0 - 2.0 * params.alpha)
    return pref * (r0_2 ** A * gd - rb_2 ** A * gi)


def kernel_g_star_star(ctx: KernelContext, x: float, z: float,
                       m0: Point3) -> float:
    _check_m0_interior(ctx, m0)
    _check_flat_interior(x, z, ctx.params.R, "second flat face")
    return float(g_star_star_batch(ctx, np.array([float(x)]),
                                   np.array([float(z)]), m0)[0])


def kernel_g_star_limit(ctx: KernelContext, y: float, z: float,
                        m0: Point3) -> float:
    """Debug path for the x=0 kernel: Richardson limit of x^2a dG/dx on
    x = {1e-3, 5e-4, 2.5e-4} R using the exact gradient.

    The correction series in x is even, so the ladder uses exponents 2, 4.
    """
    _check_m0_interior(ctx, m0)
    R = ctx.params.R
    image, C = _image_term(ctx, m0)
    e = 2.0 * ctx.params.alpha
    vals = []
    for lv in (1e-3 * R, 5e-4 * R, 2.5e-4 * R):
        pts = np.array([[lv, y, z]])
        gxd, _, _ = q_gradient_batch(ctx, pts, m0)
        gxi, _, _ = q_gradient_batch(ctx, pts, image)
        vals.append(lv ** e * float(gxd[0] - C * gxi[0]))
    w1 = (4.0 * vals[1] - vals[0]) / 3.0
    w2 = (4.0 * vals[2] - vals[1]) / 3.0
    return (16.0 * w2 - w1) / 15.0


def g_weighted_neumann_limit(ctx: KernelContext, x: float, z: float,
                             m0: Point3) -> float:
    """Richardson limit of y^2b dG/dy as y -> 0 at fixed (x, z).

    The expansion has exponents 2b, 1+2b in the level, both removed by a
    known-exponent ladder on halving levels.
    """
    _check_m0_interior(ctx, m0)
    R = ctx.params.R
    image, C = _image_term(ctx, m0)
    e = 2.0 * ctx.params.beta
    vals = []
    for lv in (1e-3 * R, 5e-4 * R, 2.5e-4 * R):
        pts = np.array([[x, lv, z]])
        _, gyd, _ = q_gradient_batch(ctx, pts, m0)
        _, gyi, _ = q_gradient_batch(ctx, pts, image)
        vals.append(lv ** e * float(gyd[0] - C * gyi[0]))
    t1 = 2.0 ** (-e)
    w1 = (vals[1] - t1 * vals[0]) / (1.0 - t1)
    w2 = (vals[2] - t1 * vals[1]) / (1.0 - t1)
    t2 = 2.0 ** (-(1.0 + e))
    return (w2 - t2 * w1) / (1.0 - t2)
