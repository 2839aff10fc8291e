"""Slow ground-truth implementations: arbitrary-precision reference sums for
the hypergeometric functions, a finite-difference residual checker for the
singular operator, the small-sphere flux probe that pins the kernel
normalization, and the exterior-pole manufactured solution builder.

Nothing here shares summation code with the fast path; mpmath supplies the
wide accumulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError
from .geometry import Parameters, Point3
from .specfun import F2Params

__all__ = [
    "FluxProbe",
    "f2_bruteforce",
    "hyp2f1_series",
    "fd_residual",
    "small_sphere_flux",
    "manufactured_case",
]


@dataclass(frozen=True)
class FluxProbe:
    """Small sphere of radius rho around m0 with an angular product rule."""

    m0: Point3
    rho: float
    n_theta: int = 48
    n_psi: int = 96

    def __post_init__(self):
        if not self.rho > 0.0:
            raise DomainError(f"rho={self.rho} must be positive")
        if self.n_theta < 2 or self.n_psi < 4:
            raise DomainError("angular resolution too low")


def hyp2f1_series(a: float, b: float, c: float, x: float,
                  precision_digits: int = 30) -> float:
    """Plain Gauss series summed term by term in mpmath; requires |x| < 1."""
    if not abs(x) < 1.0:
        raise DomainError(f"series requires |x| < 1, got {x}")
    with mp.workdps(precision_digits + 15):
        s = mp.mpf(1)
        t = mp.mpf(1)
        ax, bx, cx, xx = (mp.mpf(v) for v in (a, b, c, x))
        thresh = mp.mpf(10) ** (-precision_digits - 8)
        tail = 0
        for n in range(2_000_000):
            t *= (ax + n) * (bx + n) / ((cx + n) * (n + 1)) * xx
            s += t
            if abs(t) < abs(s) * thresh:
                tail += 1
                if tail >= 3:
                    return float(s)
            else:
                tail = 0
        raise DomainError("series did not converge at this precision")


def _f2_rows(a, b1, b2, c1, c2, x, y, digits):
    """Row-major double sum; valid on |x|+|y| < 1."""
    total = mp.mpf(0)
    row_coef = mp.mpf(1)    # (a)_i (b1)_i / ((c1)_i i!) x^i
    small_rows = 0
    inner_thresh = mp.mpf(10) ** (-digits - 10)
    row_thresh = mp.mpf(10) ** (-digits - 8)
    for i in range(100_000):
        term = mp.mpf(1)
        row = term
        for j in range(100_000):
            term *= (a + i + j) * (b2 + j) / ((c2 + j) * (j + 1)) * y
            row += term
            if abs(term) < (abs(row) + 1) * inner_thresh:
                break
        contrib = row_coef * row
        total += contrib
        if abs(contrib) < (abs(total) + 1) * row_thresh:
            small_rows += 1
            if small_rows >= 3:
                return total
        else:
            small_rows = 0
        row_coef *= (a + i) * (b1 + i) / ((c1 + i) * (i + 1)) * x
    raise DomainError("double series did not converge")


def _f2_negative(a, b1, b2, c1, c2, x, y, digits):
    """Product-series continuation with mpmath's own 2F1 for the factors;
    converges for x, y <= 0 at rate (xy/((1-x)(1-y)))^i."""
    u = (x / (x - 1)) * (y / (y - 1))
    if not u < 1:
        raise DomainError("continuation ratio not below one")
    total = mp.mpf(0)
    D = mp.mpf(1)
    small = 0
    budget = 200_000
    thresh = mp.mpf(10) ** (-digits - 8)
    for i in range(budget):
        g1 = mp.hyp2f1(a + i, b1 + i, c1 + i, x)
        g2 = mp.hyp2f1(a + i, b2 + i, c2 + i, y)
        term = D * (x * y) ** i * g1 * g2
        total += term
        if abs(term) < (abs(total) + 1) * thresh:
            small += 1
            if small >= 3:
                return total
        else:
            small = 0
        D *= (a + i) * (b1 + i) * (b2 + i) / ((c1 + i) * (c2 + i) * (i + 1))
    raise DomainError("continuation did not converge within budget")


def f2_bruteforce(p: F2Params, x: float, y: float,
                  precision_digits: int = 30) -> float:
    """Reference two-variable series value, error below 10^-precision_digits.

    Inside |x|+|y| < 1 the double sum is taken row-major; for x, y <= 0 the
    decomposed series of 2F1 products is summed term by term.  Both paths
    run entirely in mpmath.
    """
    if precision_digits < 1:
        raise DomainError("precision_digits must be positive")
    with mp.workdps(precision_digits + 25):
        a, b1, b2, c1, c2 = (mp.mpf(v) for v in p.as_tuple())
        xx, yy = mp.mpf(x), mp.mpf(y)
        if abs(x) + abs(y) < 1.0:
            v = _f2_rows(a, b1, b2, c1, c2, xx, yy, precision_digits)
        elif x <= 0.0 and y <= 0.0:
            v = _f2_negative(a, b1, b2, c1, c2, xx, yy, precision_digits)
        else:
            raise DomainError(
                f"arguments ({x}, {y}) outside both reference regimes")
        return float(v)


def fd_residual(params: Parameters, u, m: Point3, h: float) -> float:
    """Central second-difference discretization of the operator
    u_xx + u_yy + u_zz + (2a/x) u_x + (2b/y) u_y at m.

    The 7-point stencil must stay inside the open quarter ball.
    """
    if not h > 0.0:
        raise DomainError(f"h={h} must be positive")
    if not (m.x > 2.0 * h and m.y > 2.0 * h):
        raise DomainError("point too close to a singular plane for the stencil")
    x, y, z = m.x, m.y, m.z
    stencil = [Point3(x + h, y, z), Point3(x - h, y, z),
               Point3(x, y + h, z), Point3(x, y - h, z),
               Point3(x, y, z + h), Point3(x, y, z - h)]
    for pt in stencil:
        if pt.norm() >= params.R:
            raise DomainError("stencil leaves the quarter ball")
    u0 = u(m)
    uxp, uxm, uyp, uym, uzp, uzm = (u(pt) for pt in stencil)
    h2 = h * h
    lap = (uxp + uxm + uyp + uym + uzp + uzm - 6.0 * u0) / h2
    drift_x = (2.0 * params.alpha / x) * (uxp - uxm) / (2.0 * h)
    drift_y = (2.0 * params.beta / y) * (uyp - uym) / (2.0 * h)
    return lap + drift_x + drift_y


def small_sphere_flux(ctx, probe: FluxProbe) -> float:
    """Weighted flux of the fundamental solution through the sphere of
    radius rho about m0, inward normal; tends to 1 as rho -> 0.

    The excised sphere must stay inside the open quarter ball.
    """
    from .greens import q_gradient_batch

    m0 = probe.m0
    R = ctx.params.R
    clearance = min(m0.x, m0.y, R - m0.norm())
    if not probe.rho < clearance:
        raise DomainError(
            f"rho={probe.rho} does not clear the boundary ({clearance})")
    ct, wt = leggauss(probe.n_theta)
    psi = (np.arange(probe.n_psi) + 0.5) * (2.0 * math.pi / probe.n_psi)
    wpsi = 2.0 * math.pi / probe.n_psi
    st = np.sqrt(1.0 - ct * ct)
    nx = np.outer(st, np.cos(psi)).ravel()
    ny = np.outer(st, np.sin(psi)).ravel()
    nz = np.outer(ct, np.ones_like(psi)).ravel()
    W = np.outer(wt, np.full(probe.n_psi, wpsi)).ravel()
    pts = np.column_stack([m0.x + probe.rho * nx,
                           m0.y + probe.rho * ny,
                           m0.z + probe.rho * nz])
    gx, gy, gz = q_gradient_batch(ctx, pts, m0)
    dq_dn = -(gx * nx + gy * ny + gz * nz)
    weight = pts[:, 0] ** (2.0 * ctx.params.alpha) \
        * pts[:, 1] ** (2.0 * ctx.params.beta)
    return float(np.sum(W * weight * dq_dn) * probe.rho ** 2)


def manufactured_case(ctx, pole: Point3):
    """Boundary data sampled from the exact field q(., pole) with the pole
    outside the closed quarter ball.

    Returns (data, exact).  The x=0 trace is identically zero, the weighted
    y-derivative limit is extracted numerically, and the rim mismatch between
    the two Dirichlet data is sampled and stored on the report field rather
    than assumed away.
    """
    from .greens import q_fundamental, q_fundamental_batch
    from .solver import BoundaryData, weighted_neumann_levels

    R = ctx.params.R
    if not (pole.x > 0.0 and pole.y > 0.0):
        raise DomainError("pole must have positive x and y")
    if not pole.norm() > R:
        raise DomainError("pole must lie strictly outside the closed ball")

    def exact(m: Point3) -> float:
        return q_fundamental(ctx, m, pole)

    def tau1(y, z):
        return np.zeros_like(np.broadcast_arrays(np.asarray(y, float),
                                                 np.asarray(z, float))[0])

    def nu2(x, z):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        z = np.atleast_1d(np.asarray(z, dtype=float))
        levels = weighted_neumann_levels()
        vals = np.empty((len(levels), x.shape[0]))
        for i, lv in enumerate(levels):
            pts = np.column_stack([x, np.full_like(x, lv), z])
            vals[i] = q_fundamental_batch(ctx, pts, pole)
        p = 1.0 - 2.0 * ctx.params.beta
        e1, e2, e3 = (p * (vals[i] - vals[i + 1])
                      / (levels[i] ** p - levels[i + 1] ** p)
                      for i in range(3))
        d21 = e2 - e1
        d32 = e3 - e2
        denom = d32 - d21
        safe = np.where(np.abs(denom) > 1e-300, denom, 1.0)
        out = np.where(np.abs(denom) > 1e-300, e3 - d32 * d32 / safe, e3)
        return out if out.shape[0] > 1 else float(out[0])

    def phi(x, y, z):
        pts = np.column_stack([np.atleast_1d(np.asarray(x, float)),
                               np.atleast_1d(np.asarray(y, float)),
                               np.atleast_1d(np.asarray(z, float))])
        v = q_fundamental_batch(ctx, pts, pole)
        return v if v.shape[0] > 1 else float(v[0])

    t = np.linspace(-math.pi / 2, math.pi / 2, 41)[1:-1]
    rim_tau = np.asarray(tau1(R * np.cos(t), R * np.sin(t)), dtype=float)
    rim_phi = np.asarray(phi(np.zeros_like(t), R * np.cos(t),
                             R * np.sin(t)), dtype=float)
    mismatch = float(np.max(np.abs(rim_tau - rim_phi)))
    data = BoundaryData(tau1=tau1, nu2=nu2, phi=phi, rim_mismatch=mismatch)
    return data, exact
