"""Scalar special functions: log-gamma, Pochhammer, the Gauss hypergeometric
function over its full real range of use, and the two-variable hypergeometric
series with its analytic continuations.

All main-path arithmetic is 64-bit; higher precision lives only in the oracle
module.  Every operation is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from . import _fast
from .errors import ConvergenceError, DomainError

__all__ = [
    "F2Params",
    "SeriesControl",
    "DEFAULT_CONTROL",
    "ln_gamma",
    "pochhammer",
    "gauss_2f1",
    "gauss_2f1_at_one",
    "appell_f2_direct",
    "appell_f2",
    "appell_f2_partials",
]

# Arguments beyond this are refused; callers wanting the unit value use
# gauss_2f1_at_one.
UNIT_CAP = 1.0 - 1e-8
# Product-series convergence ratio above which the integral continuation
# takes over.
_DECOMP_RATIO_MAX = 0.8


def _is_nonpos_int(x: float) -> bool:
    return x <= 0.5 and abs(x - round(x)) < 1e-12


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for all infinite series.

    A series terminates when the last term contributes less than
    ``rel_tol`` times the partial sum for three consecutive terms.
    """

    rel_tol: float = 1e-14
    max_terms: int = 10_000

    def __post_init__(self):
        if not self.rel_tol > 0.0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be at least 1, got {self.max_terms}")


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class F2Params:
    """The five parameters (a; b1, b2; c1, c2) of a two-variable evaluation."""

    a: float
    b1: float
    b2: float
    c1: float
    c2: float

    def __post_init__(self):
        for name in ("c1", "c2"):
            c = getattr(self, name)
            if _is_nonpos_int(c):
                raise DomainError(f"{name}={c} is a non-positive integer; "
                                  "the series denominators would vanish")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.a, self.b1, self.b2, self.c1, self.c2)


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for positive x."""
    if not x > 0.0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def pochhammer(a: float, n: int) -> float:
    """Rising factorial a(a+1)...(a+n-1) by iterated product.

    Never goes through gamma ratios, so negative non-integer bases are exact.
    """
    if n < 0:
        raise DomainError(f"pochhammer requires n >= 0, got {n}")
    p = 1.0
    for k in range(n):
        p *= a + k
    return p


def gauss_2f1(a: float, b: float, c: float, x: float,
              ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Gauss hypergeometric function for x <= 1.

    Dispatch: terminating cases are summed exactly; negative arguments go
    through the transformation x -> x/(x-1) into [0, 1); arguments below
    0.75 use the direct series and above it the expansion around the unit
    argument (falling back to a long direct summation when c-a-b sits near
    an integer).  Exactly x = 1 delegates to :func:`gauss_2f1_at_one`;
    arguments in (1 - 1e-8, 1) are refused.
    """
    if _is_nonpos_int(c):
        raise DomainError(f"c={c} is a non-positive integer")
    if x > 1.0:
        raise DomainError(f"gauss_2f1 requires x <= 1, got {x}")
    if x == 1.0:
        return gauss_2f1_at_one(a, b, c)
    if x > UNIT_CAP:
        raise DomainError(f"x={x} is inside the unit-argument cap "
                          f"({UNIT_CAP}); use gauss_2f1_at_one for x = 1")
    v, ok = _fast._hyp_any(a, b, c, x, ctl.rel_tol, ctl.max_terms)
    if not ok:
        raise ConvergenceError(
            f"gauss_2f1({a}, {b}, {c}; {x}) did not converge "
            f"within {ctl.max_terms} terms",
            partial=v, terms=ctl.max_terms)
    return v


def gauss_2f1_at_one(a: float, b: float, c: float) -> float:
    """Unit-argument value via the gamma-ratio summation formula.

    Requires c-a-b > 0 together with c-a > 0 and c-b > 0; parameter
    combinations outside that cone are a domain error rather than extended
    by reflection.
    """
    if _is_nonpos_int(c):
        raise DomainError(f"c={c} is a non-positive integer")
    cab = c - a - b
    if not cab > 0.0:
        raise DomainError(f"unit argument requires c-a-b > 0, got {cab}")
    if not (c - a > 0.0 and c - b > 0.0):
        raise DomainError(f"unit argument requires c-a > 0 and c-b > 0, "
                          f"got c-a={c - a}, c-b={c - b}")
    return math.exp(math.lgamma(c) + math.lgamma(cab)
                    - math.lgamma(c - a) - math.lgamma(c - b))


def appell_f2_direct(p: F2Params, x: float, y: float,
                     ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Double series summed by diagonals; the reference inside |x|+|y| < 1."""
    if not abs(x) + abs(y) < 1.0:
        raise DomainError(f"appell_f2_direct requires |x|+|y| < 1, "
                          f"got {abs(x) + abs(y)}")
    a, b1, b2, c1, c2 = p.as_tuple()
    v, d, ok = _fast.f2_direct_diag(a, b1, b2, c1, c2, float(x), float(y),
                                    ctl.rel_tol, ctl.max_terms)
    if not ok:
        raise ConvergenceError(
            f"direct double series did not converge within {d} diagonals",
            partial=v, terms=d)
    return v


def _euler_rule(b: float, c: float, lmax: float,
                n_end: int = 40, n_mid: int = 28):
    """Quadrature absorbing u^(b-1)(1-u)^(c-b-1) on (0,1), resolving the
    boundary layer of (1 - u*x)^(-a) at u ~ 1/|x| for arguments down to -lmax.

    Requires c > b > 0.  For mild arguments a single Jacobi rule suffices;
    beyond that the interval splits at 10/lmax with geometric panels in
    between, Jacobi end rules absorbing each endpoint power exactly.
    """
    if lmax <= 10.0:
        xj, wj = roots_jacobi(n_end, c - b - 1.0, b - 1.0)
        u = (xj + 1.0) / 2.0
        w = wj * 0.5 ** (c - 1.0)
        return u, w
    # cap at the midpoint so the opening panel never overlaps the end rule
    uc = min(10.0 / lmax, 0.5)
    parts = []
    xj, wj = roots_jacobi(n_end, 0.0, b - 1.0)
    u0 = uc * (xj + 1.0) / 2.0
    w0 = wj * (uc / 2.0) ** b * (1.0 - u0) ** (c - b - 1.0)
    parts.append((u0, w0))
    xg, wg = leggauss(n_mid)
    lo = uc
    while lo < 0.5:
        hi = min(lo * math.e, 0.5)
        um = (hi + lo) / 2.0 + (hi - lo) / 2.0 * xg
        wm = (hi - lo) / 2.0 * wg * um ** (b - 1.0) * (1.0 - um) ** (c - b - 1.0)
        parts.append((um, wm))
        lo = hi
    xj, wj = roots_jacobi(n_end, c - b - 1.0, 0.0)
    u1 = (xj + 3.0) / 4.0
    w1 = wj * 0.25 ** (c - b) * u1 ** (b - 1.0)
    parts.append((u1, w1))
    u = np.concatenate([p[0] for p in parts])
    w = np.concatenate([p[1] for p in parts])
    return u, w


def _euler_f2_batch(a, b1, b2, c1, c2, xs, ys, rel_tol, max_terms):
    """Integral continuation for batches with xs, ys <= 0, integrating out
    whichever slot the caller put first.  Returns (values, status)."""
    lmax = max(float(np.max(-xs)), 1e-6)
    u, w = _euler_rule(b1, c1, lmax)
    norm = math.exp(math.lgamma(c1) - math.lgamma(b1) - math.lgamma(c1 - b1))
    return _fast.f2_euler_batch(a, b2, c2, xs, ys, u, w, norm,
                                rel_tol, max_terms)


def appell_f2(p: F2Params, x: float, y: float,
              ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Analytic continuation of the double series.

    Supported regimes: x <= 0 and y <= 0 with any magnitude, or |x|+|y| < 1
    with either sign.  The product-series decomposition covers everything
    except the doubly-deep negative corner, where the single-integral
    continuation takes over.
    """
    a, b1, b2, c1, c2 = p.as_tuple()
    x = float(x)
    y = float(y)
    both_neg = x <= 0.0 and y <= 0.0
    if not both_neg and not abs(x) + abs(y) < 1.0:
        raise DomainError(
            f"arguments ({x}, {y}) outside both supported regimes "
            "(x <= 0 and y <= 0, or |x|+|y| < 1)")
    if both_neg:
        w1 = x / (x - 1.0)
        w2 = y / (y - 1.0)
        if w1 * w2 > _DECOMP_RATIO_MAX:
            # integrate the milder slot; the inner Gauss function handles
            # the deeper one through its own continuation
            if abs(x) <= abs(y):
                bi, ci, args = b1, c1, (a, b1, b2, c1, c2,
                                        np.array([x]), np.array([y]))
            else:
                bi, ci, args = b2, c2, (a, b2, b1, c2, c1,
                                        np.array([y]), np.array([x]))
            if ci > bi > 0.0:
                vals, status = _euler_f2_batch(*args, ctl.rel_tol,
                                               ctl.max_terms)
                if status[0] != 0:
                    raise ConvergenceError(
                        "integral continuation inner series did not converge",
                        partial=float(vals[0]), terms=ctl.max_terms)
                return float(vals[0])
    v, ok = _fast.f2_decomp(a, b1, b2, c1, c2, x, y, ctl.rel_tol, ctl.max_terms)
    if not ok:
        raise ConvergenceError(
            f"product-series continuation did not converge within "
            f"{ctl.max_terms} terms", partial=v, terms=ctl.max_terms)
    return v


def appell_f2_partials(p: F2Params, x: float, y: float,
                       ctl: SeriesControl = DEFAULT_CONTROL) -> tuple[float, float]:
    """Both first partials via the parameter-shift differentiation rule."""
    a, b1, b2, c1, c2 = p.as_tuple()
    px = F2Params(a + 1.0, b1 + 1.0, b2, c1 + 1.0, c2)
    py = F2Params(a + 1.0, b1, b2 + 1.0, c1, c2 + 1.0)
    df_dx = a * b1 / c1 * appell_f2(px, x, y, ctl)
    df_dy = a * b2 / c2 * appell_f2(py, x, y, ctl)
    return df_dx, df_dy
