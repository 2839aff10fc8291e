"""Compiled numerical cores for the hypergeometric machinery.

Everything here is nopython-compiled, serial, and allocation-light so the
kernel assembly layers can evaluate millions of series without Python
overhead.  Validation and typed errors live in the public wrappers; these
functions report failure through boolean/status return values instead of
raising.  Accumulations use Neumaier compensation so long series keep full
double precision.
"""

import math

import numpy as np
from numba import njit

# Transformed arguments at or above this switch to the two-series expansion
# around the unit argument.
_CONNECTION_SPLIT = 0.75
# The expansion around 1 has Gamma poles when c-a-b is an integer; stay away.
_CAB_GUARD = 0.02
# Fallback term budget when the expansion around 1 is unavailable.
_LONG_BUDGET = 4_000_000


@njit(cache=True)
def _nonpos_int(x):
    n = math.floor(x + 0.5)
    return n <= 0.0 and abs(x - n) < 1e-12


@njit(cache=True)
def _rgamma(x):
    """Reciprocal gamma; exactly zero at the poles."""
    if x > 0.0:
        return math.exp(-math.lgamma(x))
    s = math.sin(math.pi * x)
    if s == 0.0:
        return 0.0
    return s / math.pi * math.exp(math.lgamma(1.0 - x))


@njit(cache=True)
def _gamma_val(x):
    """Gamma for x away from the poles (caller guards)."""
    if x > 0.0:
        return math.exp(math.lgamma(x))
    return math.pi / (math.sin(math.pi * x) * math.exp(math.lgamma(1.0 - x)))


@njit(cache=True)
def _hyp_terminating(a, b, c, x):
    """Finite Gauss series when a is a non-positive integer (within tolerance).

    Exact up to rounding for any real x; the rising factorial of a cuts the
    series after -a terms.
    """
    n = int(-math.floor(a + 0.5))
    s = 1.0
    t = 1.0
    for k in range(n):
        t *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x
        s += t
    return s


@njit(cache=True)
def _hyp_series(a, b, c, x, rel_tol, max_terms):
    """Plain power series for 0 <= x < 1.  Returns (value, terms, converged).

    Stops once three consecutive terms fall below rel_tol relative to the
    partial sum, guarding against accidental early zeros.
    """
    s = 1.0
    comp = 0.0
    t = 1.0
    small = 0
    for k in range(max_terms):
        t *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x
        hi = s + t
        if abs(s) >= abs(t):
            comp += (s - hi) + t
        else:
            comp += (t - hi) + s
        s = hi
        if abs(t) <= rel_tol * abs(s):
            small += 1
            if small >= 3:
                return s + comp, k + 1, True
        else:
            small = 0
    return s + comp, max_terms, False


@njit(cache=True)
def _hyp_connection(a, b, c, x, rel_tol, max_terms):
    """Two-series expansion around x=1 for c-a-b away from integers.

    Reciprocal-gamma coefficients make the terminating degenerations (a, b,
    c-a, or c-b a non-positive integer) exact: the matching coefficient
    vanishes and the surviving series is a polynomial in 1-x.
    """
    cab = c - a - b
    z = 1.0 - x
    p = _gamma_val(c) * _gamma_val(cab) * _rgamma(c - a) * _rgamma(c - b)
    q = _gamma_val(c) * _gamma_val(-cab) * _rgamma(a) * _rgamma(b)
    ok = True
    s1 = 0.0
    if p != 0.0:
        if _nonpos_int(a):
            s1 = _hyp_terminating(a, b, a + b - c + 1.0, z)
        elif _nonpos_int(b):
            s1 = _hyp_terminating(b, a, a + b - c + 1.0, z)
        else:
            s1, _, ok1 = _hyp_series(a, b, a + b - c + 1.0, z, rel_tol, max_terms)
            ok = ok and ok1
    s2 = 0.0
    if q != 0.0:
        if _nonpos_int(c - a):
            s2 = _hyp_terminating(c - a, c - b, cab + 1.0, z)
        elif _nonpos_int(c - b):
            s2 = _hyp_terminating(c - b, c - a, cab + 1.0, z)
        else:
            s2, _, ok2 = _hyp_series(c - a, c - b, cab + 1.0, z, rel_tol, max_terms)
            ok = ok and ok2
    return p * s1 + q * z ** cab * s2, ok


@njit(cache=True)
def _hyp01(a, b, c, x, rel_tol, max_terms):
    """Gauss function on 0 <= x < 1.  Returns (value, converged)."""
    if _nonpos_int(a):
        return _hyp_terminating(a, b, c, x), True
    if _nonpos_int(b):
        return _hyp_terminating(b, a, c, x), True
    if x < _CONNECTION_SPLIT:
        v, _, ok = _hyp_series(a, b, c, x, rel_tol, max_terms)
        return v, ok
    cab = c - a - b
    if abs(cab - math.floor(cab + 0.5)) > _CAB_GUARD:
        return _hyp_connection(a, b, c, x, rel_tol, max_terms)
    budget = int(min(40.0 / (1.0 - x), float(_LONG_BUDGET)))
    if budget < max_terms:
        budget = max_terms
    v, _, ok = _hyp_series(a, b, c, x, rel_tol, budget)
    return v, ok


@njit(cache=True)
def _hyp_any(a, b, c, x, rel_tol, max_terms):
    """Gauss function continued to any x < 1.  Returns (value, converged).

    Negative arguments go through the auto-transformation x -> x/(x-1),
    which lands in [0, 1); from there the unit-argument expansion covers the
    near-diagonal regime.
    """
    if _nonpos_int(a):
        return _hyp_terminating(a, b, c, x), True
    if _nonpos_int(b):
        return _hyp_terminating(b, a, c, x), True
    if x < 0.0:
        w = x / (x - 1.0)
        v, ok = _hyp01(c - a, b, c, w, rel_tol, max_terms)
        return (1.0 - x) ** (-b) * v, ok
    return _hyp01(a, b, c, x, rel_tol, max_terms)


@njit(cache=True)
def hyp2f1_batch(a, b, c, xs, rel_tol, max_terms):
    """Vector of 2F1 values over xs (each < 1).  Returns (values, status)."""
    n = xs.shape[0]
    out = np.empty(n)
    status = np.zeros(n, dtype=np.int64)
    for i in range(n):
        v, ok = _hyp_any(a, b, c, xs[i], rel_tol, max_terms)
        out[i] = v
        if not ok:
            status[i] = 1
    return out, status


@njit(cache=True)
def f2_direct_diag(a, b1, b2, c1, c2, x, y, rel_tol, max_terms):
    """Double series summed by diagonals; |x|+|y| < 1.

    Returns (value, diagonals, converged).  Reference path inside the
    convergence domain; the oracle sums row-major, so the two never share an
    accumulation order.
    """
    buf = np.zeros(max_terms + 2)
    nxt = np.zeros(max_terms + 2)
    buf[0] = 1.0
    s = 1.0
    comp = 0.0
    small = 0
    for d in range(1, max_terms + 1):
        fd = float(d)
        for j in range(d):
            fi = fd - 1.0 - j
            nxt[j] = buf[j] * (a + fd - 1.0) * (b1 + fi) / ((c1 + fi) * (fi + 1.0)) * x
        nxt[d] = buf[d - 1] * (a + fd - 1.0) * (b2 + fd - 1.0) / ((c2 + fd - 1.0) * fd) * y
        dsum = 0.0
        for j in range(d + 1):
            dsum += nxt[j]
            buf[j] = nxt[j]
        hi = s + dsum
        if abs(s) >= abs(dsum):
            comp += (s - hi) + dsum
        else:
            comp += (dsum - hi) + s
        s = hi
        if abs(dsum) <= rel_tol * abs(s):
            small += 1
            if small >= 3:
                return s + comp, d, True
        else:
            small = 0
    return s + comp, max_terms, False


@njit(cache=True)
def f2_decomp(a, b1, b2, c1, c2, x, y, rel_tol, max_terms):
    """Product-series continuation of the double series.

    Valid for x, y <= 0 (any magnitude, with a convergence ratio
    xy/((1-x)(1-y)) < 1) and inside |x|+|y| < 1 for either sign.  Negative
    slots are auto-transformed so every inner Gauss argument lies in [0, 1).
    Returns (value, converged).
    """
    if x < 0.0:
        w1 = x / (x - 1.0)
        rx = -w1
        pref1 = (1.0 - x) ** (-b1)
        tr1 = True
    else:
        w1 = x
        rx = x
        pref1 = 1.0
        tr1 = False
    if y < 0.0:
        w2 = y / (y - 1.0)
        ry = -w2
        pref2 = (1.0 - y) ** (-b2)
        tr2 = True
    else:
        w2 = y
        ry = y
        pref2 = 1.0
        tr2 = False
    e1 = c1 - a
    e2 = c2 - a
    s = 0.0
    comp = 0.0
    d = 1.0
    small = 0
    ok_all = True
    for i in range(max_terms):
        fi = float(i)
        if tr1:
            g1, ok = _hyp01(e1, b1 + fi, c1 + fi, w1, rel_tol, max_terms)
        else:
            g1, ok = _hyp01(a + fi, b1 + fi, c1 + fi, w1, rel_tol, max_terms)
        ok_all = ok_all and ok
        if tr2:
            g2, ok = _hyp01(e2, b2 + fi, c2 + fi, w2, rel_tol, max_terms)
        else:
            g2, ok = _hyp01(a + fi, b2 + fi, c2 + fi, w2, rel_tol, max_terms)
        ok_all = ok_all and ok
        t = d * g1 * g2
        hi = s + t
        if abs(s) >= abs(t):
            comp += (s - hi) + t
        else:
            comp += (t - hi) + s
        s = hi
        if abs(t) <= rel_tol * abs(s):
            small += 1
            if small >= 3:
                return pref1 * pref2 * (s + comp), ok_all
        else:
            small = 0
        d *= (a + fi) * (b1 + fi) * (b2 + fi) / ((c1 + fi) * (c2 + fi) * (fi + 1.0)) * rx * ry
    return pref1 * pref2 * (s + comp), False


@njit(cache=True)
def f2_decomp_batch(a, b1, b2, c1, c2, xs, ys, rel_tol, max_terms):
    n = xs.shape[0]
    out = np.empty(n)
    status = np.zeros(n, dtype=np.int64)
    for i in range(n):
        v, ok = f2_decomp(a, b1, b2, c1, c2, xs[i], ys[i], rel_tol, max_terms)
        out[i] = v
        if not ok:
            status[i] = 1
    return out, status


@njit(cache=True)
def f2_euler_batch(a, b_out, c_out, xs, ys, u, w, norm, rel_tol, max_terms):
    """Single-integral continuation over the first slot for xs, ys <= 0.

    The quadrature (u, w) absorbs the Beta weight of the integrated slot and
    norm is its reciprocal Beta normalization; the integrand is
    (1 - u*x)^(-a) * 2F1(a, b_out; c_out; y / (1 - u*x)).  Used where both
    arguments are so deep in the left half-line that the product series
    stalls.  Returns (values, status).
    """
    n = xs.shape[0]
    m = u.shape[0]
    out = np.empty(n)
    status = np.zeros(n, dtype=np.int64)
    for i in range(n):
        s = 0.0
        comp = 0.0
        for j in range(m):
            t = 1.0 - u[j] * xs[i]
            inner, ok = _hyp_any(a, b_out, c_out, ys[i] / t, rel_tol, max_terms)
            if not ok:
                status[i] = 1
            term = w[j] * t ** (-a) * inner
            hi = s + term
            if abs(s) >= abs(term):
                comp += (s - hi) + term
            else:
                comp += (term - hi) + s
            s = hi
        out[i] = norm * (s + comp)
    return out, status
