"""Runners for the acceptance criteria.

Each runner draws its samples from a fixed seed, measures one number,
compares it against the pinned bound, and reports a CheckResult.  The
verify command and the acceptance test suite both go through run_all so
the printed report and the test outcomes can never disagree.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import Parameters, Point3, invert_point
from .greens import (
    g_green,
    g_green_batch,
    g_star_batch,
    g_star_star_batch,
    g_weighted_neumann_limit,
    kernel_g_star,
    kernel_g_star_limit,
    make_kernel_context,
)
from .oracle import FluxProbe, f2_bruteforce, fd_residual, manufactured_case, small_sphere_flux
from .solver import BoundaryData, solve_at, solve_grid
from .specfun import (
    F2Params,
    appell_f2,
    appell_f2_partials,
    gauss_2f1,
    gauss_2f1_at_one,
)

__all__ = ["CheckResult", "CRITERIA", "run_criterion", "run_all"]

_PAIRS = ((0.25, 0.25), (0.1, 0.4))

_warmed = False


def _warmup():
    """Touch every compiled kernel path once so elapsed times measure the
    algorithms, not the one-time JIT cost."""
    global _warmed
    if _warmed:
        return
    ctx = make_kernel_context(Parameters(alpha=0.25, beta=0.25, R=1.0))
    pts = np.array([[0.5, 0.4, 0.1], [0.2, 0.3, -0.1]])
    g_green_batch(ctx, pts, Point3(0.3, 0.25, 0.05))
    appell_f2(F2Params(1.5, 0.75, 0.25, 1.5, 0.5), -12.0, -9.0)
    appell_f2(F2Params(1.5, 0.75, 0.25, 1.5, 0.5), 0.3, 0.2)
    _warmed = True


@dataclass(frozen=True)
class CheckResult:
    id: str
    passed: bool
    measured: float
    bound: float
    detail: str = ""

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{self.id} {verdict} measured={self.measured:.6g} "
                f"bound={self.bound:.6g}")


def _sample_simplex(rng, budget):
    s = rng.uniform(0.05, budget)
    f = rng.uniform(0.05, 0.95)
    sx = rng.choice((-1.0, 1.0))
    sy = rng.choice((-1.0, 1.0))
    return sx * s * f, sy * s * (1.0 - f)


def _sample_params(rng):
    vals = rng.uniform(0.1, 2.5, size=5)
    return F2Params(*vals)


def check_f2_decomp() -> CheckResult:
    _warmup()
    rng = np.random.default_rng(101)
    t0 = time.time()
    worst = 0.0
    for _ in range(200):
        p = _sample_params(rng)
        x, y = _sample_simplex(rng, 0.8)
        # reference truncation < 1e-12, two orders inside the bound
        ref = f2_bruteforce(p, x, y, precision_digits=12)
        got = appell_f2(p, x, y)
        worst = max(worst, abs(got - ref) / abs(ref))
    dt = time.time() - t0
    return CheckResult("F2-DECOMP", worst <= 1e-10 and dt < 10.0, worst,
                       1e-10, f"200 parameter sets, {dt:.1f}s (budget 10s)")


def check_f2_adjacent() -> CheckResult:
    _warmup()
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(100):
        a, b1, b2, c1, c2 = _sample_params(rng).as_tuple()
        x, y = _sample_simplex(rng, 0.7)
        f_a = appell_f2(F2Params(a, b1, b2, c1, c2), x, y)
        f_a1 = appell_f2(F2Params(a + 1, b1, b2, c1, c2), x, y)
        f_b1 = appell_f2(F2Params(a + 1, b1 + 1, b2, c1 + 1, c2), x, y)
        f_b2 = appell_f2(F2Params(a + 1, b1, b2 + 1, c1, c2 + 1), x, y)
        res = abs(x * (b1 / c1) * f_b1 + y * (b2 / c2) * f_b2 - f_a1 + f_a)
        worst = max(worst, res)
    return CheckResult("F2-ADJACENT", worst <= 1e-9, worst, 1e-9,
                       "contiguous relation in a, 100 samples")


def check_f2_diff() -> CheckResult:
    _warmup()
    rng = np.random.default_rng(103)
    h = 1e-5
    worst = 0.0
    for _ in range(100):
        p = _sample_params(rng)
        x, y = _sample_simplex(rng, 0.7)
        dx, dy = appell_f2_partials(p, x, y)
        fdx = (appell_f2(p, x + h, y) - appell_f2(p, x - h, y)) / (2 * h)
        fdy = (appell_f2(p, x, y + h) - appell_f2(p, x, y - h)) / (2 * h)
        worst = max(worst,
                    abs(dx - fdx) / (1.0 + abs(fdx)),
                    abs(dy - fdy) / (1.0 + abs(fdy)))
    return CheckResult("F2-DIFF", worst <= 1e-6, worst, 1e-6,
                       "shift-rule partials vs central differences, step 1e-5")


def check_gauss_one() -> CheckResult:
    """Limit toward the right endpoint reached by known-exponent
    elimination over k = 12..16; the raw k=16 gap decays like the
    endpoint exponent and cannot meet the bound on its own."""
    _warmup()
    rng = np.random.default_rng(104)
    worst = 0.0
    for _ in range(50):
        while True:
            a = rng.uniform(0.1, 1.5)
            b = rng.uniform(0.1, 1.5)
            cab = rng.uniform(0.1, 2.0)
            if abs(cab - 1.0) > 0.05 and abs(cab - 2.0) > 0.05:
                break
        c = a + b + cab
        ref = gauss_2f1_at_one(a, b, c)
        vals = [gauss_2f1(a, b, c, 1.0 - 2.0 ** (-k)) for k in range(12, 17)]
        expo = sorted({cab, cab + 1.0, cab + 2.0, 1.0, 2.0, 3.0})[:4]
        for e in expo:
            th = 2.0 ** (-e)
            vals = [(vals[i + 1] - th * vals[i]) / (1.0 - th)
                    for i in range(len(vals) - 1)]
        worst = max(worst, abs(vals[0] - ref))
    return CheckResult("GAUSS-ONE", worst <= 1e-6, worst, 1e-6,
                       "50 sets, c-a-b in (0.1,2) off integers")


def _random_interior(rng, R, clearance):
    while True:
        v = rng.uniform(-R, R, size=3)
        v[0] = abs(v[0])
        v[1] = abs(v[1])
        m = Point3(*v)
        if (m.x > clearance and m.y > clearance
                and m.norm() < R - clearance):
            return m


def check_k_norm() -> CheckResult:
    _warmup()
    t0 = time.time()
    rng = np.random.default_rng(105)
    worst = 0.0
    for al, be in _PAIRS:
        ctx = make_kernel_context(Parameters(alpha=al, beta=be, R=1.0))
        for _ in range(3):
            m0 = _random_interior(rng, 1.0, 0.05)
            f = [small_sphere_flux(ctx, FluxProbe(m0=m0, rho=r, n_theta=48,
                                                  n_psi=96))
                 for r in (0.02, 0.01, 0.005)]
            d21, d32 = f[1] - f[0], f[2] - f[1]
            den = d32 - d21
            ext = f[2] if abs(den) < 1e-14 else f[2] - d32 * d32 / den
            worst = max(worst, abs(ext - 1.0))
    dt = time.time() - t0
    return CheckResult("K-NORM", worst <= 1e-3 and dt < 60.0, worst, 1e-3,
                       f"3 sources x 2 parameter pairs, {dt:.1f}s (budget 60s)")


def check_pde_resid() -> CheckResult:
    """Grid-halving ratio of the 7-point residual on exact solutions.

    An O(h^2)-consistent stencil on an exact solution satisfies
    res(h)/res(h/2) -> 4, so that orientation of the ratio is tested.
    """
    _warmup()
    rng = np.random.default_rng(106)
    h = 1e-2
    worst = 0.0
    for al, be in _PAIRS:
        params = Parameters(alpha=al, beta=be, R=1.0)
        ctx = make_kernel_context(params)
        m0 = _random_interior(rng, 1.0, 0.15)
        image, _ = invert_point(m0, 1.0)
        fields = {
            "q": lambda m, c=ctx, s=m0: _q_scalar(c, m, s),
            "q-image": lambda m, c=ctx, s=image: _q_scalar(c, m, s),
            "G": lambda m, c=ctx, s=m0: g_green(c, m, s),
        }
        for name, u in fields.items():
            done = 0
            while done < 5:
                # stay 0.1 away from the singular faces as well as the
                # pole; the stencil is in its h^2 regime only when h is
                # small against every nearby length scale
                m = _random_interior(rng, 1.0 - 2.5 * h, 0.1)
                if math.dist(m.as_array(), m0.as_array()) < 0.1:
                    continue
                r1 = fd_residual(params, u, m, h)
                r2 = fd_residual(params, u, m, h / 2.0)
                worst = max(worst, abs(r1 / r2 - 4.0))
                done += 1
    return CheckResult("PDE-RESID", worst <= 0.5, worst, 0.5,
                       "res(h)/res(h/2) in [3.5,4.5] for q, its image copy, G")


def _q_scalar(ctx, m, m0):
    from .greens import q_fundamental
    return q_fundamental(ctx, m, m0)


def _sphere_sample(rng, n):
    v = rng.normal(size=(n, 3))
    v[:, 0] = np.abs(v[:, 0])
    v[:, 1] = np.abs(v[:, 1])
    return v / np.linalg.norm(v, axis=1)[:, None]


def check_g_boundary(inversion_sign: str = "kelvin") -> CheckResult:
    _warmup()
    rng = np.random.default_rng(107)
    worst = 0.0
    wn_worst = 0.0
    exact_zero = True
    for al, be in _PAIRS:
        ctx = make_kernel_context(Parameters(alpha=al, beta=be, R=1.0),
                                  inversion_sign=inversion_sign)
        for _ in range(5):
            m0 = _random_interior(rng, 1.0, 0.05)
            sphere = _sphere_sample(rng, 20)
            gs = g_green_batch(ctx, sphere, m0)
            interior = np.array([_random_interior(rng, 1.0, 0.05).as_array()
                                 for _ in range(20)])
            gi = g_green_batch(ctx, interior, m0)
            scale = np.max(np.abs(gi))
            ratio = np.max(np.abs(gs)) / scale
            worst = ratio if np.isnan(ratio) else max(worst, ratio)
            z = g_green(ctx, Point3(0.0, 0.4, 0.2), m0)
            exact_zero = exact_zero and z == 0.0
            wn = g_weighted_neumann_limit(ctx, 0.45, 0.1, m0)
            wn_worst = max(wn_worst, abs(wn))
    ok = (not np.isnan(worst)) and worst <= 1e-8 \
        and exact_zero and wn_worst <= 1e-6
    detail = (f"200 sphere samples; trace at x=0 exactly zero: {exact_zero}; "
              f"weighted y-derivative limit {wn_worst:.2e} (bound 1e-6)")
    if inversion_sign == "kelvin":
        variant = check_g_boundary("paper")
        ok = ok and not variant.passed
        detail += ("; inversion_sign=paper variant measured="
                   f"{variant.measured} -> FAIL (expected, discriminates "
                   "the inversion sign)")
    return CheckResult("G-BOUNDARY", ok, worst, 1e-8, detail)


def check_g_symmetry() -> CheckResult:
    _warmup()
    rng = np.random.default_rng(108)
    worst = 0.0
    for al, be in _PAIRS:
        ctx = make_kernel_context(Parameters(alpha=al, beta=be, R=1.0))
        for _ in range(50):
            a = _random_interior(rng, 1.0, 0.02)
            b = _random_interior(rng, 1.0, 0.02)
            if math.dist(a.as_array(), b.as_array()) < 0.05:
                continue
            g1 = g_green(ctx, a, b)
            g2 = g_green(ctx, b, a)
            worst = max(worst, abs(g1 - g2) / (1.0 + abs(g1)))
    return CheckResult("G-SYMMETRY", worst <= 1e-9, worst, 1e-9,
                       "100 interior pairs, both parameter pairs")


def check_kernel_consistency() -> CheckResult:
    _warmup()
    rng = np.random.default_rng(109)
    worst_ss = 0.0
    worst_s = 0.0
    for al, be in _PAIRS:
        ctx = make_kernel_context(Parameters(alpha=al, beta=be, R=1.0))
        for _ in range(50):
            m0 = _random_interior(rng, 1.0, 0.05)
            x = rng.uniform(0.05, 0.8)
            z = rng.uniform(-0.5, 0.5)
            if x * x + z * z >= 0.98:
                continue
            gss = g_star_star_batch(ctx, np.array([x]), np.array([z]), m0)[0]
            gv = g_green(ctx, Point3(x, 0.0, z), m0)
            worst_ss = max(worst_ss, abs(gss - gv) / (1.0 + abs(gv)))
        for _ in range(10):
            m0 = _random_interior(rng, 1.0, 0.05)
            y = rng.uniform(0.1, 0.7)
            z = rng.uniform(-0.4, 0.4)
            closed = kernel_g_star(ctx, y, z, m0)
            limit = kernel_g_star_limit(ctx, y, z, m0)
            worst_s = max(worst_s, abs(closed - limit))
    ok = worst_ss <= 1e-10 and worst_s <= 1e-6
    return CheckResult(
        "KERNEL-CONSISTENCY", ok, max(worst_ss, worst_s), 1e-6,
        f"y=0 trace gap {worst_ss:.2e} (bound 1e-10); x=0 kernel closed vs "
        f"derivative limit {worst_s:.2e} (bound 1e-6); image-term exponent "
        "3-2a+2b once the trace prefactor is factored out")


def _const_data() -> BoundaryData:
    return BoundaryData(tau1=lambda y, z: 1.0, nu2=lambda x, z: 0.0,
                        phi=lambda x, y, z: 1.0)


def check_solve_const() -> CheckResult:
    _warmup()
    t0 = time.time()
    worst = 0.0
    axis = (0.15, 0.30, 0.45)
    zax = (-0.3, 0.0, 0.3)
    pts = [Point3(x, y, z) for x in axis for y in axis for z in zax]
    for al, be in _PAIRS:
        ctx = make_kernel_context(Parameters(alpha=al, beta=be, R=1.0))
        reps = solve_grid(ctx, _const_data(), pts, 64)
        for r in reps:
            if r.error is not None:
                return CheckResult("SOLVE-CONST", False, float("nan"), 1e-3,
                                   f"solver error: {r.error}")
            worst = max(worst, abs(r.value - 1.0))
    dt = time.time() - t0
    return CheckResult("SOLVE-CONST", worst <= 1e-3 and dt < 120.0, worst,
                       1e-3, f"3x3x3 grid, both pairs, {dt:.1f}s (budget 120s)")


def check_solve_manufactured() -> CheckResult:
    _warmup()
    ctx = make_kernel_context(Parameters(alpha=0.25, beta=0.25, R=1.0))
    data, exact = manufactured_case(ctx, Point3(0.5, 0.5, 1.5))
    m0 = Point3(0.3, 0.3, 0.0)
    ref = exact(m0)
    errs = []
    for res in (16, 32, 64, 128):
        rep = solve_at(ctx, data, m0, res)
        errs.append(abs(rep.value - ref) / abs(ref))
    monotone = all(errs[i + 1] < errs[i] for i in range(3))
    ok = errs[2] <= 1e-3 and monotone
    return CheckResult(
        "SOLVE-MANUFACTURED", ok, errs[2], 1e-3,
        "relative errors over resolutions 16/32/64/128: "
        + ", ".join(f"{e:.2e}" for e in errs)
        + f"; monotone: {monotone}")


def check_determinism() -> CheckResult:
    from . import cli

    text = ("alpha=0.25\nbeta=0.25\nR=1.0\ncommand=solve\ndata=constant\n"
            "resolution=16\ngrid=x:0.2:0.4:2;y:0.2:0.4:2;z:0:0:1\n")
    blobs = []
    with tempfile.TemporaryDirectory() as tmp:
        for i in range(2):
            path = os.path.join(tmp, f"run{i}.csv")
            cfg = cli.parse_config(text + f"output={path}\n")
            status = cli.run(cfg)
            if status != 0:
                return CheckResult("DETERMINISM", False, float("nan"), 0.0,
                                   f"solve run exited with {status}")
            with open(path, "rb") as fh:
                blobs.append(fh.read())
    differ = float(blobs[0] != blobs[1])
    return CheckResult("DETERMINISM", differ == 0.0, differ, 0.0,
                       "two identical solve runs compared byte for byte")


CRITERIA = {
    "F2-DECOMP": check_f2_decomp,
    "F2-ADJACENT": check_f2_adjacent,
    "F2-DIFF": check_f2_diff,
    "GAUSS-ONE": check_gauss_one,
    "K-NORM": check_k_norm,
    "PDE-RESID": check_pde_resid,
    "G-BOUNDARY": check_g_boundary,
    "G-SYMMETRY": check_g_symmetry,
    "KERNEL-CONSISTENCY": check_kernel_consistency,
    "SOLVE-CONST": check_solve_const,
    "SOLVE-MANUFACTURED": check_solve_manufactured,
    "DETERMINISM": check_determinism,
}


def run_criterion(name: str, inversion_sign: str = "kelvin") -> CheckResult:
    if name not in CRITERIA:
        raise DomainError(f"unknown criterion {name!r}")
    if name == "G-BOUNDARY":
        return check_g_boundary(inversion_sign)
    return CRITERIA[name]()


def run_all(inversion_sign: str = "kelvin", subset=None):
    names = list(CRITERIA) if subset is None else list(subset)
    return [run_criterion(n, inversion_sign) for n in names]
