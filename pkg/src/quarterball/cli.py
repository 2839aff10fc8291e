"""Command-line front end.

Reads a plain-text key=value config (flags mirror the keys and win), then
runs one of four commands: special-function evaluation, kernel tables over
a point grid, boundary-value solves, or the verification suite.  Tables go
out as CSV with a header row, comma separators, LF line endings, and 17
significant digits, written atomically so a failed run leaves no partial
file.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import checks
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    ExtractionError,
    SingularPointError,
)
from .geometry import Parameters, Point3, Region, domain_membership
from .greens import (
    dG_dn_sphere,
    g_green,
    kernel_g_star,
    kernel_g_star_star,
    make_kernel_context,
)
from .solver import BoundaryData, solve_grid
from .specfun import (
    F2Params,
    SeriesControl,
    appell_f2,
    appell_f2_direct,
    gauss_2f1,
    gauss_2f1_at_one,
)

__all__ = ["RunConfig", "parse_config", "run", "main"]

_COMMANDS = ("specfun", "green", "solve", "verify")
_FUNCTIONS = ("f2", "f2_direct", "2f1", "2f1_at_one")
_DEFAULT_GRID = "x:0.1:0.45:5;y:0.1:0.45:5;z:0:0:1"

_KEYS = ("alpha", "beta", "R", "command", "data", "grid", "resolution",
         "rel_tol", "inversion_sign", "output", "m0", "function", "args",
         "criteria")


@dataclass(frozen=True)
class RunConfig:
    alpha: float
    beta: float
    R: float
    command: str
    data_spec: str = "constant"
    grid_spec: str = _DEFAULT_GRID
    resolution: int = 64
    rel_tol: float = 1e-14
    inversion_sign: str = "kelvin"
    output_path: str = "quarterball_out.csv"
    m0: tuple[float, float, float] = (0.3, 0.3, 0.0)
    function: str = ""
    args: tuple[float, ...] = ()
    criteria: tuple[str, ...] = ()


def _scan(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: malformed line {raw!r}, "
                              "expected key=value")
        key, value = line.split("=", 1)
        key = key.strip()
        if key not in _KEYS:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        pairs[key] = value.strip()
    return pairs


def _num(pairs: dict[str, str], key: str) -> float:
    try:
        return float(pairs[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse number "
                          f"from {pairs[key]!r}") from None


def _floats(key: str, text: str, count: int | None = None):
    parts = [p for p in text.split(",") if p.strip()]
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse numbers "
                          f"from {text!r}") from None
    if count is not None and len(vals) != count:
        raise ConfigError(f"key {key!r}: expected {count} numbers, "
                          f"got {len(vals)}")
    return vals


def _parse_axes(spec: str):
    axes = {}
    for part in spec.split(";"):
        fields = part.strip().split(":")
        if len(fields) != 4 or fields[0] not in ("x", "y", "z"):
            raise ConfigError(f"key 'grid': malformed axis {part!r}, "
                              "expected name:lo:hi:count")
        name = fields[0]
        try:
            lo, hi = float(fields[1]), float(fields[2])
            n = int(fields[3])
        except ValueError:
            raise ConfigError(f"key 'grid': cannot parse axis {part!r}") \
                from None
        if n < 1:
            raise ConfigError(f"key 'grid': axis {name} count must be >= 1")
        axes[name] = np.linspace(lo, hi, n)
    for name in ("x", "y", "z"):
        if name not in axes:
            raise ConfigError(f"key 'grid': missing axis {name!r}")
    return axes


def _grid_points(spec: str):
    axes = _parse_axes(spec)
    return [Point3(float(x), float(y), float(z))
            for x in axes["x"] for y in axes["y"] for z in axes["z"]]


_ARGC = {"f2": 7, "f2_direct": 7, "2f1": 4, "2f1_at_one": 3}


def _build(pairs: dict[str, str]) -> RunConfig:
    for key in ("alpha", "beta", "R", "command"):
        if key not in pairs:
            raise ConfigError(f"missing required key {key!r}")
    alpha = _num(pairs, "alpha")
    beta = _num(pairs, "beta")
    R = _num(pairs, "R")
    try:
        Parameters(alpha=alpha, beta=beta, R=R)
    except DomainError as err:
        raise ConfigError(str(err)) from None
    command = pairs["command"]
    if command not in _COMMANDS:
        raise ConfigError(f"key 'command': unknown command {command!r}")
    resolution = 64
    if "resolution" in pairs:
        resolution = int(_num(pairs, "resolution"))
        if resolution < 8:
            raise ConfigError(
                f"key 'resolution': {resolution} below the minimum of 8")
    rel_tol = _num(pairs, "rel_tol") if "rel_tol" in pairs else 1e-14
    if not rel_tol > 0.0:
        raise ConfigError("key 'rel_tol': must be positive")
    sign = pairs.get("inversion_sign", "kelvin")
    if sign not in ("kelvin", "paper"):
        raise ConfigError(f"key 'inversion_sign': unknown value {sign!r}")
    data = pairs.get("data", "constant")
    if not (data == "constant" or data == "manufactured"
            or data.startswith("manufactured:") or data.startswith("file:")):
        raise ConfigError(f"key 'data': unknown data spec {data!r}")
    if data.startswith("manufactured:"):
        _floats("data", data.split(":", 1)[1], 3)
    grid = pairs.get("grid", _DEFAULT_GRID)
    _parse_axes(grid)
    m0 = _floats("m0", pairs["m0"], 3) if "m0" in pairs else (0.3, 0.3, 0.0)
    function = pairs.get("function", "")
    args: tuple[float, ...] = ()
    if command == "specfun":
        if function not in _FUNCTIONS:
            raise ConfigError(
                f"key 'function': expected one of {_FUNCTIONS}, "
                f"got {function!r}")
        args = _floats("args", pairs.get("args", ""), _ARGC[function])
    criteria = tuple(c.strip() for c in pairs.get("criteria", "").split(",")
                     if c.strip())
    for c in criteria:
        if c not in checks.CRITERIA:
            raise ConfigError(f"key 'criteria': unknown criterion {c!r}")
    return RunConfig(alpha=alpha, beta=beta, R=R, command=command,
                     data_spec=data, grid_spec=grid, resolution=resolution,
                     rel_tol=rel_tol, inversion_sign=sign,
                     output_path=pairs.get("output", "quarterball_out.csv"),
                     m0=m0, function=function, args=args, criteria=criteria)


def parse_config(text: str) -> RunConfig:
    """Validate a key=value document ('#' starts a comment) into a RunConfig."""
    return _build(_scan(text))


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _write_csv(path: str, header: list[str], rows: list[list[float]]):
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _run_specfun(cfg: RunConfig, ctl: SeriesControl) -> int:
    a = cfg.args
    if cfg.function == "f2":
        v = appell_f2(F2Params(*a[:5]), a[5], a[6], ctl)
    elif cfg.function == "f2_direct":
        v = appell_f2_direct(F2Params(*a[:5]), a[5], a[6], ctl)
    elif cfg.function == "2f1":
        v = gauss_2f1(a[0], a[1], a[2], a[3], ctl)
    else:
        v = gauss_2f1_at_one(a[0], a[1], a[2])
    print(_fmt(v))
    return 0


def _run_green(cfg: RunConfig, ctx) -> int:
    R = ctx.params.R
    m0 = Point3(*cfg.m0)
    if domain_membership(m0, R) is not Region.INTERIOR:
        print(f"error: m0 {m0} is not strictly interior", file=sys.stderr)
        return 1
    rows = []
    for pt in _grid_points(cfg.grid_spec):
        if domain_membership(pt, R) is Region.OUTSIDE:
            print(f"warning: skipping point outside the domain: {pt}",
                  file=sys.stderr)
            continue
        try:
            g = g_green(ctx, pt, m0)
        except SingularPointError:
            print(f"warning: skipping point at the source: {pt}",
                  file=sys.stderr)
            continue
        nrm = pt.norm()
        # the normal derivative needs the gradient, hence x > 0 at the
        # radial projection
        if nrm == 0.0 or pt.x * R / nrm <= 0.0:
            dgdn = float("nan")
        else:
            proj = Point3(pt.x * R / nrm, pt.y * R / nrm, pt.z * R / nrm)
            dgdn = dG_dn_sphere(ctx, proj, m0)
        try:
            gs = kernel_g_star(ctx, pt.y, pt.z, m0)
        except DomainError:
            gs = float("nan")
        try:
            gss = kernel_g_star_star(ctx, pt.x, pt.z, m0)
        except DomainError:
            gss = float("nan")
        rows.append([pt.x, pt.y, pt.z, g, dgdn, gs, gss])
    _write_csv(cfg.output_path,
               ["x", "y", "z", "G", "dG_dn", "G_star", "G_star_star"], rows)
    return 0


def _load_file_data(path: str, R: float) -> BoundaryData:
    """Grid-sampled boundary data: CSV rows face,c1,c2,value with face in
    {omega1, omega2, sphere}.  omega1 is keyed by (y, z), omega2 by (x, z),
    sphere by (cos_theta, psi) where the point is
    (R sin(theta) cos(psi), R sin(theta) sin(psi), R cos(theta)).

    Each face needs a full rectangular grid; values in between come from
    bilinear interpolation, so this wrapper is lossy relative to a closed
    form.
    """
    from scipy.interpolate import RegularGridInterpolator

    tables: dict[str, list[tuple[float, float, float]]] = {
        "omega1": [], "omega2": [], "sphere": []}
    with open(path) as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 4 or parts[0] not in tables:
                raise ConfigError(
                    f"data file {path} line {n}: expected "
                    "face,c1,c2,value with face in omega1|omega2|sphere")
            try:
                tables[parts[0]].append(tuple(float(p) for p in parts[1:]))
            except ValueError:
                raise ConfigError(f"data file {path} line {n}: bad number") \
                    from None
    interps = {}
    for face, rows in tables.items():
        if not rows:
            raise ConfigError(f"data file {path}: no rows for face {face}")
        c1 = np.unique([r[0] for r in rows])
        c2 = np.unique([r[1] for r in rows])
        table = np.full((len(c1), len(c2)), np.nan)
        for r in rows:
            table[np.searchsorted(c1, r[0]), np.searchsorted(c2, r[1])] = r[2]
        if np.any(np.isnan(table)):
            raise ConfigError(
                f"data file {path}: face {face} is not a full grid")
        interps[face] = RegularGridInterpolator(
            (c1, c2), table, method="linear", bounds_error=False,
            fill_value=None)

    def tau1(y, z):
        return interps["omega1"](np.column_stack(
            np.broadcast_arrays(np.atleast_1d(y), np.atleast_1d(z))))

    def nu2(x, z):
        return interps["omega2"](np.column_stack(
            np.broadcast_arrays(np.atleast_1d(x), np.atleast_1d(z))))

    def phi(x, y, z):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        z = np.atleast_1d(np.asarray(z, dtype=float))
        ct = np.clip(z / R, -1.0, 1.0)
        psi = np.arctan2(y, x)
        return interps["sphere"](np.column_stack([ct, psi]))

    return BoundaryData(tau1=tau1, nu2=nu2, phi=phi)


def _make_data(cfg: RunConfig, ctx) -> BoundaryData:
    spec = cfg.data_spec
    if spec == "constant":
        return BoundaryData(tau1=lambda y, z: 1.0, nu2=lambda x, z: 0.0,
                            phi=lambda x, y, z: 1.0)
    if spec == "manufactured" or spec.startswith("manufactured:"):
        from .oracle import manufactured_case
        pole = Point3(0.5, 0.5, 1.5)
        if ":" in spec:
            pole = Point3(*_floats("data", spec.split(":", 1)[1], 3))
        data, _ = manufactured_case(ctx, pole)
        return data
    return _load_file_data(spec.split(":", 1)[1], ctx.params.R)


def _run_solve(cfg: RunConfig, ctx) -> int:
    data = _make_data(cfg, ctx)
    R = ctx.params.R
    gap = 1e-3 * R
    kept = []
    for pt in _grid_points(cfg.grid_spec):
        if (domain_membership(pt, R) is not Region.INTERIOR
                or pt.x < gap or pt.y < gap or R - pt.norm() < gap):
            print(f"warning: skipping non-interior or near-face point: {pt}",
                  file=sys.stderr)
            continue
        kept.append(pt)
    reports = solve_grid(ctx, data, kept, cfg.resolution)
    failed = False
    rows = []
    for pt, rep in zip(kept, reports):
        if rep.error is not None:
            print(f"error at {pt}: {rep.error}", file=sys.stderr)
            failed = True
            continue
        f1, f2, fs = rep.face_contributions
        rows.append([pt.x, pt.y, pt.z, rep.value, rep.est_error, f1, f2, fs])
    if failed:
        return 1
    _write_csv(cfg.output_path,
               ["x", "y", "z", "u", "est_error", "face1", "face2", "faceS"],
               rows)
    return 0


def _run_verify(cfg: RunConfig) -> int:
    subset = cfg.criteria if cfg.criteria else None
    results = checks.run_all(inversion_sign=cfg.inversion_sign, subset=subset)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    ctl = SeriesControl(rel_tol=config.rel_tol, max_terms=10_000)
    params = Parameters(alpha=config.alpha, beta=config.beta, R=config.R)
    ctx = make_kernel_context(params, ctl, config.inversion_sign)
    try:
        if config.command == "specfun":
            return _run_specfun(config, ctl)
        if config.command == "green":
            return _run_green(config, ctx)
        if config.command == "solve":
            return _run_solve(config, ctx)
        return _run_verify(config)
    except (DomainError, ConvergenceError, ExtractionError, ConfigError,
            OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="quarterball",
        description="Kernels and boundary-value solves for the singular "
                    "operator on a quarter ball")
    ap.add_argument("--config", help="path to a key=value config file")
    for key in _KEYS:
        ap.add_argument(f"--{key}", dest=f"opt_{key}")
    ns = ap.parse_args(argv)
    try:
        pairs: dict[str, str] = {}
        if ns.config:
            with open(ns.config) as fh:
                pairs = _scan(fh.read())
        for key in _KEYS:
            val = getattr(ns, f"opt_{key}")
            if val is not None:
                pairs[key] = val
        cfg = _build(pairs)
    except OSError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
