"""Config-driven command line front end.

Commands
--------
verify      closed-form operators against the numerical oracle on a seeded grid
roots       exact exponent roots of the radial power ansatz for a given rank
families    closed-form solution family table with ODE residuals
sweep       residual sweeps over (m, k, r) or exponent checks
regularity  weight-profile derivative consistency and right-limits at r = 0

Configuration is a single JSON file of nested tables; see the README for
the schema.  Grids are sampled with ``numpy.random.default_rng(seed)``
(PCG64), so reports are bit-reproducible for a fixed config.

Exit codes: 0 all checks passed, 1 comparison failure, 2 configuration
error, 3 domain or numeric error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import families, fields, geometry, operators
from .errors import CapabilityError, ConfigurationError, DomainError, GeometryError
from .oracle import DiffConfig, bilaplacian_numeric, laplace_beltrami_numeric
from .weights import WeightProfile, check_regularity, log_weight, polynomial_weight, preset

EXIT_OK = 0
EXIT_COMPARISON = 1
EXIT_CONFIG = 2
EXIT_DOMAIN = 3


@dataclass
class Report:
    rows: list
    summary: dict


def _write_report(report: Report, path: str | None, fmt: str) -> None:
    if path is None:
        return
    if fmt == "csv":
        with open(path, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(report.rows[0].keys()))
            writer.writeheader()
            writer.writerows(report.rows)
    elif fmt == "records":
        with open(path, "w") as handle:
            for row in report.rows:
                handle.write(json.dumps(row) + "\n")
            handle.write(json.dumps({"summary": report.summary}) + "\n")
    else:
        raise ConfigurationError(f"unknown output format {fmt!r}")


def _print_summary(report: Report) -> None:
    for key, value in report.summary.items():
        print(f"{key}: {value}")


# -- config construction ----------------------------------------------------

_EXPR_NAMES = {"np": np, "exp": np.exp, "log": np.log, "sqrt": np.sqrt,
               "sin": np.sin, "cos": np.cos}


def _expr_entry(expr: str, m: int):
    code = compile(expr, "<metric entry>", "eval")

    def entry(x):
        x = np.asarray(x)
        names = {f"x{i + 1}": x[..., i] for i in range(m)}
        return eval(code, {"__builtins__": {}}, {**_EXPR_NAMES, **names})

    return entry


def _build_chart(table: dict) -> geometry.BaseChart:
    m = int(table["dim"])
    domain = table.get("domain", [[-4.0, 4.0]] * m)
    spec = table.get("metric", "euclidean")
    if spec == "euclidean":
        chart = geometry.euclidean_chart(m)
        return geometry.BaseChart(m, chart.metric, np.asarray(domain, dtype=float),
                                  chart.metric_partials, name="euclidean")
    if isinstance(spec, dict) and "diagonal" in spec:
        entries = [_expr_entry(e, m) for e in spec["diagonal"]]
        if len(entries) != m:
            raise ConfigurationError("diagonal metric needs one expression per dimension")
        return geometry.diagonal_chart(entries, domain)
    raise ConfigurationError(f"unknown base metric spec {spec!r}")


def _build_bundle(table: dict) -> geometry.BundleConfig:
    k = int(table["rank"])
    fm = table.get("fiber_metric", "identity")
    h = np.eye(k) if fm == "identity" else np.asarray(fm, dtype=float)
    conn = table.get("connection", "zero")
    if conn != "zero":
        raise ConfigurationError("only the zero connection is configurable from file")
    return geometry.BundleConfig(k, h)


def _build_weights(table: dict) -> WeightProfile:
    if "preset" in table:
        name = table["preset"]
        if name == "vertical_conformal":
            return preset(name, phi2=table.get("phi2"))
        return preset(name)
    return WeightProfile(
        table.get("name", "custom"),
        polynomial_weight(table.get("phi1", [0.0])),
        polynomial_weight(table.get("phi2", [0.0])),
    )


_NAMED_BASE = {
    "inverse_norm": lambda m: fields.inverse_norm_base(m),
    "norm_sq": lambda m: fields.norm_sq_base(m),
    "coordinate": lambda m: fields.coordinate_base(m),
    "gaussian": lambda m: fields.gaussian_base(m),
    "saddle": lambda m: fields.saddle_base(),
}


def _build_function(table: dict, m: int, k: int):
    kind = table.get("kind")
    if kind == "vertical_lift":
        name = table.get("f")
        if name not in _NAMED_BASE:
            raise ConfigurationError(f"unknown base function {name!r}")
        if name == "saddle" and m != 2:
            raise ConfigurationError("the saddle function needs a 2-dimensional base")
        return kind, _NAMED_BASE[name](m)
    if kind == "radial":
        if "family" in table:
            fam = table["family"]
            params = families.FamilyParams(
                int(fam.get("k", k)), fam["case"], float(fam.get("beta", 1.0)),
                float(fam.get("gamma", 0.0)), float(fam.get("delta", 0.0)),
            )
            return kind, families.radial_family(params)
        return kind, fields.radial_polynomial(table.get("alpha", [0.0, 1.0]))
    raise ConfigurationError(f"unknown function kind {kind!r}")


def _build_diff(table: dict) -> DiffConfig:
    return DiffConfig(
        scheme=table.get("scheme", "central_fd"),
        base_step=float(table.get("base_step", 1e-3)),
        richardson_levels=int(table.get("richardson_levels", 3)),
        nested_step_ratio=float(table.get("nested_step_ratio", 8.0)),
    )


@dataclass
class RunConfig:
    chart: geometry.BaseChart
    bundle: geometry.BundleConfig
    weights: WeightProfile
    kind: str
    function: object
    diff: DiffConfig
    grid: dict
    verify: dict
    output: dict


def _load_raw(path) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path!r}: {exc}") from None


def load_config(path: str) -> RunConfig:
    raw = _load_raw(path)
    for section in ("base", "bundle"):
        if section not in raw:
            raise ConfigurationError(f"config is missing the {section!r} table")
    chart = _build_chart(raw["base"])
    bundle = _build_bundle(raw["bundle"])
    weights = _build_weights(raw.get("weights", {"preset": "sasaki"}))
    kind, function = _build_function(raw.get("function", {}), chart.m, bundle.k)
    return RunConfig(
        chart=chart,
        bundle=bundle,
        weights=weights,
        kind=kind,
        function=function,
        diff=_build_diff(raw.get("diff", {})),
        grid=raw.get("grid", {}),
        verify=raw.get("verify", {}),
        output=raw.get("output", {}),
    )


def _sample_points(rc: RunConfig, seed: int) -> list:
    grid = rc.grid
    rng = np.random.default_rng(seed)
    count = int(grid.get("count", 25))
    if count < 1:
        raise ConfigurationError("grid count must be at least 1")
    r_lo, r_hi = grid.get("r_range", [0.5, 2.0])
    margin = float(grid.get("base_margin", 0.6))
    min_norm = float(grid.get("min_base_norm", 0.0))
    lo = rc.chart.domain[:, 0] + margin
    hi = rc.chart.domain[:, 1] - margin
    points = []
    while len(points) < count:
        x = rng.uniform(lo, hi)
        if min_norm > 0.0 and float(np.linalg.norm(x)) < min_norm:
            continue
        v = rng.standard_normal(rc.bundle.k)
        r = rng.uniform(r_lo, r_hi)
        u = v * np.sqrt(r / float(v @ rc.bundle.h @ v))
        points.append(geometry.TotalPoint(x, u))
    return points


def cmd_verify(args) -> int:
    rc = load_config(args.config)
    seed = args.seed if args.seed is not None else int(rc.grid.get("seed", 0))
    space = geometry.MetricField(rc.chart, rc.bundle, rc.weights)
    tol_lap = args.tolerance or float(rc.verify.get("tolerance", 1e-6))
    tol_bilap = args.tolerance or float(rc.verify.get("bilaplacian_tolerance", 1e-3))
    operators_wanted = rc.verify.get("operators", ["laplacian", "bilaplacian"])

    if rc.kind == "vertical_lift":
        field = fields.VerticalLift(rc.function, rc.chart.m)
        closed_lap = lambda p: operators.laplacian_vertical_lift(space, rc.function, p)
        closed_bilap = lambda p: operators.bilaplacian_vertical_lift(space, rc.function, p)
    else:
        field = fields.RRadial(rc.function, rc.bundle.h, rc.chart.m)
        m, k = rc.chart.m, rc.bundle.k
        closed_lap = lambda p: operators.laplacian_radial(
            rc.function, rc.weights, m, k, geometry.radius(rc.bundle, p))
        closed_bilap = lambda p: operators.bilaplacian_radial(
            rc.function, rc.weights, m, k, geometry.radius(rc.bundle, p))

    started = time.perf_counter()
    rows = []
    for p in _sample_points(rc, seed):
        r = geometry.radius(rc.bundle, p)
        jobs = []
        if "laplacian" in operators_wanted:
            jobs.append(("laplacian", closed_lap(p),
                         laplace_beltrami_numeric(space, field, p, rc.diff), tol_lap))
        if "bilaplacian" in operators_wanted:
            jobs.append(("bilaplacian", closed_bilap(p),
                         bilaplacian_numeric(space, field, p, rc.diff), tol_bilap))
        for op, closed, numeric, tol in jobs:
            abs_err = abs(closed - numeric)
            rel_err = abs_err / (1.0 + abs(numeric))
            rows.append({
                "operator": op,
                "r": r,
                "closed_form": closed,
                "oracle": numeric,
                "abs_err": abs_err,
                "rel_err": rel_err,
                "passed": rel_err <= tol,
            })
    passed = sum(row["passed"] for row in rows)
    report = Report(rows, {
        "rows": len(rows),
        "passed": passed,
        "max_abs_err": max(row["abs_err"] for row in rows),
        "max_rel_err": max(row["rel_err"] for row in rows),
        "wall_time_s": round(time.perf_counter() - started, 3),
    })
    _write_report(report, args.out or rc.output.get("path"),
                  args.format or rc.output.get("format", "csv"))
    _print_summary(report)
    return EXIT_OK if passed == len(rows) else EXIT_COMPARISON


def _format_root(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def cmd_roots(args) -> int:
    roots = families.exponent_roots(args.k)
    if roots.double:
        print(f"{_format_root(roots.roots[0])} (double)")
    else:
        print(", ".join(_format_root(n) for n in roots.roots))
    print(f"case: {roots.parity_case}, discriminant: {roots.discriminant}")
    return EXIT_OK


def cmd_families(args) -> int:
    if args.points < 1:
        raise ConfigurationError("need at least one grid point")
    params = families.FamilyParams(args.k, args.case, args.beta, args.gamma, args.delta)
    alpha = families.radial_family(params)
    w = preset("sasaki")
    rs = np.linspace(args.r_min, args.r_max, args.points)
    rows = []
    worst, scale = 0.0, 0.0
    for r in rs:
        r = float(r)
        residual = families.sasaki_radial_residual(alpha, args.k, r)
        scale = max(scale, abs(float(alpha.eval(2, r))) * args.k * (args.k + 2.0))
        worst = max(worst, abs(residual))
        rows.append({
            "r": r,
            "alpha": float(alpha.eval(0, r)),
            "alpha_prime": float(alpha.eval(1, r)),
            "laplacian": operators.laplacian_radial(alpha, w, args.m, args.k, r),
            "bilaplacian": operators.bilaplacian_radial(alpha, w, args.m, args.k, r),
            "residual": residual,
        })
    report = Report(rows, {
        "rows": len(rows),
        "max_residual": worst,
        "within_tolerance": worst <= 1e-12 * (1.0 + scale),
    })
    _write_report(report, args.out, args.format)
    _print_summary(report)
    return EXIT_OK if report.summary["within_tolerance"] else EXIT_COMPARISON


_AUTO_CASE = {1: "k1", 2: "k2"}


def _auto_case(k: int) -> str:
    return _AUTO_CASE.get(k, "k_odd" if k % 2 else "k_even_a")


def cmd_sweep(args) -> int:
    rc_raw = _load_raw(args.config)
    table = rc_raw.get("sweep", {})
    mode = table.get("mode", "equation_e")
    rows = []
    if mode == "equation_e":
        weights = _build_weights(rc_raw.get("weights", {"preset": "sasaki"}))
        for m in table.get("m_values", [1, 2]):
            for k in table.get("k_values", [1, 2]):
                for r in table.get("r_values", [0.5, 1.0, 2.0]):
                    rows.append({
                        "m": m, "k": k, "r": r,
                        "residual_E": families.equation_E_residual(weights, m, k, r),
                        "residual_E_prime": families.equation_E_prime_residual(weights, m, k, r),
                    })
    elif mode == "sasaki_ode":
        beta = float(table.get("beta", 1.0))
        for k in table.get("k_values", [1, 2, 3]):
            case = table.get("case", "auto")
            case = _auto_case(k) if case == "auto" else case
            alpha = families.radial_family(families.FamilyParams(k, case, beta))
            for r in table.get("r_values", [0.5, 1.0, 2.0]):
                rows.append({
                    "k": k, "case": case, "r": r,
                    "residual": families.sasaki_radial_residual(alpha, k, r),
                })
    elif mode == "exponent_check":
        for k in table.get("k_values", list(range(1, 9))):
            roots = families.exponent_roots(k)
            for n in roots.roots:
                for r in table.get("r_values", [1.0]):
                    rows.append({
                        "k": k, "n": _format_root(n),
                        "quadratic": str(families.euler_quadratic(n, k)),
                        "residual": families.power_ode_residual(n, k, r),
                    })
    else:
        raise ConfigurationError(f"unknown sweep mode {mode!r}")
    report = Report(rows, {"rows": len(rows)})
    _write_report(report, args.out or rc_raw.get("output", {}).get("path"),
                  args.format or rc_raw.get("output", {}).get("format", "csv"))
    _print_summary(report)
    return EXIT_OK


def cmd_regularity(args) -> int:
    if args.preset:
        profile = preset(args.preset, phi2=args.phi2)
    else:
        phi1 = log_weight(args.log_phi1) if args.log_phi1 is not None else polynomial_weight(args.phi1 or [0.0])
        profile = WeightProfile("custom", phi1, polynomial_weight(args.phi2 or [0.0]))
    grid = args.grid or [0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0]
    report = check_regularity(profile, grid)
    for entry in report.entries:
        status = "ok" if entry.ok else "FLAGGED"
        print(f"{entry.weight} order {entry.order}: mismatch {entry.max_rel_mismatch:.3e} "
              f"right-limit {entry.right_limit:.6g} ({'converged' if entry.limit_converged else 'divergent'}) {status}")
    return EXIT_OK if report.ok else EXIT_COMPARISON


def _float_list(text: str):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sphersym", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="closed form vs numerical oracle on a grid")
    p_verify.add_argument("--config", required=True)
    p_verify.add_argument("--out")
    p_verify.add_argument("--format", choices=["csv", "records"])
    p_verify.add_argument("--seed", type=int)
    p_verify.add_argument("--tolerance", type=float)
    p_verify.set_defaults(fn=cmd_verify)

    p_roots = sub.add_parser("roots", help="exact exponent roots for a rank")
    p_roots.add_argument("k", type=int)
    p_roots.set_defaults(fn=cmd_roots)

    p_fam = sub.add_parser("families", help="closed-form family table with residuals")
    p_fam.add_argument("--k", type=int, required=True)
    p_fam.add_argument("--case", required=True, choices=list(families.FAMILY_CASES))
    p_fam.add_argument("--beta", type=float, default=1.0)
    p_fam.add_argument("--gamma", type=float, default=0.0)
    p_fam.add_argument("--delta", type=float, default=0.0)
    p_fam.add_argument("--m", type=int, default=2)
    p_fam.add_argument("--r-min", type=float, default=0.5)
    p_fam.add_argument("--r-max", type=float, default=3.0)
    p_fam.add_argument("--points", type=int, default=11)
    p_fam.add_argument("--out")
    p_fam.add_argument("--format", default="csv", choices=["csv", "records"])
    p_fam.set_defaults(fn=cmd_families)

    p_sweep = sub.add_parser("sweep", help="residual sweeps over parameters")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out")
    p_sweep.add_argument("--format", choices=["csv", "records"])
    p_sweep.set_defaults(fn=cmd_sweep)

    p_reg = sub.add_parser("regularity", help="weight profile consistency report")
    p_reg.add_argument("--preset")
    p_reg.add_argument("--phi1", type=_float_list)
    p_reg.add_argument("--phi2", type=_float_list)
    p_reg.add_argument("--log-phi1", type=float,
                       help="use phi1 = c*log(r) instead of a polynomial")
    p_reg.add_argument("--grid", type=_float_list)
    p_reg.set_defaults(fn=cmd_regularity)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, GeometryError, CapabilityError) as exc:
        print(f"domain/numeric error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
