"""Command-line front end: K curves, order sweeps, field maps, self-test.

    scatter kcurve      --config FILE [--out DIR] [--jobs N] [--seed S]
    scatter sweep-order --config FILE [--out DIR] [--jobs N] [--seed S]
    scatter field       --config FILE [--out DIR] [--jobs N] [--seed S]
    scatter oracle-check

Exit codes: 0 success, 1 numerical/self-test failure, 2 configuration
error.  Sweep rows run on a bounded worker pool; rows are written in a
fixed order so identical configs produce byte-identical CSVs.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .config import load_config
from .errors import ConfigurationError, ScatterError
from .geometry import (
    BoothOval,
    Circle,
    Ellipse,
    Square,
    make_density,
    sc_square_map,
    ellipse_map,
    solve_ellipse_modulus,
)
from .report import (
    ensure_dir,
    render_field,
    render_kcurve,
    render_sweep,
    write_csv,
    write_pgm,
)
from .solver import (
    FieldGrid,
    MultipoleFamily,
    PlaneWave,
    analytic_circle_solution,
    boundary_error,
    evaluate_field,
    solve_collocation,
    solve_least_squares,
)
from .specfun import elliptic_K, wronskian_jy
from .stability import estimate_K, practical_budget, sample_budget


def _pool_map(func, items, jobs):
    workers = jobs or os.cpu_count() or 1
    if workers == 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def _shape_param(s):
    if isinstance(s, Circle):
        return s.radius
    if isinstance(s, Ellipse):
        return s.eccentricity
    if isinstance(s, Square):
        return s.half_side
    if isinstance(s, BoothOval):
        return s.a
    return 0.0


def _meta(cfg, command):
    return {
        "command": command,
        "config_sha256": cfg.sha256,
        "seed": cfg.seed,
    }


# ---------------------------------------------------------------------------
# kcurve
# ---------------------------------------------------------------------------
def run_kcurve(cfg):
    """Rows (shape_param, density, m, K, rank_deficient) over the sweep."""
    k = cfg.wavenumber
    if cfg.eccentricities:
        base = cfg.scatterers[0]
        variants = [
            (e, Ellipse.from_eccentricity(e, base.a, base.center))
            for e in cfg.eccentricities
        ]
        param_name = "eccentricity"
    else:
        if not cfg.scatterers:
            raise ConfigurationError("kcurve: no scatterers configured")
        variants = [(_shape_param(s), s) for s in cfg.scatterers]
        param_name = "shape_param"

    items = [
        (param, s, kind, nh)
        for (param, s) in variants
        for kind in cfg.densities
        for nh in cfg.orders
    ]

    def work(item):
        param, s, kind, nh = item
        fam = MultipoleFamily(tuple(s.center), k, nh)
        dens = make_density(kind, s)
        m = fam.size
        est = estimate_K(
            fam, s, dens,
            quadrature_size=cfg.quadrature_factor * m,
            evaluation_size=cfg.evaluation_factor * cfg.quadrature_factor * m,
        )
        return (param, dens.kind, est.m, est.K, est.rank_deficient)

    rows = _pool_map(work, items, cfg.jobs)
    return param_name, rows


def cmd_kcurve(cfg):
    param_name, rows = run_kcurve(cfg)
    out = ensure_dir(cfg.output_dir)
    columns = [param_name, "density", "m", "K", "rank_deficient"]
    write_csv(os.path.join(out, "kcurve.csv"), columns, rows, _meta(cfg, "kcurve"))
    render_kcurve(os.path.join(out, "kcurve.png"), rows, param_name)
    return 0


# ---------------------------------------------------------------------------
# sweep-order
# ---------------------------------------------------------------------------
def _budget_counts(cfg, per_scatterer_K):
    """Per-scatterer sample counts from the configured budget rule."""
    if cfg.samples.rule == "practical":
        return [[practical_budget(k) for k in per_scatterer_K]]
    if cfg.samples.rule == "theorem":
        return [[
            sample_budget(k, cfg.samples.n_max, cfg.samples.r).n
            for k in per_scatterer_K
        ]]
    if len(per_scatterer_K) != 1:
        raise ConfigurationError(
            "explicit sample counts support a single scatterer in sweep-order"
        )
    return [[v] for v in cfg.samples.values]


def run_sweep_order(cfg):
    """Rows (density, method, N_h, N_s, boundary_error, k_matched, status)."""
    if not cfg.scatterers:
        raise ConfigurationError("sweep-order: no scatterers configured")
    k = cfg.wavenumber
    inc = PlaneWave(cfg.incident_angle, k)
    items = [(kind, nh) for kind in cfg.densities for nh in cfg.orders]

    def work(item):
        kind, nh = item
        fams = [MultipoleFamily(tuple(s.center), k, nh) for s in cfg.scatterers]
        dens = [make_density(kind, s) for s in cfg.scatterers]
        m = sum(f.size for f in fams)
        m_eval = max(cfg.eval_points, 8 * m)
        try:
            per_k = [
                estimate_K(
                    f, s, d,
                    quadrature_size=cfg.quadrature_factor * f.size,
                    evaluation_size=cfg.evaluation_factor * cfg.quadrature_factor * f.size,
                ).K
                for f, s, d in zip(fams, cfg.scatterers, dens)
            ]
            k_total = practical_budget(sum(per_k))
        except ScatterError as exc:
            return [(kind, mth, nh, 0, math.nan, False, type(exc).__name__)
                    for mth in cfg.methods]
        rows = []
        for mth in cfg.methods:
            if mth == "collocation":
                plans = [[f.size for f in fams]]
            else:
                try:
                    plans = _budget_counts(cfg, per_k)
                except ScatterError as exc:
                    rows.append((kind, mth, nh, 0, math.nan, False,
                                 type(exc).__name__))
                    continue
            for counts in plans:
                ns_total = sum(counts)
                matched = abs(ns_total - k_total) <= 1
                try:
                    if mth == "collocation":
                        sol = solve_collocation(fams, list(cfg.scatterers), dens, inc)
                    else:
                        sol = solve_least_squares(
                            fams, list(cfg.scatterers), dens, inc, counts
                        )
                    err = boundary_error(sol, list(cfg.scatterers), inc, m_eval)
                    rows.append((kind, mth, nh, ns_total, err, matched, "ok"))
                except ScatterError as exc:
                    rows.append((kind, mth, nh, ns_total, math.nan, matched,
                                 type(exc).__name__))
        return rows

    nested = _pool_map(work, items, cfg.jobs)
    return [row for group in nested for row in group]


def cmd_sweep_order(cfg):
    rows = run_sweep_order(cfg)
    out = ensure_dir(cfg.output_dir)
    columns = ["density", "method", "order", "samples", "boundary_error",
               "k_matched", "status"]
    write_csv(os.path.join(out, "sweep_order.csv"), columns, rows,
              _meta(cfg, "sweep-order"))
    render_sweep(os.path.join(out, "sweep_order.png"), rows)
    return 0


# ---------------------------------------------------------------------------
# field
# ---------------------------------------------------------------------------
def run_field(cfg):
    if cfg.field is None:
        raise ConfigurationError("field: config needs a \"field\" section")
    if not cfg.scatterers:
        raise ConfigurationError("field: no scatterers configured")
    fs = cfg.field
    k = cfg.wavenumber
    inc = PlaneWave(cfg.incident_angle, k)
    orders = cfg.orders
    if len(orders) == 1:
        orders = orders * len(cfg.scatterers)
    if len(orders) != len(cfg.scatterers):
        raise ConfigurationError("field: need one order (N_h) per scatterer")
    fams = [MultipoleFamily(tuple(s.center), k, nh)
            for s, nh in zip(cfg.scatterers, orders)]
    dens = [make_density(cfg.densities[0], s) for s in cfg.scatterers]
    if fs.method == "collocation":
        sol = solve_collocation(fams, list(cfg.scatterers), dens, inc)
    else:
        counts = list(fs.samples)
        if not counts:
            counts = [
                practical_budget(estimate_K(
                    f, s, d,
                    quadrature_size=cfg.quadrature_factor * f.size,
                    evaluation_size=cfg.evaluation_factor * cfg.quadrature_factor * f.size,
                ).K)
                for f, s, d in zip(fams, cfg.scatterers, dens)
            ]
        if len(counts) != len(cfg.scatterers):
            raise ConfigurationError("field.samples: need one count per scatterer")
        sol = solve_least_squares(fams, list(cfg.scatterers), dens, inc, counts)
    m = sol.size
    berr = boundary_error(sol, list(cfg.scatterers), inc, max(cfg.eval_points, 8 * m))
    grid = FieldGrid(fs.xmin, fs.xmax, fs.ymin, fs.ymax, fs.nx, fs.ny)
    fr = evaluate_field(sol, grid, list(cfg.scatterers), inc,
                        include_incident=(fs.quantity == "total"))
    mag = np.abs(fr.values)
    mag[fr.mask] = 0.0
    return sol, berr, fr, mag


def cmd_field(cfg):
    sol, berr, fr, mag = run_field(cfg)
    out = ensure_dir(cfg.output_dir)
    fs = cfg.field
    write_pgm(os.path.join(out, "field.pgm"), mag, clip=fs.clip)
    render_field(os.path.join(out, "field.png"), mag, fr.grid, clip=fs.clip)
    meta = _meta(cfg, "field")
    meta.update(
        method=sol.method,
        rank=sol.rank,
        residual_norm=sol.residual_norm,
        boundary_error=berr,
        condition=sol.condition,
        quantity=fs.quantity,
        clip="" if fs.clip is None else fs.clip,
    )
    rows = []
    for i, fam in enumerate(sol.families):
        block = sol.family_coefficients(i)
        for n, c in zip(fam.orders, block):
            rows.append((i, n, c.real, c.imag))
    write_csv(os.path.join(out, "coeffs_field.csv"),
              ["family", "n", "re", "im"], rows, meta)
    return 0


# ---------------------------------------------------------------------------
# oracle-check
# ---------------------------------------------------------------------------
def run_oracle_check(perturb=False):
    """Special-function identities plus circle-oracle equivalence.

    Returns (all_ok, report lines).  ``perturb`` injects a small defect
    into the first check, as a negative control for the harness itself.
    """
    checks = []

    worst = 0.0
    for x in (0.05, 0.5, 1.0, 6.0, 10.0, 30.0, 100.0):
        target = 2.0 / (math.pi * x)
        for n in range(0, 151, 10):
            w = wronskian_jy(n, x)
            worst = max(worst, abs(w - target) / target)
    if perturb:
        worst += 1e-6
    checks.append(("wronskian J_n/Y_n identity", worst < 1e-10,
                   f"max rel err {worst:.3e}"))

    nodes, weights = np.polynomial.legendre.leggauss(200)
    worst_k = 0.0
    for kk in np.arange(0.1, 0.95, 0.1):
        theta = 0.25 * math.pi * (nodes + 1.0)
        integrand = 1.0 / np.sqrt(1.0 - (kk * np.sin(theta)) ** 2)
        quad = 0.25 * math.pi * float(weights @ integrand)
        worst_k = max(worst_k, abs(elliptic_K(kk) - quad) / quad)
    checks.append(("AGM elliptic K vs quadrature", worst_k < 1e-12,
                   f"max rel err {worst_k:.3e}"))

    circ = Circle(1.0)
    fam = MultipoleFamily((0.0, 0.0), 6.0, 12)
    inc = PlaneWave(0.0, 6.0)
    dens = make_density("uniform", circ)
    sol = solve_least_squares(fam, circ, dens, inc, 100)
    oracle = analytic_circle_solution(1.0, 6.0, 0.0, 12)
    coef_err = float(np.abs(sol.coefficients - oracle).max())
    checks.append(("circle least-squares vs analytic", coef_err < 1e-8,
                   f"max coeff err {coef_err:.3e}"))

    kmod = solve_ellipse_modulus(2.0)
    z = np.exp(2j * math.pi * np.arange(32) / 32)
    img = np.asarray(ellipse_map(2.0, kmod, z))
    ell_resid = float(np.abs((img.real / 2.0) ** 2 + img.imag**2 - 1.0).max())
    corner = complex(sc_square_map(1.0, 1.0))
    sq_resid = abs(corner - (1 + 1j))
    ok_maps = ell_resid < 1e-8 and sq_resid < 1e-8
    checks.append(("conformal map boundaries", ok_maps,
                   f"ellipse resid {ell_resid:.3e}, corner resid {sq_resid:.3e}"))

    lines = [
        f"{'ok' if ok else 'FAIL':4s} {name}: {detail}"
        for name, ok, detail in checks
    ]
    return all(ok for _, ok, _ in checks), lines


def cmd_oracle_check(perturb=False):
    ok, lines = run_oracle_check(perturb=perturb)
    for line in lines:
        print(line)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------
def _add_config_args(p):
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--out", default=None, help="output directory override")
    p.add_argument("--jobs", type=int, default=None, help="worker pool size")
    p.add_argument("--seed", type=int, default=None, help="seed override")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="scatter",
        description="2D Helmholtz scattering: multipole solves and "
                    "sampling-stability diagnostics",
    )
    parser.add_argument("--version", action="version",
                        version=f"scatter2d {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("kcurve", "estimate K(m) over a shape/density sweep"),
        ("sweep-order", "boundary error against approximation order"),
        ("field", "solve and render a field map"),
    ):
        _add_config_args(sub.add_parser(name, help=help_text))
    oc = sub.add_parser("oracle-check", help="run the numerical self-test suite")
    oc.add_argument("--inject-perturbation", action="store_true",
                    help=argparse.SUPPRESS)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "oracle-check":
            return cmd_oracle_check(perturb=args.inject_perturbation)
        overrides = {"output_dir": args.out, "jobs": args.jobs, "seed": args.seed}
        cfg = load_config(args.config, overrides)
        if args.command == "kcurve":
            return cmd_kcurve(cfg)
        if args.command == "sweep-order":
            return cmd_sweep_order(cfg)
        return cmd_field(cfg)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ScatterError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
