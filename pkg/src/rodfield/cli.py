"""Command-line front end.

Subcommands: fieldmap, compare, validate, invert, forward, asymptotic.
Outputs are CSV/JSON data files; plotting is left to external tools.
Exit codes: 0 success, 1 validation/convergence failure, 2 usage/config
errors.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import sys
import time

import numpy as np

from .asymptotics import AsymptoticModel, asym_grad_linear, asym_u_general, asym_u_linear
from .config import ConfigError, RunConfig, load_config
from .geometry import RodSpec, ValidationError, signed_distance
from .inverse import (IdentifiabilityError, dump_fit_json, dump_measurements_csv,
                      fit_rod, load_measurements_csv, sensor_circle,
                      simulate_measurements)
from .potentials import SolverError, dump_density_csv
from .solver import (dump_field_csv, eval_grad_u, eval_u, lambda_of_sigma,
                     solve_forward)
from .validate import run_validation

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _thread_limit(n: int | None):
    if n is None:
        return contextlib.nullcontext()
    try:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=n)
    except ImportError:
        return contextlib.nullcontext()


def _asym_model(cfg: RunConfig) -> AsymptoticModel:
    rod = cfg.rod
    return AsymptoticModel(L=rod.L, delta=rod.delta,
                           lam=lambda_of_sigma(rod.sigma0),
                           center=rod.center, angle=rod.angle,
                           background=cfg.background)


def _grid_or_error(cfg: RunConfig) -> np.ndarray:
    if cfg.grid is None:
        raise ConfigError("this command needs a 'grid' block")
    return cfg.grid.points()


def _write_fieldmap(path: str, pts, du, dg, near) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x1", "x2", "du", "dgrad", "near_flag"])
        for i in range(len(pts)):
            w.writerow([repr(float(pts[i, 0])), repr(float(pts[i, 1])), repr(float(du[i])),
                        repr(float(dg[i])), int(near[i])])


def fieldmap_arrays(cfg: RunConfig, model: str, pts: np.ndarray):
    """Perturbation magnitude |u - H| and |grad u - grad H| on points."""
    if model == "bem":
        sol = solve_forward(cfg.rod, cfg.background,
                            n_cap=cfg.n_cap, n_facade=cfg.n_facade)
        u, near = eval_u(sol, pts)
        g, _ = eval_grad_u(sol, pts)
        du = np.abs(u - cfg.background.value(pts))
        dg = np.linalg.norm(g - cfg.background.grad(pts), axis=1)
    elif model == "asymptotic":
        amodel = _asym_model(cfg)
        if cfg.background.is_linear:
            u = asym_u_linear(amodel, pts)
            g = asym_grad_linear(amodel, pts)
        else:
            u = asym_u_general(amodel, pts, n_quad=cfg.n_quad)
            h = 1e-5
            g = np.stack([
                (asym_u_general(amodel, pts + [h, 0.0], n_quad=cfg.n_quad)
                 - asym_u_general(amodel, pts - [h, 0.0], n_quad=cfg.n_quad)) / (2 * h),
                (asym_u_general(amodel, pts + [0.0, h], n_quad=cfg.n_quad)
                 - asym_u_general(amodel, pts - [0.0, h], n_quad=cfg.n_quad)) / (2 * h),
            ], axis=1)
        du = np.abs(u - cfg.background.value(pts))
        dg = np.linalg.norm(g - cfg.background.grad(pts), axis=1)
        near = signed_distance(cfg.rod, pts) < cfg.rod.delta * 0.1
    else:
        raise ConfigError(f"unknown model {model!r}")
    return du, dg, near


def cmd_fieldmap(args) -> int:
    cfg = load_config(args.config)
    pts = _grid_or_error(cfg)
    du, dg, near = fieldmap_arrays(cfg, args.model, pts)
    _write_fieldmap(args.out, pts, du, dg, near)
    print(f"fieldmap: wrote {len(pts)} rows to {args.out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    if not cfg.sweep_deltas:
        raise ConfigError("compare needs a 'sweep' block with a deltas list")
    if cfg.rod.L == 0.0:
        raise ConfigError("compare: L = 0 (disc) has no rod asymptotic model")
    # Probe circle offset from the rod center: on the axis the leading
    # error term has a sign change that masks the delta decay.
    probe_center = (cfg.rod.center[0] + cfg.sweep_probe_offset[0],
                    cfg.rod.center[1] + cfg.sweep_probe_offset[1])
    probe = sensor_circle(probe_center, cfg.sweep_probe_radius,
                          cfg.sweep_probe_count)
    rows = []
    for delta in cfg.sweep_deltas:
        rod = RodSpec(L=cfg.rod.L, delta=delta, center=cfg.rod.center,
                      angle=cfg.rod.angle, sigma0=cfg.rod.sigma0)
        t0 = time.perf_counter()
        sol = solve_forward(rod, cfg.background, n_cap=cfg.n_cap,
                            n_facade=cfg.n_facade)
        u_bem, _ = eval_u(sol, probe)
        model = AsymptoticModel(L=rod.L, delta=delta,
                                lam=lambda_of_sigma(rod.sigma0),
                                center=rod.center, angle=rod.angle,
                                background=cfg.background)
        if cfg.background.is_linear:
            u_asym = asym_u_linear(model, probe)
        else:
            u_asym = asym_u_general(model, probe, n_quad=cfg.n_quad)
        err = float(np.abs(u_bem - u_asym).max())
        rows.append({
            "delta": delta,
            "max_error": err,
            "error_over_delta": err / delta,
            "mesh_nodes": len(sol.mesh),
            "wall_seconds": time.perf_counter() - t0,
        })
    report = {"probe_radius": cfg.sweep_probe_radius,
              "probe_center": list(probe_center), "rows": rows}
    with open(args.out, "w") as f:
        json.dump(report, f, indent=2)
        f.write("\n")
    for r in rows:
        print(f"delta={r['delta']:g}  E={r['max_error']:.3e}  "
              f"E/delta={r['error_over_delta']:.3e}  "
              f"n={r['mesh_nodes']}  {r['wall_seconds']:.2f}s")
    return EXIT_OK


def cmd_validate(args) -> int:
    checks = run_validation(verbose=args.verbose)
    for c in checks:
        print(c.line(verbose=args.verbose))
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_FAILURE


def cmd_invert(args) -> int:
    cfg = load_config(args.config)
    if cfg.sensors is None:
        raise ConfigError("invert needs a 'sensors' block")

    if args.synthesize:
        points = sensor_circle(cfg.sensors.center, cfg.sensors.radius,
                               cfg.sensors.count)
        data = simulate_measurements(cfg.rod, cfg.background, points,
                                     noise_rms=args.noise, source=args.model
                                     if args.model != "asymptotic" else "asymptotic",
                                     seed=args.seed, n_cap=cfg.n_cap,
                                     n_facade=cfg.n_facade)
        if args.data:
            dump_measurements_csv(data, args.data)
    else:
        if args.data is None:
            print("invert: provide a data CSV with --data or use --synthesize",
                  file=sys.stderr)
            return EXIT_USAGE
        try:
            data = load_measurements_csv(args.data, cfg.background)
        except FileNotFoundError:
            print(f"invert: data file not found: {args.data}\n"
                  "hint: pass --synthesize to generate it first", file=sys.stderr)
            return EXIT_USAGE

    result = fit_rod(data)
    dump_fit_json(result, args.out)
    d = result.to_dict()
    print(json.dumps(d, indent=2))
    return EXIT_OK if result.converged else EXIT_FAILURE


def cmd_forward(args) -> int:
    cfg = load_config(args.config)
    pts = _grid_or_error(cfg)
    sol = solve_forward(cfg.rod, cfg.background, n_cap=cfg.n_cap,
                        n_facade=cfg.n_facade)
    dump_field_csv(sol, pts, args.out)
    if args.density:
        dump_density_csv(sol.phi, args.density)
    print(f"forward: wrote {len(pts)} rows to {args.out}")
    return EXIT_OK


def cmd_asymptotic(args) -> int:
    cfg = load_config(args.config)
    pts = _grid_or_error(cfg)
    model = _asym_model(cfg)
    if cfg.background.is_linear:
        u = asym_u_linear(model, pts)
        g = asym_grad_linear(model, pts)
    else:
        u = asym_u_general(model, pts, n_quad=cfg.n_quad)
        g = np.zeros_like(pts)
    near = signed_distance(cfg.rod, pts) < cfg.rod.delta * 0.1
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x1", "x2", "u", "ux", "uy", "near_boundary_flag"])
        for i in range(len(pts)):
            w.writerow([repr(float(pts[i, 0])), repr(float(pts[i, 1])), repr(float(u[i])),
                        repr(float(g[i, 0])), repr(float(g[i, 1])),
                        int(near[i])])
    print(f"asymptotic: wrote {len(pts)} rows to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rodfield",
                                description="Rod-inclusion conductivity tools")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.add_argument("--threads", type=int, default=None,
                   help="cap BLAS thread count for reproducible runs")
    sub = p.add_subparsers(dest="command", required=True)

    fm = sub.add_parser("fieldmap", help="perturbed field magnitudes on a grid")
    fm.add_argument("--config", required=True)
    fm.add_argument("--model", choices=["bem", "asymptotic"], default="bem")
    fm.add_argument("--out", default="fieldmap.csv")
    fm.set_defaults(func=cmd_fieldmap)

    cp = sub.add_parser("compare", help="BEM vs asymptotic error sweep over delta")
    cp.add_argument("--config", required=True)
    cp.add_argument("--out", default="compare.json")
    cp.set_defaults(func=cmd_compare)

    va = sub.add_parser("validate", help="run the built-in cross-check suite")
    va.add_argument("--verbose", action="store_true")
    va.set_defaults(func=cmd_validate)

    iv = sub.add_parser("invert", help="fit rod parameters to boundary data")
    iv.add_argument("--config", required=True)
    iv.add_argument("--data", default=None, help="measurement CSV (x1,x2,u)")
    iv.add_argument("--synthesize", action="store_true",
                    help="generate the data from the configured rod first")
    iv.add_argument("--noise", type=float, default=0.0, help="noise RMS")
    iv.add_argument("--model", choices=["bem", "asymptotic"], default="bem")
    iv.add_argument("--out", default="fit.json")
    iv.set_defaults(func=cmd_invert)

    fw = sub.add_parser("forward", help="full boundary-integral field on a grid")
    fw.add_argument("--config", required=True)
    fw.add_argument("--out", default="forward.csv")
    fw.add_argument("--density", default=None, help="also dump the density CSV")
    fw.set_defaults(func=cmd_forward)

    asy = sub.add_parser("asymptotic", help="closed-form field on a grid")
    asy.add_argument("--config", required=True)
    asy.add_argument("--out", default="asymptotic.csv")
    asy.set_defaults(func=cmd_asymptotic)

    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _thread_limit(args.threads):
            return args.func(args)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, IdentifiabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
