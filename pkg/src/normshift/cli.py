"""Command-line front end.

Subcommands: simulate | shift | check | catalogue.  Every run is driven by a
JSON config (see README) and writes CSV output plus a JSON manifest into the
output directory.  Exit codes: 0 ok, 2 config error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NormShiftError
from .experiment import (ConfigError, build_curve, build_field, build_init,
                         build_integrator, build_metric, build_nu, load_config,
                         t_span_of)
from .forces import catalogue_listing
from .normality import probe_points, residual_sweep
from .closedform import CycloidParams, cycloid, gravity_shift
from .dynamics import integrate
from .shift import NuSolution, normal_shift, normality_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _write_json(path: Path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest(args, cfg: dict, extra: dict) -> dict:
    return {
        "config": cfg,
        "seed": args.seed,
        "version": __version__,
        **extra,
    }


def _oracle_error(cfg: dict, traj) -> tuple[str, float] | None:
    """Largest position error against the closed form named in the config."""
    spec = cfg.get("oracle")
    if not spec:
        return None
    kind = spec.get("kind")
    if kind in ("gravity_constant_nu", "gravity_linear_nu"):
        variant = kind.removeprefix("gravity_")
        s = float(spec.get("s", traj.positions()[0][0]))
        err = max(float(np.max(np.abs(traj.positions()[i] - gravity_shift(s, t, variant))))
                  for i, t in enumerate(traj.times))
        return kind, err
    if kind == "cycloid":
        p = CycloidParams(x0=float(spec["x0"]), y0=float(spec["y0"]),
                          theta0=float(spec["theta0"]), v0=float(spec["v0"]),
                          a0=float(spec["a0"]))
        err = 0.0
        for i, t in enumerate(traj.times):
            st = cycloid(p, t)
            err = max(err, float(np.max(np.abs(traj.positions()[i] - st.r))))
        return kind, err
    if kind == "zero_field":
        r0 = traj.positions()[0]
        v0 = traj.velocities()[0]
        err = max(float(np.max(np.abs(traj.positions()[i] - (r0 + t * v0))))
                  for i, t in enumerate(traj.times))
        return kind, err
    raise ConfigError(f"unknown oracle kind {kind!r}")


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    field, _ = build_field(cfg.get("field"))
    metric = build_metric(cfg.get("metric"))
    init = build_init(cfg)
    t0, t1 = t_span_of(cfg)
    icfg = build_integrator(cfg)
    n_t = int(cfg.get("n_t", 100))
    t_eval = np.linspace(t0, t1, n_t)
    traj = integrate(field, metric, init, (t0, t1), icfg, t_eval=t_eval)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "trajectory.csv"
    traj.write_csv(csv_path)
    extra = {
        "outputs": ["trajectory.csv"],
        "integrator": {"method": icfg.method, "abs_tol": icfg.abs_tol,
                       "rel_tol": icfg.rel_tol,
                       "accepted_nodes": int(len(traj._sol.ts))},
    }
    if args.check_oracle:
        res = _oracle_error(cfg, traj)
        if res is None:
            raise ConfigError("--check-oracle requires an 'oracle' entry in the config")
        kind, err = res
        tol = float(cfg["oracle"].get("tol", 1e-6))
        extra["oracle"] = {"kind": kind, "max_error": err, "tol": tol,
                           "passed": err <= tol}
        if err > tol:
            _write_json(out / "manifest.json", _manifest(args, cfg, extra))
            print(f"oracle mismatch: {err:.3e} > {tol:.1e}", file=sys.stderr)
            return EXIT_NUMERIC
    if args.emit_plotdata:
        with open(out / "plot_xy.dat", "w") as fh:
            for r in traj.positions():
                fh.write(f"{r[0]:.17g} {r[1]:.17g}\n")
        extra["outputs"].append("plot_xy.dat")
    extra["outputs"].append("manifest.json")
    _write_json(out / "manifest.json", _manifest(args, cfg, extra))
    if args.json:
        print(json.dumps(extra, sort_keys=True))
    else:
        print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_shift(args) -> int:
    cfg = load_config(args.config)
    field, _ = build_field(cfg.get("field"))
    metric = build_metric(cfg.get("metric"))
    curve = build_curve(cfg.get("curve"))
    nu = build_nu(cfg.get("nu"), curve, field)
    t0, t1 = t_span_of(cfg)
    icfg = build_integrator(cfg)
    grid = normal_shift(curve, field, metric, nu, (t0, t1),
                        n_s=int(cfg.get("n_s", 64)), n_t=int(cfg.get("n_t", 100)),
                        cfg=icfg)
    report = normality_report(grid, phi_tol=cfg.get("phi_tol"))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid.write_csv(out / "shift_grid.csv")
    payload = report.to_dict()
    if isinstance(nu, NuSolution):
        payload["nu_truncated"] = nu.truncated
        payload["nu_interval"] = [nu.s_lo, nu.s_hi]
    _write_json(out / "normality_report.json", payload)
    extra = {"outputs": ["shift_grid.csv", "normality_report.json", "manifest.json"],
             "verdict": payload["verdict"], "max_abs_phi": report.max_abs_phi}
    if args.emit_plotdata:
        with open(out / "plot_fronts.dat", "w") as fh:
            for i in range(len(grid.t_nodes)):
                for j in range(len(grid.s_nodes)):
                    r = grid.states[i][j].r
                    fh.write(f"{r[0]:.17g} {r[1]:.17g}\n")
                fh.write("\n")
        extra["outputs"].append("plot_fronts.dat")
    _write_json(out / "manifest.json", _manifest(args, cfg, extra))
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(f"verdict: {payload['verdict']} (max|phi| = {report.max_abs_phi:.3e})")
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = load_config(args.config)
    field, ansatz = build_field(cfg.get("field"))
    probes_cfg = cfg.get("probes", {})
    count = int(probes_cfg.get("count", 100))
    seed = args.seed if args.seed is not None else int(probes_cfg.get("seed", 0))
    probes = probe_points(count, seed=seed)
    if "box" in probes_cfg:
        box = probes_cfg["box"]
        rng = np.random.default_rng(seed)
        probes[:, 0] = rng.uniform(box["x"][0], box["x"][1], count)
        probes[:, 1] = rng.uniform(box["y"][0], box["y"][1], count)
        probes[:, 2] = rng.uniform(box["v"][0], box["v"][1], count)
        probes[:, 3] = rng.uniform(box["theta"][0], box["theta"][1], count)
    include_complex = bool(cfg.get("include_complex", False))
    report = residual_sweep(probes, field=field, ansatz=ansatz,
                            include_complex=include_complex)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "residuals.csv"
    with open(csv_path, "w") as fh:
        cols = ["x", "y", "v", "theta"]
        if report.r1 is not None:
            cols += ["r1", "r2"]
        if report.r_reduced is not None:
            cols += ["r_reduced"]
        if report.r_complex is not None:
            cols += ["re_rc", "im_rc"]
        fh.write(",".join(cols) + "\n")
        for i in range(count):
            row = list(report.probes[i])
            if report.r1 is not None:
                row += [report.r1[i], report.r2[i]]
            if report.r_reduced is not None:
                row += [report.r_reduced[i]]
            if report.r_complex is not None:
                row += [report.r_complex[i].real, report.r_complex[i].imag]
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")
    summary = report.summary()
    _write_json(out / "residual_summary.json", summary)
    extra = {"outputs": ["residuals.csv", "residual_summary.json", "manifest.json"],
             "summary": summary}
    if args.emit_plotdata:
        with open(out / "plot_residuals.dat", "w") as fh:
            key = "r1" if report.r1 is not None else "r_reduced"
            vals = report.r1 if report.r1 is not None else report.r_reduced
            for i in range(count):
                fh.write(f"{report.probes[i,2]:.17g} {report.probes[i,3]:.17g} "
                         f"{abs(vals[i]):.17g}\n")
        extra["outputs"].append("plot_residuals.dat")
    _write_json(out / "manifest.json", _manifest(args, cfg, extra))
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        for name, stats in summary.items():
            print(f"{name}: max {stats['max']:.3e}, mean {stats['mean']:.3e}")
    return EXIT_OK


def cmd_catalogue(args) -> int:
    rows = catalogue_listing()
    if args.json:
        print(json.dumps(rows, indent=2, sort_keys=True))
    else:
        for row in rows:
            flag = "normal-shift" if row["claims_normality"] else "generic"
            print(f"{row['name']:16s} [{flag}] {row['description']}")
            for key, val in row["params"].items():
                print(f"{'':16s}   {key}: {val}")
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "shift": cmd_shift,
    "check": cmd_check,
    "catalogue": cmd_catalogue,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="normshift",
        description="Simulate and verify planar Newtonian systems admitting "
                    "the normal shift of curves.")
    parser.add_argument("command", choices=sorted(_COMMANDS),
                        help="simulate | shift | check | catalogue")
    parser.add_argument("--config", help="path to the JSON experiment config")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed override for probe sweeps")
    parser.add_argument("--check-oracle", action="store_true",
                        help="compare the run against the closed-form oracle in the config")
    parser.add_argument("--emit-plotdata", action="store_true",
                        help="write gnuplot-ready column files next to the CSV output")
    parser.add_argument("--json", action="store_true",
                        help="print machine-readable JSON to stdout")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 and prints usage on bad commands/flags
        return int(exc.code or 0)
    handler = _COMMANDS[args.command]
    if args.command != "catalogue" and not args.config:
        print("--config is required for this subcommand", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NormShiftError as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
