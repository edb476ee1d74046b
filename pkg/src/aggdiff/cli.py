"""Command-line entry point: run, sweep, verify, rates.

Exit codes: 0 success (including a reported blow-up), 1 configuration error,
2 verification-suite failure.
"""

import argparse
import itertools
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import diagnostics, solver, verify
from .config import (
    RunConfig,
    apply_overrides,
    config_as_dict,
    parse_config,
    validate_config,
)
from .errors import AggDiffError, ConfigError, ParameterDomainError
from .grid import RadialGrid
from .kernels import KernelSpec
from .scaling import derive_params

WORKERS_ENV = "AGGDIFF_WORKERS"
FLOAT_FMT = "%.17g"


def _fmt(x):
    return FLOAT_FMT % x


def kernel_from_config(cfg):
    if cfg.kernel_kind == "none":
        return None
    return KernelSpec(
        kind=cfg.kernel_kind,
        gamma=cfg.kernel_gamma,
        scale=cfg.kernel_scale,
        strength=cfg.kernel_strength,
    )


def build_run_inputs(cfg):
    params = derive_params(cfg.d, cfg.m, cfg.M)
    grid = RadialGrid(cfg.R, cfg.N, cfg.d)
    kernel = kernel_from_config(cfg)
    opts = {}
    for name in ("center", "width", "r0", "r1"):
        val = getattr(cfg, f"initial_{name}")
        if val is not None:
            opts[name] = val
    allowed = {
        "gaussian_offcenter_radialized": {"center", "width"},
        "annulus": {"r0", "r1"},
        "double_bump_radial": {"r0", "r1", "width"},
        "barenblatt": set(),
        "custom_table": set(),
    }[cfg.initial_kind]
    opts = {k: v for k, v in opts.items() if k in allowed}
    init = solver.initial_data(cfg.initial_kind, params, grid, **opts)
    return params, grid, kernel, init


def diagnostics_header(cfg):
    cols = ["tau", "t", "mass", "linf", "l1_to_ground", "H", "I", "H_rel"]
    cols += [f"E_k_{k:g}" for k in cfg.k_levels]
    cols += [f"lp_{p:g}" for p in cfg.p_list]
    return cols


def write_diagnostics_csv(path, cfg, rows):
    cols = diagnostics_header(cfg)
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            vals = [row.tau, row.t, row.mass, row.linf, row.l1_to_ground,
                    row.H, row.I, row.H_rel]
            vals += [row.E_k[float(k)] for k in cfg.k_levels]
            vals += [row.lp[float(p)] for p in cfg.p_list]
            fh.write(",".join(_fmt(v) for v in vals) + "\n")


def write_snapshots(outdir, trajectory):
    snapdir = Path(outdir) / "snapshots"
    snapdir.mkdir(parents=True, exist_ok=True)
    manifest = []
    for i, (tau, theta) in enumerate(trajectory.snapshots):
        name = f"snap_{i:05d}.tsv"
        with open(snapdir / name, "w") as fh:
            fh.write("r\ttheta\n")
            for r, v in zip(theta.grid.centers, theta.values):
                fh.write(f"{_fmt(r)}\t{_fmt(v)}\n")
        manifest.append({"file": f"snapshots/{name}", "tau": tau})
    with open(Path(outdir) / "snapshots/manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def run_single(cfg, outdir=None):
    """Execute one configured run; returns (trajectory, reports, summary dict)."""
    params, grid, kernel, init = build_run_inputs(cfg)
    start = time.perf_counter()
    traj = solver.run(
        params,
        grid,
        init,
        kernel=kernel,
        tau_max=cfg.tau_max,
        snapshot_dtau=cfg.snapshot_dtau,
        p_list=cfg.p_list,
        k_levels=cfg.k_levels,
        keep_snapshots=outdir is not None,
    )
    wall = time.perf_counter() - start
    window = tuple(cfg.fit_window)
    if traj.status == "blow-up" or window[1] > cfg.tau_max:
        window = (min(window[0], max(cfg.tau_max - 2.0, 0.0)), cfg.tau_max)
    try:
        reports = diagnostics.convergence_report(
            traj, window=window, tol=cfg.fit_tolerance, delta=cfg.delta_slack
        )
    except ParameterDomainError:
        reports = []
    summary = {
        "config": config_as_dict(cfg),
        "status": traj.status,
        "rate_reports": [r.as_dict() for r in reports],
        "scheme": {"N": cfg.N, "steps": traj.steps, **traj.dt_stats},
        "min_cell_value": traj.min_value,
        "wall_time_seconds": wall,
    }
    if traj.blowup is not None:
        summary["blowup"] = {
            "tau": traj.blowup.tau,
            "max_value": traj.blowup.max_value,
            "reason": traj.blowup.reason,
        }
    if outdir is not None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        write_diagnostics_csv(outdir / "diagnostics.csv", cfg, traj.rows)
        write_snapshots(outdir, traj)
        with open(outdir / "summary.json", "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return traj, reports, summary


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_run(args):
    cfg = parse_config(Path(args.config).read_text())
    if args.set:
        apply_overrides(cfg, args.set)
    outdir = args.output or cfg.output_dir
    _, reports, summary = run_single(cfg, outdir=outdir)
    print(f"status: {summary['status']}")
    for rep in reports:
        print(
            f"  {rep.name}: fitted={_na(rep.fitted_exponent)} "
            f"predicted={_na(rep.predicted_exponent)} verdict={rep.verdict}"
        )
    print(f"artifacts in {outdir}")
    return 0


def _na(x):
    return "n/a" if x is None else f"{x:.4f}"


def _sweep_cells(text):
    axes = parse_config(text, allow_lists=True)
    fixed = {k: v for k, v in axes.items() if not isinstance(v, list)}
    lists = {k: v for k, v in axes.items() if isinstance(v, list)}
    keys = sorted(lists)
    cells = []
    for combo in itertools.product(*(lists[k] for k in keys)):
        values = dict(fixed)
        values.update(dict(zip(keys, combo)))
        cells.append(validate_config(RunConfig(**values)))
    return cells


def cmd_sweep(args):
    cells = _sweep_cells(Path(args.config).read_text())
    base = Path(args.output or "sweep_out")
    base.mkdir(parents=True, exist_ok=True)
    workers = int(os.environ.get(WORKERS_ENV, "0")) or min(4, len(cells))

    def one(item):
        idx, cfg = item
        cfg = replace(cfg, output_dir=str(base / f"cell_{idx:04d}"))
        try:
            _, reports, summary = run_single(cfg, outdir=cfg.output_dir)
            l1 = next((r for r in reports if r.name == "l1_convergence"), None)
            return idx, cfg, summary["status"], l1, None
        except AggDiffError as exc:
            return idx, cfg, "error", None, str(exc)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(one, enumerate(cells)))
    results.sort(key=lambda r: r[0])

    rates_path = base / "rates.csv"
    with open(rates_path, "w") as fh:
        fh.write("d,m,gamma,M,predicted,fitted,residual,verdict\n")
        for idx, cfg, status, l1, err in results:
            gamma = "" if cfg.kernel_gamma is None else _fmt(cfg.kernel_gamma)
            if status == "blow-up":
                verdict, pred, fit, res = "blow-up", "", "", ""
            elif status == "error" or l1 is None:
                verdict, pred, fit, res = status if err else "no-fit", "", "", ""
            else:
                verdict = l1.verdict
                pred = "" if l1.predicted_exponent is None else _fmt(l1.predicted_exponent)
                fit = "" if l1.fitted_exponent is None else _fmt(l1.fitted_exponent)
                res = _fmt(l1.residual)
            fh.write(
                f"{cfg.d},{_fmt(cfg.m)},{gamma},{_fmt(cfg.M)},{pred},{fit},{res},{verdict}\n"
            )
    print(f"{len(results)} cells -> {rates_path}")
    return 0


def cmd_verify(args):
    report = verify.run_all(quick=args.quick)
    for line in report.lines:
        print(line)
    print(f"verify: {report.n_pass}/{report.n_total} suites passed")
    return 0 if report.all_passed else 2


def cmd_rates(args):
    params = derive_params(args.d, args.m, args.M)
    kernel = None
    if args.kernel != "none":
        kernel = KernelSpec(
            kind=args.kernel, gamma=args.gamma, scale=args.scale, strength=args.strength
        )
    elif args.gamma is not None:
        kernel = KernelSpec(kind="power_tail", gamma=args.gamma)
    pred = diagnostics.predicted_rates(params, kernel, delta=args.delta)
    print(f"d={params.d} m={params.m:g} beta={params.beta:g} regime={params.regime}")
    print(f"linf decay exponent (t frame): {pred.linf_decay_t:g}")
    if not pred.applicable:
        print(f"L1 convergence rate: not applicable ({pred.reason})")
    else:
        print(f"L1 convergence exponent (t frame):   {pred.l1_conv_t:g}  (delta={pred.delta:g})")
        print(f"L1 convergence rate   (tau frame):   {pred.l1_conv_tau:g}")
        print(f"relative-entropy rate (tau frame):   {pred.hrel_conv_tau:g}")
    return 0


def _parse_m(text):
    from fractions import Fraction

    return float(Fraction(text)) if "/" in text else float(text)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="aggdiff",
        description="Rescaled-frame aggregation-diffusion solver and diagnostics",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configured simulation")
    p_run.add_argument("config", help="path to a run config file")
    p_run.add_argument("--output", help="output directory (overrides config)")
    p_run.add_argument("--set", action="append", default=[],
                       metavar="SECTION.KEY=VALUE", help="override a config key")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a cartesian parameter sweep")
    p_sweep.add_argument("config", help="sweep config (comma lists form the product)")
    p_sweep.add_argument("--output", help="sweep output directory")
    p_sweep.set_defaults(func=cmd_sweep)

    p_ver = sub.add_parser("verify", help="run the property/inequality suites")
    p_ver.add_argument("--quick", action="store_true", help="smaller pinned suites")
    p_ver.set_defaults(func=cmd_verify)

    p_rates = sub.add_parser("rates", help="print predicted exponents")
    p_rates.add_argument("--d", type=int, required=True)
    p_rates.add_argument("--m", type=_parse_m, required=True)
    p_rates.add_argument("--M", type=float, default=1.0)
    p_rates.add_argument("--gamma", type=float)
    p_rates.add_argument("--kernel", default="none",
                         help="kernel kind (default: none, or power_tail if --gamma given)")
    p_rates.add_argument("--scale", type=float, default=1.0)
    p_rates.add_argument("--strength", type=float, default=1.0)
    p_rates.add_argument("--delta", type=float, default=0.05)
    p_rates.set_defaults(func=cmd_rates)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ParameterDomainError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
