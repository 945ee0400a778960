"""Command-line front end.

Subcommands:
  run      execute a scenario and write summary/trials/bounds/meta files
  bounds   print the theoretical bound table for a scenario
  check    print the large-noise condition verdict and per-arm margins
  inspect  emit the base- and super-arm mean table (means.csv)

Exit status: 0 on success, 1 on configuration errors, 2 when any trial hit
the step cap (run) or a bound solver failed (bounds).
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys

import numpy as np

from .algorithms import DEFAULT_STEP_CAP
from .bandit import BanditInstance, check_noise_condition
from .channel import arm_means
from .harness import (
    build_scenario,
    load_scenario_config,
    run_scenario,
    write_reports,
    _bounds_row,
)

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamalign",
        description="Fixed-confidence beam-alignment experiments and bound calculators",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="scenario config file")
        p.add_argument(
            "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
            help="override a config key (repeatable)",
        )

    p_run = sub.add_parser("run", help="run the scenario and write reports")
    common(p_run)
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="worker processes (default: all cores)")
    p_run.add_argument("--step-cap", type=int, default=DEFAULT_STEP_CAP,
                       help="abort a trial after this many steps")
    p_run.add_argument("--weight-refresh", type=int, default=1,
                       help="recompute tracking weights every N steps")
    p_run.add_argument("--overlapping", action="store_true",
                       help="use the overlapping phase-two window for 2phts")

    p_bounds = sub.add_parser("bounds", help="print theoretical bounds per SNR")
    common(p_bounds)

    p_check = sub.add_parser("check", help="print the large-noise condition verdict")
    common(p_check)

    p_inspect = sub.add_parser("inspect", help="write the arm-mean table (means.csv)")
    common(p_inspect)
    p_inspect.add_argument("--out", required=True, help="output directory")
    return parser


def _parse_overrides(pairs) -> dict[str, str]:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"--set expects KEY=VALUE, got {pair!r}")
        key, value = pair.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _load(args):
    overrides = _parse_overrides(args.overrides)
    if getattr(args, "overlapping", False):
        overrides["overlapping"] = "true"
    cfg = load_scenario_config(args.config, overrides)
    return cfg, overrides


def cmd_run(args) -> int:
    cfg, overrides = _load(args)
    rows, records, bounds = run_scenario(
        cfg,
        jobs=max(args.jobs, 1),
        step_cap=args.step_cap,
        weight_refresh=max(args.weight_refresh, 1),
        scenario_name=os.path.basename(args.config),
    )
    meta = {"config_file": args.config}
    meta.update({f"set:{k}": v for k, v in overrides.items()})
    meta.update({
        "trials": cfg.trials, "seed": cfg.seed, "delta": cfg.delta,
        "delta_split": " ".join(str(d) for d in cfg.delta_split),
        "snr_db_grid": " ".join(str(s) for s in cfg.snr_db_grid),
        "algorithms": " ".join(cfg.algorithms),
        "jobs": args.jobs, "step_cap": args.step_cap,
        "weight_refresh": args.weight_refresh,
    })
    write_reports(rows, records, args.out, bounds=bounds, meta=meta)

    print(f"{'algorithm':<14}{'snr_db':>8}{'trials':>8}{'mean_tau':>12}"
          f"{'std_tau':>12}{'error':>8}{'ear':>8}")
    for r in rows:
        print(f"{r.algorithm:<14}{r.snr_db:>8.1f}{r.trials:>8d}{r.mean_tau:>12.1f}"
              f"{r.std_tau:>12.1f}{r.error_rate:>8.3f}{r.mean_ear:>8.2f}")
    if any(rec.capped for rec in records):
        print("warning: at least one trial hit the step cap", file=sys.stderr)
        return 2
    return 0


def cmd_bounds(args) -> int:
    cfg, _ = _load(args)
    scenario = build_scenario(cfg)
    status = 0
    print(f"{'snr_db':>8}{'lower_bound':>16}{'c_star_u_total':>18}{'t_star_u':>16}")
    for snr_db in cfg.snr_db_grid:
        try:
            row = _bounds_row(scenario, snr_db, os.path.basename(args.config))
        except (ValueError, RuntimeError) as exc:
            print(f"{snr_db:>8.1f}  solver failed: {exc}", file=sys.stderr)
            status = 2
            continue
        if math.isnan(row.lower_bound):
            status = 2
        print(f"{snr_db:>8.1f}{row.lower_bound:>16.2f}{row.c_star_u_total:>18.4g}"
              f"{row.t_star_u:>16.4g}")
    return status


def cmd_check(args) -> int:
    cfg, _ = _load(args)
    scenario = build_scenario(cfg)
    for snr_db in cfg.snr_db_grid:
        means = arm_means(scenario.channel, scenario.codebook, cfg.tx_power_mw(snr_db))
        inst = BanditInstance(means=means.mu, noise_var=cfg.noise_mw, labels=means.labels)
        report = check_noise_condition(inst)
        verdict = "holds" if report.holds else "violated"
        print(f"SNR {snr_db} dB: large-noise condition {verdict} "
              f"(sigma2 = {report.sigma2:.4g} mW, binding threshold = "
              f"{report.binding_threshold:.4g} mW)")
        order = np.argsort(report.thresholds)[::-1]
        shown = 0
        for k in order:
            if not np.isfinite(report.thresholds[k]):
                continue
            print(f"  arm {k+1:>4d}: requires sigma2 > {report.thresholds[k]:.4g} mW")
            shown += 1
            if shown >= 5:
                break
        n_vac = int(np.sum(report.vacuous)) - 1  # the optimal arm is always vacuous
        print(f"  ({n_vac} arms impose no constraint; showing top {shown} thresholds)")
    return 0


def cmd_inspect(args) -> int:
    cfg, _ = _load(args)
    scenario = build_scenario(cfg)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "means.csv")
    K, J = scenario.num_arms, scenario.group_len
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "index", "snr_db", "mean_mw"])
        for snr_db in cfg.snr_db_grid:
            oracle = scenario.oracle(snr_db)
            for k in range(1, K + 1):
                writer.writerow(["base", k, repr(snr_db), repr(oracle.mean((k,)))])
            for g in range(1, math.ceil(K / J) + 1):
                idx = tuple(range((g - 1) * J + 1, min(g * J, K) + 1))
                writer.writerow(["super", g, repr(snr_db), repr(oracle.mean(idx))])
    print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        handler = {
            "run": cmd_run,
            "bounds": cmd_bounds,
            "check": cmd_check,
            "inspect": cmd_inspect,
        }[args.verb]
        return handler(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
