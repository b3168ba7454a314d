"""Command-line front end.

Subcommands:

* ``run --config PATH [--out DIR] [--seed N]`` -- one scenario end to end:
  trajectory file, monitor/identity/action CSVs, assertion summary.
* ``verify-identities --config PATH [--levels K] [--out DIR] [--seed N]``
  -- identity residuals over K refinement levels; prints the convergence
  table.
* ``action --config PATH [--out DIR] [--seed N]`` -- flow plus the action
  minimizer and integrated-inequality margins only.
* ``sweep CONFIG [CONFIG ...] [--jobs J] [--out DIR]`` -- several scenarios,
  fanned out across processes, each writing to its own subdirectory.

Exit status is 0 iff every enabled assertion of every scenario passed.
The environment variable ``HARNACKFLOW_OUT`` overrides ``--out``.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import action as action_mod
from . import harnack
from .config import parse_config
from .errors import HarnackFlowError
from .runner import (
    evaluate_assertions,
    resolve_out_dir,
    run_scenario,
    run_trajectory,
    verify_identities,
    action_rows,
)


def _load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    name = os.path.splitext(os.path.basename(path))[0]
    return parse_config(text, name=name)


def _cmd_run(args):
    cfg = _load_config(args.config)
    report = run_scenario(cfg, out_flag=args.out, seed=args.seed)
    for a in report.assertions:
        print(a.line())
    print(f"{'PASS' if report.passed else 'FAIL'} scenario {report.name} -> {report.out_dir}")
    return 0 if report.passed else 1


def _cmd_verify_identities(args):
    cfg = _load_config(args.config)
    cfg.identities_enable = True
    study = verify_identities(cfg, levels=args.levels, out_flag=args.out, seed=args.seed)
    print(study.table())
    for a in study.assertions:
        print(a.line())
    return 0 if study.passed else 1


def _cmd_action(args):
    cfg = _load_config(args.config)
    cfg.action_enable = True
    out_dir = resolve_out_dir(cfg, args.out)
    os.makedirs(out_dir, exist_ok=True)
    seed = cfg.seed if args.seed is None else args.seed
    rng = np.random.default_rng(seed)
    try:
        traj = run_trajectory(cfg)
        rows = action_rows(cfg, traj, rng)
    except HarnackFlowError as err:
        print(f"FAIL action: {type(err).__name__}: {err}", file=sys.stderr)
        return 1
    action_mod.write_action_csv(rows, os.path.join(out_dir, "action.csv"))
    margins = np.array([r[5] for r in rows])
    series = harnack.monitor_series(traj, d=cfg.d, t0=cfg.t0, enable=())
    assertions = [a for a in evaluate_assertions(cfg, traj, series, margins) if a.ident == "action-margin"]
    for a in assertions:
        print(a.line())
    ok = all(a.ok for a in assertions)
    print(f"{'PASS' if ok else 'FAIL'} action {cfg.name} -> {out_dir}")
    return 0 if ok else 1


def _sweep_worker(item):
    path, out_base, seed = item
    cfg = _load_config(path)
    out_dir = os.path.join(out_base, cfg.name) if out_base else None
    report = run_scenario(cfg, out_flag=out_dir, seed=seed)
    return cfg.name, report.passed, report.out_dir


def _cmd_sweep(args):
    out_base = os.environ.get("HARNACKFLOW_OUT") or args.out
    items = [(path, out_base, args.seed) for path in args.configs]
    results = []
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_worker, items))
    else:
        results = [_sweep_worker(item) for item in items]
    ok = True
    for name, passed, out_dir in results:
        ok = ok and passed
        print(f"{'PASS' if passed else 'FAIL'} {name} -> {out_dir}")
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="harnackflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario end to end")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.set_defaults(func=_cmd_run)

    p_vi = sub.add_parser("verify-identities", help="identity residual refinement study")
    p_vi.add_argument("--config", required=True)
    p_vi.add_argument("--levels", type=int, default=3)
    p_vi.add_argument("--out", default=None)
    p_vi.add_argument("--seed", type=int, default=None)
    p_vi.set_defaults(func=_cmd_verify_identities)

    p_act = sub.add_parser("action", help="space-time action minimization only")
    p_act.add_argument("--config", required=True)
    p_act.add_argument("--out", default=None)
    p_act.add_argument("--seed", type=int, default=None)
    p_act.set_defaults(func=_cmd_action)

    p_sweep = sub.add_parser("sweep", help="run several scenario configs")
    p_sweep.add_argument("configs", nargs="+")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HarnackFlowError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
