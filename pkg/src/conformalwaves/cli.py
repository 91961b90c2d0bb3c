"""Command-line interface: run, sweep, verify, converge.

Exit codes (frozen): 0 success, 1 config error, 2 blow-up detected,
3 constraint-residual breach, 4 sweep member failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, parse_config

EXIT_CONFIG_ERROR = 1


def _load_config(args) -> RunConfig:
    if args.config is None:
        raise ConfigError("--config PATH is required for this command")
    cfg = parse_config(args.config)
    if getattr(args, "epsilon", None) is not None:
        cfg = cfg.replace(epsilon=args.epsilon)
    if getattr(args, "max_j", None) is not None:
        cfg = cfg.replace(max_j=args.max_j, jet_order=max(cfg.jet_order, args.max_j + 2))
    if getattr(args, "project", False):
        cfg = cfg.replace(project_constraints=True)
    if getattr(args, "out", None) is not None:
        cfg = cfg.replace(out_dir=args.out)
    return cfg


def cmd_run(args) -> int:
    from .experiments import run_simulation, write_csv, write_summary

    cfg = _load_config(args)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = run_simulation(cfg)
    if "csv" in cfg.formats:
        write_csv(out / "results.csv", result)
    if "json" in cfg.formats:
        summary = write_summary(out / "summary.json", result)
    else:
        summary = {"exit_code": result.exit_code}
    print(f"run finished: t={result.reports[-1].t:.6g} exit={result.exit_code} "
          f"wall={result.wall_time:.2f}s min_A1={min(r.min_a1 for r in result.reports):.12f}")
    return result.exit_code


def cmd_sweep(args) -> int:
    from .experiments import run_sweep

    cfg = _load_config(args)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sw = run_sweep(cfg)
    with open(out / "sweep.json", "w", encoding="utf-8") as fh:
        json.dump(sw.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print("epsilon ladder:", ", ".join(f"{e:g}" for e in sw.epsilons))
    for j in sorted(sw.slope_e):
        se, he = sw.slope_e[j]
        sf, hf = sw.slope_frak[j]
        print(f"  j={j}: slope |dE/dt| = {se:.3f} (+/- {he:.3f})   "
              f"slope |d frakE/dt| = {sf:.3f} (+/- {hf:.3f})")
    return sw.exit_code


def cmd_verify(args) -> int:
    from .verify import run_verify

    n = args.n
    if args.config is not None:
        try:
            n = parse_config(args.config).n
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG_ERROR
    results = run_verify(seed=args.seed, n=n)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    payload = {"seed": args.seed, "n": n,
               "results": [r.to_dict() for r in results],
               "all_mandatory_passed": all(r.passed for r in results if r.mandatory)}
    with open(out / "verify.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    width = max(len(r.name) for r in results)
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        print(f"{mark} {r.name:<{width}} value={r.value:.3e} tol={r.tolerance:g}")
    ok = payload["all_mandatory_passed"]
    print(f"{sum(r.passed for r in results)}/{len(results)} properties passed")
    return 0 if ok else 5


def cmd_converge(args) -> int:
    from .experiments import run_converge

    cfg = _load_config(args)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tables, code = run_converge(cfg)
    with open(out / "converge.json", "w", encoding="utf-8") as fh:
        json.dump(tables, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if tables["dt_refinement"]:
        print(f"dt-refinement observed order: {tables['dt_order']:.3f}")
        for row in tables["n_refinement"]:
            print(f"  n={row['n']:5d}  theta2 error vs reference: {row['theta2_error']:.3e}")
    else:
        print("zero-duration run: empty table")
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="conformalwaves",
        description="Pseudo-spectral 2D water waves in the conformal variable "
                    "with corrected-energy diagnostics")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_config=True):
        sp.add_argument("--config", type=str, default=None, help="config file path")
        sp.add_argument("--out", type=str, default=None, help="output directory")
        sp.add_argument("--seed", type=int, default=0, help="random seed")
        sp.add_argument("--epsilon", type=float, default=None, help="override epsilon")
        sp.add_argument("--max-j", dest="max_j", type=int, default=None,
                        help="override highest energy index")
        sp.add_argument("--project", action="store_true",
                        help="re-project the holomorphy constraints every step")

    sp_run = sub.add_parser("run", help="single simulation with energy reports")
    common(sp_run)
    sp_run.set_defaults(func=cmd_run)

    sp_sweep = sub.add_parser("sweep", help="epsilon ladder with slope fits")
    common(sp_sweep)
    sp_sweep.set_defaults(func=cmd_sweep)

    sp_ver = sub.add_parser("verify", help="identity and inequality suite")
    common(sp_ver)
    sp_ver.add_argument("--n", type=int, default=256, help="grid size for the suite")
    sp_ver.set_defaults(func=cmd_verify)

    sp_con = sub.add_parser("converge", help="dt and N refinement study")
    common(sp_con)
    sp_con.set_defaults(func=cmd_converge)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
