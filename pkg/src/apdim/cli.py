"""Command-line entry point: ``apdim <subcommand> [flags]``.

Exit codes: 0 success, 2 validation, 3 budget, 4 numeric certification.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .cache import ResultCache
from .config import load_config, make_config
from .errors import ApdimError, ValidationError

SUBCOMMANDS = ("cf", "eval", "shiftdist", "kron", "periods", "dim", "evolve", "liouville", "pipeline")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _global_flags() -> argparse.ArgumentParser:
    g = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    g.add_argument("--config", default=S, help="YAML or JSON experiment config")
    g.add_argument("--out", default=S, help="output directory")
    g.add_argument("--precision-digits", type=int, default=S, dest="precision_digits")
    g.add_argument("--budget", type=int, default=S, help="max candidate evaluations")
    g.add_argument("--threads", type=int, default=S)
    g.add_argument("--cache-dir", default=S, dest="cache_dir")
    g.add_argument("--no-cache", action="store_true", default=S, dest="no_cache")
    return g


def build_parser() -> argparse.ArgumentParser:
    glob = _global_flags()
    S = argparse.SUPPRESS
    p = argparse.ArgumentParser(prog="apdim", parents=[glob],
                                description="Almost periods, Kronecker systems and dimension estimates.")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, help_):
        return sub.add_parser(name, parents=[glob], help=help_, argument_default=S)

    c = cmd("cf", "continued fraction terms, convergents and profile")
    c.add_argument("--number", dest="omega", help="named constant, decimal string or term rule")
    c.add_argument("--depth", type=int)
    c.add_argument("--json", action="store_true", dest="print_json")
    c.add_argument("--csv", action="store_true", dest="print_csv")

    c = cmd("eval", "evaluate a polynomial at exact times")
    c.add_argument("--poly")
    c.add_argument("--omega")
    c.add_argument("--t", action="append", dest="times")

    c = cmd("shiftdist", "certified shift quality sup_t |P(t+tau) - P(t)|")
    c.add_argument("--poly")
    c.add_argument("--omega")
    c.add_argument("--tau", action="append", dest="taus")
    c.add_argument("--epsilon", type=float)

    c = cmd("kron", "solutions of ||q omega|| < delta")
    c.add_argument("--omega")
    c.add_argument("--delta", type=_floats, dest="deltas")
    c.add_argument("--window", type=float)
    c.add_argument("--method", choices=("convergent", "grid"))

    c = cmd("periods", "verified almost periods and inclusion lengths")
    c.add_argument("--poly")
    c.add_argument("--omega")
    c.add_argument("--epsilon", type=float)
    c.add_argument("--epsilon-ladder", type=_floats, dest="epsilons")
    c.add_argument("--window", type=float)

    c = cmd("dim", "dimension slopes from a periods summary")
    c.add_argument("--scans", help="periods.json written by `periods`")
    c.add_argument("--tail-start", type=int, dest="tail_start")

    c = cmd("evolve", "integrate a monotone problem and measure almost-period transfer")
    c.add_argument("--problem")
    c.add_argument("--epsilon-ladder", type=_floats, dest="epsilons")

    c = cmd("liouville", "time averages and closeness to a periodic trajectory")
    c.add_argument("--omega")
    c.add_argument("--region")
    c.add_argument("--horizons", type=_floats)
    c.add_argument("--convergent-index", type=int, dest="convergent_index")
    c.add_argument("--closeness-horizon", type=float, dest="closeness_horizon")
    c.add_argument("--stated-gap", type=float, dest="stated_gap")

    c = cmd("pipeline", "cf -> periods ladder -> dim -> report")
    c.add_argument("--omega")
    c.add_argument("--poly")
    c.add_argument("--epsilon-ladder", type=_floats, dest="epsilons")
    c.add_argument("--window", type=float)
    c.add_argument("--naito-points", type=int, dest="naito_points")
    return p


PLUMBING = ("command", "config", "cache_dir", "no_cache", "print_json", "print_csv", "epsilon")


def config_from_args(args: argparse.Namespace):
    ns = vars(args)
    kind = "full-pipeline" if args.command == "pipeline" else args.command
    fields = {k: v for k, v in ns.items() if k not in PLUMBING}
    if "epsilon" in ns:
        fields["epsilons"] = [ns["epsilon"]]
    for key in ("poly", "problem", "scans"):
        if key in fields:
            fields[key] = str(Path(fields[key]).resolve())
    if "config" in ns:
        cfg = load_config(ns["config"], **fields)
        if cfg.kind != kind:
            raise ValidationError(f"config kind {cfg.kind!r} does not match subcommand {args.command!r}")
        return cfg
    return make_config(kind=kind, **fields)


def _print_summary(result) -> None:
    rows = [(k, v) for k, v in sorted(result.summary.items())]
    rows.append(("cache", "hit" if result.cache_hit else "miss"))
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        if isinstance(v, float):
            v = f"{v:.6g}"
        print(f"{k:<{width}}  {v}")
    for p in result.paths:
        print(f"wrote {p}")


def main(argv=None) -> int:
    from .pipeline import run

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        cache = None if getattr(args, "no_cache", False) else ResultCache(getattr(args, "cache_dir", None))
        result = run(cfg, cache)
    except ApdimError as exc:
        print(f"apdim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    _print_summary(result)
    if getattr(args, "print_json", False):
        sys.stdout.write((Path(cfg.out) / "cf.json").read_text())
    if getattr(args, "print_csv", False):
        sys.stdout.write((Path(cfg.out) / "cf.csv").read_text())
    return 0


if __name__ == "__main__":
    sys.exit(main())
