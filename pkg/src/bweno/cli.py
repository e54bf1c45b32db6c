"""Command line front end.

Four subcommands: ``convergence`` and ``run`` execute a JSON experiment
config, ``demo`` prints one of the built-in pointwise extrapolation
tables, ``schlieren`` renders a 2D field dump to a grayscale PGM.
Exit codes: 0 success, 1 config error, 2 blow-up.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import config as cfgs
from . import experiments as exp


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out", default=".", metavar="DIR",
                   help="directory for output files (default: current)")
    p.add_argument("--threads", type=int, default=1, metavar="N",
                   help="worker hint; runs are sequential and the results "
                        "do not depend on it")
    return p


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bweno",
        description="WENO finite differences on complex domains with "
                    "weighted boundary extrapolation",
    )
    common = _common()
    sub = p.add_subparsers(dest="cmd", required=True)

    pc = sub.add_parser("convergence", parents=[common],
                        help="run a resolution ladder and write an error/order CSV")
    pc.add_argument("config", help="experiment config (kind: convergence)")

    pr = sub.add_parser("run", parents=[common],
                        help="run one simulation and dump snapshots")
    pr.add_argument("config", help="experiment config (kind: run)")

    pd = sub.add_parser("demo", parents=[common],
                        help="pointwise extrapolation demo table")
    pd.add_argument("example_id", choices=exp.DEMO_IDS)

    ps = sub.add_parser("schlieren", parents=[common],
                        help="render a field dump to a binary PGM")
    ps.add_argument("field_file")
    ps.add_argument("out_pgm")
    ps.add_argument("--alpha", type=float, default=15.0,
                    help="exponential contrast constant (default 15)")
    return p


def _load_for(kind: str, path: str) -> dict:
    cfg = cfgs.load(path)
    if cfg["kind"] != kind:
        raise cfgs.ConfigError(
            f"{path} has kind {cfg['kind']!r}, expected {kind!r}"
        )
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = getattr(args, "out", ".")
    if out_dir != ".":
        os.makedirs(out_dir, exist_ok=True)

    try:
        if args.cmd == "convergence":
            cfg = _load_for("convergence", args.config)
            result = exp.run_convergence(cfg, out_dir=out_dir, echo=print)
            print(f"wrote {result.path}")
            return 0 if result.status == "done" else 2

        if args.cmd == "run":
            cfg = _load_for("run", args.config)
            result = exp.run_simulation(cfg, out_dir=out_dir, echo=print)
            for f in result.files:
                print(f"wrote {f}")
            return 0 if result.status == "done" else 2

        if args.cmd == "demo":
            result = exp.extrapolation_demo(args.example_id)
            sys.stdout.write(exp.format_demo(result))
            path = os.path.join(out_dir, args.example_id + ".csv")
            with open(path, "w") as f:
                f.write(exp.demo_csv(result))
            print(f"wrote {path}")
            return 0

        # schlieren
        try:
            exp.schlieren_file(args.field_file, args.out_pgm, alpha=args.alpha)
        except (OSError, ValueError) as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
        print(f"wrote {args.out_pgm}")
        return 0
    except cfgs.ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
