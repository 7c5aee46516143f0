"""Command-line entry point: ``yielon run | compare | dump-defaults``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .baselines import REGIMES
from .config import DOMAINS, default_config, dump_config, load_config
from .errors import ConfigError
from .harness import all_regimes, compare_regimes, run_experiment


def _apply_overrides(cfg, args):
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.episodes is not None:
        changes["episodes"] = args.episodes
    if args.regime is not None:
        changes["regime"] = REGIMES[args.regime]
    if args.out is not None:
        changes["output"] = args.out
    if args.deterministic is not None:
        changes["deterministic"] = args.deterministic
    return cfg.replace(**changes) if changes else cfg


def cmd_run(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    out = cfg.output or "runs/latest"
    records, summary = run_experiment(cfg, out_dir=out)
    print(f"{len(records)} records -> {Path(out) / 'trace.csv'}")
    for island_id, t in sorted(summary.islands.items()):
        print(f"  island {island_id}: credits {t.credits:.1f}  switches {t.switches}  "
              f"(intrinsic {t.intrinsic}, extrinsic {t.extrinsic}, g-special {t.g_special})")
    if summary.error:
        print(f"error: {summary.error}", file=sys.stderr)
        return 1
    return 0


def cmd_compare(args) -> int:
    configs = [_apply_overrides(load_config(p), args) for p in args.configs]
    if args.all_regimes:
        if len(configs) != 1:
            raise ConfigError("configs", "--all-regimes takes exactly one config")
        configs = all_regimes(configs[0])
    base_seed = configs[0].seed
    table = compare_regimes(configs, range(base_seed, base_seed + args.seeds))
    print(table.to_text())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "comparison.json").write_text(json.dumps(table.to_dict(), indent=2) + "\n",
                                             encoding="utf-8")
    return 0


def cmd_dump_defaults(args) -> int:
    sys.stdout.write(dump_config(default_config(args.domain)))
    return 0


def _add_overrides(p):
    p.add_argument("--seed", type=int)
    p.add_argument("--episodes", type=int)
    p.add_argument("--out")
    p.add_argument("--regime", choices=sorted(REGIMES))
    p.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=None,
                   help="lock-step rounds (default on); --no-deterministic runs islands freely")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="yielon", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write trace/summary/plot files")
    run.add_argument("config")
    _add_overrides(run)
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="tabulate credits and switches across regimes and seeds")
    cmp_.add_argument("configs", nargs="+")
    cmp_.add_argument("--seeds", type=int, default=10, help="number of consecutive seeds")
    cmp_.add_argument("--all-regimes", action="store_true",
                      help="expand a single config into the four regimes")
    _add_overrides(cmp_)
    cmp_.set_defaults(func=cmd_compare)

    dump = sub.add_parser("dump-defaults", help="print the default config as YAML")
    dump.add_argument("--domain", choices=DOMAINS, default="sorting")
    dump.set_defaults(func=cmd_dump_defaults)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
