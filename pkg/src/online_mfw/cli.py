"""Command-line entry point: ``gen``, ``run``, ``reference`` and ``report``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .harness import (
    ConfigError,
    ExperimentConfig,
    build_instance,
    build_schedule,
    instance_to_json,
    reference_curve,
    reference_points,
    report,
    run_experiment,
    write_reference_csv,
)
from .mfw import VARIANTS, ProbeInfeasibleError, ScheduleError
from .polytope import LPError, ProjectionError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _config(args):
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    over = {}
    if getattr(args, "seed", None) is not None:
        over["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        over["out"] = args.out
    if getattr(args, "variant", None):
        over["variants"] = args.variant
    if getattr(args, "stride", None) is not None:
        over["stride"] = args.stride
    if getattr(args, "allow_meta32", False):
        over["allow_meta32"] = True
    d = dataclasses.asdict(cfg)
    d.update(over)
    return ExperimentConfig.from_dict(d)


def cmd_gen(args):
    cfg = _config(args)
    P, objectives = build_instance(cfg)
    out = Path(cfg.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"instance_{cfg.family}_seed{cfg.seed}.json"
    path.write_text(instance_to_json(cfg, P, objectives) + "\n")
    print(path)


def cmd_run(args):
    cfg = _config(args)
    if not cfg.out:
        cfg.out = "runs"
    results = run_experiment(cfg)
    report([r.csv_path for r in results.values()], stream=sys.stdout)


def cmd_reference(args):
    cfg = _config(args)
    P, objectives = build_instance(cfg)
    T = max(build_schedule(cfg, v, P).T for v in cfg.variants) if cfg.variants else cfg.T
    ref = reference_curve(P, objectives, reference_points(T, cfg.stride), cfg.k_ref)
    path = Path(cfg.out or ".") / f"reference_{cfg.family}_seed{cfg.seed}.csv"
    write_reference_csv(ref, path)
    print(path)


def cmd_report(args):
    out = Path(args.out) if args.out else None
    json_out = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        json_out = out / "report.json"
    try:
        report(args.csv, json_out=json_out, stream=sys.stdout)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def build_parser():
    parser = argparse.ArgumentParser(prog="online-mfw", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, run_flags=False):
        p.add_argument("--config", help="JSON file mirroring ExperimentConfig")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        if run_flags:
            p.add_argument("--variant", action="append", choices=VARIANTS)
            p.add_argument("--stride", type=int)
            p.add_argument("--allow-meta32", action="store_true")

    common(sub.add_parser("gen", help="emit instance JSON"))
    common(sub.add_parser("run", help="execute an experiment"), run_flags=True)
    common(sub.add_parser("reference", help="offline reference curve"), run_flags=True)
    p = sub.add_parser("report", help="aggregate run CSVs")
    p.add_argument("csv", nargs="+")
    p.add_argument("--out", help="directory for report.json")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    handlers = {"gen": cmd_gen, "run": cmd_run, "reference": cmd_reference, "report": cmd_report}
    try:
        handlers[args.command](args)
    except (ConfigError, ScheduleError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LPError, ProjectionError, ProbeInfeasibleError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
