"""Command-line interface.

Subcommands
-----------
gen       dump one synthetic instance to an .npz container
run       run selected algorithms on one instance and print metrics
sweep     execute a Monte-Carlo sweep (from a JSON spec or a named preset)
selftest  run the built-in invariant suite
presets   list the named experiment presets

Exit codes: 0 success, 1 invariant failure, 2 usage error, 3 I/O error.
``JADCE_SEED`` provides the seed when no flag is given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import pipeline
from .harness import (ExperimentSpec, PRESET_NAMES, get_preset, run_experiment)
from .scenario import SystemConfig, make_instance, save_instance, substream
from .selftest import selftest


def _default_seed(args_seed):
    if args_seed is not None:
        return args_seed
    return int(os.environ.get("JADCE_SEED", "0"))


def _load_config(path: str, seed) -> SystemConfig:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read config {path!r}: {exc}", file=sys.stderr)
        sys.exit(3)
    if seed is not None:
        d["seed"] = seed
    return SystemConfig(**d)


def _cmd_gen(args) -> int:
    cfg = _load_config(args.config, _default_seed(args.seed))
    inst = make_instance(cfg)
    try:
        save_instance(args.out, inst)
    except OSError as exc:
        print(f"error: cannot write {args.out!r}: {exc}", file=sys.stderr)
        return 3
    print(f"wrote instance to {args.out} "
          f"(L={cfg.pilot_len}, N={cfg.n_devices}, M={cfg.n_antennas}, K={inst.activity.k})")
    return 0


def _cmd_run(args) -> int:
    cfg = _load_config(args.config, _default_seed(args.seed))
    inst = make_instance(cfg)
    runners = {
        "dr_jadce": pipeline.run_dr_jadce,
        "l21": pipeline.run_l21,
        "somp": pipeline.run_somp,
        "oracle_mmse": pipeline.run_oracle_mmse,
    }
    print(f"{'algo':<12} {'AER':>8} {'missed':>6} {'false':>6} {'NMSE dB':>9} {'ms':>8}")
    for name in args.algos:
        res = runners[name](inst)
        nmse = f"{res.nmse_db:9.2f}" if res.nmse_db is not None else "      n/a"
        print(f"{name:<12} {res.aer:8.4f} {res.missed:6d} {res.false_alarms:6d} "
              f"{nmse} {res.runtime_ms:8.1f}")
    return 0


def _cmd_sweep(args) -> int:
    if args.preset:
        spec = get_preset(args.preset, desk=args.desk, trials=args.trials,
                          seed=_default_seed(args.seed))
    else:
        try:
            with open(args.spec) as fh:
                spec = ExperimentSpec.from_json(fh.read())
        except OSError as exc:
            print(f"error: cannot read spec {args.spec!r}: {exc}", file=sys.stderr)
            return 3
        if args.trials:
            spec.trials = args.trials
        if args.seed is not None:
            spec.seed = args.seed
    spec.out_path = args.out
    spec.jobs = args.jobs
    if args.no_timing:
        spec.record_timing = False
    try:
        path = run_experiment(spec)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {path}")
    return 0


def _cmd_selftest(args) -> int:
    return 0 if selftest(verbose=True) else 1


def _cmd_presets(args) -> int:
    for name in PRESET_NAMES:
        spec = get_preset(name, desk=args.desk)
        b = spec.base
        print(f"{name:<15} mode={spec.mode:<8} sweep={spec.sweep_param}={spec.sweep_values} "
              f"N={b.n_devices} M={b.n_antennas} L={b.pilot_len} trials={spec.trials}")
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="drjadce", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="dump one synthetic instance")
    g.add_argument("--config", required=True, help="JSON file with SystemConfig fields")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int)
    g.set_defaults(fn=_cmd_gen)

    r = sub.add_parser("run", help="run algorithms on one instance")
    r.add_argument("--config", required=True)
    r.add_argument("--algos", nargs="+", default=["dr_jadce", "l21", "somp"],
                   choices=["dr_jadce", "l21", "somp", "oracle_mmse"])
    r.add_argument("--seed", type=int)
    r.set_defaults(fn=_cmd_run)

    s = sub.add_parser("sweep", help="Monte-Carlo sweep to CSV")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", help="JSON ExperimentSpec")
    src.add_argument("--preset", choices=PRESET_NAMES)
    s.add_argument("--desk", action="store_true", help="desk-scale preset variant")
    s.add_argument("--out", required=True)
    s.add_argument("--trials", type=int)
    s.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    s.add_argument("--seed", type=int)
    s.add_argument("--no-timing", action="store_true",
                   help="write runtime_ms as 0 for byte-identical reruns")
    s.set_defaults(fn=_cmd_sweep)

    t = sub.add_parser("selftest", help="run the invariant suite")
    t.set_defaults(fn=_cmd_selftest)

    p = sub.add_parser("presets", help="list experiment presets")
    p.add_argument("--desk", action="store_true")
    p.set_defaults(fn=_cmd_presets)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
