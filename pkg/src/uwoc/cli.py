"""Command-line front end tying the simulation and learning pipeline together.

Commands:
  sweep      Monte Carlo FER/throughput grid -> CSV plus coverage summary JSON
  dataset    generate the labeled ML dataset CSV
  train      k-fold evaluation of one classifier -> metrics JSON
  switchopt  alternating optimization + classifier switching -> result JSON
  report     merge sweep/metrics files into plot-ready CSV tables

Every command is deterministic given its inputs and seed; the environment
variable UWOC_SEED overrides the configured seed.  Exit codes: 0 success,
2 configuration/schema error, 3 runtime contract error.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import config as cfgmod
from . import dataset as ds
from . import linksim, switchopt
from .errors import SchemaError, UwocError
from .mlcore import ClassifierSpec, evaluate
from .mlcore.metrics import ALL_KINDS


def _effective_seed(cfg, args):
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("UWOC_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SchemaError("UWOC_SEED must be an integer", "/seed") from None
    return int(cfg["seed"])


def _simulation_pieces(args):
    cfg = cfgmod.load_config(args.config)
    if getattr(args, "frames", None) is not None:
        cfg["simulation"]["frames_per_point"] = args.frames
    if getattr(args, "desk_scale", False):
        cfg["simulation"]["desk_scale"] = True
    return (cfg, cfgmod.link_params(cfg), cfgmod.ofdm_params(cfg),
            cfgmod.sim_options(cfg))


def _aggregate_fer(rows):
    """Sum frames/errors over repeats -> {(config, speed): [(d, fer), ...]}."""
    acc = {}
    for r in rows:
        key = (r.config, r.speed_m_s)
        cell = acc.setdefault(key, {})
        frames, errors = cell.get(r.distance_m, (0, 0))
        cell[r.distance_m] = (frames + r.n_frames, errors + r.n_frame_errors)
    return {
        key: sorted((d, e / f) for d, (f, e) in cell.items())
        for key, cell in acc.items()
    }


def cmd_sweep(args) -> int:
    cfg, link, ofdm, options = _simulation_pieces(args)
    seed = _effective_seed(cfg, args)
    plan = cfgmod.sweep_plan(cfg)
    rows = linksim.sweep(plan, seed, link=link, ofdm=ofdm, options=options,
                         parallelism=args.parallelism)
    linksim.write_sweep_csv(rows, args.out)
    summary = {"seed": seed, "fer_threshold": 0.1, "coverage_m": {}}
    for (cfg_idx, speed), pairs in sorted(_aggregate_fer(rows).items()):
        cov = linksim.coverage_distance(pairs, threshold=0.1)
        summary["coverage_m"].setdefault(f"config_{cfg_idx}", {})[
            repr(speed)] = cov
    out = args.summary or args.out + ".summary.json"
    with open(out, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.out} ({len(rows)} rows) and {out}")
    return 0


def cmd_dataset(args) -> int:
    cfg, link, ofdm, options = _simulation_pieces(args)
    seed = _effective_seed(cfg, args)
    plan = cfgmod.dataset_plan(cfg)
    samples, _ = ds.generate(plan, seed, link=link, ofdm=ofdm,
                             options=options)
    ds.save(samples, args.out)
    print(f"wrote {args.out} ({len(samples)} samples)")
    return 0


def cmd_train(args) -> int:
    cfg = cfgmod.load_config(args.config)
    seed = _effective_seed(cfg, args)
    samples = ds.load(args.dataset)
    spec = ClassifierSpec(kind=args.classifier, n_hidden=args.hidden,
                          n_epochs=args.epochs,
                          learning_rate=cfg["training"]["learning_rate"],
                          batch_size=int(cfg["training"]["batch_size"]),
                          seed=seed)
    report = evaluate(spec, samples, args.task, k=args.folds, seed=seed)
    payload = report.to_json(kind=args.classifier, task=args.task,
                             n_hidden=args.hidden, n_epochs=args.epochs,
                             folds=args.folds, seed=seed)
    with open(args.out, "w") as fh:
        fh.write(payload + "\n")
    print(f"wrote {args.out} (accuracy {report.accuracy:.4f})")
    return 0


def cmd_switchopt(args) -> int:
    cfg = cfgmod.load_config(args.config)
    if args.grid_hidden:
        cfg["switchopt"]["grid_hidden"] = [int(v) for v in
                                           args.grid_hidden.split(",")]
    if args.grid_epochs:
        cfg["switchopt"]["grid_epochs"] = [int(v) for v in
                                           args.grid_epochs.split(",")]
    if args.epsilon is not None:
        cfg["switchopt"]["epsilon"] = args.epsilon
    if args.beta is not None:
        cfg["switchopt"]["initial_epochs"] = args.beta
    if args.task is not None:
        cfg["switchopt"]["task"] = args.task
    seed = _effective_seed(cfg, args)
    params = cfgmod.switchopt_params(cfg, seed)
    samples = ds.load(args.dataset)
    result = switchopt.run_switchopt(samples, params)
    with open(args.out, "w") as fh:
        fh.write(result.to_json() + "\n")
    print(f"wrote {args.out} (u_opt {result.u_opt}, "
          f"N_h {result.n_h_opt}, N_p {result.n_p_opt}, "
          f"omega {result.omega:.4f})")
    return 0


def _write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def cmd_report(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    wrote = []
    if args.sweep:
        rows = linksim.read_sweep_csv(args.sweep)
        agg = _aggregate_fer(rows)
        frames = {}
        for r in rows:
            key = (r.config, r.speed_m_s, r.distance_m)
            f, e = frames.get(key, (0, 0))
            frames[key] = (f + r.n_frames, e + r.n_frame_errors)
        fer_rows, thr_rows = [], []
        for (cfg_idx, speed), pairs in sorted(agg.items()):
            link_cfg = linksim.config_by_index(cfg_idx)
            for d, fer in pairs:
                f, e = frames[(cfg_idx, speed, d)]
                fer_rows.append([str(cfg_idx), repr(speed), repr(d),
                                 str(f), str(e), repr(fer)])
                thr = linksim.throughput(link_cfg, cfgmod.ofdm_params(
                    cfgmod.load_config(None)), fer)
                thr_rows.append([str(cfg_idx), repr(speed), repr(d),
                                 repr(fer), repr(thr)])
        fer_path = os.path.join(args.out_dir, "fer_vs_distance.csv")
        thr_path = os.path.join(args.out_dir, "throughput_vs_distance.csv")
        _write_csv(fer_path,
                   "config,speed_mps,distance_m,n_frames,n_frame_errors,fer",
                   fer_rows)
        _write_csv(thr_path,
                   "config,speed_mps,distance_m,fer,throughput_bps",
                   thr_rows)
        wrote += [fer_path, thr_path]
    if args.metrics:
        acc_rows = []
        for path in args.metrics:
            with open(path) as fh:
                doc = json.load(fh)
            acc_rows.append([str(doc.get("kind", "?")),
                             str(doc.get("n_epochs", "?")),
                             str(doc.get("n_hidden", "?")),
                             repr(float(doc["accuracy"]))])
        acc_rows.sort()
        acc_path = os.path.join(args.out_dir, "accuracy_vs_epochs.csv")
        _write_csv(acc_path, "classifier,epochs,hidden,accuracy", acc_rows)
        wrote.append(acc_path)
    if not wrote:
        raise SchemaError("report needs --sweep and/or --metrics inputs", "/")
    print("wrote " + ", ".join(wrote))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uwoc",
        description="Underwater optical OFDM link simulator and "
                    "configuration-learning workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True, seed=True):
        if config:
            p.add_argument("--config", default=None,
                           help="JSON run configuration (defaults built in)")
        if seed:
            p.add_argument("--seed", type=int, default=None,
                           help="override the configured seed")

    p = sub.add_parser("sweep", help="run the FER/throughput grid")
    add_common(p)
    p.add_argument("--out", required=True, help="output sweep CSV")
    p.add_argument("--summary", default=None, help="coverage summary JSON")
    p.add_argument("--frames", type=int, default=None,
                   help="frames per point override")
    p.add_argument("--desk-scale", action="store_true",
                   help="use the 50-frames-per-point desk preset")
    p.add_argument("--parallelism", type=int, default=1,
                   help="concurrent grid cells (results identical for any N)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("dataset", help="generate the labeled ML dataset")
    add_common(p)
    p.add_argument("--out", required=True, help="output dataset CSV")
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--desk-scale", action="store_true")
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("train", help="k-fold evaluate one classifier")
    add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--task", required=True, choices=ds.TASKS)
    p.add_argument("--classifier", required=True, choices=ALL_KINDS)
    p.add_argument("--hidden", type=int, default=128)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--out", required=True, help="metrics JSON path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("switchopt", help="alternating optimization + switching")
    add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--task", default=None, choices=ds.TASKS)
    p.add_argument("--grid-hidden", default=None,
                   help="comma-separated hidden-unit grid")
    p.add_argument("--grid-epochs", default=None,
                   help="comma-separated epoch grid")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--beta", type=int, default=None,
                   help="initial epoch count")
    p.add_argument("--out", required=True, help="result JSON path")
    p.set_defaults(func=cmd_switchopt)

    p = sub.add_parser("report", help="emit plot-ready CSV tables")
    p.add_argument("--sweep", default=None, help="sweep CSV input")
    p.add_argument("--metrics", nargs="*", default=None,
                   help="metrics JSON inputs")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        json.dump({"error": "schema", "pointer": exc.pointer,
                   "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except UwocError as exc:
        json.dump({"error": type(exc).__name__.lower(),
                   "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 3
    except FileNotFoundError as exc:
        json.dump({"error": "missing-file", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
