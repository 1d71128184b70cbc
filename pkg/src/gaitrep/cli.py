"""Command line entry points.

Subcommands cover the full workflow: grow a repertoire (``evolve``), run the
control algorithms (``baseline``), recompute coverage metrics from persisted
archives (``metrics``), pick the per-region transfer candidates
(``select30``), score a selection in the pseudo-real world
(``transfer-eval``), replay one genotype (``replay``), and spread target
points (``targets``).  Every run with the same config and seed writes byte
identical CSVs.
"""

import argparse
import re
import sys
from pathlib import Path

import numpy as np

from .experiments import run_per_target_suite, run_reference, run_repertoire
from .gait import LEVELS, N_PARAMS
from .io import (
    ConfigError,
    RunConfig,
    load_config,
    read_archive_csv,
    write_accuracy_csv,
    write_archive_csv,
    write_metrics_csv,
    write_stats_csv,
    write_targets_csv,
    write_transfers_csv,
)
from .metrics import (
    median_orientation_error,
    quartiles,
    select_best_per_region,
    sparseness,
    transferable_count,
)
from .baselines import kmeans_targets
from .simulator import simulate


def _add_common(parser, default_out=None):
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    if default_out is not None:
        parser.add_argument(
            "--out", default=None, help=f"output location (default: {default_out})"
        )


def _load(args, need_seed):
    config = load_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if need_seed and config.seed is None:
        raise ConfigError("a seed is required (config key 'seed' or --seed)")
    return config


def _out_dir(args, config):
    return Path(args.out) if args.out else Path(config.output_dir)


def _write_repertoire_outputs(run, out_dir):
    write_archive_csv(out_dir / "archive.csv", run.archive_rows)
    write_archive_csv(out_dir / "population.csv", run.population_rows)
    write_metrics_csv(out_dir / "metrics.csv", run.metrics)
    write_stats_csv(out_dir / "stats.csv", run.stats)
    if run.transfers:
        write_transfers_csv(out_dir / "transfers.csv", run.transfers)
    for evaluations, rows in run.snapshots:
        write_archive_csv(
            out_dir / "snapshots" / f"archive_eval{evaluations}.csv", rows
        )


def _cmd_evolve(args):
    config = _load(args, need_seed=True)
    if config.algorithm not in (None, "tbr"):
        raise ConfigError(
            f"config selects algorithm {config.algorithm!r}; use the baseline subcommand"
        )
    run = run_repertoire(config, "tbr")
    out_dir = _out_dir(args, config)
    _write_repertoire_outputs(run, out_dir)
    print(
        f"tbr seed={run.seed}: {len(run.archive_rows)} archive members, "
        f"{run.n_evaluations} evaluations, {len(run.transfers)} transfers -> {out_dir}"
    )
    return 0


def _cmd_baseline(args):
    config = _load(args, need_seed=True)
    if config.algorithm not in (None, args.kind):
        raise ConfigError(
            f"config selects algorithm {config.algorithm!r} but subcommand asked for {args.kind!r}"
        )
    out_dir = _out_dir(args, config)
    if args.kind in ("ns", "nslc"):
        run = run_repertoire(config, args.kind)
        _write_repertoire_outputs(run, out_dir)
        print(
            f"{args.kind} seed={run.seed}: {len(run.archive_rows)} archive members, "
            f"{run.n_evaluations} evaluations -> {out_dir}"
        )
    elif args.kind in ("nearest", "orientation"):
        run = run_per_target_suite(config)
        rows = run.nearest_rows if args.kind == "nearest" else run.oriented_rows
        write_archive_csv(out_dir / "archive.csv", rows)
        write_targets_csv(out_dir / "targets.csv", run.targets)
        note = f", {run.fallback_count} fallbacks" if args.kind == "orientation" else ""
        print(
            f"{args.kind} seed={run.seed}: {len(rows)} picks, "
            f"{run.n_evaluations} evaluations{note} -> {out_dir}"
        )
    else:  # reference
        run = run_reference(config)
        write_archive_csv(out_dir / "archive.csv", [run.pick_row])
        write_archive_csv(out_dir / "population.csv", run.population_rows)
        write_transfers_csv(out_dir / "transfers.csv", run.transfers)
        feasible = "yes" if run.feasible else "NO (closest member returned)"
        print(
            f"reference seed={run.seed}: accuracy {run.accuracy:.4f} m, "
            f"feasible pick: {feasible}, {len(run.transfers)} transfers, "
            f"{run.n_evaluations} evaluations -> {out_dir}"
        )
    return 0


def _evaluation_counts(paths, spec):
    if spec:
        counts = [int(v) for v in spec.split(",")]
        if len(counts) != len(paths):
            raise ConfigError("--evaluations must list one count per archive")
        return counts
    counts = []
    for p in paths:
        hit = re.search(r"_eval(\d+)", Path(p).name)
        if not hit:
            raise ConfigError(
                f"cannot infer evaluations from {p!r}; pass --evaluations"
            )
        counts.append(int(hit.group(1)))
    return counts


def _cmd_metrics(args):
    config = _load(args, need_seed=False)
    roi = config.region()
    grid = roi.grid(config.grid_step)
    counts = _evaluation_counts(args.archives, args.evaluations)
    rows = []
    for count, path in sorted(zip(counts, args.archives)):
        archive = read_archive_csv(path)
        if not archive:
            raise ConfigError(f"{path} holds no archive members")
        endpoints = np.array([[r.ex, r.ey] for r in archive])
        yaws = np.array([r.alpha for r in archive])
        t_hats = np.array([r.t_hat for r in archive])
        rows.append(
            (
                count,
                len(archive),
                sparseness(endpoints, grid),
                median_orientation_error(endpoints, yaws, roi),
                transferable_count(t_hats),
            )
        )
    if len({r[0] for r in rows}) != len(rows):
        raise ConfigError("evaluation counts must be distinct")
    out = Path(args.out) if args.out else Path("metrics.csv")
    write_metrics_csv(out, rows)
    for row in rows:
        print(
            f"eval={row[0]} size={row[1]} sparseness={row[2]:.6f} "
            f"median_orientation_error={row[3]:.6f} transferable={row[4]}"
        )
    print(f"-> {out}")
    return 0


def _cmd_select30(args):
    config = _load(args, need_seed=False)
    roi = config.region()
    archive = read_archive_csv(args.archive)
    if not archive:
        raise ConfigError(f"{args.archive} holds no archive members")
    endpoints = np.array([[r.ex, r.ey] for r in archive])
    t_hats = np.array([r.t_hat for r in archive])
    picked = select_best_per_region(endpoints, t_hats, roi)
    out = Path(args.out) if args.out else Path("selection.csv")
    write_archive_csv(out, [archive[i] for i in picked])
    print(f"{len(picked)} controllers selected -> {out}")
    return 0


def _cmd_transfer_eval(args):
    config = _load(args, need_seed=False)
    pseudo = config.pseudo_world()
    rows = read_archive_csv(args.selection)
    if not rows:
        raise ConfigError(f"{args.selection} holds no controllers")
    accuracies = []
    for row in rows:
        real = simulate(row.genotype_array(), pseudo)
        accuracies.append(
            float(np.hypot(row.ex - real.endpoint[0], row.ey - real.endpoint[1]))
        )
    out = Path(args.out) if args.out else Path("accuracy.csv")
    write_accuracy_csv(out, [r.uid for r in rows], accuracies)
    q1, median, q3 = quartiles(accuracies)
    print(f"accuracy over {len(rows)} controllers (m): "
          f"q1={q1:.4f} median={median:.4f} q3={q3:.4f} -> {out}")
    return 0


def _parse_genotype(text):
    parts = text.split(",")
    if len(parts) != N_PARAMS:
        raise ConfigError(f"genotype needs {N_PARAMS} comma-separated values")
    try:
        values = np.array([float(v) for v in parts])
    except ValueError as err:
        raise ConfigError(f"bad genotype value: {err}") from err
    if not np.isin(values, LEVELS).all():
        raise ConfigError(f"genotype values must be among {LEVELS.tolist()}")
    return values


def _cmd_replay(args):
    config = _load(args, need_seed=False)
    genotype = _parse_genotype(args.genotype)
    world = config.pseudo_world() if args.pseudo else config.sim_world()
    outcome = simulate(genotype, world)
    for x, y, yaw in outcome.trajectory.tolist():
        print(f"{x!r} {y!r} {yaw!r}")
    return 0


def _cmd_targets(args):
    config = _load(args, need_seed=True)
    targets = kmeans_targets(
        config.region(), count=config.targets_count, seed=config.seed,
        step=config.grid_step,
    )
    out = Path(args.out) if args.out else Path("targets.csv")
    write_targets_csv(out, targets)
    print(f"{len(targets)} targets -> {out}")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="gaitrep",
        description="Evolve and evaluate repertoires of hexapod walking gaits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="grow a repertoire with the full algorithm")
    _add_common(p, default_out="config output_dir")
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("baseline", help="run a control algorithm")
    p.add_argument(
        "kind", choices=["ns", "nslc", "nearest", "orientation", "reference"]
    )
    _add_common(p, default_out="config output_dir")
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("metrics", help="recompute coverage metrics from archive CSVs")
    p.add_argument("archives", nargs="+", help="archive CSVs (evaluations parsed from _eval<N> in names)")
    p.add_argument("--evaluations", help="comma-separated evaluation counts, one per archive")
    _add_common(p, default_out="metrics.csv")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("select30", help="pick the best transfer candidate per region")
    p.add_argument("archive", help="archive CSV to select from")
    _add_common(p, default_out="selection.csv")
    p.set_defaults(func=_cmd_select30)

    p = sub.add_parser("transfer-eval", help="score selected controllers in pseudo-reality")
    p.add_argument("selection", help="selection CSV to evaluate")
    _add_common(p, default_out="accuracy.csv")
    p.set_defaults(func=_cmd_transfer_eval)

    p = sub.add_parser("replay", help="print the trajectory of one genotype")
    p.add_argument("genotype", help=f"{N_PARAMS} comma-separated levels")
    p.add_argument("--pseudo", action="store_true", help="replay in the pseudo-real world")
    _add_common(p)
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("targets", help="spread target points over the region")
    _add_common(p, default_out="targets.csv")
    p.set_defaults(func=_cmd_targets)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as err:
        print(f"gaitrep: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
