"""``rigsplit`` command line: synth, cluster, solve, eval and sweep."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import errors
from .clustering import (DEFAULT_P, DEFAULT_SEED, Clustering, cluster_model, load_clustering,
                         save_clustering, whole_face)
from .metrics import evaluate, structural_metrics
from .model_io import load_animation, load_model, save_animation, save_model
from .offsets import compute_offsets
from .pipeline import SweepConfig, cluster_summary, solve_clustered, sweep, sweep_csv
from .solver import DEFAULT_NOISE, save_submodels, train
from .synth import (DEFAULT_SPARSITY, DEFAULT_TEST_FRAMES, DEFAULT_TRAIN_FRAMES, SynthSpec,
                    generate_model, generate_train_test)

log = logging.getLogger("rigsplit")

USAGE_ERRORS = (errors.ParseError, errors.ValidationError, errors.InvalidK, errors.SpecError,
                errors.DimensionError, FileNotFoundError, IsADirectoryError)


class UsageError(Exception):
    pass


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return v


def _unit_interval(text):
    v = float(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1], got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _write_text(path, text):
    if str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def _write_json(path, doc):
    _write_text(path, json.dumps(doc, indent=1) + "\n")


def _check_K(K, n):
    if not 1 <= K <= n:
        raise UsageError(f"-K must lie in [1, {n}], got {K}")


# --- subcommands -----------------------------------------------------------------

def cmd_synth(args) -> int:
    spec = SynthSpec(n=args.n, m=args.m, K_true=args.k_true, inactive_fraction=args.inactive,
                     cross_talk=args.cross_talk, seed=args.seed)
    model, planted = generate_model(spec)
    save_model(model, args.output)
    if args.planted:
        save_clustering(planted, args.planted)
    if args.train or args.test:
        tr, te = generate_train_test(model, planted, args.n_train, args.n_test,
                                     sparsity=args.sparsity, seed=args.seed,
                                     mesh_noise=args.mesh_noise)
        if args.train:
            save_animation(tr, args.train)
        if args.test:
            save_animation(te, args.test)
    log.info("wrote model with n=%d vertices, m=%d controllers", model.num_vertices,
             model.num_controllers)
    return 0


def cmd_cluster(args) -> int:
    model = load_model(args.model)
    _check_K(args.K, model.num_vertices)
    offsets = compute_offsets(model)
    if args.dump_offsets:
        np.savetxt(args.dump_offsets, offsets.values, delimiter=",", fmt="%.17g",
                   header=",".join(model.controller_names), comments="")
    clustering = cluster_model(model, args.K, args.p, args.seed, threads=args.threads,
                               offsets=offsets)
    save_clustering(clustering, args.output)
    if not args.quiet:
        print(cluster_summary(clustering))
        try:
            ncv, cpc, vpc = structural_metrics(clustering, model.num_vertices)
            print(f"NCV={ncv} CpC={cpc} VpC={vpc}")
        except errors.AllClustersEmpty:
            print("no cluster has controllers")
    return 0


def _load_clusters(args, model) -> Clustering:
    if args.clusters:
        clustering = load_clustering(args.clusters)
        clustering.check_partition(model.num_vertices)
        return clustering
    return whole_face(model, seed=args.seed)


def _emit_report(args, report):
    _write_json(args.output, report.to_dict())
    if args.csv:
        _write_text(args.csv, report.to_csv())
    if not args.quiet and str(args.output) != "-":
        print(f"mean_CE={report.mean_CE:.6g} mean_ME={report.mean_ME:.6g} "
              f"NCV={report.NCV} CpC={report.CpC} VpC={report.VpC}")


def cmd_solve(args) -> int:
    model = load_model(args.model)
    clustering = _load_clusters(args, model)
    train_set = load_animation(args.train, model)
    test_set = load_animation(args.test, model)
    if args.save_submodels:
        save_submodels(train(model, clustering, train_set, args.noise, threads=args.threads),
                       args.save_submodels)
    predicted, report = solve_clustered(model, clustering, train_set, test_set,
                                        noise=args.noise, clamp=args.clamp,
                                        threads=args.threads)
    if args.predictions:
        _write_json(args.predictions, {"weights": predicted.tolist()})
    _emit_report(args, report)
    return 0


def cmd_eval(args) -> int:
    model = load_model(args.model)
    clustering = _load_clusters(args, model)
    test_set = load_animation(args.test, model)
    try:
        doc = json.loads(Path(args.predictions).read_text(encoding="utf-8"))
        predicted = np.array(doc["weights"], dtype=np.float64)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise errors.ParseError(f"{args.predictions}: {exc}") from exc
    config = {"K": clustering.K, "p": clustering.p, "seed": clustering.seed, "noise": None}
    report = evaluate(model, clustering, predicted, test_set.weights, config)
    _emit_report(args, report)
    return 0


def cmd_sweep(args) -> int:
    model = load_model(args.model)
    for K in args.K:
        _check_K(K, model.num_vertices)
    train_set = load_animation(args.train, model)
    test_set = load_animation(args.test, model)
    config = SweepConfig(K_values=args.K, p_values=args.p, seed=args.seed, noise=args.noise,
                         clamp=args.clamp)
    rows = sweep(model, train_set, test_set, config, threads=args.threads)
    _write_text(args.output, sweep_csv(rows))
    return 0


# --- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--threads", type=_positive_int, default=1)
    common.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(
        prog="rigsplit",
        description="Cluster a blendshape rig in mesh and controller space and solve the "
                    "inverse rig per cluster.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic planted rig")
    p.add_argument("--n", type=_positive_int, default=2000)
    p.add_argument("--m", type=_positive_int, default=60)
    p.add_argument("--k-true", type=_positive_int, default=5)
    p.add_argument("--inactive", type=float, default=0.0)
    p.add_argument("--cross-talk", type=float, default=0.0)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--planted")
    p.add_argument("--train", help="also write a training animation here")
    p.add_argument("--test", help="also write a test animation here")
    p.add_argument("--n-train", type=_positive_int, default=DEFAULT_TRAIN_FRAMES)
    p.add_argument("--n-test", type=_positive_int, default=DEFAULT_TEST_FRAMES)
    p.add_argument("--sparsity", type=_unit_interval, default=DEFAULT_SPARSITY)
    p.add_argument("--mesh-noise", type=float, default=0.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("cluster", parents=[common], help="two-fold clustering of a model")
    p.add_argument("--model", required=True)
    p.add_argument("-K", type=int, required=True)
    p.add_argument("-p", type=_unit_interval, default=DEFAULT_P)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--dump-offsets", help="write the normalized offset matrix as CSV")
    p.set_defaults(func=cmd_cluster)

    for name, func, helptext in (("solve", cmd_solve, "train per-cluster GPR and score a test set"),
                                 ("eval", cmd_eval, "score saved predictions")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--model", required=True)
        p.add_argument("--clusters", help="clusters.json; omit for the whole-face baseline")
        p.add_argument("--test", required=True)
        p.add_argument("-o", "--output", default="-")
        p.add_argument("--csv", help="per-frame CE/ME table")
        if name == "solve":
            p.add_argument("--train", required=True)
            p.add_argument("--noise", type=_positive_float, default=DEFAULT_NOISE)
            p.add_argument("--clamp", action="store_true", help="clip weights to [0, 1]")
            p.add_argument("--predictions", help="write predicted weights as JSON")
            p.add_argument("--save-submodels", help="write trained submodels as JSON")
        else:
            p.add_argument("--predictions", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", parents=[common], help="evaluate a grid of K and p values")
    p.add_argument("--model", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("-K", type=int, nargs="+", required=True)
    p.add_argument("-p", type=_unit_interval, nargs="+", default=[DEFAULT_P])
    p.add_argument("--noise", type=_positive_float, default=DEFAULT_NOISE)
    p.add_argument("--clamp", action="store_true")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s: %(message)s")
    if args.quiet:
        warnings.simplefilter("ignore")
    try:
        return args.func(args)
    except (UsageError, *USAGE_ERRORS) as exc:
        print(f"rigsplit {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except errors.RigsplitError as exc:
        print(f"rigsplit {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
