"""Command-line interface: ``mibdetect {synth,rank,train,eval,predict}``.

Errors go to stderr as ``mibdetect: error[<Kind>]: <message>`` and exit 1;
usage errors exit 2.
"""

import argparse
import csv
import sys

from . import __version__
from .dataset import MibSchema, class_distribution, project, read_csv, v_number, write_csv
from .errors import MibError, MissingColumn, SchemaMismatch
from .evaluate import EvalReport, confusion
from .experiment import CLASSIFIERS, PLANS, ExperimentSpec, run_grid, write_outputs
from .featsel import info_gain_scores, relieff_scores, top_n
from .forest import ForestConfig, RandomForest, oob_error, train_forest
from .modelfile import load_model, save_model
from .synth import default_scenario, generate, load_scenario, save_scenario
from .trees import TreeConfig, grow_c45, grow_rep

PROG = "mibdetect"


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _csv_list(choices):
    def parse(text):
        items = [t.strip() for t in text.split(",") if t.strip()]
        bad = [t for t in items if t not in choices]
        if not items or bad:
            raise argparse.ArgumentTypeError(
                f"expected a comma list drawn from {','.join(choices)}, got {text!r}")
        return tuple(items)
    return parse


def _feature_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _vline(names):
    return ",".join(sorted((v_number(n) for n in names), key=lambda v: int(v[1:])))


def _print_distribution(data, out):
    dist = class_distribution(data)
    print(f"{len(data)} rows, {len(dist)} classes", file=out)
    for label in sorted(dist):
        print(f"  {label:<14} {dist[label]}", file=out)


def cmd_synth(args, out):
    if args.config:
        config = load_scenario(args.config)
    else:
        config = default_scenario()
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.rows_per_class is not None:
        config = config.with_rows(args.rows_per_class)
    if args.noise is not None:
        config = config.with_noise(args.noise)
    data = generate(config)
    write_csv(data, args.out)
    if args.save_config:
        save_scenario(config, args.save_config)
    print(f"wrote {args.out}", file=out)
    _print_distribution(data, out)


def cmd_rank(args, out):
    data = read_csv(args.data)
    if args.evaluator == "infogain":
        ranking = info_gain_scores(data)
    else:
        ranking = relieff_scores(data, k_neighbors=args.k_neighbors,
                                 sample_size=args.sample_size, seed=args.seed)
    print(ranking.render(), file=out)
    if args.top is not None:
        names = top_n(ranking, min(args.top, len(ranking.scores)))
        print(f"top {len(names)}: {_vline(names)}", file=out)
        print(f"rank order: {','.join(names)}", file=out)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            ranking.write_csv(fh)


def _tree_config(args):
    return TreeConfig(min_leaf=args.min_leaf, confidence=args.confidence,
                      rep_prune_fraction=args.prune_fraction, max_depth=args.max_depth,
                      seed=args.seed, prune=not args.no_prune)


def cmd_train(args, out):
    data = read_csv(args.data)
    if args.features:
        data = project(data, _feature_list(args.features))
    if args.model == "forest":
        base = TreeConfig(min_leaf=args.min_leaf if args.min_leaf_set else 1,
                          max_depth=args.max_depth, prune=False, seed=args.seed)
        config = ForestConfig(n_trees=args.trees, features_per_split=args.features_per_split,
                              seed=args.seed, base=base)
        model = train_forest(data, config, n_jobs=args.jobs)
        print(f"forest: {len(model.trees)} trees, {model.size} nodes total, "
              f"OOB error {oob_error(model, data):.4f}", file=out)
    else:
        grow = grow_c45 if args.model == "c45" else grow_rep
        model = grow(data, _tree_config(args))
        print(f"{args.model} tree: {model.size} nodes, {model.n_leaves} leaves, depth {model.depth}",
              file=out)
    save_model(model, args.out)
    print(f"wrote {args.out}", file=out)


def cmd_eval(args, out):
    spec = ExperimentSpec(args.data, args.classifiers, args.plans, args.folds, args.seed,
                          args.out, args.trees, args.k_neighbors, args.jobs)
    data = read_csv(spec.data_path)
    result = run_grid(data, spec)
    paths = write_outputs(result, spec.out_dir)
    print(result.render_summary(), file=out)
    print(f"\n{len(result.reports)} cells in {result.seconds:.1f} s; "
          f"wrote {len(paths)} files to {spec.out_dir}", file=out)


def cmd_predict(args, out):
    model = load_model(args.model)
    try:
        data = read_csv(args.data, MibSchema(model.feature_names), require_label=False)
    except MissingColumn as exc:
        raise SchemaMismatch(f"data does not match the model's features: {exc}") from None
    proba = model.predict_proba(data.X)
    codes = proba.argmax(axis=1)
    predicted = [model.label_set[c] for c in codes]

    sink = open(args.out, "w", newline="", encoding="utf-8") if args.out else out
    try:
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(["row", "predicted", *(f"p_{c}" for c in model.label_set)])
        for i, label in enumerate(predicted, start=1):
            writer.writerow([i, label, *(f"{p:.6f}" for p in proba[i - 1])])
    finally:
        if args.out:
            sink.close()
    if data.labeled:
        kind = "RandomForest" if isinstance(model, RandomForest) else model.kind
        report = EvalReport.from_matrix(confusion(zip(data.labels, predicted)), model=kind)
        report_out = out if args.out else sys.stderr
        print(report.render(), file=report_out)


def build_parser():
    parser = argparse.ArgumentParser(
        prog=PROG, description="DoS anomaly detection on SNMP-MIB IP-group counters.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a labeled synthetic dataset")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="scenario JSON file")
    src.add_argument("--default", action="store_true", help="use the built-in 7-class scenario")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--rows-per-class", type=_positive_int)
    p.add_argument("--noise", type=float, help="set every noise_scale to this value")
    p.add_argument("--save-config", help="also write the effective scenario JSON here")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("rank", help="rank attributes with InfoGain or ReliefF")
    p.add_argument("--data", required=True)
    p.add_argument("--evaluator", choices=("infogain", "relieff"), default="infogain")
    p.add_argument("--top", type=_positive_int, help="also print the top-N subset")
    p.add_argument("--out", help="write the ranking as CSV")
    p.add_argument("--k-neighbors", type=_positive_int, default=10)
    p.add_argument("--sample-size", type=_positive_int, help="ReliefF instances to sample (default all)")
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("train", help="train a model and save it as JSON")
    p.add_argument("--data", required=True)
    p.add_argument("--model", choices=CLASSIFIERS, required=True)
    p.add_argument("--out", required=True, help="model file path")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--features", help="comma list of features to train on (default all)")
    p.add_argument("--min-leaf", type=_positive_int)
    p.add_argument("--confidence", type=float, default=0.25, help="C4.5 pruning confidence")
    p.add_argument("--prune-fraction", type=float, default=1.0 / 3.0, help="REP prune-set share")
    p.add_argument("--max-depth", type=int)
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--trees", type=_positive_int, default=100)
    p.add_argument("--features-per-split", type=_positive_int)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="run the classifier x feature-plan grid")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--classifiers", type=_csv_list(CLASSIFIERS), default=CLASSIFIERS)
    p.add_argument("--plans", type=_csv_list(PLANS), default=PLANS)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--trees", type=_positive_int, default=100)
    p.add_argument("--k-neighbors", type=_positive_int, default=10)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="classify rows with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", help="predictions CSV (default stdout)")
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "train":
        args.min_leaf_set = args.min_leaf is not None
        if args.min_leaf is None:
            args.min_leaf = 2
    try:
        args.func(args, out)
    except MibError as exc:
        print(f"{PROG}: error[{exc.kind}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{PROG}: error[IO]: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
