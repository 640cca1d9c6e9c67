"""Command-line harness.

Subcommands: gen-circles, gram, train, experiment, tune, boxplot. Experiment
settings come from a ``key = value`` config file, with flags overriding
individual entries. Outputs are CSV tables and JSON summaries with no
timestamps, so identical (config, seed) runs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .data import generate_circles, load_dataset, save_dataset
from .encoding import EncodingPattern
from .kernels import (
    EstimationMode,
    KernelSpec,
    gram,
    load_gram_json,
    save_gram_csv,
    save_gram_json,
    validate_psd,
)
from .experiments import (
    ExperimentConfig,
    config_from_file,
    emit_boxplot_data,
    failure_fraction,
    run_experiment,
    stats_from_summary_json,
    tune,
)
from .svm import save_model_json, train

FAILURE_EXIT_THRESHOLD = 0.10


def _cmd_gen_circles(args) -> int:
    ds = generate_circles(args.n_per_class, args.ratio, args.noise, args.seed)
    save_dataset(ds, args.out)
    print(f"wrote {ds.n_samples} samples to {args.out}")
    return 0


def _spec_from_args(args, num_qubits: int) -> KernelSpec:
    pattern = EncodingPattern.from_config_str(args.pattern, num_qubits)
    estimation = EstimationMode.from_config_str(args.mode, args.seed)
    if args.variant == "sqkl":
        return KernelSpec.sqkl(num_qubits, args.depth, pattern, estimation)
    if args.variant == "fixed-qmkl":
        return KernelSpec.fixed_qmkl(num_qubits, args.depth, pattern, estimation)
    if args.weights:
        weights = np.array([float(w) for w in args.weights.split(",")])
    else:
        weights = np.full(1 << num_qubits, 1.0 / (1 << num_qubits))
    return KernelSpec.qmkl(num_qubits, args.depth, weights, pattern, estimation)


def _cmd_gram(args) -> int:
    ds = load_dataset(args.dataset)
    spec = _spec_from_args(args, ds.n_features)
    g = gram(ds.features, spec)
    save_gram_csv(g, args.out + ".csv")
    save_gram_json(g, args.out + ".json")
    report = validate_psd(g)
    status = "pass" if report.passed else ("warn" if report.warning_only else "FAIL")
    print(
        f"gram {g.n_rows}x{g.n_rows} ({g.provenance.kind}) min_eigenvalue={report.min_eigenvalue:.3e} [{status}]"
    )
    return 0


def _cmd_train(args) -> int:
    g = load_gram_json(args.gram)
    ds = load_dataset(args.dataset)
    model = train(
        g,
        ds.labels.astype(float),
        box_c=args.box_c,
        tol=args.tol,
        fit_bias=not args.no_bias,
        training_ref=args.gram,
    )
    save_model_json(model, args.out)
    print(f"trained on {g.n_rows} points, {len(model.support_indices)} support vectors")
    return 0


def _experiment_config(args) -> ExperimentConfig:
    overrides = {
        "variant": args.variant,
        "dataset": args.dataset,
        "depth": args.depth,
        "h": args.h,
        "r": args.r,
        "instance_count": args.instances,
        "master_seed": args.seed,
        "mode": args.mode,
        "out_dir": args.out,
        "workers": args.workers,
        "max_evals": args.max_evals,
        "german_path": args.german_path,
        "trace_dir": args.trace_dir,
    }
    if args.config:
        return config_from_file(args.config, **overrides)
    return ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})


def _cmd_experiment(args) -> int:
    config = _experiment_config(args)
    stats = run_experiment(config)
    train_summary = stats.summary("train")
    test_summary = stats.summary("test")
    if train_summary:
        print(
            f"{config.variant} on {config.dataset}: "
            f"train mean={100 * train_summary['mean']:.2f} std={100 * train_summary['std']:.2f}  "
            f"test mean={100 * test_summary['mean']:.2f} std={100 * test_summary['std']:.2f}  "
            f"({stats.n_instances}/{config.instance_count} instances)"
        )
    for index, message in stats.failed_instances:
        print(f"instance {index} failed: {message}", file=sys.stderr)
    if failure_fraction(config, stats) > FAILURE_EXIT_THRESHOLD:
        return 3
    return 0


def _cmd_tune(args) -> int:
    config = _experiment_config(args)
    d_values = [int(v) for v in args.d_values.split(",")]
    h_values = [float(v) for v in args.h_values.split(",")]
    report = tune(config, d_values, h_values, tuning_instances=args.instances or 20)
    best = report["best"]
    for row in report["grid"]:
        print(f"d={row['d']} h={row['h']}: mean test accuracy {100 * row['mean_test_accuracy']:.2f}")
    print(f"best cell: d={best['d']} h={best['h']}")
    return 0


def _cmd_boxplot(args) -> int:
    stats = stats_from_summary_json(args.summary)
    emit_boxplot_data(stats, args.out)
    print(f"wrote box-plot data for {stats.n_instances} instances to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmkl", description="DQC1 quantum multiple kernel learning harness"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-circles", help="generate the synthetic circles dataset")
    p.add_argument("--n-per-class", type=int, default=350)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path (JSON sidecar added)")
    p.set_defaults(func=_cmd_gen_circles)

    p = sub.add_parser("gram", help="compute a Gram matrix for a dataset")
    p.add_argument("--dataset", required=True, help="dataset CSV (from gen-circles or save_dataset)")
    p.add_argument("--variant", choices=("sqkl", "fixed-qmkl", "qmkl"), default="sqkl")
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--pattern", default="default")
    p.add_argument("--weights", default=None, help="comma-separated state weights (qmkl only)")
    p.add_argument("--mode", default="exact", help="exact | shots:<count>")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output prefix; writes <out>.csv and <out>.json")
    p.set_defaults(func=_cmd_gram)

    p = sub.add_parser("train", help="train an SVM on a precomputed Gram matrix")
    p.add_argument("--gram", required=True, help="gram JSON envelope")
    p.add_argument("--dataset", required=True, help="dataset CSV supplying the labels")
    p.add_argument("--box-c", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--no-bias", action="store_true", help="pin the bias at zero")
    p.add_argument("--out", required=True, help="model JSON path")
    p.set_defaults(func=_cmd_train)

    for name, helptext in (
        ("experiment", "run the seeded multi-instance benchmark protocol"),
        ("tune", "grid-search encoding depth and optimizer step on tuning instances"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", default=None, help="key = value config file")
        p.add_argument("--variant", choices=("sqkl", "fixed-qmkl", "qmkl"), default=None)
        p.add_argument("--dataset", default=None)
        p.add_argument("--depth", type=int, default=None)
        p.add_argument("--h", type=float, default=None)
        p.add_argument("--r", type=float, default=None)
        p.add_argument("--instances", type=int, default=None)
        p.add_argument("--max-evals", type=int, dest="max_evals", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--mode", default=None, help="exact | shots:<count>")
        p.add_argument("--out", default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--german-path", dest="german_path", default=None)
        p.add_argument("--trace-dir", dest="trace_dir", default=None)
        if name == "experiment":
            p.set_defaults(func=_cmd_experiment)
        else:
            p.add_argument("--d-values", dest="d_values", default="1,2,3")
            p.add_argument("--h-values", dest="h_values", default="0.1,0.3,0.5")
            p.set_defaults(func=_cmd_tune)

    p = sub.add_parser("boxplot", help="emit box-plot data from an experiment summary")
    p.add_argument("--summary", required=True, help="summary.json from an experiment run")
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=_cmd_boxplot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
