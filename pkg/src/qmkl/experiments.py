"""Experiment harness: model comparison, hyperparameter grids, statistics.

Protocol per instance: derive a seed, build (circles) or split (credit) the
data, assemble the kernel machine for the requested variant, optionally
optimize the kernel weights on the designated training subset, train the
final SVM on the full training Gram, and score both phases. Instances are
independent and aggregation is order-free, so runs are reproducible byte for
byte from (config, master_seed).
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .data import Dataset, generate_circles, load_dataset, load_german_credit, make_split
from .dqc1 import derive_seed
from .encoding import EncodingPattern
from .kernels import (
    EstimationMode,
    GramMatrix,
    KernelSpec,
    Provenance,
    basis_kernel_stack,
    combine_stack,
    cross_basis_kernel_stack,
    gram,
    gram_cross,
)
from .optimize import OptimizerConfig, SimplexPoint, alternating_fit
from .svm import SvmConfig, accuracy, decide, train

MODEL_VARIANTS = ("sqkl", "fixed-qmkl", "qmkl")


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = "circles"  # "circles" | "german" | path to a dataset CSV
    variant: str = "qmkl"
    depth: int = 2
    pattern: str = "default"
    # circles generator
    n_per_class: int = 350
    ratio: float = 0.8
    noise_sigma: float = 0.1
    # credit data
    german_path: str | None = None
    # split protocol
    train_fraction: float = 0.75
    r: float = 0.6
    # weight optimizer
    h: float = 0.3
    max_evals: int = 500
    final_step: float = 1e-4
    # SVM
    box_c: float = 1.0
    svm_tol: float = 1e-3
    # trace estimation
    mode: str = "exact"  # "exact" | "shots:<count>"
    # protocol
    instance_count: int = 100
    master_seed: int = 0
    workers: int = 1
    out_dir: str | None = None
    trace_dir: str | None = None

    def validate(self) -> None:
        if self.variant not in MODEL_VARIANTS:
            raise ValueError(f"variant must be one of {MODEL_VARIANTS}, got {self.variant!r}")
        if self.instance_count < 1:
            raise ValueError("instance_count must be >= 1")
        if self.dataset == "german":
            if not self.german_path:
                raise ValueError("dataset 'german' requires german_path")
            if not os.path.exists(self.german_path):
                raise ValueError(f"german_path does not exist: {self.german_path}")
        elif self.dataset != "circles" and not os.path.exists(self.dataset):
            raise ValueError(f"dataset must be 'circles', 'german', or an existing CSV path, got {self.dataset!r}")
        EstimationMode.from_config_str(self.mode)  # raises on malformed mode strings


_CONFIG_KEY_ALIASES = {
    "instances": "instance_count",
    "out": "out_dir",
    "seed": "master_seed",
    "noise": "noise_sigma",
}
_CONFIG_TYPES = {
    "dataset": str,
    "variant": str,
    "depth": int,
    "pattern": str,
    "n_per_class": int,
    "ratio": float,
    "noise_sigma": float,
    "german_path": str,
    "train_fraction": float,
    "r": float,
    "h": float,
    "max_evals": int,
    "final_step": float,
    "box_c": float,
    "svm_tol": float,
    "mode": str,
    "instance_count": int,
    "master_seed": int,
    "workers": int,
    "out_dir": str,
    "trace_dir": str,
}


def parse_config_file(path) -> dict:
    """Read a ``key = value`` text file; '#' starts a comment."""
    values = {}
    with open(path) as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_number}: expected 'key = value', got {line!r}")
            key, _, raw = line.partition("=")
            key = _CONFIG_KEY_ALIASES.get(key.strip(), key.strip())
            if key not in _CONFIG_TYPES:
                raise ValueError(f"{path}:{line_number}: unknown config key {key!r}")
            values[key] = _CONFIG_TYPES[key](raw.strip())
    return values


def config_from_file(path, **overrides) -> ExperimentConfig:
    values = parse_config_file(path)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


@dataclass(frozen=True)
class ResultStats:
    """Per-instance accuracies plus failures; aggregates are recomputed on demand."""

    train_accuracies: np.ndarray = field(repr=False)
    test_accuracies: np.ndarray = field(repr=False)
    instance_indices: np.ndarray = field(repr=False)
    failed_instances: tuple = ()

    def __post_init__(self):
        for name in ("train_accuracies", "test_accuracies"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        idx = np.asarray(self.instance_indices, dtype=int).copy()
        idx.flags.writeable = False
        object.__setattr__(self, "instance_indices", idx)

    @property
    def n_instances(self) -> int:
        return self.train_accuracies.size

    def summary(self, phase: str) -> dict:
        """Mean, population std, and quartile statistics (linear interpolation)."""
        arr = {"train": self.train_accuracies, "test": self.test_accuracies}[phase]
        if arr.size == 0:
            return {}
        return {
            "mean": float(np.mean(arr)),
            "std": float(np.std(arr)),  # population std over instances
            "median": float(np.median(arr)),
            "q25": float(np.percentile(arr, 25)),
            "q75": float(np.percentile(arr, 75)),
            "min": float(np.min(arr)),
            "max": float(np.max(arr)),
        }

    def to_dict(self) -> dict:
        return {
            "instances": [int(i) for i in self.instance_indices],
            "train_accuracies": [float(a) for a in self.train_accuracies],
            "test_accuracies": [float(a) for a in self.test_accuracies],
            "failed_instances": [list(f) for f in self.failed_instances],
            "train_summary": self.summary("train"),
            "test_summary": self.summary("test"),
        }


def _pattern_for(config: ExperimentConfig, num_qubits: int) -> EncodingPattern:
    return EncodingPattern.from_config_str(config.pattern, num_qubits)


def _variant_weights(variant: str, num_states: int) -> SimplexPoint:
    if variant == "sqkl":
        return SimplexPoint.one_hot(num_states, 0)
    return SimplexPoint.uniform(num_states)


def _instance_dataset(config: ExperimentConfig, fixed: Dataset | None, index: int) -> Dataset:
    if fixed is not None:
        return fixed
    seed = derive_seed(config.master_seed, "instance", index, "data")
    return generate_circles(config.n_per_class, config.ratio, config.noise_sigma, seed)


def _load_fixed_dataset(config: ExperimentConfig) -> Dataset | None:
    """Datasets that are fixed across instances (only splits vary)."""
    if config.dataset == "german":
        return load_german_credit(config.german_path)
    if config.dataset != "circles":
        return load_dataset(config.dataset)
    return None


def run_instance(config: ExperimentConfig, fixed: Dataset | None, index: int):
    """One seeded instance; returns (index, train_accuracy, test_accuracy)."""
    ds = _instance_dataset(config, fixed, index)
    split_seed = derive_seed(config.master_seed, "instance", index, "split")
    split = make_split(ds.n_samples, config.train_fraction, config.r, split_seed)
    x_train = ds.features[split.train_indices]
    y_train = ds.labels[split.train_indices].astype(float)
    x_test = ds.features[split.test_indices]
    y_test = ds.labels[split.test_indices].astype(float)
    # positions of the optimization subset within the (sorted) training block
    opt_positions = np.searchsorted(split.train_indices, split.opt_subset_indices)

    n = ds.n_features
    pattern = _pattern_for(config, n)
    num_states = 1 << n
    svm_config = SvmConfig(box_c=config.box_c, tol=config.svm_tol)
    estimation = EstimationMode.from_config_str(
        config.mode, derive_seed(config.master_seed, "instance", index, "gram")
    )

    if estimation.kind == "exact":
        carrier = KernelSpec.fixed_qmkl(n, config.depth, pattern)
        stack_train = basis_kernel_stack(x_train, carrier)
        stack_cross = cross_basis_kernel_stack(x_train, x_test, carrier)

        def builder(point: SimplexPoint) -> GramMatrix:
            return GramMatrix(combine_stack(stack_train, point.weights), Provenance("exact"))

        if config.variant == "qmkl":
            opt_config = OptimizerConfig(
                initial_step=config.h,
                max_evals=config.max_evals,
                final_step=config.final_step,
                seed=derive_seed(config.master_seed, "instance", index, "opt"),
            )
            trace_path = None
            if config.trace_dir:
                os.makedirs(config.trace_dir, exist_ok=True)
                trace_path = os.path.join(config.trace_dir, f"trace-{index:04d}.csv")
            weights, model = alternating_fit(
                builder,
                y_train,
                opt_positions,
                svm_config,
                opt_config,
                num_states,
                trace_path=trace_path,
            )
        else:
            weights = _variant_weights(config.variant, num_states)
            model = train(
                builder(weights),
                y_train,
                box_c=svm_config.box_c,
                tol=svm_config.tol,
                fit_bias=svm_config.fit_bias,
            )
        train_values = builder(weights).values
        cross_values = combine_stack(stack_cross, weights.weights)
    else:
        def spec_for(point: SimplexPoint) -> KernelSpec:
            return KernelSpec.qmkl(n, config.depth, point.weights, pattern, estimation)

        def builder(point: SimplexPoint) -> GramMatrix:
            return gram(x_train, spec_for(point))

        if config.variant == "qmkl":
            opt_config = OptimizerConfig(
                initial_step=config.h,
                max_evals=config.max_evals,
                final_step=config.final_step,
                seed=derive_seed(config.master_seed, "instance", index, "opt"),
            )
            weights, model = alternating_fit(
                builder, y_train, opt_positions, svm_config, opt_config, num_states
            )
        else:
            weights = _variant_weights(config.variant, num_states)
            model = train(
                builder(weights),
                y_train,
                box_c=svm_config.box_c,
                tol=svm_config.tol,
                fit_bias=svm_config.fit_bias,
            )
        train_values = builder(weights).values
        cross_values = gram_cross(x_train, x_test, spec_for(weights))

    train_acc = accuracy(decide(model, train_values), y_train)
    test_acc = accuracy(decide(model, cross_values), y_test)
    return index, float(train_acc), float(test_acc)


def _run_instance_payload(payload):
    config, fixed, index = payload
    return run_instance(config, fixed, index)


def run_experiment(config: ExperimentConfig) -> ResultStats:
    """Run all instances, aggregate, and (optionally) write CSV/JSON outputs."""
    config.validate()
    fixed = _load_fixed_dataset(config)
    indices = list(range(config.instance_count))
    results = []
    failures = []
    if config.workers > 1:
        payloads = [(config, fixed, i) for i in indices]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = {pool.submit(_run_instance_payload, p): p[2] for p in payloads}
            for future, i in futures.items():
                try:
                    results.append(future.result())
                except Exception as exc:  # noqa: BLE001 - per-instance isolation
                    failures.append((i, f"{type(exc).__name__}: {exc}"))
    else:
        for i in indices:
            try:
                results.append(run_instance(config, fixed, i))
            except Exception as exc:  # noqa: BLE001 - per-instance isolation
                failures.append((i, f"{type(exc).__name__}: {exc}"))
    results.sort(key=lambda row: row[0])
    failures.sort(key=lambda row: row[0])
    stats = ResultStats(
        train_accuracies=np.array([r[1] for r in results], dtype=float),
        test_accuracies=np.array([r[2] for r in results], dtype=float),
        instance_indices=np.array([r[0] for r in results], dtype=int),
        failed_instances=tuple(failures),
    )
    if config.out_dir:
        write_outputs(config, stats)
    return stats


def failure_fraction(config: ExperimentConfig, stats: ResultStats) -> float:
    return len(stats.failed_instances) / config.instance_count


def write_outputs(config: ExperimentConfig, stats: ResultStats) -> None:
    os.makedirs(config.out_dir, exist_ok=True)
    with open(os.path.join(config.out_dir, "instances.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance", "train_accuracy", "test_accuracy"])
        for i, tr, te in zip(stats.instance_indices, stats.train_accuracies, stats.test_accuracies):
            writer.writerow([int(i), repr(float(tr)), repr(float(te))])
    summary = {"config": asdict(config), "results": stats.to_dict()}
    with open(os.path.join(config.out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")


def emit_boxplot_data(stats: ResultStats, path) -> None:
    """Five-number summaries plus raw points, one block per phase.

    Whiskers are the observed minimum and maximum; box edges are the 25th and
    75th percentiles under linear interpolation.
    """
    if stats.n_instances == 0:
        raise ValueError("no per-instance results to summarize")
    payload = {}
    for phase, arr in (("train", stats.train_accuracies), ("test", stats.test_accuracies)):
        s = stats.summary(phase)
        payload[phase] = {
            "median": s["median"],
            "q25": s["q25"],
            "q75": s["q75"],
            "whisker_low": s["min"],
            "whisker_high": s["max"],
            "points": [float(a) for a in arr],
        }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def stats_from_summary_json(path) -> ResultStats:
    with open(path) as fh:
        summary = json.load(fh)
    results = summary["results"] if "results" in summary else summary
    return ResultStats(
        train_accuracies=np.array(results["train_accuracies"], dtype=float),
        test_accuracies=np.array(results["test_accuracies"], dtype=float),
        instance_indices=np.array(results["instances"], dtype=int),
        failed_instances=tuple(tuple(f) for f in results.get("failed_instances", [])),
    )


def tune(config: ExperimentConfig, d_values, h_values, tuning_instances: int = 20) -> dict:
    """Grid search over encoding depth and initial trust radius.

    Each cell reruns the experiment with ``tuning_instances`` instances and
    reports the mean test accuracy; the report carries the argmax cell.
    """
    d_values = [int(d) for d in d_values]
    h_values = [float(h) for h in h_values]
    if not d_values or not h_values:
        raise ValueError("tuning grids must be non-empty")
    rows = []
    for d in d_values:
        for h in h_values:
            cell_config = replace(
                config,
                depth=d,
                h=h,
                instance_count=tuning_instances,
                out_dir=None,
                trace_dir=None,
            )
            stats = run_experiment(cell_config)
            mean_test = stats.summary("test").get("mean", float("nan"))
            rows.append({"d": d, "h": h, "mean_test_accuracy": mean_test})
    best = max(rows, key=lambda row: row["mean_test_accuracy"])
    report = {
        "grid": rows,
        "best": best,
        "tuning_instances": tuning_instances,
        "variant": config.variant,
        "dataset": config.dataset,
    }
    if config.out_dir:
        os.makedirs(config.out_dir, exist_ok=True)
        with open(os.path.join(config.out_dir, "tuning.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["d", "h", "mean_test_accuracy"])
            for row in rows:
                writer.writerow([row["d"], repr(row["h"]), repr(row["mean_test_accuracy"])])
        with open(os.path.join(config.out_dir, "tuning.json"), "w") as fh:
            json.dump(report, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return report
