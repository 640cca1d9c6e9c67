"""Dataset generation, ingestion, scaling, and splitting.

Features are consumed by the encoding circuits as rotation angles, so every
loader min-max scales each feature onto [0, 2*pi) (the upper end is the
largest double below 2*pi, keeping one full period without wrapping the
maximum onto the minimum). Scaling is fit on the full dataset before any
split.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI_OPEN = float(np.nextafter(2.0 * math.pi, 0.0))  # largest double < 2*pi


@dataclass(frozen=True)
class ScaleRecord:
    """Per-feature affine map: [raw_min, raw_max] -> [target_lo, target_hi]."""

    raw_min: float
    raw_max: float
    target_lo: float = 0.0
    target_hi: float = TWO_PI_OPEN

    def to_dict(self) -> dict:
        return {
            "raw_min": self.raw_min,
            "raw_max": self.raw_max,
            "target_lo": self.target_lo,
            "target_hi": self.target_hi,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScaleRecord":
        return cls(d["raw_min"], d["raw_max"], d["target_lo"], d["target_hi"])


def scale_features(raw: np.ndarray):
    """Min-max scale each column to [0, 2*pi); returns (scaled, records).

    Constant columns map to the lower target bound.
    """
    raw = np.atleast_2d(np.asarray(raw, dtype=float))
    if not np.all(np.isfinite(raw)):
        raise ValueError("features must be finite")
    scaled = np.empty_like(raw)
    records = []
    for c in range(raw.shape[1]):
        lo = float(raw[:, c].min())
        hi = float(raw[:, c].max())
        records.append(ScaleRecord(lo, hi))
        if hi > lo:
            scaled[:, c] = (raw[:, c] - lo) * (TWO_PI_OPEN / (hi - lo))
        else:
            scaled[:, c] = 0.0
    return scaled, tuple(records)


def unscale_features(scaled: np.ndarray, records) -> np.ndarray:
    """Invert :func:`scale_features` through the stored records."""
    scaled = np.atleast_2d(np.asarray(scaled, dtype=float))
    raw = np.empty_like(scaled)
    for c, rec in enumerate(records):
        span = rec.target_hi - rec.target_lo
        if rec.raw_max > rec.raw_min:
            raw[:, c] = rec.raw_min + (scaled[:, c] - rec.target_lo) * (
                (rec.raw_max - rec.raw_min) / span
            )
        else:
            raw[:, c] = rec.raw_min
    return raw


@dataclass(frozen=True)
class Dataset:
    name: str
    features: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    scaling_record: tuple = ()
    seed: int | None = None

    def __post_init__(self):
        f = np.atleast_2d(np.asarray(self.features, dtype=float))
        y = np.asarray(self.labels)
        if f.shape[0] != y.size:
            raise ValueError(f"{f.shape[0]} feature rows but {y.size} labels")
        if not np.all(np.isin(y, (-1, 1))):
            raise ValueError("labels must be -1 or +1")
        f.flags.writeable = False
        y = y.astype(int)
        y.flags.writeable = False
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "labels", y)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


def save_dataset(dataset: Dataset, csv_path) -> None:
    """CSV of features+label plus a JSON sidecar with scaling and seed."""
    csv_path = str(csv_path)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{c}" for c in range(dataset.n_features)] + ["label"])
        for row, label in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])
    sidecar = {
        "name": dataset.name,
        "seed": dataset.seed,
        "scaling_record": [rec.to_dict() for rec in dataset.scaling_record],
    }
    with open(csv_path + ".json", "w") as fh:
        json.dump(sidecar, fh, sort_keys=True)
        fh.write("\n")


def load_dataset(csv_path) -> Dataset:
    csv_path = str(csv_path)
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader if row]
    n_features = len(header) - 1
    features = np.array([[float(v) for v in row[:n_features]] for row in rows])
    labels = np.array([int(row[n_features]) for row in rows])
    try:
        with open(csv_path + ".json") as fh:
            sidecar = json.load(fh)
        records = tuple(ScaleRecord.from_dict(d) for d in sidecar.get("scaling_record", []))
        name = sidecar.get("name", "dataset")
        seed = sidecar.get("seed")
    except FileNotFoundError:
        records, name, seed = (), "dataset", None
    return Dataset(name, features, labels, records, seed)


def generate_circles(
    n_per_class: int, ratio: float = 0.8, noise_sigma: float = 0.1, seed: int = 0
) -> Dataset:
    """Two noisy concentric circles; the inner circle is class +1.

    Outer points sit on the unit circle, inner points at ``ratio`` times the
    radius, with i.i.d. Gaussian coordinate noise added, then features are
    scaled to angles.
    """
    if n_per_class < 1:
        raise ValueError("need at least one sample per class")
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"radius ratio must lie in (0, 1), got {ratio}")
    if noise_sigma < 0.0:
        raise ValueError(f"noise sigma must be non-negative, got {noise_sigma}")
    rng = np.random.default_rng(seed)
    phi_outer = rng.uniform(0.0, 2.0 * math.pi, n_per_class)
    phi_inner = rng.uniform(0.0, 2.0 * math.pi, n_per_class)
    outer = np.column_stack([np.cos(phi_outer), np.sin(phi_outer)])
    inner = ratio * np.column_stack([np.cos(phi_inner), np.sin(phi_inner)])
    raw = np.vstack([outer, inner])
    raw = raw + noise_sigma * rng.standard_normal(raw.shape)
    labels = np.concatenate([-np.ones(n_per_class, int), np.ones(n_per_class, int)])
    scaled, records = scale_features(raw)
    return Dataset("circles", scaled, labels, records, seed)


# German credit attribute tables (1-based attribute numbers). Categorical codes
# map to ordinals in their natural code order; the remaining attributes are
# plain integers in the file.
_GERMAN_CATEGORICAL = {
    1: {"A11": 0, "A12": 1, "A13": 2, "A14": 3},  # status of checking account
    3: {"A30": 0, "A31": 1, "A32": 2, "A33": 3, "A34": 4},  # credit history
    7: {"A71": 0, "A72": 1, "A73": 2, "A74": 3, "A75": 4},  # employment since
}
_GERMAN_NUMERIC = {2, 5, 8, 11, 13, 16, 18}
_GERMAN_COLUMNS = 21
DEFAULT_GERMAN_FEATURES = (1, 2, 3, 7)


def load_german_credit(path, selected_features=DEFAULT_GERMAN_FEATURES) -> Dataset:
    """Load the UCI ``german.data`` layout: 21 whitespace-separated columns.

    Extracts the requested attributes (checking status, duration, credit
    history, and employment by default), maps label 1 -> +1 (good) and
    2 -> -1 (bad), and scales features to angles.
    """
    selected = tuple(int(a) for a in selected_features)
    for a in selected:
        if a not in _GERMAN_CATEGORICAL and a not in _GERMAN_NUMERIC:
            raise ValueError(
                f"attribute {a} is not supported; categorical tables exist for "
                f"{sorted(_GERMAN_CATEGORICAL)} and numeric attributes are {sorted(_GERMAN_NUMERIC)}"
            )
    raw_rows = []
    labels = []
    with open(path) as fh:
        for row_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != _GERMAN_COLUMNS:
                raise ValueError(
                    f"row {row_number}: expected {_GERMAN_COLUMNS} columns, got {len(fields)}"
                )
            values = []
            for a in selected:
                token = fields[a - 1]
                if a in _GERMAN_CATEGORICAL:
                    table = _GERMAN_CATEGORICAL[a]
                    if token not in table:
                        raise ValueError(
                            f"row {row_number}, column {a}: unknown categorical code {token!r}"
                        )
                    values.append(float(table[token]))
                else:
                    try:
                        values.append(float(int(token)))
                    except ValueError:
                        raise ValueError(
                            f"row {row_number}, column {a}: expected an integer, got {token!r}"
                        ) from None
            label_token = fields[_GERMAN_COLUMNS - 1]
            if label_token == "1":
                labels.append(1)
            elif label_token == "2":
                labels.append(-1)
            else:
                raise ValueError(
                    f"row {row_number}, column {_GERMAN_COLUMNS}: label must be 1 or 2, got {label_token!r}"
                )
            raw_rows.append(values)
    if not raw_rows:
        raise ValueError(f"no data rows found in {path}")
    scaled, records = scale_features(np.array(raw_rows))
    return Dataset("german-credit", scaled, np.array(labels), records)


@dataclass(frozen=True)
class SplitPlan:
    """Train/test partition plus the training subset used for weight optimization."""

    train_indices: np.ndarray = field(repr=False)
    test_indices: np.ndarray = field(repr=False)
    opt_subset_indices: np.ndarray = field(repr=False)
    seed: int = 0
    train_fraction: float = 0.75
    r: float = 0.5

    def __post_init__(self):
        for name in ("train_indices", "test_indices", "opt_subset_indices"):
            arr = np.asarray(getattr(self, name), dtype=int).copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        train = set(self.train_indices.tolist())
        test = set(self.test_indices.tolist())
        if train & test:
            raise ValueError("train and test indices overlap")
        if not set(self.opt_subset_indices.tolist()) <= train:
            raise ValueError("optimization subset must be drawn from the training indices")


def make_split(n: int, train_fraction: float, r: float, seed: int) -> SplitPlan:
    """Seeded shuffle split; ``r`` is the training fraction kept for optimization."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train fraction must lie in (0, 1), got {train_fraction}")
    if not 0.0 < r <= 1.0:
        raise ValueError(f"optimization fraction r must lie in (0, 1], got {r}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_train = int(round(train_fraction * n))
    if n_train < 1 or n_train >= n:
        raise ValueError(f"degenerate split: {n_train} training rows out of {n}")
    train = np.sort(perm[:n_train])
    test = np.sort(perm[n_train:])
    n_opt = int(round(r * n_train))
    if n_opt == n_train:
        opt = train.copy()
    else:
        opt = np.sort(rng.choice(train, size=n_opt, replace=False))
    return SplitPlan(train, test, opt, seed=seed, train_fraction=train_fraction, r=r)


# -- synthetic stand-in for the credit dataset ------------------------------

_SURROGATE_CHECKING_P = (0.274, 0.269, 0.063, 0.394)
_SURROGATE_HISTORY_P = (0.040, 0.049, 0.530, 0.088, 0.293)
_SURROGATE_EMPLOYMENT_P = (0.062, 0.172, 0.339, 0.174, 0.253)
_SURROGATE_CHECKING_EFFECT = (-0.85, -0.25, 0.35, 0.95)
_SURROGATE_HISTORY_EFFECT = (-0.60, -0.45, 0.0, -0.10, 0.45)
_SURROGATE_EMPLOYMENT_EFFECT = (-0.35, -0.15, 0.0, 0.25, 0.25)


def generate_german_like_file(path, seed: int = 0, n_rows: int = 1000) -> None:
    """Write a synthetic file in the UCI ``german.data`` layout.

    This is NOT the UCI German credit dataset: it is a seeded stand-in whose
    selected-attribute marginals and label noise are modeled on the published
    summary statistics, for use when the real file is unavailable. Unused
    columns carry fixed valid placeholder codes.
    """
    rng = np.random.default_rng(seed)
    checking = rng.choice(4, size=n_rows, p=_SURROGATE_CHECKING_P)
    history = rng.choice(5, size=n_rows, p=_SURROGATE_HISTORY_P)
    employment = rng.choice(5, size=n_rows, p=_SURROGATE_EMPLOYMENT_P)
    duration = np.clip(np.rint(4.0 + 68.0 * rng.beta(1.2, 3.5, size=n_rows)), 4, 72).astype(int)
    amounts = np.rint(250.0 + 18000.0 * rng.beta(1.1, 4.0, size=n_rows)).astype(int)
    logit = (
        0.60
        + np.take(_SURROGATE_CHECKING_EFFECT, checking)
        + np.take(_SURROGATE_HISTORY_EFFECT, history)
        + np.take(_SURROGATE_EMPLOYMENT_EFFECT, employment)
        - 0.035 * (duration - 21.0)
    )
    p_good = 1.0 / (1.0 + np.exp(-logit))
    good = rng.random(n_rows) < p_good
    with open(path, "w") as fh:
        for i in range(n_rows):
            fields = [
                f"A1{checking[i] + 1}",
                str(duration[i]),
                f"A3{history[i]}",
                "A43",
                str(amounts[i]),
                "A65",
                f"A7{employment[i] + 1}",
                "4",
                "A93",
                "A101",
                "4",
                "A121",
                "35",
                "A143",
                "A152",
                "1",
                "A173",
                "1",
                "A191",
                "A201",
                "1" if good[i] else "2",
            ]
            fh.write(" ".join(fields) + "\n")
