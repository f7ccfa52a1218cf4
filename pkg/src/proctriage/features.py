"""Feature extraction, labeled datasets, scaling, splitting, and stats.

Each host snapshot reduces to three numbers: how many processes are
running (the pid-0 pseudo-process never counts), how many distinct
owners appear (floored at one), and their ratio.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

from .errors import DatasetTooSmall, EmptyListing, MalformedDatasetFile
from .proclist import ProcessList

FEATURE_NAMES = ("process_count", "user_count", "ratio")


class Label(IntEnum):
    TARGET = 0   # production environment, safe to proceed
    SANDBOX = 1  # instrumented analysis environment


@dataclass(frozen=True)
class FeatureVector:
    process_count: int
    user_count: int
    ratio: float

    def __post_init__(self):
        if self.process_count < 1 or self.user_count < 1:
            raise ValueError("counts must be >= 1")
        if self.user_count > self.process_count:
            raise ValueError("user_count exceeds process_count")
        if self.ratio != self.process_count / self.user_count:
            raise ValueError("ratio is not process_count / user_count")

    @classmethod
    def from_counts(cls, process_count: int, user_count: int) -> "FeatureVector":
        return cls(process_count, user_count, process_count / user_count)

    def as_array(self) -> np.ndarray:
        return np.array([self.process_count, self.user_count, self.ratio], dtype=float)


@dataclass(frozen=True)
class LabeledSample:
    features: FeatureVector
    label: Label
    origin: str | None = None


@dataclass(frozen=True)
class LabeledDataset:
    """Immutable bag of labeled samples; may be empty (e.g. a fresh export)."""

    samples: tuple[LabeledSample, ...]

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def feature_matrix(self) -> np.ndarray:
        if not self.samples:
            return np.empty((0, len(FEATURE_NAMES)))
        return np.array([s.features.as_array() for s in self.samples])

    def label_array(self) -> np.ndarray:
        return np.array([int(s.label) for s in self.samples])

    def class_counts(self) -> tuple[int, int]:
        labels = self.label_array()
        return int(np.sum(labels == 0)), int(np.sum(labels == 1))

    def subset(self, label: Label) -> "LabeledDataset | None":
        kept = tuple(s for s in self.samples if s.label == label)
        return LabeledDataset(kept) if kept else None


def featurize(plist: ProcessList) -> FeatureVector:
    """Reduce a parsed process list to its feature triple.

    The pid-0 pseudo-process is excluded from the count; owners compare
    case-insensitively after trimming; a listing with no visible owners
    still counts one user.
    """
    countable = [e for e in plist.entries if e.pid != 0]
    if not countable:
        raise EmptyListing("no countable entries after excluding pid 0")
    owners = {e.owner.strip().casefold() for e in countable if e.owner and e.owner.strip()}
    return FeatureVector.from_counts(len(countable), max(1, len(owners)))


@dataclass(frozen=True)
class ScalerParams:
    """Per-feature min/max fitted on a training set."""

    mins: tuple[float, float, float]
    maxs: tuple[float, float, float]

    def transform(self, x: np.ndarray) -> np.ndarray:
        """Map features onto [0, 1], clamping out-of-range values.

        A degenerate feature (min == max) maps to 0.0 everywhere.
        """
        mins = np.asarray(self.mins, dtype=float)
        spans = np.asarray(self.maxs, dtype=float) - mins
        safe_spans = np.where(spans > 0, spans, 1.0)
        scaled = (np.asarray(x, dtype=float) - mins) / safe_spans
        scaled = np.where(spans > 0, scaled, 0.0)
        return np.clip(scaled, 0.0, 1.0)


def fit_scaler(train: LabeledDataset) -> ScalerParams:
    """Fit min-max parameters on the training set only."""
    if not len(train):
        raise DatasetTooSmall("cannot fit a scaler on an empty dataset")
    x = train.feature_matrix()
    return ScalerParams(mins=tuple(x.min(axis=0)), maxs=tuple(x.max(axis=0)))


def apply_scaler(params: ScalerParams, v: FeatureVector) -> np.ndarray:
    return params.transform(v.as_array())


def split_dataset(data: LabeledDataset, train_fraction: float, seed: int,
                  stratified: bool = False) -> tuple[LabeledDataset, LabeledDataset]:
    """Seeded shuffle then floor/remainder split into train and test.

    With ``stratified`` set, the floor split is applied per class
    instead (sizes may then differ from the global floor by rounding).
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    n = len(data)
    if n < 2:
        raise DatasetTooSmall("need at least two samples to split")

    rng = np.random.default_rng(seed)
    if stratified:
        train_idx: list[int] = []
        test_idx: list[int] = []
        labels = data.label_array()
        for cls in (0, 1):
            members = np.flatnonzero(labels == cls)
            order = members[rng.permutation(len(members))]
            k = math.floor(train_fraction * len(order))
            train_idx.extend(order[:k])
            test_idx.extend(order[k:])
    else:
        order = rng.permutation(n)
        k = math.floor(train_fraction * n)
        train_idx, test_idx = list(order[:k]), list(order[k:])

    if not train_idx or not test_idx:
        raise DatasetTooSmall(f"{n} samples at fraction {train_fraction} leaves a side empty")
    return (LabeledDataset(tuple(data.samples[i] for i in train_idx)),
            LabeledDataset(tuple(data.samples[i] for i in test_idx)))


@dataclass(frozen=True)
class FeatureStats:
    """Min/max/mean/population-std per feature for one block of samples."""

    n: int
    mins: tuple[float, float, float]
    maxs: tuple[float, float, float]
    means: tuple[float, float, float]
    stds: tuple[float, float, float]


@dataclass(frozen=True)
class DatasetStats:
    all: FeatureStats
    safe: FeatureStats | None
    unsafe: FeatureStats | None


def _stats_block(data: LabeledDataset) -> FeatureStats:
    x = data.feature_matrix()
    return FeatureStats(
        n=len(data),
        mins=tuple(x.min(axis=0)),
        maxs=tuple(x.max(axis=0)),
        means=tuple(x.mean(axis=0)),
        stds=tuple(x.std(axis=0)),  # population std
    )


def compute_stats(data: LabeledDataset) -> DatasetStats:
    """Per-feature stats for the whole set and for each class."""
    if not len(data):
        raise DatasetTooSmall("cannot compute stats on an empty dataset")
    safe = data.subset(Label.TARGET)
    unsafe = data.subset(Label.SANDBOX)
    return DatasetStats(
        all=_stats_block(data),
        safe=_stats_block(safe) if safe else None,
        unsafe=_stats_block(unsafe) if unsafe else None,
    )


def format_stats(stats: DatasetStats) -> str:
    """Render stats as a fixed-width table, one block per class."""
    pretty = {"process_count": "Process Count", "user_count": "User Count", "ratio": "Ratio"}
    out = []
    for title, block in (("All Data", stats.all), ("Safe", stats.safe), ("Unsafe", stats.unsafe)):
        if block is None:
            continue
        out.append(f"{title} ({block.n} samples)")
        out.append(f"{'Feature':<15}{'Min':>9}{'Max':>9}{'Mean':>9}{'Std Dev':>9}")
        for i, name in enumerate(FEATURE_NAMES):
            out.append(f"{pretty[name]:<15}{block.mins[i]:>9.1f}{block.maxs[i]:>9.1f}"
                       f"{block.means[i]:>9.1f}{block.stds[i]:>9.1f}")
        out.append("")
    return "\n".join(out).rstrip() + "\n"


DATASET_HEADER = ["process_count", "user_count", "ratio", "label", "origin"]


def save_dataset(data: LabeledDataset, path: str | Path) -> None:
    """Write a dataset as CSV with the standard five-column header."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dataset_to_csv(data))


def dataset_to_csv(data: LabeledDataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(DATASET_HEADER)
    for s in data.samples:
        writer.writerow([s.features.process_count, s.features.user_count,
                         repr(s.features.ratio), int(s.label), s.origin or ""])
    return buf.getvalue()


def load_dataset(path: str | Path) -> LabeledDataset:
    """Load a dataset CSV, validating every row.

    Raises :class:`MalformedDatasetFile` (with the offending line number)
    on a bad header, a bad cell, or a file with no data rows.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return dataset_from_csv(fh.read())


def dataset_from_csv(text: str) -> LabeledDataset:
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise MalformedDatasetFile(0, "empty file")
    if [c.strip() for c in rows[0]] != DATASET_HEADER:
        raise MalformedDatasetFile(1, f"bad header {rows[0]!r}")
    samples = []
    for line_no, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(DATASET_HEADER):
            raise MalformedDatasetFile(line_no, f"expected {len(DATASET_HEADER)} cells")
        try:
            pc, uc = int(row[0]), int(row[1])
            ratio = float(row[2])
            label_val = int(row[3])
        except ValueError as e:
            raise MalformedDatasetFile(line_no, str(e)) from None
        if label_val not in (0, 1):
            raise MalformedDatasetFile(line_no, f"label must be 0 or 1, got {label_val}")
        try:
            fv = FeatureVector(pc, uc, ratio)
        except ValueError as e:
            raise MalformedDatasetFile(line_no, str(e)) from None
        samples.append(LabeledSample(fv, Label(label_val), row[4].strip() or None))
    if not samples:
        raise MalformedDatasetFile(len(rows), "no data rows")
    return LabeledDataset(tuple(samples))
