"""kNN pose classification over a labeled evaluation dataset."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyDataset, InconsistentScale, ParseError
from .geometry import FEATURE_NAMES, FeatureVector

logger = logging.getLogger(__name__)

CSV_COLUMNS: tuple[str, ...] = FEATURE_NAMES + ("Angular", "Position", "action")
DEFAULT_POSITION_SCALE = 820.0
DEFAULT_K = 5
# reserved for NULL frames in every text form (sequences, scripts)
NULL_TOKEN = "N"


@dataclass(frozen=True)
class LabeledSample:
    features: FeatureVector
    label: str


@dataclass(frozen=True)
class ClassifiedFrame:
    """One buffer slot. ``label is None`` marks a NULL frame."""

    label: str | None
    accuracy: float | None
    timestamp: float = 0.0

    @property
    def is_null(self) -> bool:
        return self.label is None


def embed(v: FeatureVector, scale: float = DEFAULT_POSITION_SCALE) -> np.ndarray:
    return np.array([*v.angles, v.angular, v.position * scale], dtype=float)


@dataclass(frozen=True)
class EvaluationDataset:
    samples: tuple[LabeledSample, ...]
    position_scale: float = DEFAULT_POSITION_SCALE
    k: int = DEFAULT_K
    _matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if not self.samples:
            raise EmptyDataset("dataset has no samples")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if len(self.samples) < self.k:
            raise EmptyDataset(f"dataset has {len(self.samples)} samples, fewer than k={self.k}")
        if len(self.labels) < 2:
            raise ValueError("dataset needs at least 2 distinct labels")
        if not self.position_scale > 0:
            raise ValueError("position_scale must be positive")
        m = np.stack([embed(s.features, self.position_scale) for s in self.samples])
        m.setflags(write=False)
        object.__setattr__(self, "_matrix", m)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(sorted({s.label for s in self.samples}))

    @property
    def matrix(self) -> np.ndarray:
        """Embedded samples, one row per sample in dataset order."""
        return self._matrix

    def with_k(self, k: int) -> "EvaluationDataset":
        return EvaluationDataset(self.samples, self.position_scale, k)


def _parse_float(text: str, line: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"line {line}: column {column!r}: not a number: {text!r}") from None
    if not math.isfinite(value):
        raise ParseError(f"line {line}: column {column!r}: non-finite value")
    return value


def load_dataset(source, k: int = DEFAULT_K) -> EvaluationDataset:
    """Parse an evaluation CSV (path, file object or CSV text via ``io.StringIO``).

    Position magnitudes must agree across rows; the common magnitude becomes
    the dataset's ``position_scale`` and each sample keeps only the sign.
    """
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="") as fh:
            return _read_dataset(fh, k)
    return _read_dataset(source, k)


def _read_dataset(fh, k: int) -> EvaluationDataset:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None:
        raise ParseError("empty dataset file")
    header = [h.strip() for h in header]
    if tuple(header) != CSV_COLUMNS:
        raise ParseError(f"unexpected header {header}; expected {list(CSV_COLUMNS)}")

    samples: list[LabeledSample] = []
    scale: float | None = None
    for line, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(CSV_COLUMNS):
            raise ParseError(f"line {line}: expected {len(CSV_COLUMNS)} fields, got {len(row)}")
        angles = tuple(_parse_float(row[i], line, FEATURE_NAMES[i]) for i in range(len(FEATURE_NAMES)))
        for name, a in zip(FEATURE_NAMES, angles):
            if not 0.0 <= a <= 180.0:
                raise ParseError(f"line {line}: {name} = {a} outside [0, 180]")
        angular = _parse_float(row[12], line, "Angular")
        if not 0.0 <= angular <= math.pi / 2:
            raise ParseError(f"line {line}: Angular = {angular} outside [0, pi/2]")
        pos = _parse_float(row[13], line, "Position")
        if pos == 0:
            raise ParseError(f"line {line}: Position must be non-zero")
        if scale is None:
            scale = abs(pos)
        elif abs(pos) != scale:
            raise InconsistentScale(f"line {line}: Position magnitude {abs(pos)} != {scale}")
        label = row[14].strip()
        if not label:
            raise ParseError(f"line {line}: empty action label")
        if label == NULL_TOKEN:
            raise ParseError(f"line {line}: label {NULL_TOKEN!r} is reserved for NULL frames")
        fv = FeatureVector(angles, angular, 1 if pos > 0 else -1)
        samples.append(LabeledSample(fv, label))

    if not samples:
        raise ParseError("dataset has a header but no rows")
    logger.debug("loaded %d samples, position scale %s", len(samples), scale)
    return EvaluationDataset(tuple(samples), position_scale=scale, k=k)


def dataset_to_csv(samples: Iterable[LabeledSample], scale: float = DEFAULT_POSITION_SCALE) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for s in samples:
        f = s.features
        w.writerow([*(repr(a) for a in f.angles), repr(f.angular), repr(f.position * scale), s.label])
    return out.getvalue()


def classify(v: FeatureVector, ds: EvaluationDataset, k: int | None = None) -> tuple[str, float]:
    """Return ``(label, accuracy)`` for the k nearest samples.

    The label is the most frequent among the k neighbours; accuracy is its
    count divided by k. Frequency ties go to the label whose neighbours have
    the smaller summed distance, then to the lexicographically smallest
    label. Equidistant samples at the k-th place are taken in dataset order.
    """
    k = ds.k if k is None else k
    if not ds.samples:
        raise EmptyDataset("cannot classify against an empty dataset")
    if not 1 <= k <= len(ds.samples):
        raise ValueError(f"k={k} outside [1, {len(ds.samples)}]")
    q = embed(v, ds.position_scale)
    dist = np.sqrt(((ds.matrix - q) ** 2).sum(axis=1))
    nearest = np.argsort(dist, kind="stable")[:k]

    counts: dict[str, int] = {}
    sums: dict[str, float] = {}
    for i in nearest:
        label = ds.samples[i].label
        counts[label] = counts.get(label, 0) + 1
        sums[label] = sums.get(label, 0.0) + float(dist[i])
    best = min(counts, key=lambda lb: (-counts[lb], sums[lb], lb))
    return best, counts[best] / k


def gate_null(label: str | None, accuracy: float | None, threshold: float, timestamp: float = 0.0) -> ClassifiedFrame:
    if label is None or accuracy is None or accuracy < threshold:
        return ClassifiedFrame(None, None, timestamp)
    return ClassifiedFrame(label, accuracy, timestamp)


def pca_project(ds: EvaluationDataset) -> list[tuple[tuple[float, float], str]]:
    """Project the embedded dataset onto its top two principal components.

    Diagnostic only. Components are ordered by descending variance and each
    is signed so that its largest-magnitude loading is positive.
    """
    if len(ds.samples) < 3:
        raise EmptyDataset(f"need at least 3 samples for a projection, got {len(ds.samples)}")
    x = ds.matrix - ds.matrix.mean(axis=0)
    cov = x.T @ x / (len(x) - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals, kind="stable")[::-1][:2]
    comps = evecs[:, order]
    for j in range(comps.shape[1]):
        if comps[np.argmax(np.abs(comps[:, j])), j] < 0:
            comps[:, j] = -comps[:, j]
    proj = x @ comps
    return [((float(p[0]), float(p[1])), s.label) for p, s in zip(proj, ds.samples)]


def projection_to_csv(points: Sequence[tuple[tuple[float, float], str]]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["x", "y", "label"])
    for (x, y), label in points:
        w.writerow([repr(x), repr(y), label])
    return out.getvalue()
