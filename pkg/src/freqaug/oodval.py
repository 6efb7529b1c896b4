"""Out-of-distribution detection by max-softmax confidence thresholding.

A model's confidence on held-out in-distribution data is compared against
its confidence on some other dataset; AUROC over the two score populations
measures how separable they are. In-distribution is the positive class, so
higher is better and 0.5 means indistinguishable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FormatError
from .tensorio import LabeledDataset


@dataclass(frozen=True)
class ScoreSet:
    """Confidence scores for an in-distribution and an OOD population."""

    in_dist: np.ndarray
    ood: np.ndarray

    def __post_init__(self):
        for name, vec in (("in_dist", self.in_dist), ("ood", self.ood)):
            arr = np.asarray(vec, dtype=np.float64).reshape(-1)
            if arr.size == 0:
                raise DomainError(f"{name} score vector is empty")
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"{name} scores contain non-finite values")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def swapped(self) -> "ScoreSet":
        return ScoreSet(self.ood, self.in_dist)


@dataclass(frozen=True)
class RocReport:
    """AUROC plus the ROC curve it summarizes.

    roc_points runs from (0,0) to (1,1); threshold_count is the number of
    distinct observed score values swept (one point each, plus the origin).
    """

    auroc: float
    roc_points: tuple[tuple[float, float], ...]
    threshold_count: int


def score_dataset(model, dataset) -> np.ndarray:
    """Max-softmax confidence per image, in dataset order.

    model maps an ImageTensor to its class-probability vector.
    """
    images = dataset.images if isinstance(dataset, LabeledDataset) else list(dataset)
    scores = np.empty(len(images), dtype=np.float64)
    for i, image in enumerate(images):
        try:
            scores[i] = float(np.max(model(image)))
        except Exception as exc:
            raise RuntimeError(f"model failed on image {i}: {exc}") from exc
    return scores


def auroc(scores: ScoreSet) -> RocReport:
    """Mann-Whitney AUROC with ties counted 1/2, plus the swept ROC curve."""
    in_sorted = np.sort(scores.in_dist)
    ood_sorted = np.sort(scores.ood)
    n_in, n_ood = in_sorted.size, ood_sorted.size

    # wins = ood scores strictly below each in score; ties counted once each
    below = np.searchsorted(ood_sorted, in_sorted, side="left")
    at_or_below = np.searchsorted(ood_sorted, in_sorted, side="right")
    wins2 = 2 * int(below.sum()) + int((at_or_below - below).sum())
    denom = 2 * n_in * n_ood
    # Evaluate the smaller side as 1 - complement: the complement quotient is
    # >= 0.5, so the subtraction is exact and auroc(a,b) + auroc(b,a) == 1.0
    # holds bitwise.
    if 2 * wins2 >= denom:
        value = wins2 / denom
    else:
        value = 1.0 - (denom - wins2) / denom

    thresholds = np.unique(np.concatenate([in_sorted, ood_sorted]))[::-1]
    points = [(0.0, 0.0)]
    for t in thresholds:
        tpr = float(np.mean(in_sorted >= t))
        fpr = float(np.mean(ood_sorted >= t))
        points.append((fpr, tpr))
    return RocReport(auroc=value, roc_points=tuple(points), threshold_count=len(thresholds))


def trapezoid_area(points) -> float:
    """Area under a piecewise-linear curve given as (x, y) pairs."""
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += 0.5 * (y0 + y1) * (x1 - x0)
    return area


def detect_at_threshold(scores: ScoreSet, threshold: float) -> tuple[float, float]:
    """(tpr, fpr) when everything scoring >= threshold is called in-distribution."""
    tpr = float(np.mean(scores.in_dist >= threshold))
    fpr = float(np.mean(scores.ood >= threshold))
    return tpr, fpr


@dataclass(frozen=True)
class OodRow:
    name: str
    auroc: float


@dataclass(frozen=True)
class OodReport:
    test_accuracy: float
    rows: tuple[OodRow, ...]


def evaluate_ood(model, in_dataset: LabeledDataset, ood_datasets: dict) -> OodReport:
    """Score the in-distribution test set once, then AUROC against each named
    OOD dataset. Scoring failures carry the dataset name."""
    try:
        in_scores = score_dataset(model, in_dataset)
    except Exception as exc:
        raise RuntimeError(f"scoring in-distribution dataset failed: {exc}") from exc
    correct = 0
    for image in in_dataset.images:
        probs = model(image)
        correct += int(np.argmax(probs) == image.label)
    accuracy = correct / len(in_dataset)

    rows = []
    for name, dataset in ood_datasets.items():
        try:
            ood_scores = score_dataset(model, dataset)
            report = auroc(ScoreSet(in_scores, ood_scores))
        except Exception as exc:
            raise RuntimeError(f"evaluating OOD dataset '{name}' failed: {exc}") from exc
        rows.append(OodRow(name, report.auroc))
    return OodReport(test_accuracy=accuracy, rows=tuple(rows))


def format_ood_report(report: OodReport) -> str:
    lines = [f"test accuracy: {report.test_accuracy * 100:.2f}%"]
    for row in report.rows:
        lines.append(f"{row.name}: AUROC {row.auroc * 100:.2f}")
    return "\n".join(lines)


def write_scores_csv(scores: ScoreSet, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["score", "is_in_distribution"])
        for s in scores.in_dist:
            writer.writerow([f"{s:.17g}", 1])
        for s in scores.ood:
            writer.writerow([f"{s:.17g}", 0])


def read_scores_csv(path) -> ScoreSet:
    in_scores, ood_scores = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["score", "is_in_distribution"]:
            raise FormatError(f"unexpected score CSV header {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2 or row[1] not in ("0", "1"):
                raise FormatError(f"bad score row at line {lineno}: {row}")
            try:
                value = float(row[0])
            except ValueError:
                raise FormatError(f"bad score value at line {lineno}: {row[0]!r}") from None
            (in_scores if row[1] == "1" else ood_scores).append(value)
    return ScoreSet(np.array(in_scores), np.array(ood_scores))
