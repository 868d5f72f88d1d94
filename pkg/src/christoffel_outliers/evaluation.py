"""Precision-recall evaluation and benchmark-table aggregation.

Scores are turned into a family of threshold classifiers, one per distinct
score value: a point is flagged when its score is at or above the
threshold. Precision and recall of each classifier trace the PR curve and
the area under it (a right Riemann sum over recall) summarizes detector
quality in [0, 1].

``summarize`` aggregates per-(dataset, method) AUPRC values into the usual
comparison table: mean and standard deviation over trials, per-method
average, average rank (1 is best, ties share the mean of the occupied
ranks) and the root mean squared deviation from the per-dataset best.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata


@dataclass(frozen=True)
class PRCurve:
    """PR points in descending-threshold order plus the area under them.

    ``recalls`` is nondecreasing and ends at 1; ``thresholds`` holds the
    distinct score values that generated each point.
    """

    recalls: np.ndarray
    precisions: np.ndarray
    thresholds: np.ndarray
    auprc: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.recalls.tolist(), self.precisions.tolist()))


@dataclass(frozen=True)
class CellStats:
    """Mean and standard deviation of AUPRC over the trials of one cell."""

    mean: float
    std: float
    trials: int


@dataclass(frozen=True)
class BenchmarkTable:
    """Per-cell statistics plus per-method aggregate rows.

    ``cells`` maps (dataset, method) to CellStats, or None where the method
    was unavailable on that dataset; unavailable cells are excluded from
    that method's aggregates and from the dataset's ranking.
    """

    datasets: tuple[str, ...]
    methods: tuple[str, ...]
    cells: dict[tuple[str, str], CellStats | None]
    average: dict[str, float]
    avg_rank: dict[str, float]
    rmsd: dict[str, float]


def _validate_labeled(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.ndim != 1 or labels.ndim != 1 or scores.shape != labels.shape:
        raise ValueError("scores and labels must be vectors of equal length")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores contain non-finite values")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be binary (0 = inlier, 1 = outlier)")
    labels = labels.astype(int)
    positives = int(labels.sum())
    if positives == 0 or positives == labels.shape[0]:
        raise ValueError("degenerate labels: need at least one outlier and one inlier")
    return scores, labels


def pr_curve(scores, labels) -> PRCurve:
    """Precision-recall curve of the classifiers 1{score >= threshold}.

    Thresholds are the distinct score values in descending order, so tied
    scores cross the threshold together. Points come out in ascending
    recall order and the final recall is always 1.
    """
    scores, labels = _validate_labeled(scores, labels)
    n = scores.shape[0]
    positives = int(labels.sum())
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    # Last position of each block of tied scores.
    block_ends = np.append(np.nonzero(np.diff(sorted_scores))[0], n - 1)
    tp = np.cumsum(sorted_labels)[block_ends].astype(float)
    predicted = (block_ends + 1).astype(float)
    precisions = tp / predicted
    recalls = tp / positives
    thresholds = sorted_scores[block_ends]
    area = _area(recalls, precisions)
    return PRCurve(recalls=recalls, precisions=precisions, thresholds=thresholds, auprc=area)


def _area(recalls: np.ndarray, precisions: np.ndarray) -> float:
    # Right Riemann sum over recall, anchored at recall 0 with no synthetic
    # precision-1 point.
    padded = np.concatenate(([0.0], recalls))
    return float(np.sum(np.diff(padded) * precisions))


def auprc(curve: PRCurve) -> float:
    """Area under the PR curve, recomputed from its points."""
    return _area(curve.recalls, curve.precisions)


def summarize(
    cells: Mapping[tuple[str, str], Sequence[float] | None],
    datasets: Sequence[str] | None = None,
    methods: Sequence[str] | None = None,
) -> BenchmarkTable:
    """Aggregate per-(dataset, method) trial AUPRCs into a benchmark table.

    Every (dataset, method) pair must be present; pass None to mark a cell
    unavailable. Statistics use the population standard deviation, so a
    single-trial (deterministic) cell reports std 0.
    """
    if not cells:
        raise ValueError("empty benchmark input")
    if datasets is None:
        datasets = list(dict.fromkeys(d for d, _ in cells))
    if methods is None:
        methods = list(dict.fromkeys(m for _, m in cells))
    datasets = tuple(datasets)
    methods = tuple(methods)

    stats: dict[tuple[str, str], CellStats | None] = {}
    for d in datasets:
        for m in methods:
            if (d, m) not in cells:
                raise ValueError(
                    f"missing cell ({d!r}, {m!r}); mark unavailable cells with None"
                )
            values = cells[(d, m)]
            if values is None:
                stats[(d, m)] = None
                continue
            values = np.asarray(list(values), dtype=float)
            if values.size == 0:
                raise ValueError(f"cell ({d!r}, {m!r}) has no trial values")
            stats[(d, m)] = CellStats(
                mean=float(values.mean()), std=float(values.std()), trials=int(values.size)
            )

    per_method_means: dict[str, list[float]] = {m: [] for m in methods}
    per_method_ranks: dict[str, list[float]] = {m: [] for m in methods}
    per_method_gaps: dict[str, list[float]] = {m: [] for m in methods}
    for d in datasets:
        available = [m for m in methods if stats[(d, m)] is not None]
        if not available:
            continue
        means = np.array([stats[(d, m)].mean for m in available])
        ranks = rankdata(-means, method="average")
        best = float(means.max())
        for m, mean, rank in zip(available, means, ranks):
            per_method_means[m].append(float(mean))
            per_method_ranks[m].append(float(rank))
            per_method_gaps[m].append(best - float(mean))

    average = {}
    avg_rank = {}
    rmsd = {}
    for m in methods:
        if per_method_means[m]:
            average[m] = float(np.mean(per_method_means[m]))
            avg_rank[m] = float(np.mean(per_method_ranks[m]))
            rmsd[m] = float(np.sqrt(np.mean(np.square(per_method_gaps[m]))))
        else:
            average[m] = float("nan")
            avg_rank[m] = float("nan")
            rmsd[m] = float("nan")

    return BenchmarkTable(
        datasets=datasets,
        methods=methods,
        cells=stats,
        average=average,
        avg_rank=avg_rank,
        rmsd=rmsd,
    )
