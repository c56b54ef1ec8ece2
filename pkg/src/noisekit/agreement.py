"""Annotation-quality statistics: Fleiss' kappa and trustworthiness screening."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, MalformedMatrix
from .textcore import NOISE_CLASSES, NoiseLabelSet


@dataclass
class RatingMatrix:
    """items x categories count matrix with a fixed number of raters per item."""

    counts: np.ndarray
    category_names: tuple[str, ...] | None = None

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.size == 0:
            raise MalformedMatrix("rating matrix must be 2-dimensional and non-empty")
        if not np.issubdtype(counts.dtype, np.integer):
            if not np.all(counts == counts.astype(np.int64)):
                raise MalformedMatrix("rating counts must be integers")
            counts = counts.astype(np.int64)
        if (counts < 0).any():
            raise MalformedMatrix("rating counts must be non-negative")
        row_sums = counts.sum(axis=1)
        if len(set(row_sums.tolist())) != 1:
            raise MalformedMatrix("every item must have the same number of ratings")
        if row_sums[0] < 2:
            raise MalformedMatrix("need at least 2 raters per item")
        self.counts = counts

    @property
    def raters_per_item(self) -> int:
        return int(self.counts[0].sum())

    @property
    def n_items(self) -> int:
        return self.counts.shape[0]


def fleiss_kappa(matrix: RatingMatrix) -> float:
    """Chance-corrected agreement for a fixed rater count per item.

    Perfect scores under total expected agreement (one category holds every
    rating) return exactly 1.
    """
    counts = matrix.counts
    if matrix.n_items < 2:
        raise MalformedMatrix("Fleiss' kappa needs at least 2 items")
    n = matrix.raters_per_item
    per_item = ((counts * counts).sum(axis=1) - n) / (n * (n - 1))
    observed = float(per_item.mean())
    proportions = counts.sum(axis=0) / counts.sum()
    expected = float(np.dot(proportions, proportions))
    if expected == 1.0:
        return 1.0
    return (observed - expected) / (1.0 - expected)


def kappa_noise_labels(annotations: list[list[NoiseLabelSet]]):
    """Per-category kappa over multi-annotator noise labels, plus a pooled score.

    ``annotations[a][i]`` is annotator a's label set for item i. Each noise
    category is scored as its own two-category (set/unset) rating matrix; the
    pooled score stacks all ten matrices.
    """
    if not annotations or not annotations[0]:
        raise MalformedMatrix("need at least one annotator and one item")
    n_items = len(annotations[0])
    if any(len(per_annotator) != n_items for per_annotator in annotations):
        raise LengthMismatch("annotators labeled different numbers of items")
    n_raters = len(annotations)
    per_category = {}
    stacked = []
    for j, name in enumerate(NOISE_CLASSES):
        rows = []
        for i in range(n_items):
            set_count = sum(1 for per_annotator in annotations if per_annotator[i].has(j))
            rows.append([set_count, n_raters - set_count])
        block = np.asarray(rows, dtype=np.int64)
        stacked.append(block)
        per_category[name] = fleiss_kappa(RatingMatrix(block))
    pooled = fleiss_kappa(RatingMatrix(np.vstack(stacked)))
    return per_category, pooled


def trustworthiness(
    annotator: list[NoiseLabelSet],
    control_gold: list[NoiseLabelSet],
    threshold: float = 90.0,
    mode: str = "exact",
) -> tuple[float, bool]:
    """Score an annotator against hidden control samples.

    ``exact`` counts items whose label set equals gold exactly; ``jaccard``
    averages per-item label overlap instead. Passing is inclusive at the
    threshold.
    """
    if len(annotator) != len(control_gold):
        raise LengthMismatch(
            f"{len(annotator)} annotator labels vs {len(control_gold)} gold labels"
        )
    if not annotator:
        raise LengthMismatch("no control samples")
    if mode == "exact":
        credit = sum(1.0 for a, g in zip(annotator, control_gold) if a == g)
    elif mode == "jaccard":
        credit = 0.0
        for a, g in zip(annotator, control_gold):
            union = a.mask | g.mask
            if union == 0:
                credit += 1.0
            else:
                credit += bin(a.mask & g.mask).count("1") / bin(union).count("1")
    else:
        raise MalformedMatrix(f"unknown trustworthiness mode {mode!r}")
    score = 100.0 * credit / len(annotator)
    return score, score >= threshold
