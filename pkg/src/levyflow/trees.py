"""Comment-tree shape statistics and the depth-vs-focus regression."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import CommentTree
from .errors import ConstantPredictor, EmptyTree


@dataclass
class DepthHistogram:
    """Comment counts by depth; the submission itself is excluded and its
    direct replies have depth 1."""

    counts: dict[int, int]

    @property
    def n_comments(self) -> int:
        return sum(self.counts.values())

    def to_csv(self) -> str:
        lines = ["depth,count"]
        for depth in sorted(self.counts):
            lines.append(f"{depth},{self.counts[depth]}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    r_squared: float


def depth_distribution(tree: CommentTree) -> DepthHistogram:
    """Histogram of path lengths from each comment up to the submission."""
    counts = Counter(
        tree.depth_of(nid) for nid in tree.nodes if nid != tree.root_id
    )
    return DepthHistogram(counts=dict(counts))


def nesting_fraction(hist: DepthHistogram, min_depth: int = 2) -> float:
    """Share of comments at or below ``min_depth``.

    Replies-to-comments sit at depth 2 and deeper under this convention, so
    the default measures how much of the discussion is nested.
    """
    total = hist.n_comments
    if total == 0:
        raise EmptyTree("no comments below the submission")
    deep = sum(c for d, c in hist.counts.items() if d >= min_depth)
    return deep / total


def average_depth(hist: DepthHistogram) -> float:
    """Count-weighted mean comment depth."""
    total = hist.n_comments
    if total == 0:
        raise EmptyTree("no comments below the submission")
    return sum(d * c for d, c in hist.counts.items()) / total


def ols_regression(x, y) -> RegressionResult:
    """Ordinary least squares of y on x with coefficient of determination."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be matching 1-d samples")
    if x.size < 3:
        raise ValueError("need at least 3 points")
    x_centered = x - x.mean()
    ss_x = float(np.dot(x_centered, x_centered))
    if ss_x == 0.0:
        raise ConstantPredictor("predictor has zero variance")
    slope = float(np.dot(x_centered, y)) / ss_x
    intercept = float(y.mean() - slope * x.mean())
    residuals = y - (slope * x + intercept)
    ss_res = float(np.dot(residuals, residuals))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RegressionResult(slope=slope, intercept=intercept, r_squared=float(np.clip(r_squared, 0.0, 1.0)))
