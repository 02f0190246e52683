"""Global decision-tree surrogates and case-based nearest-neighbor explanations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateRegion, SchemaViolation
from .models import Model, ScalarView, TreeModel, TreeNode
from .schema import Dataset, Schema


@dataclass(frozen=True)
class BoxRegion:
    """Axis-aligned sampling box; count features are rounded, categoricals drawn uniformly."""

    schema: Schema
    lows: np.ndarray
    highs: np.ndarray

    @staticmethod
    def from_schema(schema: Schema, default_width: float = 1.0) -> "BoxRegion":
        """Use the schema bounds; unbounded features get [-width, width]."""
        los, his = schema.bounds_arrays()
        los = np.where(np.isfinite(los), los, -default_width)
        his = np.where(np.isfinite(his), his, default_width)
        return BoxRegion(schema=schema, lows=los, highs=his)

    def __post_init__(self):
        lows = np.asarray(self.lows, dtype=np.float64)
        highs = np.asarray(self.highs, dtype=np.float64)
        d = self.schema.dimension
        if lows.shape != (d,) or highs.shape != (d,):
            raise ConfigError("region bounds must match the schema dimension")
        if np.any(lows > highs):
            raise ConfigError("region lower bound exceeds upper bound")
        spread = highs > lows
        for i, f in enumerate(self.schema.features):
            if f.kind == "categorical" and len(f.categories) > 1:
                spread[i] = highs[i] > lows[i]
        if not bool(spread.any()):
            raise DegenerateRegion("sampling region has zero volume")
        object.__setattr__(self, "lows", lows)
        object.__setattr__(self, "highs", highs)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        X = rng.uniform(self.lows, self.highs, size=(n, self.schema.dimension))
        for i, f in enumerate(self.schema.features):
            if f.kind == "categorical":
                lo = int(round(self.lows[i]))
                hi = int(round(self.highs[i]))
                X[:, i] = rng.integers(lo, hi + 1, size=n)
            elif f.kind == "count":
                X[:, i] = np.clip(np.round(X[:, i]), self.lows[i], self.highs[i])
        return X


@dataclass(frozen=True)
class GlobalTreeSurrogate:
    tree: TreeModel
    fidelity: float
    depth: int
    n_train: int
    n_heldout: int

    def to_document(self) -> dict:
        return {
            "tree": self.tree.root.to_document(self.tree.schema),
            "fidelity": self.fidelity,
            "depth": self.depth,
            "n_train": self.n_train,
            "n_heldout": self.n_heldout,
        }


def _best_split(X: np.ndarray, y: np.ndarray, min_leaf: int):
    """Greedy variance-reduction split; returns (gain, feature, threshold)."""
    n, d = X.shape
    base = float(((y - y.mean()) ** 2).sum())
    best = (0.0, None, None)
    for j in range(d):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        ys = y[order]
        csum = np.cumsum(ys)
        csq = np.cumsum(ys ** 2)
        total, total_sq = csum[-1], csq[-1]
        # candidate split after position i (1-based count on the left)
        for i in range(min_leaf, n - min_leaf + 1):
            if i < n and xs[i - 1] == xs[i]:
                continue  # threshold must separate distinct values
            if i >= n:
                break
            left_sse = csq[i - 1] - csum[i - 1] ** 2 / i
            right_n = n - i
            right_sum = total - csum[i - 1]
            right_sse = (total_sq - csq[i - 1]) - right_sum ** 2 / right_n
            gain = base - left_sse - right_sse
            if gain > best[0] + 1e-12:
                best = (gain, j, 0.5 * (xs[i - 1] + xs[i]))
    return best


def _grow(X, y, depth_left: int, min_leaf: int) -> TreeNode:
    if depth_left == 0 or X.shape[0] < 2 * min_leaf or float(y.var()) <= 1e-18:
        return TreeNode(value=float(y.mean()))
    gain, feature, threshold = _best_split(X, y, min_leaf)
    if feature is None or gain <= 1e-12:
        return TreeNode(value=float(y.mean()))
    mask = X[:, feature] <= threshold
    return TreeNode(
        feature=feature,
        threshold=threshold,
        left=_grow(X[mask], y[mask], depth_left - 1, min_leaf),
        right=_grow(X[~mask], y[~mask], depth_left - 1, min_leaf),
    )


def global_tree_surrogate(model: Model, region: BoxRegion, max_depth: int,
                          n_samples: int, seed: int, min_leaf: int = 5,
                          class_index: int | None = None) -> GlobalTreeSurrogate:
    """Distill the model into a CART-style regression tree over a sampled region.

    Fidelity is measured on a held-out draw from the same seeded stream
    (disjoint from the training draw): clamped R^2 for score models, label
    agreement for classifiers.
    """
    if max_depth < 1:
        raise ConfigError("max_depth must be >= 1")
    if n_samples < 2 * min_leaf:
        raise ConfigError(f"need at least {2 * min_leaf} samples")
    rng = np.random.default_rng(seed)
    X_train = region.sample(rng, n_samples)
    X_test = region.sample(rng, n_samples)
    if model.output_kind == "class_probabilities":
        view = ScalarView.resolve(model, class_index=class_index if class_index is not None else 0)
        y_train = view.many(X_train)
        y_test = view.many(X_test)
    else:
        y_train = model.score_many(X_train)
        y_test = model.score_many(X_test)
    root = _grow(X_train, np.asarray(y_train, dtype=np.float64), max_depth, min_leaf)
    tree = TreeModel(model.schema, root, output_kind="score")
    pred = tree.score_many(X_test)
    if model.output_kind == "class_probabilities":
        fidelity = float(np.mean((pred >= 0.5) == (np.asarray(y_test) >= 0.5)))
    else:
        resid = np.asarray(y_test) - pred
        ss_res = float((resid ** 2).sum())
        ss_tot = float(((y_test - np.mean(y_test)) ** 2).sum())
        if ss_tot <= 1e-18:
            fidelity = 1.0 if ss_res <= 1e-12 else 0.0
        else:
            fidelity = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return GlobalTreeSurrogate(
        tree=tree,
        fidelity=fidelity,
        depth=root.depth(),
        n_train=n_samples,
        n_heldout=n_samples,
    )


CASE_METRICS = ("score_space", "input_mad", "blended")


@dataclass(frozen=True)
class Neighbor:
    row_index: int
    values: np.ndarray
    score: float
    distance: float


@dataclass(frozen=True)
class CaseBasedExplanation:
    neighbors: tuple[Neighbor, ...]
    metric: str
    alpha: float | None = None

    def to_document(self, schema: Schema) -> dict:
        return {
            "metric": self.metric,
            "alpha": self.alpha,
            "neighbors": [
                {
                    "row": n.row_index,
                    "values": [float(v) for v in n.values],
                    "named": schema.to_named(n.values),
                    "score": n.score,
                    "distance": n.distance,
                }
                for n in self.neighbors
            ],
        }


def case_based(model: Model, dataset: Dataset, x, k: int,
               metric: str = "input_mad", alpha: float = 0.5,
               class_index: int | None = None) -> CaseBasedExplanation:
    """The k most similar training rows under the chosen distance.

    score_space compares model outputs |f(row) - f(x)|; input_mad is the
    MAD-weighted L1 distance in input space; blended mixes min-max normalized
    versions of both with weight alpha on the score side.
    """
    if metric not in CASE_METRICS:
        raise ConfigError(f"unknown metric {metric!r} (expected one of {CASE_METRICS})")
    if dataset.n_rows < 1:
        raise SchemaViolation("empty dataset")
    if not (1 <= k <= dataset.n_rows):
        raise ConfigError(f"k must be in [1, {dataset.n_rows}], got {k}")
    point = model.schema.validate_point(x)
    view = ScalarView.resolve(model, point, class_index)
    scores = view.many(dataset.rows)
    f_x = view(point)
    score_d = np.abs(scores - f_x)
    scale = dataset.effective_scale()
    input_d = (np.abs(dataset.rows - point) / scale).sum(axis=1)
    if metric == "score_space":
        dist = score_d
    elif metric == "input_mad":
        dist = input_d
    else:
        if not (0.0 <= alpha <= 1.0):
            raise ConfigError("alpha must be in [0, 1]")
        dist = alpha * _minmax(score_d) + (1.0 - alpha) * _minmax(input_d)
    order = np.lexsort((np.arange(dataset.n_rows), dist))[:k]
    neighbors = tuple(
        Neighbor(
            row_index=int(i),
            values=dataset.rows[i].copy(),
            score=float(scores[i]),
            distance=float(dist[i]),
        )
        for i in order
    )
    return CaseBasedExplanation(
        neighbors=neighbors, metric=metric, alpha=alpha if metric == "blended" else None
    )


def _minmax(v: np.ndarray) -> np.ndarray:
    lo, hi = float(v.min()), float(v.max())
    if hi - lo <= 1e-18:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)
