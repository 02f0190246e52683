"""Seeded random model generators shared by property tests and the acceptance suite."""

from __future__ import annotations

import numpy as np

from modelprobe import FeatureSpec, LinearModel, MlpModel, Schema, TreeModel
from modelprobe.models import TreeNode


def open_schema(d: int, lo: float = -4.0, hi: float = 4.0) -> Schema:
    return Schema(
        tuple(FeatureSpec(name=f"f{i}", kind="continuous", lower=lo, upper=hi) for i in range(d))
    )


def random_linear(rng: np.random.Generator, d: int) -> LinearModel:
    return LinearModel(
        open_schema(d),
        weights=rng.uniform(-2, 2, size=d),
        bias=float(rng.uniform(-1, 1)),
        link="identity",
    )


def random_mlp(rng: np.random.Generator, d: int, hidden: int = 6,
               activation: str = "tanh", squash: bool = False) -> MlpModel:
    layers = [
        (rng.normal(0, 1, size=(hidden, d)), rng.normal(0, 0.5, size=hidden), activation),
        (rng.normal(0, 1, size=(1, hidden)), rng.normal(0, 0.5, size=1),
         "tanh" if squash else "identity"),
    ]
    return MlpModel(open_schema(d), layers)


def random_tree(rng: np.random.Generator, d: int, depth: int = 3) -> TreeModel:
    def grow(level: int) -> TreeNode:
        if level == 0 or rng.random() < 0.25:
            return TreeNode(value=float(rng.uniform(-2, 2)))
        return TreeNode(
            feature=int(rng.integers(0, d)),
            threshold=float(rng.uniform(-1.5, 1.5)),
            left=grow(level - 1),
            right=grow(level - 1),
        )

    root = grow(depth)
    if root.is_leaf:  # ensure at least one split
        root = TreeNode(
            feature=0, threshold=0.0, left=root, right=TreeNode(value=float(rng.uniform(-2, 2)))
        )
    return TreeModel(open_schema(d), root)


def symmetric_tree(rng: np.random.Generator, d: int) -> TreeModel:
    """f(x) = leaf[count of (x_k > t) over k in {0,1}]: symmetric in features 0 and 1."""
    t = float(rng.uniform(-1.0, 1.0))
    c0, c1, c2 = (float(v) for v in rng.uniform(-2, 2, size=3))
    inner_low = TreeNode(feature=1, threshold=t, left=TreeNode(value=c0), right=TreeNode(value=c1))
    inner_high = TreeNode(feature=1, threshold=t, left=TreeNode(value=c1), right=TreeNode(value=c2))
    return TreeModel(
        open_schema(max(d, 2)),
        TreeNode(feature=0, threshold=t, left=inner_low, right=inner_high),
    )


def random_anchor_pair(rng: np.random.Generator, d: int,
                       lo: float = -2.0, hi: float = 2.0) -> tuple[np.ndarray, np.ndarray]:
    x = rng.uniform(lo, hi, size=d)
    b = rng.uniform(lo, hi, size=d)
    return x, b


def mlp_with_tied_columns(model: MlpModel, i: int = 0, j: int = 1) -> MlpModel:
    """Copy feature i's first-layer weights onto feature j: f becomes symmetric
    in (i, j) whenever the evaluation points agree on those coordinates."""
    layers = [(W.copy(), b.copy(), act) for W, b, act in model.layers]
    layers[0][0][:, j] = layers[0][0][:, i]
    return MlpModel(model.schema, layers)


def mlp_with_dummy(model: MlpModel, j: int = 0) -> MlpModel:
    """Zero feature j's first-layer weights: the model ignores it entirely."""
    layers = [(W.copy(), b.copy(), act) for W, b, act in model.layers]
    layers[0][0][:, j] = 0.0
    return MlpModel(model.schema, layers)


def tree_ignoring_feature(rng: np.random.Generator, d: int, j: int) -> TreeModel:
    """Random tree that never splits on feature j."""
    allowed = [i for i in range(d) if i != j]

    def grow(level: int) -> TreeNode:
        if level == 0 or rng.random() < 0.25:
            return TreeNode(value=float(rng.uniform(-2, 2)))
        return TreeNode(
            feature=int(rng.choice(allowed)),
            threshold=float(rng.uniform(-1.5, 1.5)),
            left=grow(level - 1),
            right=grow(level - 1),
        )

    root = grow(3)
    if root.is_leaf:
        root = TreeNode(
            feature=allowed[0], threshold=0.0, left=root,
            right=TreeNode(value=float(rng.uniform(-2, 2))),
        )
    return TreeModel(open_schema(d), root)
