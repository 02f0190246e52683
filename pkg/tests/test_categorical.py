"""Categorical features across the engine: flip-only search, region sampling."""

import numpy as np
import pytest

from modelprobe import (
    DistanceConfig,
    FeatureSpec,
    RegionSpec,
    RuleSetModel,
    Schema,
    SearchConfig,
    TargetSpec,
    find_counterfactual,
    render_contrast,
)
from modelprobe.models import Predicate, Rule


def color_schema():
    return Schema(
        (
            FeatureSpec("color", "categorical", categories=("red", "green", "blue")),
            FeatureSpec("size", "continuous", lower=0.0, upper=2.0),
        )
    )


def blue_likes_model():
    # score 1 only for blue items of size >= 1
    schema = color_schema()
    rules = (
        Rule(predicates=(Predicate(0, "==", 2.0), Predicate(1, ">=", 1.0)), outcome=1.0),
        Rule(predicates=(), outcome=0.0),
    )
    return RuleSetModel(schema, rules)


def test_counterfactual_flips_category_exactly():
    model = blue_likes_model()
    x = model.schema.point({"color": "red", "size": 1.5})
    target = TargetSpec(score=1.0, tolerance=0.1)
    distance = DistanceConfig.unit_l1(model.schema)
    result = find_counterfactual(model, x, target, distance, SearchConfig(seed=3))
    assert result.converged
    assert model.schema.to_named(result.c)["color"] == "blue"
    assert result.c[0] == 2.0  # exact category index, no fractional value
    statement = render_contrast(model, x, result)
    assert ("color", "red", "blue") in statement.changed_features


def test_counterfactual_moves_both_kinds_when_needed():
    model = blue_likes_model()
    x = model.schema.point({"color": "green", "size": 0.2})
    target = TargetSpec(score=1.0, tolerance=0.1)
    distance = DistanceConfig.unit_l1(model.schema)
    result = find_counterfactual(model, x, target, distance, SearchConfig(seed=5, restarts=6))
    assert result.converged
    named = model.schema.to_named(result.c)
    assert named["color"] == "blue"
    assert result.c[1] >= 1.0 - 1e-9


def test_locked_categorical_blocks_the_flip():
    model = blue_likes_model()
    x = model.schema.point({"color": "red", "size": 1.5})
    target = TargetSpec(score=1.0, tolerance=0.1)
    distance = DistanceConfig.unit_l1(model.schema, locked=(0,))
    result = find_counterfactual(model, x, target, distance, SearchConfig(seed=3))
    assert not result.converged
    assert result.c[0] == x[0]


def test_region_sampling_keeps_category_indices_valid():
    schema = color_schema()
    center = schema.point({"color": "green", "size": 1.0})
    region = RegionSpec.around(schema, center, radius=0.5, n_samples=500, seed=9)
    X = region.sample()
    assert set(np.unique(X[:, 0])) <= {0.0, 1.0, 2.0}
    # with probability min(1, 0.5) of resampling, the center category must
    # survive on a healthy fraction of draws
    assert (X[:, 0] == 1.0).mean() > 0.4
    assert np.all(X[:, 1] >= 0.5 - 1e-12) and np.all(X[:, 1] <= 1.5 + 1e-12)


def test_radius_zero_region_never_resamples_categories():
    schema = color_schema()
    center = schema.point({"color": "blue", "size": 1.0})
    region = RegionSpec.around(schema, center, radius=0.0, n_samples=100, seed=9)
    X = region.sample()
    assert np.all(X[:, 0] == 2.0)
    assert np.all(X[:, 1] == 1.0)
