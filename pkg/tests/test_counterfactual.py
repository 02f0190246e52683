import numpy as np
import pytest

from modelprobe import (
    ConfigError,
    DistanceConfig,
    FeatureSpec,
    LinearModel,
    RuleSetModel,
    Schema,
    SearchConfig,
    TargetSpec,
    diverse_counterfactuals,
    find_counterfactual,
    load_model,
    oracle_grid_search,
    render_contrast,
)
from modelprobe.models import Predicate, Rule

from factories import open_schema
from oracles import grid_axis


def unit_box_linear(weights=(1.0, 1.0)):
    return LinearModel(open_schema(2, 0.0, 1.0), weights=list(weights), bias=0.0)


def test_linear_l2_matches_analytic_and_oracle():
    model = unit_box_linear()
    target = TargetSpec(score=1.0, tolerance=0.01)
    distance = DistanceConfig.l2(model.schema)
    search = SearchConfig(seed=7)
    result = find_counterfactual(model, [0.0, 0.0], target, distance, search)
    assert result.converged
    # analytic minimum-norm solution x + (T - f(x)) w / ||w||^2 = (0.5, 0.5)
    assert np.allclose(result.c, [0.5, 0.5], atol=0.05)
    assert result.distance == pytest.approx(np.sqrt(0.5), abs=0.02)
    # independent brute force on a 201x201 grid
    axes = [grid_axis(0.0, 1.0, 0.005)] * 2
    oracle = oracle_grid_search(model, [0.0, 0.0], target, distance, axes)
    assert oracle.converged
    assert result.distance <= 1.05 * oracle.distance


def test_linear_mad_weights_move_the_cheap_feature():
    model = unit_box_linear()
    target = TargetSpec(score=1.0, tolerance=0.01)
    # MAD (1, 10) -> weights (1, 0.1): per unit of score, feature 2 is cheaper
    distance = DistanceConfig.custom([1.0, 0.1])
    search = SearchConfig(seed=3)
    result = find_counterfactual(model, [0.0, 0.0], target, distance, search)
    assert result.converged
    assert result.c[1] == pytest.approx(1.0, abs=0.05)
    assert result.c[0] == pytest.approx(0.0, abs=0.02)
    assert result.distance == pytest.approx(0.1, abs=0.02)
    axes = [grid_axis(0.0, 1.0, 0.005)] * 2
    oracle = oracle_grid_search(model, [0.0, 0.0], target, distance, axes)
    assert result.distance <= 1.05 * oracle.distance


def test_bee_counterfactual_with_locked_legs(bee_model):
    target = TargetSpec(target_class="fly", tolerance=0.01)
    distance = DistanceConfig.unit_l1(bee_model.schema, locked=(0,))
    search = SearchConfig(seed=1)
    result = find_counterfactual(bee_model, [6, 4], target, distance, search)
    assert result.converged
    assert result.c.tolist() == [6.0, 2.0]
    assert bee_model.score(result.c).predicted_class == "fly"


def test_feasibility_recomputed_independently():
    model = unit_box_linear((2.0, -1.0))
    target = TargetSpec(score=0.75, tolerance=0.02)
    distance = DistanceConfig.l2(model.schema)
    result = find_counterfactual(model, [0.1, 0.2], target, distance, SearchConfig(seed=5))
    if result.converged:
        fresh = model.score(result.c).score
        assert abs(fresh - 0.75) <= 0.02
        assert result.score_at_c == pytest.approx(fresh)


def test_locked_features_never_move():
    model = unit_box_linear()
    target = TargetSpec(score=0.8, tolerance=0.01)
    distance = DistanceConfig.l2(model.schema, locked=(0,))
    result = find_counterfactual(model, [0.25, 0.1], target, distance, SearchConfig(seed=2))
    assert result.c[0] == 0.25
    assert result.converged
    assert abs(model.score_value(result.c) - 0.8) <= 0.01


def test_lambda_trace_monotone_and_violation_non_increasing():
    # force a slow approach so several outer rounds run
    model = unit_box_linear()
    target = TargetSpec(score=1.0, tolerance=0.001)
    distance = DistanceConfig.l2(model.schema)
    result = find_counterfactual(
        model, [0.0, 0.0], target, distance, SearchConfig(seed=11, restarts=1)
    )
    lams = [l for l, _ in result.lambda_trace]
    assert len(lams) >= 2
    assert all(b > a for a, b in zip(lams, lams[1:]))
    viols = list(result.violation_trace)
    assert all(b <= a + 1e-12 for a, b in zip(viols, viols[1:]))


def test_search_is_deterministic():
    model = unit_box_linear()
    target = TargetSpec(score=0.6, tolerance=0.01)
    distance = DistanceConfig.l2(model.schema)
    a = find_counterfactual(model, [0.0, 0.0], target, distance, SearchConfig(seed=13))
    b = find_counterfactual(model, [0.0, 0.0], target, distance, SearchConfig(seed=13))
    assert np.array_equal(a.c, b.c)
    assert a.distance == b.distance
    assert a.lambda_trace == b.lambda_trace
    assert a.n_model_evals == b.n_model_evals


class RecordingLinear(LinearModel):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.seen = []

    def score_value(self, x):
        self.seen.append(np.asarray(x).copy())
        return super().score_value(x)


def test_every_evaluated_candidate_respects_bounds():
    model = RecordingLinear(open_schema(2, 0.0, 1.0), weights=[1.0, 1.0])
    target = TargetSpec(score=1.5, tolerance=0.01)
    distance = DistanceConfig.l2(model.schema)
    find_counterfactual(model, [0.2, 0.2], target, distance, SearchConfig(seed=4))
    assert model.seen, "search never scored anything"
    for p in model.seen:
        assert np.all(p >= -1e-12) and np.all(p <= 1.0 + 1e-12)


def test_non_convergence_is_reported_not_raised():
    model = LinearModel(open_schema(2, 0.0, 1.0), weights=[0.0, 0.0], bias=0.5)
    target = TargetSpec(score=2.0, tolerance=0.01)
    result = find_counterfactual(
        model, [0.5, 0.5], target, DistanceConfig.l2(model.schema), SearchConfig(seed=6)
    )
    assert not result.converged
    assert result.score_at_c == 0.5


def test_invalid_configs_rejected():
    with pytest.raises(ConfigError):
        TargetSpec(score=1.0, target_class="fly")
    with pytest.raises(ConfigError):
        TargetSpec(score=None, target_class=None)
    with pytest.raises(ConfigError):
        TargetSpec(score=1.0, tolerance=0.0)
    with pytest.raises(ConfigError):
        SearchConfig(lambda_growth=1.0)
    with pytest.raises(ConfigError):
        SearchConfig(restarts=0)
    with pytest.raises(ConfigError):
        DistanceConfig.custom([1.0, -1.0])
    model = unit_box_linear()
    with pytest.raises(ConfigError):
        find_counterfactual(
            model, [0.0, 0.0], TargetSpec(target_class="fly"),
            DistanceConfig.l2(model.schema), SearchConfig(seed=0),
        )


# ---------------------------------------------------------------------------
# oracle grid search
# ---------------------------------------------------------------------------

def test_oracle_two_point_grid():
    model = unit_box_linear()
    target = TargetSpec(score=1.0, tolerance=0.01)
    distance = DistanceConfig.l2(model.schema)
    out = oracle_grid_search(
        model, [0.0, 0.0], target, distance, [[0.0, 0.5], [0.0, 0.5]]
    )
    assert out.converged
    assert out.c.tolist() == [0.5, 0.5]


def test_oracle_infeasible_grid():
    model = unit_box_linear()
    target = TargetSpec(score=1.0, tolerance=0.001)
    out = oracle_grid_search(
        model, [0.0, 0.0], target, DistanceConfig.l2(model.schema), [[0.0], [0.0]]
    )
    assert not out.converged
    assert out.c.tolist() == [0.0, 0.0]


def test_oracle_dense_grid_hits_exact_solution():
    # with tolerance 1e-3, the only feasible grid sums are exactly 1.000 and
    # the closest such point to the origin is (0.5, 0.5)
    model = unit_box_linear()
    target = TargetSpec(score=1.0, tolerance=1e-3)
    axes = [grid_axis(0.0, 1.0, 0.005)] * 2
    out = oracle_grid_search(model, [0.0, 0.0], target, DistanceConfig.l2(model.schema), axes)
    assert out.converged
    assert np.allclose(out.c, [0.5, 0.5], atol=1e-12)
    assert out.n_model_evals == 201 * 201


def test_oracle_tie_breaks_lexicographically():
    schema = open_schema(2, 0.0, 1.0)
    model = LinearModel(schema, weights=[0.0, 0.0], bias=1.0)  # every point feasible
    target = TargetSpec(score=1.0, tolerance=0.1)
    out = oracle_grid_search(
        model, [0.5, 0.5], target, DistanceConfig.l2(schema),
        [[0.4, 0.6], [0.4, 0.6]],
    )
    assert out.c.tolist() == [0.4, 0.4]  # all 4 points tie on distance


def test_oracle_cap_enforced():
    model = unit_box_linear()
    target = TargetSpec(score=1.0, tolerance=0.01)
    with pytest.raises(ConfigError):
        oracle_grid_search(
            model, [0.0, 0.0], target, DistanceConfig.l2(model.schema),
            [np.linspace(0, 1, 4000), np.linspace(0, 1, 4000)],
        )


def test_oracle_respects_locked_features():
    model = unit_box_linear()
    target = TargetSpec(score=0.5, tolerance=0.01)
    distance = DistanceConfig.l2(model.schema, locked=(0,))
    out = oracle_grid_search(
        model, [0.2, 0.0], target, distance, [grid_axis(0, 1, 0.01)] * 2
    )
    assert out.c[0] == 0.2


# ---------------------------------------------------------------------------
# diverse counterfactuals
# ---------------------------------------------------------------------------

def xor_rules_model():
    schema = open_schema(2, 0.0, 1.0)
    rules = (
        Rule(
            predicates=(Predicate(0, ">=", 0.7), Predicate(1, "<=", 0.3)),
            outcome=1.0,
        ),
        Rule(
            predicates=(Predicate(0, "<=", 0.3), Predicate(1, ">=", 0.7)),
            outcome=1.0,
        ),
        Rule(predicates=(), outcome=0.0),
    )
    return RuleSetModel(schema, rules)


def test_diverse_n1_identical_to_single_search():
    model = unit_box_linear()
    target = TargetSpec(score=0.9, tolerance=0.01)
    distance = DistanceConfig.l2(model.schema)
    search = SearchConfig(seed=17)
    single = find_counterfactual(model, [0.0, 0.0], target, distance, search)
    diverse = diverse_counterfactuals(model, [0.0, 0.0], target, distance, search, n=1)
    assert len(diverse.results) == 1
    assert np.array_equal(diverse.results[0].c, single.c)
    assert diverse.complete


def test_diverse_finds_both_symmetric_regions():
    model = xor_rules_model()
    target = TargetSpec(score=1.0, tolerance=0.1)
    distance = DistanceConfig.l2(model.schema)
    search = SearchConfig(seed=23, restarts=8, inner_optimizer="coordinate_descent")
    # both cells are genuinely feasible: the oracle confirms each half-plane
    left = oracle_grid_search(
        model, [0.5, 0.5], target, distance,
        [grid_axis(0.0, 0.45, 0.05), grid_axis(0.0, 1.0, 0.05)],
    )
    right = oracle_grid_search(
        model, [0.5, 0.5], target, distance,
        [grid_axis(0.55, 1.0, 0.05), grid_axis(0.0, 1.0, 0.05)],
    )
    assert left.converged and right.converged
    out = diverse_counterfactuals(model, [0.5, 0.5], target, distance, search, n=2)
    assert len(out.results) == 2
    sides = sorted(r.c[0] > 0.5 for r in out.results)
    assert sides == [False, True]  # one counterfactual in each cell
    for r in out.results:
        assert model.score_value(r.c) == 1.0


def test_diverse_unreachable_target_returns_empty():
    model = LinearModel(open_schema(2, 0.0, 1.0), weights=[0.0, 0.0], bias=0.5)
    target = TargetSpec(score=3.0, tolerance=0.01)
    out = diverse_counterfactuals(
        model, [0.5, 0.5], target, DistanceConfig.l2(model.schema),
        SearchConfig(seed=2), n=3,
    )
    assert out.results == ()
    assert not out.complete


# ---------------------------------------------------------------------------
# contrast statements
# ---------------------------------------------------------------------------

def test_contrast_no_change_required():
    model = unit_box_linear()
    target = TargetSpec(score=0.4, tolerance=0.01)
    distance = DistanceConfig.l2(model.schema)
    result = find_counterfactual(model, [0.2, 0.2], target, distance, SearchConfig(seed=0))
    assert result.converged
    assert np.array_equal(result.c, [0.2, 0.2])  # already feasible
    statement = render_contrast(model, [0.2, 0.2], result)
    assert statement.changed_features == ()
    assert "no change required" in statement.text.lower()


def test_contrast_bee_statement_exact(bee_model):
    target = TargetSpec(target_class="fly", tolerance=0.01)
    distance = DistanceConfig.unit_l1(bee_model.schema, locked=(0,))
    result = find_counterfactual(bee_model, [6, 4], target, distance, SearchConfig(seed=1))
    statement = render_contrast(bee_model, [6, 4], result)
    assert statement.text == (
        "If wings had been 2 (instead of 4), the classification would have "
        "been fly (instead of bee)."
    )
    assert statement.changed_features == (("wings", 4, 2),)


def test_contrast_lists_changes_in_schema_order():
    schema = Schema((FeatureSpec("alpha"), FeatureSpec("beta")))
    model = LinearModel(schema, weights=[1.0, 1.0])
    from modelprobe.counterfactual import CounterfactualResult

    result = CounterfactualResult(
        c=np.array([1.0, 2.0]), score_at_c=3.0, distance=3.0, converged=True,
        lambda_trace=(), n_model_evals=0,
    )
    statement = render_contrast(model, [0.0, 0.0], result)
    assert [name for name, _, _ in statement.changed_features] == ["alpha", "beta"]
    assert statement.text.index("alpha") < statement.text.index("beta")
    assert "score" in statement.text
