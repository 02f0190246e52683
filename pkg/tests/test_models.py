import json

import numpy as np
import pytest

from modelprobe import (
    FeatureSpec,
    LinearModel,
    MlpModel,
    PredictionOutput,
    Schema,
    SchemaViolation,
    SpecError,
    UnsupportedMethod,
    gradient,
    load_model,
)
from modelprobe import fixtures

from factories import open_schema, random_linear, random_mlp, random_tree
from oracles import central_difference

LINEAR_DOC = {
    "schema": [
        {"name": "a", "kind": "continuous"},
        {"name": "b", "kind": "continuous"},
    ],
    "model": {"type": "linear", "weights": [1.0, 2.0], "bias": 0.0, "link": "identity"},
    "output": "score",
}


def test_load_minimal_linear_spec():
    model = load_model(json.dumps(LINEAR_DOC))
    assert model.schema.dimension == 2
    assert model.score([1.0, 1.0]).score == 3.0


def test_dimension_mismatch_rejected():
    doc = dict(LINEAR_DOC, model={"type": "linear", "weights": [1.0, 2.0, 3.0]})
    with pytest.raises(SpecError) as err:
        load_model(doc)
    assert "weights" in str(err.value)


def test_parse_error_carries_position():
    with pytest.raises(SpecError) as err:
        load_model('{"schema": [}')
    assert "line 1" in str(err.value)


def test_unknown_model_type():
    doc = dict(LINEAR_DOC, model={"type": "boosted"})
    with pytest.raises(SpecError) as err:
        load_model(doc)
    assert "boosted" in str(err.value)


def test_bee_fixture_classifies_the_narrative_cases(bee_model):
    assert bee_model.score([6, 4]).predicted_class == "bee"
    assert bee_model.score([8, 0]).predicted_class == "spider"
    assert bee_model.score([6, 2]).predicted_class == "fly"


def test_constant_model_scores_constant():
    model = LinearModel(open_schema(2), weights=[0.0, 0.0], bias=0.5)
    assert model.score([3.0, -1.0]).score == 0.5
    assert model.score([0.0, 0.0]).score == 0.5


def test_score_batch_empty_and_determinism():
    model = load_model(LINEAR_DOC)
    assert model.score_batch([]) == []
    a, b = model.score_batch([[1.0, 1.0], [1.0, 1.0]])
    assert a.score == b.score == 3.0


def test_score_batch_matches_and_enumeration(and_model):
    # 2^2 inputs enumerated by hand: only (1,1) fires
    outs = and_model.score_batch([[0, 0], [0, 1], [1, 0], [1, 1]])
    assert [o.score for o in outs] == [0.0, 0.0, 0.0, 1.0]


def test_score_batch_reports_failing_row_index():
    model = load_model(LINEAR_DOC)
    with pytest.raises(SchemaViolation) as err:
        model.score_batch([[1.0, 1.0], [1.0]])
    assert "row 1" in str(err.value)


def test_batch_single_equivalence():
    rng = np.random.default_rng(11)
    for maker in (random_linear, random_mlp, random_tree):
        model = maker(rng, 4)
        X = rng.uniform(-2, 2, size=(16, 4))
        # public batch op: elementwise equal to score, bit for bit
        batch = model.score_batch(X)
        for out, x in zip(batch, X):
            assert out.score == model.score(x).score
        # vectorized internal path: same function, BLAS summation order may
        # differ from the single path in the last bits
        assert np.allclose(model.score_many(X), [model.score_value(x) for x in X], rtol=1e-12)


def test_scoring_is_bit_identical():
    rng = np.random.default_rng(5)
    for maker in (random_linear, random_mlp, random_tree):
        model = maker(rng, 3)
        x = rng.uniform(-2, 2, size=3)
        assert model.score_value(x.copy()) == model.score_value(x.copy())


def test_gradient_of_linear_map_is_weights():
    model = load_model(LINEAR_DOC)
    assert gradient(model, [0.3, 0.7]).tolist() == [1.0, 2.0]
    assert gradient(model, [100.0, -100.0]).tolist() == [1.0, 2.0]


def test_gradient_of_constant_model_is_zero():
    model = LinearModel(open_schema(2), weights=[0.0, 0.0], bias=0.5)
    assert gradient(model, [1.0, 1.0]).tolist() == [0.0, 0.0]


def test_tanh_mlp_analytic_matches_central_difference():
    rng = np.random.default_rng(7)
    model = random_mlp(rng, 3, hidden=5, activation="tanh")
    x = np.array([0.4, -0.2, 1.1])
    analytic = gradient(model, x, method="analytic")
    numeric = central_difference(lambda p: model.score_value(p), x, h=1e-5)
    assert np.allclose(analytic, numeric, rtol=1e-6, atol=1e-9)


def test_gradient_property_random_models():
    # random Linear and Mlp, d <= 8, values in [-2, 2]
    rng = np.random.default_rng(42)
    for _ in range(20):
        d = int(rng.integers(1, 9))
        model = random_linear(rng, d) if rng.random() < 0.5 else random_mlp(rng, d)
        x = rng.uniform(-2, 2, size=d)
        analytic = gradient(model, x, method="analytic")
        numeric = gradient(model, x, method="central_difference", h=1e-5)
        err = np.abs(analytic - numeric)
        ok = (err <= 1e-5) | (err <= 1e-4 * np.abs(numeric))
        assert ok.all(), (d, analytic, numeric)


def test_analytic_gradient_unsupported_for_tree_and_rules(bee_model):
    rng = np.random.default_rng(3)
    tree = random_tree(rng, 2)
    with pytest.raises(UnsupportedMethod):
        gradient(tree, [0.0, 0.0], method="analytic")
    with pytest.raises(UnsupportedMethod):
        gradient(bee_model, [6, 4], method="analytic")
    # central differences remain allowed on non-smooth models
    g = gradient(tree, [0.0, 0.0], method="central_difference")
    assert g.shape == (2,)


def test_relu_mlp_requires_central_differences():
    rng = np.random.default_rng(30)
    model = random_mlp(rng, 3, activation="relu")
    with pytest.raises(UnsupportedMethod):
        gradient(model, [0.3, 0.3, 0.3], method="analytic")
    g = gradient(model, [0.3, 0.3, 0.3], method="central_difference")
    assert g.shape == (3,)


def test_class_probabilities_normalized(bee_model):
    out = bee_model.score([6, 4])
    assert abs(float(out.probabilities.sum()) - 1.0) <= 1e-9
    assert np.all(out.probabilities >= 0)

    logistic = LinearModel(
        open_schema(2), weights=[1.0, -1.0], bias=0.2, link="logistic",
        output_kind="class_probabilities", classes=("no", "yes"),
    )
    out = logistic.score([0.5, 0.5])
    assert abs(float(out.probabilities.sum()) - 1.0) <= 1e-9

    softmax_mlp = MlpModel(
        open_schema(2),
        [(np.eye(3, 2), np.zeros(3), "identity")],
        output_kind="class_probabilities",
        classes=("a", "b", "c"),
    )
    out = softmax_mlp.score([0.1, 0.9])
    assert abs(float(out.probabilities.sum()) - 1.0) <= 1e-9


def test_argmax_tie_breaks_to_lowest_index():
    out = PredictionOutput.from_value(np.array([0.5, 0.5]), ("first", "second"))
    assert out.predicted_class == "first"


def test_non_finite_scores_rejected():
    with pytest.raises(SchemaViolation):
        PredictionOutput.from_value(float("nan"), None)
    with pytest.raises(SchemaViolation):
        PredictionOutput.from_value(np.array([0.7, 0.7]), ("a", "b"))  # sums to 1.4


def test_logistic_gradient_matches_numeric():
    model = LinearModel(open_schema(2), weights=[1.5, -0.5], bias=0.1, link="logistic")
    x = np.array([0.2, 0.4])
    analytic = gradient(model, x, method="analytic")
    numeric = central_difference(lambda p: model.score_value(p), x)
    assert np.allclose(analytic, numeric, rtol=1e-6)


def test_fixture_documents_validate_against_shipped_json_schema():
    jsonschema = pytest.importorskip("jsonschema")
    from importlib import resources

    schema_text = (
        resources.files("modelprobe") / "schemas" / "model_spec.schema.json"
    ).read_text()
    validator = jsonschema.Draft202012Validator(json.loads(schema_text))
    for name in fixtures.fixture_names():
        validator.validate(fixtures.fixture_document(name))
