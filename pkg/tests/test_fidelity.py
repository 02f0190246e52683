import numpy as np
import pytest

from modelprobe import (
    BaselineConfig,
    ConfigError,
    RegionSpec,
    Scheme,
    SurrogateExplanation,
    agreement_at,
    classify_analogies,
    compare_schemes,
    edge_attribution,
    gradient_attribution,
    shapley_attribution,
    validity_profile,
)
from modelprobe import fixtures

from factories import open_schema, random_linear, random_mlp


def region_for(model, center, radius, n=400, seed=0, scales=None):
    return RegionSpec.around(model.schema, center, radius, n, seed, scales=scales)


# ---------------------------------------------------------------------------
# agreement
# ---------------------------------------------------------------------------

def test_linear_model_with_its_gradient_surrogate_agrees_everywhere():
    rng = np.random.default_rng(0)
    model = random_linear(rng, 3)
    x = rng.uniform(-1, 1, size=3)
    expl = gradient_attribution(model, x)
    for radius in (0.5, 1.0, 3.0):
        assert agreement_at(model, expl, region_for(model, x, radius)) == 1.0


def test_radius_zero_agreement_for_anchor_exact_surrogates():
    rng = np.random.default_rng(1)
    model = random_mlp(rng, 3)
    x = rng.uniform(-1, 1, size=3)
    for expl in (
        gradient_attribution(model, x),
        shapley_attribution(model, x, BaselineConfig.reference(model.schema, [0.0] * 3)),
    ):
        # shapley: intercept + sum(phi) = f(b) + (f(x) - f(b)) = f(x); gradient
        # is anchor-exact by construction
        assert agreement_at(model, expl, region_for(model, x, 0.0)) == 1.0


def test_tangent_plane_on_tanh_mlp_degrades_at_radius_3():
    rng = np.random.default_rng(2)
    model = random_mlp(rng, 3, hidden=8)
    x = np.zeros(3)
    expl = gradient_attribution(model, x)
    # dense-sampling oracle: compute the residual distribution directly
    probe = np.random.default_rng(3).uniform(-3.0, 3.0, size=(20000, 3))
    f_vals = model.score_many(probe)
    g_vals = expl.intercept + probe @ expl.weights
    resid = np.median(np.abs(f_vals - g_vals))
    assert resid > 0  # curvature is really there
    agreement = agreement_at(model, expl, region_for(model, x, 3.0, n=2000))
    assert agreement < 1.0


def test_agreement_always_in_unit_interval():
    rng = np.random.default_rng(4)
    model = random_mlp(rng, 2)
    x = np.zeros(2)
    bad = SurrogateExplanation(
        schema=model.schema, anchor=x, weights=np.array([500.0, -500.0]),
        intercept=100.0, scheme=Scheme(kind="gradient"), baseline=None, mapping="raw",
    )
    a = agreement_at(model, bad, region_for(model, x, 2.0))
    assert 0.0 <= a <= 1.0


def test_classifier_agreement_is_label_match_rate(bee_model):
    x = np.array([6.0, 4.0])
    expl = edge_attribution(bee_model, x, BaselineConfig.zero(bee_model.schema))
    region = RegionSpec.around(bee_model.schema, x, 1.0, 500, 0)
    a = agreement_at(bee_model, expl, region)
    assert 0.0 <= a <= 1.0


# ---------------------------------------------------------------------------
# validity profile
# ---------------------------------------------------------------------------

def test_exact_surrogate_has_max_validity_radius():
    rng = np.random.default_rng(5)
    model = random_linear(rng, 3)
    x = rng.uniform(-1, 1, size=3)
    expl = gradient_attribution(model, x)
    profile = validity_profile(
        model, expl, x, [0.5, 1.0, 2.0, 4.0], threshold=0.95, n_samples=400, seed=0
    )
    assert profile.agreement == (1.0, 1.0, 1.0, 1.0)
    assert profile.validity_radius == 4.0


def test_threshold_zero_always_full_radius():
    rng = np.random.default_rng(6)
    model = random_mlp(rng, 2)
    x = np.zeros(2)
    expl = gradient_attribution(model, x)
    profile = validity_profile(
        model, expl, x, [1.0, 2.0, 4.0], threshold=0.0, n_samples=200, seed=0
    )
    assert profile.validity_radius == 4.0


def test_kink_fixture_validity_radius_brackets_the_kink():
    model = fixtures.load_fixture("kink4")
    dataset = fixtures.fixture_dataset("kink4")
    assert dataset.effective_scale().tolist() == [1.0] * 4
    center = np.zeros(4)
    expl = gradient_attribution(model, center, method="central_difference")
    assert np.allclose(expl.weights, np.ones(4), atol=1e-6)

    # dense-sampling oracle: agreement is exactly 1 inside the kink and falls
    # below threshold by radius 2.5
    oracle_rng = np.random.default_rng(99)
    for radius, expect_break in ((2.0, False), (2.5, True)):
        P = oracle_rng.uniform(-radius, radius, size=(20000, 4))
        f_vals = model.score_many(P)
        g_vals = expl.intercept + P @ expl.weights
        resid = float(np.median(np.abs(f_vals - g_vals)))
        q75, q25 = np.percentile(f_vals, [75, 25])
        oracle_agreement = 1.0 - resid / max(q75 - q25, 1e-6)
        assert (oracle_agreement < 0.95) == expect_break

    profile = validity_profile(
        model, expl, center, [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0],
        threshold=0.95, n_samples=2000, seed=7, dataset=dataset,
    )
    assert profile.validity_radius is not None
    assert 1.5 <= profile.validity_radius <= 2.5


def test_validity_radius_monotone_in_threshold():
    rng = np.random.default_rng(8)
    model = random_mlp(rng, 3, hidden=8)
    x = np.zeros(3)
    expl = gradient_attribution(model, x)
    radii = [0.25, 0.5, 1.0, 2.0, 4.0]
    values = []
    for threshold in (0.99, 0.9, 0.5, 0.0):
        p = validity_profile(model, expl, x, radii, threshold, n_samples=400, seed=3)
        values.append(p.validity_radius if p.validity_radius is not None else -1.0)
    assert values == sorted(values)


def test_prefix_rule_none_when_first_radius_fails():
    rng = np.random.default_rng(9)
    model = random_mlp(rng, 2)
    x = np.zeros(2)
    bad = SurrogateExplanation(
        schema=model.schema, anchor=x, weights=np.array([999.0, 999.0]),
        intercept=50.0, scheme=Scheme(kind="gradient"), baseline=None, mapping="raw",
    )
    p = validity_profile(model, bad, x, [0.5, 1.0], threshold=0.95, n_samples=200, seed=0)
    assert p.validity_radius is None


def test_radii_must_ascend():
    rng = np.random.default_rng(10)
    model = random_linear(rng, 2)
    expl = gradient_attribution(model, [0.0, 0.0])
    with pytest.raises(ConfigError):
        validity_profile(model, expl, [0.0, 0.0], [2.0, 1.0], 0.9, 100, 0)


def test_profile_csv_export():
    rng = np.random.default_rng(11)
    model = random_linear(rng, 2)
    expl = gradient_attribution(model, [0.0, 0.0])
    p = validity_profile(model, expl, [0.0, 0.0], [1.0, 2.0], 0.9, 100, 0)
    lines = p.to_csv().strip().split("\n")
    assert lines[0] == "radius,agreement"
    assert len(lines) == 3


# ---------------------------------------------------------------------------
# analogy classification
# ---------------------------------------------------------------------------

def test_exact_surrogate_all_positive():
    rng = np.random.default_rng(12)
    model = random_linear(rng, 3)
    x = rng.uniform(-1, 1, size=3)
    expl = gradient_attribution(model, x)
    report = classify_analogies(model, expl, region_for(model, x, 1.0, n=200))
    assert all(f.classification == "positive" for f in report.features)


def test_dummy_feature_positive_via_no_effect_rule():
    model = __import__("modelprobe").LinearModel(
        open_schema(3), weights=[1.0, 0.0, -2.0]
    )
    x = np.zeros(3)
    expl = gradient_attribution(model, x)
    assert expl.weights[1] == 0.0
    report = classify_analogies(model, expl, region_for(model, x, 1.0, n=200))
    assert report.features[1].classification == "positive"
    assert report.features[1].n_effective == 0


def test_insufficient_samples_all_neutral():
    rng = np.random.default_rng(13)
    model = random_linear(rng, 2)
    x = np.zeros(2)
    expl = gradient_attribution(model, x)
    report = classify_analogies(model, expl, region_for(model, x, 1.0, n=10))
    assert all(f.classification == "neutral" for f in report.features)


def test_anticorrelated_surrogate_is_negative():
    model = __import__("modelprobe").LinearModel(open_schema(2), weights=[-1.0, 1.0])
    x = np.zeros(2)
    wrong = SurrogateExplanation(
        schema=model.schema, anchor=x, weights=np.array([1.0, 1.0]),  # sign flipped on f0
        intercept=0.0, scheme=Scheme(kind="gradient"), baseline=None, mapping="raw",
    )
    report = classify_analogies(model, wrong, region_for(model, x, 1.0, n=200))
    assert report.features[0].classification == "negative"
    assert report.features[0].effect_correlation < 0
    assert report.features[1].classification == "positive"


def test_analogy_determinism():
    rng = np.random.default_rng(14)
    model = random_mlp(rng, 3)
    x = np.zeros(3)
    expl = gradient_attribution(model, x)
    region = region_for(model, x, 1.0, n=100, seed=21)
    a = classify_analogies(model, expl, region)
    b = classify_analogies(model, expl, region)
    assert a == b


# ---------------------------------------------------------------------------
# scheme comparison
# ---------------------------------------------------------------------------

def test_same_scheme_twice_zero_divergence(and_model):
    zero = BaselineConfig.zero(and_model.schema)
    dm = compare_schemes(
        and_model, [1.0, 1.0],
        [(Scheme(kind="shapley_exact"), zero), (Scheme(kind="shapley_exact"), zero)],
    )
    assert dm.divergence[0, 1] == 0.0
    assert dm.argmax_agreement[0, 1] == 1
    assert np.all(np.diag(dm.divergence) == 0.0)


def test_linear_model_all_schemes_agree():
    rng = np.random.default_rng(15)
    model = random_linear(rng, 3)
    x = rng.uniform(-1, 1, size=3)
    ref = BaselineConfig.reference(model.schema, rng.uniform(-1, 1, size=3))
    combos = [
        (Scheme(kind="edge_from_data"), ref),
        (Scheme(kind="shapley_exact"), ref),
        (Scheme(kind="banzhaf_exact"), ref),
        (Scheme(kind="lime_kernel", n=8, sigma=1.0, seed=0), ref),
    ]
    dm = compare_schemes(model, x, combos)
    off = dm.divergence[~np.eye(4, dtype=bool)]
    assert np.all(off <= 1e-6)


def test_cube3_shapley_banzhaf_diverge():
    model = fixtures.load_fixture("cube3")
    zero = BaselineConfig.zero(model.schema)
    dm = compare_schemes(
        model, [1.0, 1.0, 1.0],
        [(Scheme(kind="shapley_exact"), zero), (Scheme(kind="banzhaf_exact"), zero)],
    )
    assert dm.divergence[0, 1] > 0.0
    assert dm.divergence[0, 1] == dm.divergence[1, 0]


def test_witness_fixture_argmax_disagreement_across_baselines():
    model = fixtures.load_fixture("interaction")
    zero = BaselineConfig.zero(model.schema)
    ref = BaselineConfig.reference(model.schema, [1.0, 0.0])
    dm = compare_schemes(
        model, [1.0, 1.0],
        [(Scheme(kind="edge_from_data"), zero), (Scheme(kind="edge_from_data"), ref)],
    )
    assert dm.argmax_agreement[0, 1] == 0


def test_failed_cells_marked_absent():
    rng = np.random.default_rng(16)
    model = random_linear(rng, 3)
    zero = BaselineConfig.zero(model.schema)
    combos = [
        (Scheme(kind="shapley_exact"), zero),
        (Scheme(kind="lime_kernel", n=2, sigma=1.0, seed=0), zero),  # n < d+1 fails
    ]
    dm = compare_schemes(model, [1.0, 1.0, 1.0], combos)
    assert np.isnan(dm.divergence[0, 1])
    assert dm.argmax_agreement[0, 1] == -1
    assert len(dm.errors) == 1
    doc = dm.to_document()
    assert doc["divergence"][0][1] is None


def test_compare_needs_two_combos(and_model):
    with pytest.raises(ConfigError):
        compare_schemes(and_model, [1.0, 1.0],
                        [(Scheme(kind="edge_from_data"), BaselineConfig.zero(and_model.schema))])
