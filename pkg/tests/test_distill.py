import numpy as np
import pytest

from modelprobe import (
    BoxRegion,
    ConfigError,
    Dataset,
    DegenerateRegion,
    FeatureSpec,
    LinearModel,
    Schema,
    case_based,
    global_tree_surrogate,
)
from modelprobe import fixtures

from factories import open_schema


def test_tree_surrogate_recovers_a_depth2_tree():
    model = fixtures.load_fixture("interaction")  # depth-2 tree, leaves 0/1/6
    region = BoxRegion.from_schema(model.schema)
    out = global_tree_surrogate(model, region, max_depth=2, n_samples=4000, seed=0)
    assert out.fidelity >= 0.99
    assert out.depth <= 2


def test_tree_surrogate_constant_model_is_depth0():
    model = LinearModel(open_schema(2, 0.0, 1.0), weights=[0.0, 0.0], bias=3.0)
    region = BoxRegion.from_schema(model.schema)
    out = global_tree_surrogate(model, region, max_depth=4, n_samples=200, seed=1)
    assert out.depth == 0
    assert out.fidelity == 1.0


def test_tree_surrogate_depth1_cannot_track_a_diagonal():
    model = LinearModel(open_schema(2, 0.0, 1.0), weights=[1.0, 1.0])
    region = BoxRegion.from_schema(model.schema)
    out = global_tree_surrogate(model, region, max_depth=1, n_samples=2000, seed=2)
    assert out.fidelity < 1.0
    assert out.depth == 1


def test_tree_surrogate_fidelity_improves_with_depth():
    model = LinearModel(open_schema(2, 0.0, 1.0), weights=[1.0, 1.0])
    region = BoxRegion.from_schema(model.schema)
    shallow = global_tree_surrogate(model, region, max_depth=1, n_samples=2000, seed=3)
    deep = global_tree_surrogate(model, region, max_depth=5, n_samples=2000, seed=3)
    assert deep.fidelity > shallow.fidelity


def test_degenerate_region_rejected():
    schema = open_schema(2)
    with pytest.raises(DegenerateRegion):
        BoxRegion(schema=schema, lows=np.zeros(2), highs=np.zeros(2))
    with pytest.raises(ConfigError):
        BoxRegion(schema=schema, lows=np.ones(2), highs=np.zeros(2))


def test_tree_surrogate_deterministic():
    model = fixtures.load_fixture("interaction")
    region = BoxRegion.from_schema(model.schema)
    a = global_tree_surrogate(model, region, max_depth=2, n_samples=500, seed=9)
    b = global_tree_surrogate(model, region, max_depth=2, n_samples=500, seed=9)
    assert a.to_document() == b.to_document()


# ---------------------------------------------------------------------------
# case-based
# ---------------------------------------------------------------------------

def five_row_fixture():
    schema = Schema(
        (
            FeatureSpec("a", "continuous"),
            FeatureSpec("b", "continuous"),
        )
    )
    rows = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [10.0, 10.0]]
    return Schema, Dataset.from_rows(schema, rows)


def test_query_point_in_dataset_is_its_own_neighbor():
    _, ds = five_row_fixture()
    model = LinearModel(ds.schema, weights=[1.0, 1.0])
    for metric in ("score_space", "input_mad", "blended"):
        out = case_based(model, ds, [2.0, 2.0], k=1, metric=metric)
        assert out.neighbors[0].row_index == 2
        assert out.neighbors[0].distance == 0.0


def test_full_k_returns_all_rows_sorted():
    _, ds = five_row_fixture()
    model = LinearModel(ds.schema, weights=[1.0, 1.0])
    out = case_based(model, ds, [2.0, 2.0], k=5, metric="input_mad")
    assert len(out.neighbors) == 5
    dists = [n.distance for n in out.neighbors]
    assert dists == sorted(dists)


def test_mad_distances_hand_computed():
    # columns both {0,1,2,3,10}: median 2, |v-2| = {2,1,0,1,8} -> MAD 1
    # distance of row r from x=(2,2): sum |r_j - 2| / 1
    _, ds = five_row_fixture()
    assert ds.stats.mad.tolist() == [1.0, 1.0]
    model = LinearModel(ds.schema, weights=[1.0, 1.0])
    out = case_based(model, ds, [2.0, 2.0], k=5, metric="input_mad")
    expected = [(2, 0.0), (1, 2.0), (3, 2.0), (0, 4.0), (4, 16.0)]
    assert [(n.row_index, n.distance) for n in out.neighbors] == expected


def test_score_space_metric_uses_model_outputs():
    _, ds = five_row_fixture()
    # model that only sees feature a: score distance ignores b entirely
    model = LinearModel(ds.schema, weights=[1.0, 0.0])
    out = case_based(model, ds, [2.5, 0.0], k=2, metric="score_space")
    assert out.neighbors[0].row_index in (2, 3)  # scores 2 and 3 straddle 2.5
    assert out.neighbors[0].distance == 0.5


def test_ties_break_by_row_index():
    schema = Schema((FeatureSpec("a"),))
    ds = Dataset.from_rows(schema, [[1.0], [1.0], [1.0]])
    model = LinearModel(schema, weights=[1.0])
    out = case_based(model, ds, [1.0], k=3, metric="input_mad")
    assert [n.row_index for n in out.neighbors] == [0, 1, 2]


def test_blended_metric_bounds_and_alpha():
    _, ds = five_row_fixture()
    model = LinearModel(ds.schema, weights=[1.0, 1.0])
    out = case_based(model, ds, [0.0, 0.0], k=5, metric="blended", alpha=0.5)
    assert all(0.0 <= n.distance <= 1.0 for n in out.neighbors)
    with pytest.raises(ConfigError):
        case_based(model, ds, [0.0, 0.0], k=5, metric="blended", alpha=1.5)


def test_k_bounds_checked():
    _, ds = five_row_fixture()
    model = LinearModel(ds.schema, weights=[1.0, 1.0])
    with pytest.raises(ConfigError):
        case_based(model, ds, [0.0, 0.0], k=6)
    with pytest.raises(ConfigError):
        case_based(model, ds, [0.0, 0.0], k=0)
