import json
import math

import numpy as np
import pytest

from opkernel import (
    InputError,
    LabeledDataset,
    PerturbationSpec,
    PlantSpec,
    WeightedGraph,
    generate_correlation_graph,
    generate_dataset,
    load_dataset,
    load_graph,
    perturb_missing,
    save_dataset,
    save_graph,
)


def test_minimal_graph_construction():
    g = WeightedGraph(2, ("a", "b"), ((0, 1),), (0.5,))
    assert g.node_count == 2
    assert g.edges == ((0, 1),)
    assert g.weights == (0.5,)


def test_edges_are_canonicalized():
    g1 = WeightedGraph(3, "abc", ((2, 0), (1, 2)), (0.5, 0.7))
    g2 = WeightedGraph(3, "abc", ((1, 2), (0, 2)), (0.7, 0.5))
    assert g1 == g2
    assert g1.edges == ((0, 2), (1, 2))


def test_self_loop_rejected():
    with pytest.raises(InputError, match="self-loop"):
        WeightedGraph(4, "abcd", ((3, 3),), (1.0,))


def test_nan_weight_rejected():
    with pytest.raises(InputError, match="non-finite weight"):
        WeightedGraph(2, "ab", ((0, 1),), (float("nan"),))


def test_duplicate_edge_rejected():
    with pytest.raises(InputError, match="duplicate edge"):
        WeightedGraph(2, "ab", ((0, 1), (1, 0)), (0.1, 0.2))


def test_out_of_range_edge_rejected():
    with pytest.raises(InputError, match="references a node"):
        WeightedGraph(2, "ab", ((0, 5),), (0.1,))


def test_ragged_attributes_rejected():
    with pytest.raises(InputError, match="ragged"):
        WeightedGraph(2, "ab", ((0, 1),), (0.1,), node_attrs=((1.0,), (1.0, 2.0)))


def test_adjacency_is_symmetric():
    g = WeightedGraph(3, "abc", ((0, 1), (1, 2)), (0.9, 0.2))
    assert g.weight(0, 1) == g.weight(1, 0) == 0.9
    assert g.adjacency[1] == ((0, 0.9), (2, 0.2))


# --- JSON files ---


def test_load_graph_roundtrip(tmp_path):
    g = WeightedGraph(
        3,
        ("x", "y", "z"),
        ((0, 1), (1, 2)),
        (0.8, 0.3),
        node_attrs=((1.0, 2.0), (3.0, 4.0), (5.0, 6.0)),
        edge_attrs=((0.8,), (0.3,)),
    )
    path = tmp_path / "g.json"
    save_graph(g, path)
    assert load_graph(path) == g


def test_load_graph_minimal_file(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(
        json.dumps(
            {
                "nodes": [{"id": 0, "label": "a"}, {"id": 1, "label": "b"}],
                "edges": [{"u": 0, "v": 1, "w": 0.5}],
            }
        )
    )
    g = load_graph(path)
    assert g.node_count == 2
    assert g.weights == (0.5,)


def test_load_graph_self_loop_message(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(
        json.dumps(
            {
                "nodes": [{"id": i, "label": str(i)} for i in range(4)],
                "edges": [{"u": 3, "v": 3, "w": 1.0}],
            }
        )
    )
    with pytest.raises(InputError, match="self-loop"):
        load_graph(path)


def test_load_graph_nan_weight_message(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(
        '{"nodes": [{"id": 0, "label": "a"}, {"id": 1, "label": "b"}],'
        ' "edges": [{"u": 0, "v": 1, "w": NaN}]}'
    )
    with pytest.raises(InputError, match="non-finite weight"):
        load_graph(path)


def test_load_graph_shuffled_file_order_is_equal(tmp_path):
    rng = np.random.default_rng(3)
    g = generate_correlation_graph(7, 20, rng_seed=11)
    save_graph(g, tmp_path / "a.json")
    doc = json.loads((tmp_path / "a.json").read_text())
    rng.shuffle(doc["nodes"])
    rng.shuffle(doc["edges"])
    (tmp_path / "b.json").write_text(json.dumps(doc))
    assert load_graph(tmp_path / "b.json") == g


def test_load_graph_bad_ids(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(
        json.dumps({"nodes": [{"id": 1, "label": "a"}, {"id": 2, "label": "b"}], "edges": []})
    )
    with pytest.raises(InputError, match="ids must be exactly"):
        load_graph(path)


# --- generator ---


def test_identical_injected_series_gives_unit_weight():
    g = generate_correlation_graph(4, 50, PlantSpec((1, 3), 1.0), rng_seed=0)
    assert abs(g.weight(1, 3) - 1.0) <= 1e-12


def test_generator_weights_within_pearson_range():
    g = generate_correlation_graph(3, 25, rng_seed=5)
    assert len(g.edges) == 3  # complete graph
    assert all(-1.0 <= w <= 1.0 for w in g.weights)


def test_generator_deterministic():
    a = generate_correlation_graph(6, 40, PlantSpec((0, 1), 0.7), rng_seed=42)
    b = generate_correlation_graph(6, 40, PlantSpec((0, 1), 0.7), rng_seed=42)
    assert a == b


def test_generator_rejects_short_series():
    with pytest.raises(InputError, match="n_timepoints"):
        generate_correlation_graph(4, 2, rng_seed=0)


def test_plant_chain_correlations_decrease_along_list():
    # position-decayed mixing must order the chain edges from the first node
    g = generate_correlation_graph(10, 400, PlantSpec((0, 1, 2, 3), 0.8), rng_seed=9)
    w01, w02, w03 = g.weight(0, 1), g.weight(0, 2), g.weight(0, 3)
    assert w01 > w02 > w03
    assert g.weight(1, 2) < w01


# --- datasets ---


def test_generate_dataset_counts_and_labels():
    plants = (PlantSpec((0, 1), 0.8), PlantSpec((2, 3), 0.8))
    ds = generate_dataset(1, 5, 20, plants, rng_seed=1)
    assert len(ds) == 2
    assert ds.labels == (1, -1)

    ds40 = generate_dataset(40, 20, 10, plants, rng_seed=1)
    assert len(ds40) == 80
    assert sum(1 for y in ds40.labels if y == 1) == 40


def test_generate_dataset_deterministic():
    plants = (PlantSpec((0, 1), 0.8), PlantSpec((2, 3), 0.8))
    a = generate_dataset(3, 6, 20, plants, rng_seed=77)
    b = generate_dataset(3, 6, 20, plants, rng_seed=77)
    assert a.ids == b.ids and a.labels == b.labels and a.graphs == b.graphs


def test_generate_dataset_identical_plants_rejected():
    p = PlantSpec((0, 1), 0.8)
    with pytest.raises(InputError, match="indistinguishable"):
        generate_dataset(2, 5, 20, (p, p), rng_seed=0)


def test_dataset_invariants():
    g = WeightedGraph(2, "ab", ((0, 1),), (0.5,))
    with pytest.raises(InputError, match="unique"):
        LabeledDataset((g, g), (1, -1), ("s", "s"))
    with pytest.raises(InputError, match="\\+1 or -1"):
        LabeledDataset((g,), (2,), ("s",))


def test_save_load_dataset_roundtrip(tmp_path):
    plants = (PlantSpec((0, 1), 0.8), PlantSpec((2, 3), 0.8))
    ds = generate_dataset(2, 6, 20, plants, rng_seed=3)
    manifest = save_dataset(ds, tmp_path)
    loaded = load_dataset(manifest)
    assert loaded == ds


# --- perturbation ---


def test_perturb_zero_rate_is_identity():
    g = generate_correlation_graph(8, 30, rng_seed=2)
    assert perturb_missing(g, PerturbationSpec(0.0, 123)) == g


def test_perturb_full_rate_removes_everything():
    g = generate_correlation_graph(8, 30, rng_seed=2)
    assert perturb_missing(g, PerturbationSpec(1.0, 123)).edges == ()


def test_perturb_quarter_rate_on_complete_90_node_graph():
    # complete graph on 90 nodes has 4005 edges; round(0.25 * 4005) = 1001 removed
    pairs = tuple((u, v) for u in range(90) for v in range(u + 1, 90))
    weights = tuple(np.linspace(-0.9, 0.9, len(pairs)))
    g = WeightedGraph(90, tuple(str(i) for i in range(90)), pairs, weights)
    assert len(g.edges) == 4005
    out = perturb_missing(g, PerturbationSpec(0.25, 7))
    assert len(out.edges) == 3004


def test_perturb_deterministic_and_preserves_nodes():
    g = generate_correlation_graph(9, 30, rng_seed=4)
    spec = PerturbationSpec(0.4, 55)
    a = perturb_missing(g, spec)
    b = perturb_missing(g, spec)
    assert a == b
    assert a.node_labels == g.node_labels
    assert a.node_attrs == g.node_attrs
    removed = round(0.4 * len(g.edges))
    assert len(a.edges) == len(g.edges) - removed
    assert set(a.edges) <= set(g.edges)


def test_perturbation_spec_validation():
    with pytest.raises(InputError):
        PerturbationSpec(1.5, 0)
