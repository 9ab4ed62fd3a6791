"""End-to-end acceptance suite.

One test per criterion; each prints a single summary line (visible with -s or
-rP). The planted dataset and its leave-one-out baseline are module-scoped so
the classification, robustness and mining criteria share one computation.
Frozen numbers are regression values measured on this fixed seed.
"""

import json
import math
import time

import numpy as np
import pytest

from helpers import brute_force_subpath_pairs, random_graph, simulate_greedy_walk
from opkernel import (
    AttributeKernel,
    DopView,
    KernelConfig,
    LabeledDataset,
    PlantSpec,
    WeightedGraph,
    construct_dop,
    generate_dataset,
    gram,
    load_dataset,
    loocv,
    match,
    mine_discriminative,
    op_kernel,
    opa_kernel,
    predict,
    psd_check,
    robustness_eval,
    save_dataset,
    train_svm,
)
from opkernel.dop import build_profile
from opkernel.kernels import dop_kernel, gram_base

# planted-signal benchmark: 40+40 graphs on 20 nodes, chain plants at 0.8
DATASET_SEED = 7
PLANT_POS = PlantSpec((0, 1, 2, 3), 0.8)
PLANT_NEG = PlantSpec((4, 5, 6, 7), 0.8)
ROBUSTNESS_SEEDS = (101, 102, 103)

# frozen regression values for the fixed seed above
FROZEN_LOOCV_ACCURACY = 1.0
FROZEN_ROBUST_ACCURACIES = (0.8, 0.85, 0.85)
FROZEN_TOP_PREFIX = ("r00", "r01")
FROZEN_TOP_SCORE = 0.975


def shuffled_control_bound(n: int) -> float:
    """Upper 95% binomial bound on chance accuracy (exact, p = 1/2)."""
    total = 0.0
    for k in range(n + 1):
        total += math.comb(n, k) / 2.0**n
        if total >= 0.95:
            return k / n
    return 1.0


@pytest.fixture(scope="module")
def planted_dataset():
    return generate_dataset(40, 20, 100, (PLANT_POS, PLANT_NEG), rng_seed=DATASET_SEED)


@pytest.fixture(scope="module")
def baseline_report(planted_dataset):
    start = time.monotonic()
    report = loocv(planted_dataset, cfg=KernelConfig())
    return report, time.monotonic() - start


def test_criterion_01_greedy_walk_matches_independent_simulator():
    start = time.monotonic()
    rng = np.random.default_rng(1001)
    instances = 0
    for _ in range(1000):
        g = random_graph(rng, int(rng.integers(2, 7)), edge_prob=float(rng.uniform(0.2, 1.0)))
        for v0 in range(g.node_count):
            nodes, weights = simulate_greedy_walk(g, v0)
            dop = construct_dop(g, v0)
            assert dop.node_seq == tuple(nodes)
            assert dop.edge_weights == tuple(weights)
            instances += 1
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    print(f"[criterion 1] PASS greedy-walk oracle: {instances} walks, {elapsed:.2f}s")


def test_criterion_02_structural_match_equals_brute_force():
    start = time.monotonic()
    cfg = KernelConfig(lam=1.0, match_mode="structural")
    checked = 0
    for ep in range(0, 7):
        for eq in range(0, 7):
            p = DopView(tuple(str(i) for i in range(ep + 1)))
            q = DopView(tuple(str(i + 40) for i in range(eq + 1)))
            assert match(p, q, cfg) == float(brute_force_subpath_pairs(ep, eq))
            checked += 1
    # the same equality on greedy patterns harvested from random graphs
    rng = np.random.default_rng(1002)
    for _ in range(60):
        g = random_graph(rng, 7, edge_prob=0.8)
        views = [DopView(tuple(str(v) for v in p.node_seq)) for p in build_profile(g).per_node]
        for p in views:
            for q in views:
                if p.edge_count <= 6 and q.edge_count <= 6:
                    expected = float(brute_force_subpath_pairs(p.edge_count, q.edge_count))
                    assert match(p, q, cfg) == expected
                    checked += 1
    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    print(f"[criterion 2] PASS structural-match oracle: {checked} pairs, {elapsed:.2f}s")


def test_criterion_03_psd_suite(planted_dataset):
    start = time.monotonic()
    subset = LabeledDataset(
        planted_dataset.graphs[:10] + planted_dataset.graphs[40:50],
        planted_dataset.labels[:10] + planted_dataset.labels[40:50],
        planted_dataset.ids[:10] + planted_dataset.ids[40:50],
    )
    checked = 0
    for mode in ("positional", "structural"):
        for kind in ("constant_one", "linear", "rbf", "delta"):
            kernel = AttributeKernel(kind, gamma=1.0)
            for lam in (0.01, 1.0, 100.0):
                cfg = KernelConfig(
                    lam=lam, match_mode=mode, node_kernel=kernel, edge_kernel=kernel
                )
                check = psd_check(gram(subset, cfg), rel_tol=1e-8)
                assert check.ok, (mode, kind, lam, check)
                checked += 1
    elapsed = time.monotonic() - start
    assert elapsed < 120.0
    print(f"[criterion 3] PASS PSD suite: {checked} Gram matrices, {elapsed:.1f}s")


def test_criterion_04_constant_attribute_kernels_degenerate_exactly():
    rng = np.random.default_rng(1004)
    for _ in range(100):
        g1 = random_graph(rng, int(rng.integers(2, 6)), with_attrs=True)
        g2 = random_graph(rng, int(rng.integers(2, 6)), with_attrs=True)
        assert opa_kernel(g1, g2, 3, 1.0) == op_kernel(g1, g2, 3, 1.0)
    print("[criterion 4] PASS attributed kernel degenerates exactly on 100 pairs")


def test_criterion_05_weight_scaling_invariance_bitwise():
    rng = np.random.default_rng(1005)
    cfg = KernelConfig(match_mode="structural")
    for _ in range(100):
        g1 = random_graph(rng, 6, edge_prob=0.8)
        g2 = random_graph(rng, 6, edge_prob=0.8)
        c = float(rng.uniform(0.05, 50.0))
        s1 = WeightedGraph(6, g1.node_labels, g1.edges, tuple(c * w for w in g1.weights))
        s2 = WeightedGraph(6, g2.node_labels, g2.edges, tuple(c * w for w in g2.weights))
        assert dop_kernel(g1, g2, cfg) == dop_kernel(s1, s2, cfg)
    print("[criterion 5] PASS common weight scaling leaves the kernel bitwise unchanged")


def test_criterion_06_planted_signal_classification(planted_dataset, baseline_report):
    report, elapsed = baseline_report
    bound = shuffled_control_bound(len(planted_dataset))
    assert bound <= 0.61
    assert report.accuracy > 0.61
    assert report.accuracy > bound
    assert report.accuracy == FROZEN_LOOCV_ACCURACY
    assert elapsed < 300.0
    print(
        f"[criterion 6] PASS planted-signal LOOCV accuracy={report.accuracy:.4f} "
        f"(control bound {bound:.3f}), {elapsed:.1f}s"
    )


def test_shuffled_label_control_stays_near_chance(planted_dataset):
    # permutation control behind criterion 6's analytic bound: destroying the
    # labels must pull accuracy into the chance interval
    rng = np.random.default_rng(99)
    labels = np.array(planted_dataset.labels)
    rng.shuffle(labels)
    shuffled = LabeledDataset(
        planted_dataset.graphs, tuple(int(v) for v in labels), planted_dataset.ids
    )
    report = loocv(shuffled, (1.0,), (0.001, 1.0, 1000.0), KernelConfig())
    n = len(shuffled)
    half_width = 1.96 * 0.5 / math.sqrt(n)
    assert 0.5 - half_width <= report.accuracy <= 0.5 + half_width
    print(f"[control] PASS shuffled-label accuracy={report.accuracy:.4f} (chance interval)")


def test_criterion_07_robustness_at_quarter_missing(planted_dataset, baseline_report):
    baseline, _ = baseline_report
    reports = robustness_eval(
        planted_dataset,
        0.25,
        ROBUSTNESS_SEEDS,
        cfg=KernelConfig(),
        baseline=baseline,
    )
    bound = shuffled_control_bound(len(planted_dataset))
    perturbed = reports[1:]
    for rep in perturbed:
        assert rep.accuracy > 0.61
        assert rep.accuracy > bound
    accuracies = tuple(rep.accuracy for rep in perturbed)
    assert accuracies == FROZEN_ROBUST_ACCURACIES
    drops = [baseline.accuracy - a for a in accuracies]
    print(
        "[criterion 7] PASS robustness at 25% missing: accuracies "
        + ", ".join(f"{a:.4f}" for a in accuracies)
        + f" (drop vs baseline {baseline.accuracy:.4f}: "
        + ", ".join(f"{d:.4f}" for d in drops)
        + ")"
    )


def test_criterion_08_mining_ranks_planted_prefix_first(planted_dataset):
    profiles = [build_profile(g) for g in planted_dataset.graphs]
    pos = [p for p, y in zip(profiles, planted_dataset.labels) if y == 1]
    neg = [p for p, y in zip(profiles, planted_dataset.labels) if y == -1]
    mined = mine_discriminative(pos, neg, start_node=0, top_k=6)
    top = mined[0]
    planted_labels = tuple(f"r{v:02d}" for v in PLANT_POS.nodes)
    assert top.labels == planted_labels[: len(top.labels)]  # prefix of the planted chain
    assert top.score >= 0.9
    assert top.labels == FROZEN_TOP_PREFIX
    assert top.score == pytest.approx(FROZEN_TOP_SCORE, abs=1e-12)
    print(
        f"[criterion 8] PASS mining top prefix {' > '.join(top.labels)} "
        f"score={top.score:.4f}"
    )


def test_criterion_09_svm_closed_form_and_kkt():
    model = train_svm(np.eye(2), (1, -1), c=1.0)
    alphas = model.dual_coefs * np.array([1.0, -1.0])
    assert alphas == pytest.approx([1.0, 1.0], abs=1e-12)
    assert model.bias == pytest.approx(0.0, abs=1e-12)
    assert predict(model, np.eye(2)[0]) == 1
    assert predict(model, np.eye(2)[1]) == -1

    rng = np.random.default_rng(1009)
    worst = 0.0
    for _ in range(30):
        n = int(rng.integers(6, 20))
        A = rng.normal(size=(n, n))
        K = A @ A.T
        K = (K + K.T) / 2.0
        y = tuple(int(v) for v in rng.choice([1, -1], size=n))
        if 1 not in y or -1 not in y:
            continue
        c = float(rng.choice([0.01, 1.0, 100.0]))
        m = train_svm(K, y, c=c)
        worst = max(worst, m.kkt_residual)
        assert m.kkt_residual <= 1e-3
    print(f"[criterion 9] PASS analytic dual + KKT residual <= 1e-3 (worst {worst:.2e})")


def test_criterion_10_gram_determinism(planted_dataset, tmp_path):
    cfg = KernelConfig()
    one = gram_base(planted_dataset, cfg, workers=1)
    eight = gram_base(planted_dataset, cfg, workers=8)
    assert np.array_equal(one, eight)

    # shuffle node/edge storage order inside every graph file and recompute
    manifest = save_dataset(planted_dataset, tmp_path)
    rng = np.random.default_rng(1010)
    for path in sorted((tmp_path / "graphs").glob("*.json")):
        doc = json.loads(path.read_text())
        rng.shuffle(doc["nodes"])
        rng.shuffle(doc["edges"])
        path.write_text(json.dumps(doc))
    reloaded = load_dataset(manifest)
    shuffled = gram_base(reloaded, cfg, workers=1)
    assert np.array_equal(one, shuffled)
    print("[criterion 10] PASS Gram bit-identical across worker counts and file shuffles")
