"""Weighted-graph data model, JSON/CSV I/O, synthetic correlation networks.

Graphs are immutable once constructed and store their edge list in a canonical
order (endpoints sorted within an edge, edges sorted by endpoint pair), so all
downstream computations are independent of the order in which nodes and edges
appear in an input file.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import InputError

Vector = tuple[float, ...]


def _check_attr_block(attrs, expected_len: int, what: str) -> tuple[Vector, ...]:
    vectors = []
    for k, raw in enumerate(attrs):
        try:
            vec = tuple(float(x) for x in raw)
        except (TypeError, ValueError) as exc:
            raise InputError(f"{what} {k}: attribute vector must be numeric") from exc
        if any(not math.isfinite(x) for x in vec):
            raise InputError(f"{what} {k}: non-finite attribute value")
        vectors.append(vec)
    if len(vectors) != expected_len:
        raise InputError(f"{what} attributes: expected {expected_len} vectors, got {len(vectors)}")
    dims = {len(v) for v in vectors}
    if len(dims) > 1:
        raise InputError(f"{what} attributes: ragged dimensions {sorted(dims)}")
    return tuple(vectors)


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with real edge weights and optional attribute vectors."""

    node_count: int
    node_labels: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...]
    node_attrs: tuple[Vector, ...] | None = None
    edge_attrs: tuple[Vector, ...] | None = None

    def __post_init__(self):
        if not isinstance(self.node_count, int) or self.node_count < 1:
            raise InputError(f"node_count must be a positive integer, got {self.node_count!r}")
        labels = tuple(str(x) for x in self.node_labels)
        if len(labels) != self.node_count:
            raise InputError(
                f"expected {self.node_count} node labels, got {len(labels)}"
            )
        if len(self.weights) != len(self.edges):
            raise InputError(
                f"expected {len(self.edges)} weights, got {len(self.weights)}"
            )
        if self.edge_attrs is not None and len(self.edge_attrs) != len(self.edges):
            raise InputError(
                f"expected {len(self.edges)} edge attribute vectors, got {len(self.edge_attrs)}"
            )

        records = []
        for k, (pair, w) in enumerate(zip(self.edges, self.weights)):
            u, v = pair
            if not isinstance(u, int) or not isinstance(v, int):
                u, v = int(u), int(v)
            if u == v:
                raise InputError(f"self-loop edge ({u},{v})")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise InputError(f"edge ({u},{v}) references a node outside 0..{self.node_count - 1}")
            w = float(w)
            if not math.isfinite(w):
                raise InputError(f"non-finite weight on edge ({u},{v})")
            if u > v:
                u, v = v, u
            attr = self.edge_attrs[k] if self.edge_attrs is not None else None
            records.append(((u, v), w, attr))
        records.sort(key=lambda r: r[0])
        for (a, _, _), (b, _, _) in zip(records, records[1:]):
            if a == b:
                raise InputError(f"duplicate edge ({a[0]},{a[1]})")

        node_attrs = (
            _check_attr_block(self.node_attrs, self.node_count, "node")
            if self.node_attrs is not None
            else None
        )
        edge_attrs = (
            _check_attr_block([r[2] for r in records], len(records), "edge")
            if self.edge_attrs is not None
            else None
        )
        object.__setattr__(self, "node_labels", labels)
        object.__setattr__(self, "edges", tuple(r[0] for r in records))
        object.__setattr__(self, "weights", tuple(r[1] for r in records))
        object.__setattr__(self, "node_attrs", node_attrs)
        object.__setattr__(self, "edge_attrs", edge_attrs)

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, float], ...], ...]:
        """Per node: (neighbor, weight) pairs sorted by neighbor index."""
        nbrs: list[list[tuple[int, float]]] = [[] for _ in range(self.node_count)]
        for (u, v), w in zip(self.edges, self.weights):
            nbrs[u].append((v, w))
            nbrs[v].append((u, w))
        return tuple(tuple(sorted(n)) for n in nbrs)

    @cached_property
    def greedy_adjacency(self) -> tuple[tuple[tuple[int, float], ...], ...]:
        """Per node: (neighbor, weight) pairs sorted heaviest first, ties by index."""
        out = []
        for nbrs in self.adjacency:
            out.append(tuple(sorted(nbrs, key=lambda nw: (-nw[1], nw[0]))))
        return tuple(out)

    @cached_property
    def _edge_index(self) -> dict[tuple[int, int], int]:
        return {pair: k for k, pair in enumerate(self.edges)}

    def edge_id(self, u: int, v: int) -> int:
        pair = (u, v) if u < v else (v, u)
        try:
            return self._edge_index[pair]
        except KeyError:
            raise InputError(f"no edge ({u},{v})") from None

    def weight(self, u: int, v: int) -> float:
        return self.weights[self.edge_id(u, v)]

    def edge_attr(self, u: int, v: int) -> Vector:
        if self.edge_attrs is None:
            raise InputError("graph carries no edge attributes")
        return self.edge_attrs[self.edge_id(u, v)]


@dataclass(frozen=True)
class LabeledDataset:
    """Graphs with binary class labels and unique sample ids."""

    graphs: tuple[WeightedGraph, ...]
    labels: tuple[int, ...]
    ids: tuple[str, ...]

    def __post_init__(self):
        if not (len(self.graphs) == len(self.labels) == len(self.ids)):
            raise InputError("graphs, labels and ids must have equal lengths")
        if any(y not in (1, -1) for y in self.labels):
            raise InputError("labels must be +1 or -1")
        if len(set(self.ids)) != len(self.ids):
            raise InputError("sample ids must be unique")

    def __len__(self) -> int:
        return len(self.graphs)


@dataclass(frozen=True)
class PerturbationSpec:
    """Seeded random edge removal at a fixed missing rate."""

    missing_rate: float
    rng_seed: int

    def __post_init__(self):
        if not 0.0 <= self.missing_rate <= 1.0:
            raise InputError(f"missing_rate must be in [0,1], got {self.missing_rate}")
        if self.rng_seed < 0:
            raise InputError("rng_seed must be a nonnegative integer")


@dataclass(frozen=True)
class PlantSpec:
    """Ordered node list sharing a latent signal, with a mixing strength.

    The mixing coefficient decays geometrically down the list
    (``strength ** (position + 1)``), so for strengths below one the listed
    nodes form a chain of strictly decreasing pairwise correlation starting
    at the first node. At strength 1 every listed node carries the latent
    series exactly.
    """

    nodes: tuple[int, ...]
    strength: float

    def __post_init__(self):
        nodes = tuple(int(v) for v in self.nodes)
        if len(nodes) == 0:
            raise InputError("plant must name at least one node")
        if len(set(nodes)) != len(nodes):
            raise InputError("plant nodes must be distinct")
        if not 0.0 < self.strength <= 1.0:
            raise InputError(f"plant strength must be in (0,1], got {self.strength}")
        object.__setattr__(self, "nodes", nodes)


# ---------------------------------------------------------------------------
# JSON graph files and CSV manifests


def graph_to_dict(g: WeightedGraph) -> dict:
    nodes = []
    for i in range(g.node_count):
        rec: dict = {"id": i, "label": g.node_labels[i]}
        if g.node_attrs is not None:
            rec["attrs"] = list(g.node_attrs[i])
        nodes.append(rec)
    edges = []
    for k, ((u, v), w) in enumerate(zip(g.edges, g.weights)):
        rec = {"u": u, "v": v, "w": w}
        if g.edge_attrs is not None:
            rec["attrs"] = list(g.edge_attrs[k])
        edges.append(rec)
    return {"nodes": nodes, "edges": edges}


def graph_from_dict(doc: dict, context: str = "graph") -> WeightedGraph:
    if not isinstance(doc, dict) or "nodes" not in doc or "edges" not in doc:
        raise InputError(f"{context}: expected an object with 'nodes' and 'edges'")
    raw_nodes = doc["nodes"]
    if not raw_nodes:
        raise InputError(f"{context}: graph must contain at least one node")
    seen_ids = set()
    labels_by_id = {}
    attrs_by_id = {}
    for rec in raw_nodes:
        try:
            nid = int(rec["id"])
        except (KeyError, TypeError, ValueError):
            raise InputError(f"{context}: node record without integer 'id'") from None
        if nid in seen_ids:
            raise InputError(f"{context}: duplicate node id {nid}")
        seen_ids.add(nid)
        labels_by_id[nid] = str(rec.get("label", nid))
        if "attrs" in rec:
            attrs_by_id[nid] = rec["attrs"]
    n = len(raw_nodes)
    if seen_ids != set(range(n)):
        raise InputError(f"{context}: node ids must be exactly 0..{n - 1}")
    if attrs_by_id and len(attrs_by_id) != n:
        raise InputError(f"{context}: node attributes present on some nodes but not all")
    node_attrs = tuple(attrs_by_id[i] for i in range(n)) if attrs_by_id else None

    pairs, weights, eattrs = [], [], []
    has_eattr = None
    for rec in doc["edges"]:
        try:
            u, v, w = int(rec["u"]), int(rec["v"]), rec["w"]
        except (KeyError, TypeError, ValueError):
            raise InputError(f"{context}: edge record must carry integer 'u','v' and 'w'") from None
        try:
            w = float(w)
        except (TypeError, ValueError):
            raise InputError(f"{context}: non-finite weight on edge ({u},{v})") from None
        pairs.append((u, v))
        weights.append(w)
        this_has = "attrs" in rec
        if has_eattr is None:
            has_eattr = this_has
        elif has_eattr != this_has:
            raise InputError(f"{context}: edge attributes present on some edges but not all")
        if this_has:
            eattrs.append(rec["attrs"])
    labels = tuple(labels_by_id[i] for i in range(n))
    try:
        return WeightedGraph(
            node_count=n,
            node_labels=labels,
            edges=tuple(pairs),
            weights=tuple(weights),
            node_attrs=node_attrs,
            edge_attrs=tuple(eattrs) if has_eattr else None,
        )
    except InputError as exc:
        raise InputError(f"{context}: {exc}") from None


def load_graph(path) -> WeightedGraph:
    """Load and validate a graph from a JSON file."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"graph file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    return graph_from_dict(doc, context=str(path))


def save_graph(g: WeightedGraph, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_to_dict(g), fh)
        fh.write("\n")


def save_dataset(ds: LabeledDataset, out_dir) -> Path:
    """Write one JSON file per graph plus a manifest CSV; returns the manifest path."""
    out_dir = Path(out_dir)
    graph_dir = out_dir / "graphs"
    graph_dir.mkdir(parents=True, exist_ok=True)
    manifest = out_dir / "manifest.csv"
    with open(manifest, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "path", "label"])
        for sid, g, y in zip(ds.ids, ds.graphs, ds.labels):
            rel = f"graphs/{sid}.json"
            save_graph(g, out_dir / rel)
            writer.writerow([sid, rel, y])
    return manifest


def load_dataset(manifest_path) -> LabeledDataset:
    """Load a dataset from a manifest CSV (columns id,path,label)."""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise InputError(f"manifest not found: {manifest_path}")
    base = manifest_path.parent
    ids, graphs, labels = [], [], []
    with open(manifest_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != ["id", "path", "label"]:
            raise InputError(f"{manifest_path}: manifest header must be id,path,label")
        for row in reader:
            sid = row["id"].strip()
            raw_label = row["label"].strip()
            if raw_label in ("+1", "1"):
                label = 1
            elif raw_label == "-1":
                label = -1
            else:
                raise InputError(f"{manifest_path}: sample {sid}: label must be +1 or -1, got {raw_label!r}")
            ids.append(sid)
            labels.append(label)
            graphs.append(load_graph(base / row["path"].strip()))
    return LabeledDataset(tuple(graphs), tuple(labels), tuple(ids))


# ---------------------------------------------------------------------------
# Synthetic correlation networks


def _node_label(i: int, n: int) -> str:
    width = len(str(n - 1))
    return f"r{i:0{width}d}"


def generate_correlation_graph(
    n_nodes: int,
    n_timepoints: int,
    planted: PlantSpec | None = None,
    rng_seed: int = 0,
) -> WeightedGraph:
    """Pairwise-correlation network over per-node random time series.

    Each node draws an i.i.d. standard-normal series; nodes listed in
    ``planted`` are mixed with a shared latent series (see PlantSpec). The
    result is the complete graph whose edge weights are the Pearson
    correlation coefficients, clipped to [-1, 1]. Node attributes record each
    series' (mean, std); every edge carries its weight as a 1-vector
    attribute. Identical seeds give identical graphs.
    """
    if n_nodes < 2:
        raise InputError(f"n_nodes must be >= 2, got {n_nodes}")
    if n_timepoints < 3:
        raise InputError(f"n_timepoints must be >= 3, got {n_timepoints}")
    if planted is not None and any(v >= n_nodes for v in planted.nodes):
        raise InputError("plant names a node outside the graph")

    rng = np.random.default_rng(rng_seed)
    series = rng.standard_normal((n_nodes, n_timepoints))
    if planted is not None:
        latent = rng.standard_normal(n_timepoints)
        for pos, node in enumerate(planted.nodes):
            c = planted.strength ** (pos + 1)
            series[node] = c * latent + (1.0 - c) * series[node]

    corr = np.corrcoef(series)
    if not np.all(np.isfinite(corr)):
        raise InputError("degenerate series produced non-finite correlations")
    corr = np.clip(corr, -1.0, 1.0)

    pairs, weights, eattrs = [], [], []
    for u in range(n_nodes):
        for v in range(u + 1, n_nodes):
            w = float(corr[u, v])
            pairs.append((u, v))
            weights.append(w)
            eattrs.append((w,))
    means = series.mean(axis=1)
    stds = series.std(axis=1)
    node_attrs = tuple((float(means[i]), float(stds[i])) for i in range(n_nodes))
    return WeightedGraph(
        node_count=n_nodes,
        node_labels=tuple(_node_label(i, n_nodes) for i in range(n_nodes)),
        edges=tuple(pairs),
        weights=tuple(weights),
        node_attrs=node_attrs,
        edge_attrs=tuple(eattrs),
    )


def generate_dataset(
    n_per_class: int,
    n_nodes: int,
    n_timepoints: int,
    class_plants: tuple[PlantSpec, PlantSpec],
    rng_seed: int = 0,
) -> LabeledDataset:
    """Balanced two-class dataset of correlation networks.

    Class +1 graphs are generated with the first plant, class -1 with the
    second; the plants must differ, otherwise the classes are
    indistinguishable by construction.
    """
    if n_per_class < 1:
        raise InputError(f"n_per_class must be >= 1, got {n_per_class}")
    plant_a, plant_b = class_plants
    if (plant_a.nodes, plant_a.strength) == (plant_b.nodes, plant_b.strength):
        raise InputError("classes indistinguishable by construction: identical plants")

    children = np.random.SeedSequence(rng_seed).spawn(2 * n_per_class)
    seeds = [int(c.generate_state(1, np.uint64)[0]) for c in children]
    graphs, labels, ids = [], [], []
    for i in range(2 * n_per_class):
        plant = plant_a if i < n_per_class else plant_b
        graphs.append(generate_correlation_graph(n_nodes, n_timepoints, plant, seeds[i]))
        labels.append(1 if i < n_per_class else -1)
        ids.append(f"s{i:04d}")
    return LabeledDataset(tuple(graphs), tuple(labels), tuple(ids))


def perturb_missing(g: WeightedGraph, spec: PerturbationSpec) -> WeightedGraph:
    """Remove round(missing_rate * |E|) edges chosen uniformly by the seed."""
    m = len(g.edges)
    k = int(round(spec.missing_rate * m))
    if k == 0:
        dropped: set[int] = set()
    else:
        rng = np.random.default_rng(spec.rng_seed)
        dropped = set(int(x) for x in rng.choice(m, size=k, replace=False))
    keep = [i for i in range(m) if i not in dropped]
    return WeightedGraph(
        node_count=g.node_count,
        node_labels=g.node_labels,
        edges=tuple(g.edges[i] for i in keep),
        weights=tuple(g.weights[i] for i in keep),
        node_attrs=g.node_attrs,
        edge_attrs=tuple(g.edge_attrs[i] for i in keep) if g.edge_attrs is not None else None,
    )
