"""Shared test fixtures: random graphs and independent oracle implementations.

The oracles here deliberately re-derive results through different algorithms
than the library (explicit recursion, max-then-reject scanning, literal
sub-path enumeration) so agreement is meaningful.
"""

from __future__ import annotations

import numpy as np

from opkernel import OrdinalPattern, WeightedGraph


def random_graph(rng, n_nodes, edge_prob=0.7, with_attrs=False) -> WeightedGraph:
    """Random graph with all-distinct weights drawn without replacement."""
    pairs = [(u, v) for u in range(n_nodes) for v in range(u + 1, n_nodes)]
    keep = [p for p in pairs if rng.random() < edge_prob]
    if not keep and pairs:
        keep = [pairs[int(rng.integers(len(pairs)))]]
    # distinct weights: a shuffled grid avoids accidental ties
    grid = np.linspace(-1.0, 1.0, max(len(keep), 2) * 7)
    weights = tuple(float(w) for w in rng.choice(grid, size=len(keep), replace=False))
    node_attrs = None
    edge_attrs = None
    if with_attrs:
        node_attrs = tuple((float(x), float(y)) for x, y in rng.normal(size=(n_nodes, 2)))
        edge_attrs = tuple((float(x),) for x in rng.normal(size=len(keep)))
    return WeightedGraph(
        node_count=n_nodes,
        node_labels=tuple(str(i) for i in range(n_nodes)),
        edges=tuple(keep),
        weights=weights,
        node_attrs=node_attrs,
        edge_attrs=edge_attrs,
    )


def brute_force_decreasing_paths(g: WeightedGraph, depth_cap: int) -> set[tuple[int, ...]]:
    """Canonical node sequences of every decreasing simple path, by recursion.

    Walks every directed simple path of 1..depth_cap edges and keeps those
    with strictly decreasing weights; one-edge paths are canonicalized to
    (min, max), longer paths keep their unique decreasing orientation.
    """
    weight = {}
    for (u, v), w in zip(g.edges, g.weights):
        weight[(u, v)] = w
        weight[(v, u)] = w
    nbrs = {u: [v for v, _ in g.adjacency[u]] for u in range(g.node_count)}

    found: set[tuple[int, ...]] = set()

    def walk(path: list[int]) -> None:
        if len(path) > 1:
            seq = tuple(path)
            if len(seq) == 2:
                seq = (min(seq), max(seq))
            found.add(seq)
        if len(path) - 1 >= depth_cap:
            return
        last = path[-1]
        for nxt in nbrs[last]:
            if nxt in path:
                continue
            if len(path) > 1 and weight[(last, nxt)] >= weight[(path[-2], last)]:
                continue
            path.append(nxt)
            walk(path)
            path.pop()

    for start in range(g.node_count):
        walk([start])
    return found


def simulate_greedy_walk(g: WeightedGraph, v0: int) -> tuple[list[int], list[float]]:
    """Independent step simulator of the greedy deepest-pattern rule.

    Written max-then-reject: at each step, repeatedly take the heaviest
    not-yet-rejected unvisited neighbor (ties by smallest index) and reject
    it if it does not sit strictly below the previous weight.
    """
    weight = {}
    for (u, v), w in zip(g.edges, g.weights):
        weight[(u, v)] = w
        weight[(v, u)] = w
    nbrs = {u: sorted(v for v, _ in g.adjacency[u]) for u in range(g.node_count)}

    nodes = [v0]
    weights: list[float] = []
    visited = {v0}
    while True:
        current = nodes[-1]
        candidates = [v for v in nbrs[current] if v not in visited]
        chosen = None
        while candidates:
            best = max(candidates, key=lambda v: (weight[(current, v)], -v))
            if weights and weight[(current, best)] >= weights[-1]:
                candidates.remove(best)
                continue
            chosen = best
            break
        if chosen is None:
            break
        visited.add(chosen)
        nodes.append(chosen)
        weights.append(weight[(current, chosen)])
    return nodes, weights


def brute_force_subpath_pairs(p_edges: int, q_edges: int) -> int:
    """Count equal-length contiguous sub-path pairs by explicit enumeration."""
    subs_p = [(i, j) for i in range(p_edges + 1) for j in range(i + 1, p_edges + 1)]
    subs_q = [(i, j) for i in range(q_edges + 1) for j in range(i + 1, q_edges + 1)]
    return sum(
        1
        for (i1, j1) in subs_p
        for (i2, j2) in subs_q
        if (j1 - i1) == (j2 - i2)
    )


def decreasing_pattern(rng, n_edges: int, node_offset: int = 0) -> OrdinalPattern:
    """A random strictly decreasing path with `n_edges` edges."""
    weights = np.sort(rng.uniform(-1.0, 1.0, size=n_edges))[::-1]
    # enforce strictness in case of duplicates from rounding
    weights = weights - np.arange(n_edges) * 1e-9
    nodes = tuple(range(node_offset, node_offset + n_edges + 1))
    return OrdinalPattern(nodes, tuple(float(w) for w in weights))


def permute_graph(g: WeightedGraph, perm: list[int]) -> WeightedGraph:
    """Relabel node u as perm[u], keeping labels/attrs attached to the node."""
    n = g.node_count
    inv = [0] * n
    for old, new in enumerate(perm):
        inv[new] = old
    return WeightedGraph(
        node_count=n,
        node_labels=tuple(g.node_labels[inv[i]] for i in range(n)),
        edges=tuple((perm[u], perm[v]) for u, v in g.edges),
        weights=g.weights,
        node_attrs=tuple(g.node_attrs[inv[i]] for i in range(n)) if g.node_attrs else None,
        edge_attrs=g.edge_attrs,
    )
