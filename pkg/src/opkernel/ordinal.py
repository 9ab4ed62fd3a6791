"""Ordinal patterns and the exact, exponential-time pattern kernels.

An ordinal pattern is a simple path whose successive edge weights strictly
decrease. Enumerating all of them is exponential in general, so enumeration
is guarded by a hard pattern budget; these exact kernels serve as the
correctness oracle for the scalable greedy-path kernel in `kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .attributes import CONSTANT_ONE, AttributeKernel
from .errors import BudgetError, InputError
from .graphs import WeightedGraph

DEFAULT_BUDGET = 10**6


@dataclass(frozen=True)
class OrdinalPattern:
    """Simple path with strictly decreasing edge weights.

    A single-node pattern (no edges) is allowed as the degenerate case
    produced by greedy construction at stuck start nodes; enumeration only
    ever yields patterns with at least one edge.
    """

    node_seq: tuple[int, ...]
    edge_weights: tuple[float, ...]

    def __post_init__(self):
        nodes = tuple(int(v) for v in self.node_seq)
        weights = tuple(float(w) for w in self.edge_weights)
        if len(nodes) < 1:
            raise InputError("pattern must contain at least one node")
        if len(set(nodes)) != len(nodes):
            raise InputError(f"pattern revisits a node: {nodes}")
        if len(weights) != len(nodes) - 1:
            raise InputError(
                f"pattern with {len(nodes)} nodes must carry {len(nodes) - 1} weights, got {len(weights)}"
            )
        if any(not math.isfinite(w) for w in weights):
            raise InputError("non-finite edge weight in pattern")
        if any(weights[i] <= weights[i + 1] for i in range(len(weights) - 1)):
            raise InputError(f"edge weights must strictly decrease: {weights}")
        object.__setattr__(self, "node_seq", nodes)
        object.__setattr__(self, "edge_weights", weights)

    @property
    def edge_count(self) -> int:
        return len(self.edge_weights)

    @property
    def node_count(self) -> int:
        return len(self.node_seq)

    def edge_pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(self.node_seq, self.node_seq[1:]))


@dataclass(frozen=True)
class OrdinalPatternSet:
    """All ordinal patterns of a graph up to a depth cap."""

    patterns: tuple[OrdinalPattern, ...]
    host: WeightedGraph
    depth_cap: int


def enumerate_patterns(
    g: WeightedGraph, depth_cap: int, budget: int = DEFAULT_BUDGET
) -> OrdinalPatternSet:
    """All simple paths with strictly decreasing weights and 1..depth_cap edges.

    Each undirected decreasing path is emitted exactly once, oriented from its
    heaviest edge (one-edge paths are oriented low index to high index).
    Raises BudgetError as soon as the pattern count would exceed `budget`.
    """
    if depth_cap < 1:
        raise InputError(f"depth_cap must be >= 1, got {depth_cap}")
    if budget < 1:
        raise InputError(f"budget must be >= 1, got {budget}")
    adj = g.adjacency
    patterns: list[OrdinalPattern] = []

    def emit(nodes: list[int], weights: list[float]) -> None:
        if len(patterns) + 1 > budget:
            raise BudgetError(f"enumeration budget exceeded (budget={budget})")
        patterns.append(OrdinalPattern(tuple(nodes), tuple(weights)))

    def extend(nodes: list[int], weights: list[float], visited: set[int]) -> None:
        if len(weights) >= depth_cap:
            return
        bound = weights[-1]
        for nbr, w in adj[nodes[-1]]:
            if w < bound and nbr not in visited:
                nodes.append(nbr)
                weights.append(w)
                visited.add(nbr)
                emit(nodes, weights)
                extend(nodes, weights, visited)
                visited.remove(nbr)
                weights.pop()
                nodes.pop()

    for (u, v), w in zip(g.edges, g.weights):
        emit([u, v], [w])
        for a, b in ((u, v), (v, u)):
            extend([a, b], [w], {a, b})
    return OrdinalPatternSet(tuple(patterns), g, depth_cap)


def is_isomorphic(p: OrdinalPattern, q: OrdinalPattern) -> bool:
    """Order isomorphism of decreasing paths: true iff equal edge counts.

    The rank-k edge of one path maps to the rank-k edge of the other, so two
    strictly decreasing simple paths admit an order-preserving bijection
    exactly when they have the same number of edges.
    """
    return p.edge_count == q.edge_count


def _subpath_pair_count(p_edges: int, q_edges: int) -> int:
    """Number of pairs of equal-length contiguous sub-paths with >= 1 edge."""
    total = 0
    for k in range(1, min(p_edges, q_edges) + 1):
        total += (p_edges - k + 1) * (q_edges - k + 1)
    return total


def sopi_kernel(p: OrdinalPattern, q: OrdinalPattern, lam: float) -> float:
    """Uniformly weighted count of matching contiguous sub-path pairs.

    A sub-pattern of a decreasing path is a contiguous sub-path; two
    sub-patterns match when they have equal length. Every matched pair
    contributes the uniform weight `lam`.
    """
    if lam <= 0:
        raise InputError(f"lam must be positive, got {lam}")
    return lam * _subpath_pair_count(p.edge_count, q.edge_count)


def iso_count(p: OrdinalPattern, q: OrdinalPattern, lam: float) -> float:
    """Node count if the two patterns are isomorphic, else their sub-path kernel."""
    if is_isomorphic(p, q):
        return float(p.node_count)
    return sopi_kernel(p, q, lam)


def op_kernel(
    g1: WeightedGraph,
    g2: WeightedGraph,
    depth_cap: int,
    lam: float,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """Exact pattern kernel: sum of iso_count over all cross pattern pairs."""
    ops1 = enumerate_patterns(g1, depth_cap, budget).patterns
    ops2 = enumerate_patterns(g2, depth_cap, budget).patterns
    return math.fsum(iso_count(p, q, lam) for p in ops1 for q in ops2)


def _pattern_attribute_factor(
    g1: WeightedGraph,
    p: OrdinalPattern,
    g2: WeightedGraph,
    q: OrdinalPattern,
    kv: AttributeKernel,
    ke: AttributeKernel,
) -> float:
    """Product of attribute kernels over the rank-aligned correspondence.

    The t-th node of p pairs with the t-th node of q and likewise for edges,
    truncated to the shorter pattern; with two constant kernels the factor
    is exactly 1.
    """
    if kv.is_constant and ke.is_constant:
        return 1.0
    factor = 1.0
    if not kv.is_constant:
        if g1.node_attrs is None or g2.node_attrs is None:
            raise InputError(f"node kernel {kv.kind!r} requires node attributes on both graphs")
        for a, b in zip(p.node_seq, q.node_seq):
            factor *= kv(g1.node_attrs[a], g2.node_attrs[b])
    if not ke.is_constant:
        if g1.edge_attrs is None or g2.edge_attrs is None:
            raise InputError(f"edge kernel {ke.kind!r} requires edge attributes on both graphs")
        for (a1, b1), (a2, b2) in zip(p.edge_pairs(), q.edge_pairs()):
            factor *= ke(g1.edge_attr(a1, b1), g2.edge_attr(a2, b2))
    return factor


def opa_kernel(
    g1: WeightedGraph,
    g2: WeightedGraph,
    depth_cap: int,
    lam: float,
    kv: AttributeKernel = CONSTANT_ONE,
    ke: AttributeKernel = CONSTANT_ONE,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """Attributed exact pattern kernel.

    Each pattern-pair term of op_kernel is multiplied by the product of node
    and edge attribute kernels over the rank-aligned correspondence; with two
    constant-one kernels this equals op_kernel on the same inputs.
    """
    ops1 = enumerate_patterns(g1, depth_cap, budget).patterns
    ops2 = enumerate_patterns(g2, depth_cap, budget).patterns
    return math.fsum(
        iso_count(p, q, lam) * _pattern_attribute_factor(g1, p, g2, q, kv, ke)
        for p in ops1
        for q in ops2
    )
