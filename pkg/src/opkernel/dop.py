"""Greedy deepest-ordinal-pattern construction and per-graph profiles.

From a start node, the walk repeatedly moves to the unvisited neighbor with
the largest edge weight strictly below the previously traversed weight (the
first step is unbounded). The result is the graph's "deepest" ordinal pattern
for that start node; computing one per node gives the graph's profile, the
input to the scalable kernel and to discriminative-prefix mining.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError
from .graphs import WeightedGraph
from .ordinal import OrdinalPattern


@dataclass(frozen=True)
class DopProfile:
    """One greedy deepest pattern per start node of the host graph."""

    per_node: tuple[OrdinalPattern, ...]
    host: WeightedGraph

    def __post_init__(self):
        if len(self.per_node) != self.host.node_count:
            raise InputError("profile must contain one entry per node")

    def label_seq(self, start: int) -> tuple[str, ...]:
        return tuple(self.host.node_labels[v] for v in self.per_node[start].node_seq)


def construct_dop(g: WeightedGraph, v0: int) -> OrdinalPattern:
    """Greedy maximal decreasing path from v0.

    At every step the candidates are the unvisited neighbors of the current
    node whose edge weight is strictly below the last traversed weight (no
    bound on the first step); the heaviest candidate wins, ties broken by
    smallest node index. An isolated or immediately stuck start node yields
    a single-node pattern.
    """
    if not 0 <= v0 < g.node_count:
        raise InputError(f"start node {v0} outside 0..{g.node_count - 1}")
    order = g.greedy_adjacency
    nodes = [v0]
    weights: list[float] = []
    visited = {v0}
    bound: float | None = None
    current = v0
    while True:
        step = None
        for nbr, w in order[current]:
            if nbr in visited:
                continue
            if bound is None or w < bound:
                step = (nbr, w)
                break
        if step is None:
            break
        current, bound = step
        visited.add(current)
        nodes.append(current)
        weights.append(bound)
    return OrdinalPattern(tuple(nodes), tuple(weights))


def build_profile(g: WeightedGraph) -> DopProfile:
    """Greedy deepest pattern for every start node."""
    return DopProfile(tuple(construct_dop(g, v) for v in range(g.node_count)), g)


def profile_records(profile: DopProfile) -> list[dict]:
    """JSON-ready records: per start node, the label and weight sequences."""
    return [
        {
            "start": v,
            "labels": list(profile.label_seq(v)),
            "weights": list(profile.per_node[v].edge_weights),
        }
        for v in range(profile.host.node_count)
    ]


@dataclass(frozen=True)
class MinedPattern:
    """A label-sequence prefix with its between-class frequency gap."""

    labels: tuple[str, ...]
    score: float
    freq_a: float
    freq_b: float


def mine_discriminative(
    profiles_a: list[DopProfile] | tuple[DopProfile, ...],
    profiles_b: list[DopProfile] | tuple[DopProfile, ...],
    start_node: int,
    top_k: int,
) -> list[MinedPattern]:
    """Rank start-node pattern prefixes by absolute class-frequency difference.

    For every prefix (of at least two nodes) of any class member's deepest
    pattern at `start_node`, the score is |freq_a - freq_b| where freq_x is
    the fraction of class-x graphs whose pattern begins with that prefix.
    Ties rank longer prefixes first, then lexicographically smaller label
    sequences.
    """
    if not profiles_a or not profiles_b:
        raise InputError("both classes must contain at least one profile")
    if top_k < 1:
        raise InputError(f"top_k must be >= 1, got {top_k}")
    counts = {p.host.node_count for p in list(profiles_a) + list(profiles_b)}
    if len(counts) != 1:
        raise InputError(f"profiles disagree on node_count: {sorted(counts)}")
    n = counts.pop()
    if not 0 <= start_node < n:
        raise InputError(f"start node {start_node} outside 0..{n - 1}")

    seqs_a = [p.label_seq(start_node) for p in profiles_a]
    seqs_b = [p.label_seq(start_node) for p in profiles_b]
    prefixes = set()
    for seq in seqs_a + seqs_b:
        for length in range(2, len(seq) + 1):
            prefixes.add(seq[:length])

    def freq(seqs: list[tuple[str, ...]], prefix: tuple[str, ...]) -> float:
        hit = sum(1 for s in seqs if s[: len(prefix)] == prefix)
        return hit / len(seqs)

    mined = []
    for prefix in prefixes:
        fa = freq(seqs_a, prefix)
        fb = freq(seqs_b, prefix)
        mined.append(MinedPattern(prefix, abs(fa - fb), fa, fb))
    mined.sort(key=lambda m: (-m.score, -len(m.labels), m.labels))
    return mined[:top_k]
