"""Scalable greedy-path kernel, Gram matrices, PSD diagnostics, exports.

The graph kernel sums, over all start-node pairs, a similarity between the
two greedy deepest patterns times a product of attribute kernels along the
rank-aligned correspondence. Both factors are linear in nothing but the
pattern contents, and the uniform sub-structure weight multiplies the whole
sum, so Gram matrices for a grid of weights are exact rescalings of a single
base matrix.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .attributes import CONSTANT_ONE, AttributeKernel
from .dop import build_profile
from .errors import InputError
from .graphs import LabeledDataset, Vector, WeightedGraph

MATCH_MODES = ("positional", "structural")


@dataclass(frozen=True)
class KernelConfig:
    """Configuration of the greedy-path graph kernel.

    `lam` is the uniform weight applied to every matched sub-structure;
    structural mode counts equal-length contiguous sub-path pairs, positional
    mode counts positions with agreeing node labels. Attribute kernels other
    than constant_one require the corresponding attributes on every graph.
    """

    lam: float = 1.0
    match_mode: str = "positional"
    node_kernel: AttributeKernel = CONSTANT_ONE
    edge_kernel: AttributeKernel = CONSTANT_ONE
    normalize: bool = False

    def __post_init__(self):
        if not self.lam > 0:
            raise InputError(f"lam must be positive, got {self.lam}")
        if self.match_mode not in MATCH_MODES:
            raise InputError(f"unknown match mode {self.match_mode!r}; choose from {MATCH_MODES}")


@dataclass(frozen=True)
class DopView:
    """A deepest pattern reduced to what the kernel compares.

    Labels always have one more entry than the pattern has edges; attribute
    sequences are None when the host graph carries no attributes.
    """

    labels: tuple[str, ...]
    node_attrs: tuple[Vector, ...] | None = None
    edge_attrs: tuple[Vector, ...] | None = None

    @property
    def edge_count(self) -> int:
        return len(self.labels) - 1


def dop_views(g: WeightedGraph) -> tuple[DopView, ...]:
    """Per-start-node comparison views of a graph's greedy deepest patterns."""
    profile = build_profile(g)
    views = []
    for pattern in profile.per_node:
        seq = pattern.node_seq
        views.append(
            DopView(
                labels=tuple(g.node_labels[v] for v in seq),
                node_attrs=tuple(g.node_attrs[v] for v in seq) if g.node_attrs is not None else None,
                edge_attrs=tuple(g.edge_attr(a, b) for a, b in zip(seq, seq[1:]))
                if g.edge_attrs is not None
                else None,
            )
        )
    return tuple(views)


def _match_count(p: DopView, q: DopView, mode: str) -> int:
    if mode == "structural":
        ep, eq = p.edge_count, q.edge_count
        total = 0
        for k in range(1, min(ep, eq) + 1):
            total += (ep - k + 1) * (eq - k + 1)
        return total
    return sum(1 for a, b in zip(p.labels, q.labels) if a == b)


def match(p: DopView, q: DopView, cfg: KernelConfig) -> float:
    """Similarity of two deepest patterns under the configured mode.

    Structural: `lam` times the number of equal-length contiguous sub-path
    pairs. Positional: `lam` times the number of positions (up to the shorter
    pattern) whose node labels agree.
    """
    return cfg.lam * _match_count(p, q, cfg.match_mode)


def attribute_factor(p: DopView, q: DopView, cfg: KernelConfig) -> float:
    """Product of attribute kernels over the rank-aligned node/edge bijection.

    The t-th node of p pairs with the t-th node of q (and likewise edges).
    The bijection only exists between patterns of equal length, so pairs of
    different lengths contribute 0 whenever a non-constant kernel is present;
    this keeps the resulting Gram matrices positive semidefinite, which
    truncating to the shorter pattern does not. Returns exactly 1.0 when both
    kernels are constant_one.
    """
    kv, ke = cfg.node_kernel, cfg.edge_kernel
    if kv.is_constant and ke.is_constant:
        return 1.0
    if len(p.labels) != len(q.labels):
        return 0.0
    factor = 1.0
    if not kv.is_constant:
        if p.node_attrs is None or q.node_attrs is None:
            raise InputError(f"node kernel {kv.kind!r} requires node attributes on both graphs")
        for a, b in zip(p.node_attrs, q.node_attrs):
            factor *= kv(a, b)
    if not ke.is_constant:
        if p.edge_attrs is None or q.edge_attrs is None:
            raise InputError(f"edge kernel {ke.kind!r} requires edge attributes on both graphs")
        for a, b in zip(p.edge_attrs, q.edge_attrs):
            factor *= ke(a, b)
    return factor


def _pair_base(views1, views2, cfg: KernelConfig) -> float:
    """Kernel value between two graphs' view tuples, without the lam factor."""
    return math.fsum(
        _match_count(p, q, cfg.match_mode) * attribute_factor(p, q, cfg)
        for p in views1
        for q in views2
    )


def dop_kernel(g1: WeightedGraph, g2: WeightedGraph, cfg: KernelConfig) -> float:
    """Graph kernel: sum over all start-node pairs of match times attributes."""
    return cfg.lam * _pair_base(dop_views(g1), dop_views(g2), cfg)


# ---------------------------------------------------------------------------
# Gram matrices


@dataclass(frozen=True)
class GramMatrix:
    """Pairwise kernel values over a dataset, with eigenvalue diagnostics.

    `config` is None for matrices built by the enumeration-based exact kernel,
    which is parameterized by depth cap and lam alone.
    """

    values: np.ndarray
    sample_ids: tuple[str, ...]
    min_eigenvalue: float
    config: KernelConfig | None
    labels: tuple[int, ...] = field(default=())

    def __post_init__(self):
        n = len(self.sample_ids)
        if self.values.shape != (n, n):
            raise InputError(f"Gram shape {self.values.shape} does not match {n} sample ids")


_WORKER = {}


def _worker_init(views, cfg):
    _WORKER["views"] = views
    _WORKER["cfg"] = cfg


def _worker_row(i: int):
    views, cfg = _WORKER["views"], _WORKER["cfg"]
    n = len(views)
    return i, [_pair_base(views[i], views[j], cfg) for j in range(i, n)]


def gram_base(ds: LabeledDataset, cfg: KernelConfig, workers: int = 1) -> np.ndarray:
    """Base Gram matrix (lam = 1), exactly symmetric by mirrored writes.

    Cells are independent, so worker count and scheduling cannot change any
    value; errors are re-raised naming the offending sample pair.
    """
    n = len(ds)
    views = [dop_views(g) for g in ds.graphs]
    base = np.zeros((n, n), dtype=np.float64)
    if workers > 1 and n > 1:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_worker_init, initargs=(views, cfg)
        ) as pool:
            for i, row in pool.map(_worker_row, range(n)):
                for off, value in enumerate(row):
                    base[i, i + off] = value
                    base[i + off, i] = value
    else:
        for i in range(n):
            for j in range(i, n):
                try:
                    value = _pair_base(views[i], views[j], cfg)
                except InputError as exc:
                    raise InputError(f"kernel failed for pair ({ds.ids[i]},{ds.ids[j]}): {exc}") from None
                base[i, j] = value
                base[j, i] = value
    return base


def normalize_gram(values: np.ndarray) -> np.ndarray:
    """Cosine normalization; pairs with a zero diagonal map to 0."""
    n = values.shape[0]
    out = np.zeros_like(values)
    diag = np.diag(values).copy()
    for i in range(n):
        for j in range(i, n):
            if diag[i] > 0 and diag[j] > 0:
                v = values[i, j] / math.sqrt(diag[i] * diag[j])
            else:
                v = 0.0
            out[i, j] = v
            out[j, i] = v
    return out


def finalize_gram(base: np.ndarray, ds: LabeledDataset, cfg: KernelConfig) -> GramMatrix:
    """Scale the base matrix by lam, optionally normalize, attach diagnostics."""
    values = cfg.lam * base
    if cfg.normalize:
        values = normalize_gram(values)
    eigs = np.linalg.eigvalsh(values)
    return GramMatrix(
        values=values,
        sample_ids=ds.ids,
        min_eigenvalue=float(eigs[0]),
        config=cfg,
        labels=ds.labels,
    )


def gram(ds: LabeledDataset, cfg: KernelConfig, workers: int = 1) -> GramMatrix:
    """Pairwise greedy-path kernel matrix over a dataset."""
    return finalize_gram(gram_base(ds, cfg, workers), ds, cfg)


def exact_gram(
    ds: LabeledDataset,
    depth_cap: int,
    lam: float,
    budget: int | None = None,
    normalize: bool = False,
) -> GramMatrix:
    """Gram matrix from the enumeration-based exact kernel (budget-guarded).

    Patterns are enumerated once per graph; cell (i, j) is the same sum
    op_kernel would produce for that pair.
    """
    from .ordinal import DEFAULT_BUDGET, enumerate_patterns, iso_count

    budget = DEFAULT_BUDGET if budget is None else budget
    sets = [enumerate_patterns(g, depth_cap, budget).patterns for g in ds.graphs]
    n = len(ds)
    values = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i, n):
            value = math.fsum(iso_count(p, q, lam) for p in sets[i] for q in sets[j])
            values[i, j] = value
            values[j, i] = value
    if normalize:
        values = normalize_gram(values)
    eigs = np.linalg.eigvalsh(values)
    return GramMatrix(
        values=values,
        sample_ids=ds.ids,
        min_eigenvalue=float(eigs[0]),
        config=None,
        labels=ds.labels,
    )


@dataclass(frozen=True)
class PsdCheck:
    ok: bool
    min_eig: float
    max_eig: float

    def line(self) -> str:
        return (
            f"min_eig={self.min_eig:.17g} max_eig={self.max_eig:.17g} "
            f"psd={'true' if self.ok else 'false'}"
        )


def psd_check(m: GramMatrix | np.ndarray, rel_tol: float = 1e-8) -> PsdCheck:
    """True iff the minimum eigenvalue is >= -rel_tol times the spectral radius."""
    values = m.values if isinstance(m, GramMatrix) else np.asarray(m, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise InputError(f"matrix must be square, got shape {values.shape}")
    if not np.array_equal(values, values.T):
        raise InputError("matrix is not symmetric")
    if not rel_tol > 0:
        raise InputError(f"rel_tol must be positive, got {rel_tol}")
    eigs = np.linalg.eigvalsh(values)
    lo, hi = float(eigs[0]), float(eigs[-1])
    radius = max(abs(lo), abs(hi))
    return PsdCheck(ok=lo >= -rel_tol * radius, min_eig=lo, max_eig=hi)


# ---------------------------------------------------------------------------
# On-disk formats


def save_gram_text(gm: GramMatrix, path) -> None:
    """Plain-text Gram: first line n, then n rows of 17-significant-digit floats."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = len(gm.sample_ids)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{n}\n")
        for i in range(n):
            fh.write(" ".join(f"{v:.17g}" for v in gm.values[i]) + "\n")


def read_gram_text(path) -> np.ndarray:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines:
        raise InputError(f"{path}: empty Gram file")
    n = int(lines[0])
    if len(lines) != n + 1:
        raise InputError(f"{path}: expected {n} rows, found {len(lines) - 1}")
    rows = [[float(x) for x in line.split()] for line in lines[1:]]
    if any(len(r) != n for r in rows):
        raise InputError(f"{path}: ragged Gram rows")
    return np.array(rows, dtype=np.float64)


def save_gram_sidecar(gm: GramMatrix, path) -> None:
    """CSV of sample ids and labels aligned with the Gram rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "label"])
        for sid, y in zip(gm.sample_ids, gm.labels):
            writer.writerow([sid, y])


def export_libsvm(gm: GramMatrix, path) -> None:
    """Precomputed-kernel rows: `<label> 0:<serial> 1:<K(i,1)> ... n:<K(i,n)>`."""
    if not gm.labels:
        raise InputError("LIBSVM export requires labels on the Gram matrix")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = len(gm.sample_ids)
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(n):
            cells = " ".join(f"{j + 1}:{gm.values[i, j]:.17g}" for j in range(n))
            fh.write(f"{gm.labels[i]} 0:{i + 1} {cells}\n")
