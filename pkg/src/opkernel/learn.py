"""Kernel SVM on precomputed Gram matrices, LOOCV, and robustness runs.

The solver is a sequential pairwise optimizer on the soft-margin dual with a
precomputed kernel: at every step the pair with the largest optimality-gap
contribution is updated (ties broken by lowest index), which keeps training
fully deterministic. Model selection is nested by default: each outer fold
picks its hyperparameters by an inner leave-one-out pass over its own
training samples only.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .graphs import LabeledDataset, PerturbationSpec, perturb_missing
from .kernels import KernelConfig, gram_base, normalize_gram

LAMBDA_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)
C_GRID = (0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0)
KKT_TOL = 1e-3
MAX_UPDATES = 100_000
PSD_REL_TOL = 1e-8
JITTER_SCALE = 1e-10


@dataclass(frozen=True, eq=False)
class SvmModel:
    """Trained soft-margin model over precomputed kernel rows."""

    dual_coefs: np.ndarray
    bias: float
    support_ids: tuple[str, ...]
    c_param: float
    kkt_residual: float
    jitter: float = 0.0


@dataclass(frozen=True)
class FoldResult:
    sample_id: str
    true_label: int
    predicted: int | None


@dataclass(frozen=True)
class EvalReport:
    """Leave-one-out evaluation summary."""

    accuracy: float
    per_fold: tuple[FoldResult, ...]
    best_lambda: float
    best_c: float
    nested: bool
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "accuracy": self.accuracy,
            "best_lambda": self.best_lambda,
            "best_c": self.best_c,
            "nested": self.nested,
            "per_fold": [
                {"id": f.sample_id, "true_label": f.true_label, "predicted": f.predicted}
                for f in self.per_fold
            ],
            "notes": list(self.notes),
        }


def _repair_equality(alpha: np.ndarray, y: np.ndarray, c: float) -> np.ndarray:
    """Project a warm-start point back onto the dual equality constraint."""
    beta = alpha * y
    lo = np.where(y > 0, 0.0, -c)
    hi = np.where(y > 0, c, 0.0)
    beta = np.clip(beta, lo, hi)
    excess = float(beta.sum())
    for r in range(len(beta)):
        if excess > 0:
            take = min(excess, beta[r] - lo[r])
            beta[r] -= take
            excess -= take
        elif excess < 0:
            give = min(-excess, hi[r] - beta[r])
            beta[r] += give
            excess += give
        else:
            break
    if abs(excess) > 1e-9:
        return np.zeros_like(alpha)
    return beta * y


def _smo(
    K: np.ndarray,
    y: np.ndarray,
    c: float,
    tol: float = KKT_TOL,
    max_updates: int = MAX_UPDATES,
    alpha0: np.ndarray | None = None,
) -> tuple[np.ndarray, float, float, int]:
    """Pairwise coordinate ascent on the dual; returns (alpha, bias, residual, iters)."""
    n = len(y)
    pos = y > 0
    if alpha0 is None:
        alpha = np.zeros(n)
        ka = np.zeros(n)
    else:
        alpha = _repair_equality(alpha0, y, c)
        ka = K @ (alpha * y)

    iters = 0
    for _ in range(max_updates):
        crit = y - ka
        up = (pos & (alpha < c)) | (~pos & (alpha > 0.0))
        low = (~pos & (alpha < c)) | (pos & (alpha > 0.0))
        if not up.any() or not low.any():
            break
        i = int(np.argmax(np.where(up, crit, -np.inf)))
        j = int(np.argmin(np.where(low, crit, np.inf)))
        gap = float(crit[i] - crit[j])
        if gap <= tol:
            break
        room_i = (c - alpha[i]) if pos[i] else alpha[i]
        room_j = alpha[j] if pos[j] else (c - alpha[j])
        step = min(room_i, room_j)
        eta = float(K[i, i] + K[j, j] - 2.0 * K[i, j])
        if eta > 1e-15:
            step = min(step, gap / eta)
        if step <= 0.0:
            break
        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        ka += step * (K[:, i] - K[:, j])
        iters += 1

    crit = y - ka
    up = (pos & (alpha < c)) | (~pos & (alpha > 0.0))
    low = (~pos & (alpha < c)) | (pos & (alpha > 0.0))
    residual = 0.0
    if up.any() and low.any():
        residual = max(0.0, float(crit[up].max() - crit[low].min()))
    free = (alpha > 0.0) & (alpha < c)
    if free.any():
        bias = float(crit[free].mean())
    else:
        parts = []
        if up.any():
            parts.append(float(crit[up].max()))
        if low.any():
            parts.append(float(crit[low].min()))
        bias = sum(parts) / len(parts) if parts else 0.0
    return alpha, bias, residual, iters


def _validated_training_inputs(gram_values, labels) -> tuple[np.ndarray, np.ndarray]:
    K = np.asarray(gram_values, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InputError(f"Gram must be square, got shape {K.shape}")
    if not np.array_equal(K, K.T):
        raise InputError("training Gram must be symmetric")
    y = np.asarray(labels, dtype=np.float64)
    if len(y) != K.shape[0]:
        raise InputError(f"expected {K.shape[0]} labels, got {len(y)}")
    if not ((y > 0).any() and (y < 0).any()):
        raise InputError("training labels must contain both classes")
    return K, y


def train_svm(
    gram_values,
    labels,
    c: float,
    ids=None,
    kkt_tol: float = KKT_TOL,
    max_updates: int = MAX_UPDATES,
    assume_psd: bool = False,
) -> SvmModel:
    """Train on a symmetric precomputed Gram; adds recorded diagonal jitter
    when the matrix dips below the PSD tolerance."""
    if c <= 0:
        raise InputError(f"C must be positive, got {c}")
    K, y = _validated_training_inputs(gram_values, labels)
    jitter = 0.0
    if not assume_psd:
        eigs = np.linalg.eigvalsh(K)
        radius = max(abs(float(eigs[0])), abs(float(eigs[-1])))
        if float(eigs[0]) < -PSD_REL_TOL * radius:
            jitter = JITTER_SCALE * float(np.trace(K)) / K.shape[0]
            K = K + jitter * np.eye(K.shape[0])
    alpha, bias, residual, _ = _smo(K, y, float(c), kkt_tol, max_updates)
    sample_ids = tuple(ids) if ids is not None else tuple(str(i) for i in range(len(y)))
    if len(sample_ids) != len(y):
        raise InputError(f"expected {len(y)} ids, got {len(sample_ids)}")
    support = tuple(sid for sid, a in zip(sample_ids, alpha) if a > 0.0)
    return SvmModel(
        dual_coefs=alpha * y,
        bias=bias,
        support_ids=support,
        c_param=float(c),
        kkt_residual=residual,
        jitter=jitter,
    )


def predict(model: SvmModel, kernel_row) -> int:
    """Sign of the decision value against the training rows; 0 maps to +1."""
    row = np.asarray(kernel_row, dtype=np.float64)
    if row.shape != model.dual_coefs.shape:
        raise InputError(
            f"kernel row length {row.shape} does not match training size {model.dual_coefs.shape}"
        )
    value = float(row @ model.dual_coefs) + model.bias
    return 1 if value >= 0.0 else -1


# ---------------------------------------------------------------------------
# Leave-one-out evaluation


def _train_block(K: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """All training-side kernel lookups go through here (testable seam)."""
    return K[np.ix_(idx, idx)]


def _test_row(K: np.ndarray, t: int, idx: np.ndarray) -> np.ndarray:
    """Held-out-row kernel lookups go through here (testable seam)."""
    return K[t, idx]


def _pow10_exponent(x: float) -> int | None:
    e = math.log10(x)
    r = round(e)
    return int(r) if abs(e - r) < 1e-9 else None


def _combo_key(lam: float, c_val: float, dedup: bool):
    """Grid points whose products of exact powers of ten agree solve, up to an
    exact rescaling of the dual variables, the same optimization problem."""
    if dedup:
        el, ec = _pow10_exponent(lam), _pow10_exponent(c_val)
        if el is not None and ec is not None:
            return ("p10", el + ec)
    return ("exact", lam, c_val)


def _decision(K_tr: np.ndarray, y_tr: np.ndarray, alpha: np.ndarray, bias: float, row: np.ndarray) -> int:
    value = float(row @ (alpha * y_tr)) + bias
    return 1 if value >= 0.0 else -1


def _inner_loocv_accuracy(
    Kt: np.ndarray, y_tr: np.ndarray, c_val: float, tol: float, max_updates: int
) -> float:
    """Leave-one-out accuracy inside a training fold, warm-started per split."""
    m = len(y_tr)
    alpha_full, _, _, _ = _smo(Kt, y_tr, c_val, tol, max_updates)
    correct = 0
    index = np.arange(m)
    for s in range(m):
        idx = index[index != s]
        ys = y_tr[idx]
        if not ((ys > 0).any() and (ys < 0).any()):
            continue
        sub = Kt[np.ix_(idx, idx)]
        alpha, bias, _, _ = _smo(sub, ys, c_val, tol, max_updates, alpha0=alpha_full[idx])
        pred = _decision(sub, ys, alpha, bias, Kt[s, idx])
        if pred == int(y_tr[s]):
            correct += 1
    return correct / m


def _grid_matrices(
    base: np.ndarray, lambda_grid, cfg: KernelConfig
) -> tuple[dict[float, np.ndarray], list[str]]:
    """Per-lambda kernel matrices with recorded jitter where needed."""
    notes: list[str] = []
    mats: dict[float, np.ndarray] = {}
    n = base.shape[0]
    for lam in lambda_grid:
        values = lam * base
        if cfg.normalize:
            values = normalize_gram(values)
        eigs = np.linalg.eigvalsh(values)
        radius = max(abs(float(eigs[0])), abs(float(eigs[-1])))
        if float(eigs[0]) < -PSD_REL_TOL * radius:
            jit = JITTER_SCALE * float(np.trace(values)) / n
            values = values + jit * np.eye(n)
            notes.append(f"psd jitter {jit:.3e} applied at lambda={lam:g}")
        mats[lam] = values
    return mats, notes


def _check_grids(lambda_grid, c_grid) -> tuple[tuple[float, ...], tuple[float, ...]]:
    lams = tuple(sorted({float(x) for x in lambda_grid}))
    cs = tuple(sorted({float(x) for x in c_grid}))
    if not lams or not cs:
        raise InputError("hyperparameter grids must be non-empty")
    if any(x <= 0 for x in lams) or any(x <= 0 for x in cs):
        raise InputError("hyperparameter grids must be positive")
    return lams, cs


def loocv(
    ds: LabeledDataset,
    lambda_grid=LAMBDA_GRID,
    c_grid=C_GRID,
    cfg: KernelConfig | None = None,
    nested: bool = True,
    workers: int = 1,
    kkt_tol: float = KKT_TOL,
    max_updates: int = MAX_UPDATES,
) -> EvalReport:
    """Leave-one-out evaluation with grid-searched hyperparameters.

    Nested mode (default) selects (lambda, C) for each outer fold by an inner
    leave-one-out pass restricted to that fold's training samples, so the
    held-out sample never influences selection. The non-nested mode evaluates
    every grid point by plain LOOCV over all samples and reports the best,
    which is optimistically biased. `cfg.lam` is ignored in favor of the grid.
    """
    n = len(ds)
    if n < 4:
        raise InputError(f"dataset must contain at least 4 samples, got {n}")
    y = np.asarray(ds.labels, dtype=np.float64)
    if not ((y > 0).any() and (y < 0).any()):
        raise InputError("dataset must contain both classes")
    cfg = cfg if cfg is not None else KernelConfig()
    lambda_grid, c_grid = _check_grids(lambda_grid, c_grid)

    base = gram_base(ds, cfg, workers)
    mats, notes = _grid_matrices(base, lambda_grid, cfg)
    dedup = not cfg.normalize
    index = np.arange(n)

    if not nested:
        return _loocv_flat(ds, mats, y, lambda_grid, c_grid, dedup, notes, kkt_tol, max_updates)

    folds: list[FoldResult] = []
    chosen: list[tuple[float, float]] = []
    correct = 0
    for t in range(n):
        train_idx = index[index != t]
        y_tr = y[train_idx]
        if not ((y_tr > 0).any() and (y_tr < 0).any()):
            folds.append(FoldResult(ds.ids[t], int(y[t]), None))
            continue
        blocks = {lam: _train_block(mats[lam], train_idx) for lam in lambda_grid}
        cache: dict = {}
        best_acc, best_lam, best_c = -1.0, lambda_grid[0], c_grid[0]
        for lam in lambda_grid:
            for c_val in c_grid:
                key = _combo_key(lam, c_val, dedup)
                if key not in cache:
                    cache[key] = _inner_loocv_accuracy(
                        blocks[lam], y_tr, c_val, kkt_tol, max_updates
                    )
                acc = cache[key]
                if acc > best_acc:
                    best_acc, best_lam, best_c = acc, lam, c_val
        alpha, bias, _, _ = _smo(blocks[best_lam], y_tr, best_c, kkt_tol, max_updates)
        pred = _decision(
            blocks[best_lam], y_tr, alpha, bias, _test_row(mats[best_lam], t, train_idx)
        )
        folds.append(FoldResult(ds.ids[t], int(y[t]), pred))
        chosen.append((best_lam, best_c))
        if pred == int(y[t]):
            correct += 1

    modal = sorted(Counter(chosen).items(), key=lambda kv: (-kv[1], kv[0]))[0][0] if chosen else (
        lambda_grid[0],
        c_grid[0],
    )
    return EvalReport(
        accuracy=correct / n,
        per_fold=tuple(folds),
        best_lambda=modal[0],
        best_c=modal[1],
        nested=True,
        notes=tuple(notes),
    )


def _loocv_flat(
    ds, mats, y, lambda_grid, c_grid, dedup, notes, kkt_tol, max_updates
) -> EvalReport:
    """Grid search scored directly on the outer LOOCV folds (optimistic)."""
    n = len(ds)
    index = np.arange(n)
    evaluated: dict = {}
    best = None
    for lam in lambda_grid:
        for c_val in c_grid:
            key = _combo_key(lam, c_val, dedup)
            if key not in evaluated:
                folds: list[FoldResult] = []
                correct = 0
                for t in range(n):
                    train_idx = index[index != t]
                    y_tr = y[train_idx]
                    if not ((y_tr > 0).any() and (y_tr < 0).any()):
                        folds.append(FoldResult(ds.ids[t], int(y[t]), None))
                        continue
                    block = _train_block(mats[lam], train_idx)
                    alpha, bias, _, _ = _smo(block, y_tr, c_val, kkt_tol, max_updates)
                    pred = _decision(
                        block, y_tr, alpha, bias, _test_row(mats[lam], t, train_idx)
                    )
                    folds.append(FoldResult(ds.ids[t], int(y[t]), pred))
                    if pred == int(y[t]):
                        correct += 1
                evaluated[key] = (correct / n, tuple(folds))
            acc, folds = evaluated[key]
            if best is None or acc > best[0]:
                best = (acc, lam, c_val, folds)
    acc, lam, c_val, folds = best
    return EvalReport(
        accuracy=acc,
        per_fold=folds,
        best_lambda=lam,
        best_c=c_val,
        nested=False,
        notes=tuple(notes),
    )


def robustness_eval(
    ds: LabeledDataset,
    missing_rate: float,
    seeds,
    lambda_grid=LAMBDA_GRID,
    c_grid=C_GRID,
    cfg: KernelConfig | None = None,
    nested: bool = True,
    workers: int = 1,
    baseline: EvalReport | None = None,
) -> list[EvalReport]:
    """Unperturbed baseline plus one LOOCV report per perturbation seed.

    Every graph is perturbed independently: each run seed spawns one child
    seed per sample, so equal-sized graphs do not lose the same edge slots.
    """
    if not 0.0 <= missing_rate <= 1.0:
        raise InputError(f"missing_rate must be in [0,1], got {missing_rate}")
    if baseline is None:
        baseline = loocv(ds, lambda_grid, c_grid, cfg, nested, workers)
    reports = [baseline]
    for seed in seeds:
        children = np.random.SeedSequence(int(seed)).spawn(len(ds))
        graphs = tuple(
            perturb_missing(
                g,
                PerturbationSpec(missing_rate, int(c.generate_state(1, np.uint64)[0])),
            )
            for g, c in zip(ds.graphs, children)
        )
        perturbed = LabeledDataset(graphs, ds.labels, ds.ids)
        reports.append(loocv(perturbed, lambda_grid, c_grid, cfg, nested, workers))
    return reports
