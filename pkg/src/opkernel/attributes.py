"""Attribute kernels composed into the pattern kernels."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InputError

KINDS = ("linear", "rbf", "delta", "constant_one")


@dataclass(frozen=True)
class AttributeKernel:
    """Symmetric positive semidefinite kernel on attribute vectors.

    kind "linear" is the dot product, "rbf" is exp(-gamma * ||x - y||^2),
    "delta" is exact equality, and "constant_one" ignores its inputs (the
    attribute-free degenerate case).
    """

    kind: str
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown attribute kernel {self.kind!r}; choose from {KINDS}")
        if self.kind == "rbf" and not self.gamma > 0:
            raise InputError(f"rbf gamma must be positive, got {self.gamma}")

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant_one"

    def __call__(self, x, y) -> float:
        if self.kind == "constant_one":
            return 1.0
        if self.kind == "delta":
            return 1.0 if tuple(x) == tuple(y) else 0.0
        if len(x) != len(y):
            raise InputError(f"attribute dimension mismatch: {len(x)} vs {len(y)}")
        if self.kind == "linear":
            return float(sum(a * b for a, b in zip(x, y)))
        sq = sum((a - b) * (a - b) for a, b in zip(x, y))
        return math.exp(-self.gamma * sq)


CONSTANT_ONE = AttributeKernel("constant_one")
