"""Model parameters and the geometric coupling sums shared by every bound.

Depth convention: ``depth`` counts hierarchical levels, so a model of depth
``d`` has ``N = 2**d`` spins and interaction levels ``l = 1, ..., d``.
``depth = math.inf`` denotes the thermodynamic limit.

Field convention: the external field ``h`` enters the Boltzmann weight as
``exp(-beta * H + h * sum(S))``, with no ``beta`` prefactor. In other words
``h`` is the physical field already multiplied by ``beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

from .errors import DivergentSeriesError, ParameterError

Depth = Union[int, float]

INF = math.inf


@dataclass(frozen=True)
class FieldSpec:
    """External field law: a point mass at ``mean`` or a Gaussian."""

    kind: str = "point"
    mean: float = 0.0
    std: float = 0.0

    def __post_init__(self):
        if self.kind not in ("point", "gaussian"):
            raise ParameterError(f"field kind must be 'point' or 'gaussian', got {self.kind!r}")
        if not math.isfinite(self.mean):
            raise ParameterError("field mean must be finite")
        if self.kind == "gaussian" and not (self.std >= 0 and math.isfinite(self.std)):
            raise ParameterError("field std must be finite and >= 0")

    @property
    def is_point(self) -> bool:
        return self.kind == "point" or self.std == 0.0

    @property
    def effective_std(self) -> float:
        return 0.0 if self.kind == "point" else self.std

    @classmethod
    def point(cls, h: float = 0.0) -> "FieldSpec":
        return cls("point", float(h), 0.0)

    @classmethod
    def gaussian(cls, mean: float, std: float) -> "FieldSpec":
        return cls("gaussian", float(mean), float(std))


@dataclass(frozen=True)
class ModelParams:
    sigma: float
    beta: float
    depth: Depth = 1
    field: FieldSpec = field(default_factory=FieldSpec)
    j_coupling: float = 1.0

    @property
    def n_spins(self) -> int:
        if math.isinf(self.depth):
            raise ParameterError("infinite-depth model has no finite spin count")
        return 2 ** int(self.depth)

    @property
    def h(self) -> float:
        """Deterministic field value; only meaningful for point fields."""
        return self.field.mean

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


def validate(params: ModelParams, needs_limit: bool = False) -> None:
    """Raise :class:`ParameterError` naming the first violated constraint."""
    if not math.isfinite(params.beta) or params.beta < 0:
        raise ParameterError(f"beta must be finite and >= 0, got {params.beta}")
    if not math.isfinite(params.j_coupling) or params.j_coupling < 0:
        raise ParameterError(f"j_coupling must be finite and >= 0, got {params.j_coupling}")
    if not math.isfinite(params.sigma) or params.sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {params.sigma}")
    depth = params.depth
    if math.isinf(depth):
        if depth < 0:
            raise ParameterError("depth must be >= 1")
        needs_limit = True
    elif depth != int(depth) or depth < 1:
        raise ParameterError(f"depth must be an integer >= 1, got {depth}")
    if needs_limit and params.sigma <= 0.5:
        raise ParameterError(f"sigma must exceed 1/2 for the thermodynamic limit, got {params.sigma}")


def _check_depth(depth: Depth) -> None:
    if math.isinf(depth):
        if depth < 0:
            raise ParameterError("depth must be >= 0")
    elif depth != int(depth) or depth < 0:
        raise ParameterError(f"depth must be a non-negative integer or inf, got {depth}")


def coupling_sum_c1(sigma: float, depth: Depth) -> float:
    """Return ``sum_{l=1}^{depth} 2**(l*(1-2*sigma))``.

    At infinite depth the closed form ``1/(2**(2*sigma-1) - 1)`` is used,
    which requires ``sigma > 1/2``.
    """
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    _check_depth(depth)
    if math.isinf(depth):
        if sigma <= 0.5:
            raise DivergentSeriesError(f"sum of 2^(l(1-2 sigma)) diverges for sigma={sigma} <= 1/2")
        return 1.0 / math.expm1((2.0 * sigma - 1.0) * math.log(2.0))
    r = 1.0 - 2.0 * sigma
    total = 0.0
    for level in range(1, int(depth) + 1):
        total += 2.0 ** (level * r)
    return total


def coupling_sum_c2(sigma: float, depth: Depth) -> float:
    """Return ``sum_{l=1}^{depth} 2**(-2*l*sigma)``; closed form at infinity."""
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    _check_depth(depth)
    if math.isinf(depth):
        return 1.0 / math.expm1(2.0 * sigma * math.log(2.0))
    total = 0.0
    for level in range(1, int(depth) + 1):
        total += 2.0 ** (-2.0 * level * sigma)
    return total


def level_variance(sigma: float, level: int, depth: int) -> float:
    """Variance of a collapsed spin-glass coupling between spins whose
    smallest common block sits at ``level``: ``sum_{l=level}^{depth} 2**(-2 l sigma)``."""
    return sum(2.0 ** (-2.0 * l * sigma) for l in range(level, depth + 1))
