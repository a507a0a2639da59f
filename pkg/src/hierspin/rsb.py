"""Replica-symmetry-breaking upper bound on the HEA quenched free energy.

For a ladder ``0 = q_0 <= q_1 <= ... <= q_K = 1`` and
``0 = m_0 < m_1 <= ... <= m_K <= m_{K+1} = 1`` the bound reads

    log 2 + E[log Z_0] + (beta**2 / 4) C1 [sum_{a=1}^{K} (m_{a+1} - m_a) q_a**2 - 1]

where ``Z_K = cosh(h + beta sqrt(C1) sum_a sqrt(q_a - q_{a-1}) z_a)`` and
``Z_a**m_{a+1} = E_{a+1}[Z_{a+1}**m_{a+1}]`` for independent standard Gaussians
``z_a``, and ``C1`` is the coupling sum at the model depth. The ``a = 0`` term
of the bracket vanishes because ``q_0 = 0``.

``Z_K`` depends on the ``z_a`` only through the running field
``y_a = h + sum_{b <= a} s_b z_b`` with ``s_b = beta sqrt(C1 (q_b - q_{b-1}))``,
so each level is a one-dimensional Gaussian average evaluated at every node
tuple of the outer levels; the cost is ``prod_a n_a`` integrand evaluations.
All powers and roots are taken in log space.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import ParameterError, QuadratureError
from .hea import single_spin_free_energy
from .numerics import LOG2, gaussian_rule, golden_section_max, logcosh
from .params import ModelParams, coupling_sum_c1, validate

QUADRATURE_TOL = 1e-7
M_FLOOR = 1e-3
GRID_SIZE = 21


@dataclass(frozen=True)
class ParisiParams:
    q: tuple
    m: tuple

    def __post_init__(self):
        q = tuple(float(x) for x in self.q)
        m = tuple(float(x) for x in self.m)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "m", m)
        k = len(q) - 1
        if k < 1 or len(m) != k + 2:
            raise ParameterError("need K >= 1, K+1 overlaps q and K+2 sizes m")
        if q[0] != 0.0 or q[-1] != 1.0 or any(b < a for a, b in zip(q, q[1:])):
            raise ParameterError(f"q must run non-decreasing from 0 to 1, got {q}")
        if m[0] != 0.0 or m[-1] != 1.0 or m[1] <= 0.0 or any(b < a for a, b in zip(m, m[1:])):
            raise ParameterError(f"m must satisfy 0 = m_0 < m_1 <= ... <= m_(K+1) = 1, got {m}")

    @property
    def levels(self) -> int:
        return len(self.q) - 1

    @classmethod
    def one_step(cls, m1: float) -> "ParisiParams":
        return cls((0.0, 1.0), (0.0, m1, 1.0))

    @classmethod
    def two_step(cls, q1: float, m1: float, m2: float) -> "ParisiParams":
        return cls((0.0, q1, 1.0), (0.0, m1, m2, 1.0))

    def free_parameters(self) -> tuple:
        """``(q_1..q_{K-1}, m_1..m_K)``."""
        return self.q[1:-1] + self.m[1:-1]


@dataclass(frozen=True)
class QuadratureSpec:
    """Gaussian quadrature settings for each level's expectation.

    ``rule="uniform"`` uses ``ceil(nodes * max(1, s))`` equispaced nodes for a
    level of noise scale ``s``; ``rule="hermite"`` uses exactly ``nodes``
    Gauss-Hermite nodes. The result is recomputed with ``validation_nodes``
    and the two must agree to ``QUADRATURE_TOL``.
    """

    nodes: int = 64
    validation_nodes: int = 96
    rule: str = "uniform"

    def __post_init__(self):
        if self.nodes < 16:
            raise ParameterError("need at least 16 quadrature nodes")
        if self.validation_nodes <= self.nodes:
            raise ParameterError("validation_nodes must exceed nodes")
        if self.rule not in ("uniform", "hermite"):
            raise ParameterError(f"unknown quadrature rule {self.rule!r}")


def _noise_scales(params: ModelParams, pp: ParisiParams) -> np.ndarray:
    c1 = coupling_sum_c1(params.sigma, params.depth)
    dq = np.diff(np.asarray(pp.q))
    return params.beta * np.sqrt(c1 * dq)


def _log_z0(h: np.ndarray, scales, sizes, nodes: int, rule: str) -> np.ndarray:
    """``log Z_0`` at each starting field in ``h`` (one recursion per entry)."""
    active = [(s, mm) for s, mm in zip(scales, sizes) if s > 0.0]
    if not active:
        return logcosh(np.asarray(h, dtype=float))
    rules = [gaussian_rule(nodes, s, rule) for s, _ in active]
    # y[..., a] enumerates the outer node tuple; build the innermost field grid
    y = np.asarray(h, dtype=float)
    for (s, _), (z, _) in zip(active, rules):
        y = y[..., None] + s * z
    log_z = logcosh(y)
    for (_, mm), (_, lw) in zip(reversed(active), reversed(rules)):
        log_z = logsumexp(mm * log_z + lw, axis=-1) / mm
    return log_z


def _expected_log_z0(params: ModelParams, pp: ParisiParams, nodes: int, rule: str) -> float:
    scales = _noise_scales(params, pp)
    sizes = pp.m[1:-1] if pp.levels > 0 else ()
    # level a (1-based) averages Z_a^{m_a}: the power applied to Z_a is m_a
    field = params.field
    if field.is_point:
        return float(_log_z0(np.array(field.mean), scales, sizes, nodes, rule))
    z, lw = gaussian_rule(nodes, field.std, rule)
    values = _log_z0(field.mean + field.std * z, scales, sizes, nodes, rule)
    return float(np.sum(np.exp(lw) * values))


def parisi_log_z0(
    params: ModelParams,
    pp: ParisiParams,
    quad: QuadratureSpec = QuadratureSpec(),
    validate_quadrature: bool = True,
) -> float:
    """``E[log Z_0]`` for the ladder ``pp`` at the model's (finite) depth."""
    validate(params)
    if math.isinf(params.depth):
        raise ParameterError("the RSB bound needs a finite depth")
    value = _expected_log_z0(params, pp, quad.nodes, quad.rule)
    if validate_quadrature:
        check = _expected_log_z0(params, pp, quad.validation_nodes, quad.rule)
        if abs(value - check) > QUADRATURE_TOL:
            raise QuadratureError(
                f"E[log Z_0] changes by {abs(value - check):.3g} between {quad.nodes} and "
                f"{quad.validation_nodes} nodes; increase the node count"
            )
    return value


def rsb_bound(
    params: ModelParams,
    pp: ParisiParams,
    quad: QuadratureSpec = QuadratureSpec(),
    validate_quadrature: bool = True,
) -> float:
    log_z0 = parisi_log_z0(params, pp, quad, validate_quadrature)
    c1 = coupling_sum_c1(params.sigma, params.depth)
    bracket = sum((pp.m[a + 1] - pp.m[a]) * pp.q[a] ** 2 for a in range(1, pp.levels + 1)) - 1.0
    return LOG2 + log_z0 + 0.25 * params.beta**2 * c1 * bracket


def annealed_bound(params: ModelParams, nodes: int = 64) -> float:
    """``(beta**2 / 4) C1 + E[log 2 cosh h]``."""
    c1 = coupling_sum_c1(params.sigma, params.depth)
    return 0.25 * params.beta**2 * c1 + single_spin_free_energy(params.field, nodes)


def _ladder(k: int, x) -> ParisiParams:
    if k == 1:
        return ParisiParams.one_step(x[0])
    return ParisiParams.two_step(*x)


def _bounds_for(k: int, x, i: int):
    """Feasible interval of free coordinate ``i`` given the others."""
    if k == 1:
        return M_FLOOR, 1.0
    q1, m1, m2 = x
    if i == 0:
        return 0.0, 1.0
    if i == 1:
        return M_FLOOR, m2
    return m1, 1.0


def _coarse_points(k: int):
    m_grid = np.linspace(0.0, 1.0, GRID_SIZE)
    m_grid[0] = M_FLOOR
    if k == 1:
        return [(m,) for m in m_grid]
    q_grid = np.linspace(0.0, 1.0, GRID_SIZE)
    return [
        (q1, m1, m2)
        for q1 in q_grid
        for m1, m2 in itertools.product(m_grid, m_grid)
        if m1 <= m2
    ]


def optimize_parisi(
    params: ModelParams,
    K: int,
    quad: QuadratureSpec = QuadratureSpec(),
    param_tol: float = 1e-4,
    max_sweeps: int = 50,
):
    """Minimize :func:`rsb_bound` over ladders with ``K`` in ``{1, 2}``.

    A coarse grid of 21 points per free parameter (restricted to ordered
    ladders, ``m_1 >= 1e-3``) seeds coordinate descent, where each coordinate
    is line-searched by golden section over its feasible interval. For
    ``K = 2`` the optimum of ``K = 1`` (embedded as ``q_1 = 1``) is also a
    starting candidate, so the ``K = 2`` result never exceeds the ``K = 1`` one.
    Returns ``(ParisiParams, bound)``; the optimum is local in general.
    """
    if K not in (1, 2):
        raise ParameterError("optimize_parisi supports K = 1 or K = 2")
    validate(params)

    def objective(x):
        return rsb_bound(params, _ladder(K, x), quad, validate_quadrature=False)

    candidates = [(objective(x), tuple(float(v) for v in x)) for x in _coarse_points(K)]
    if K == 2:
        pp1, _ = optimize_parisi(params, 1, quad, param_tol, max_sweeps)
        x1 = (1.0, pp1.m[1], pp1.m[1])
        candidates.append((objective(x1), x1))
    best_val, best_x = min(candidates, key=lambda c: c[0])
    x = list(best_x)
    for _ in range(max_sweeps):
        moved = 0.0
        for i in range(len(x)):
            lo, hi = _bounds_for(K, x, i)
            if hi - lo <= param_tol:
                continue

            def along(v, i=i):
                trial = list(x)
                trial[i] = v
                return -objective(trial)

            a, b = golden_section_max(along, lo, hi, tol=param_tol / 10)
            trial = list(x)
            trial[i] = 0.5 * (a + b)
            val = objective(trial)
            if val < best_val:
                moved = max(moved, abs(trial[i] - x[i]))
                x, best_val = trial, val
        if moved < param_tol:
            break
    pp = _ladder(K, x)
    return pp, rsb_bound(params, pp, quad)
