"""Mean-field and non-mean-field lower bounds on the DHM free energy.

Both bounds share the shape

    phi(m) = log 2 + logcosh(beta J C m + h) - (beta J / 2) C m**2 - offset

with ``C = C1`` and ``offset = beta J C2 / 2`` for the mean-field bound, and
``C = C1 - C2`` and no offset for the non-mean-field bound. Writing
``a = beta J C``, the derivative is ``a (tanh(a m + h) - m)``. For ``h > 0``
the maximum lies on ``m > 0`` (``phi(m) > phi(-m)`` there), where
``tanh(a m + h) - m`` is decreasing from ``tanh(h) > 0`` to ``tanh(a + h) - 1 < 0``,
so the maximizer is that unique root. For ``h = 0`` the maximizer is ``0`` when
``a <= 1`` and otherwise the positive root of ``tanh(a m) / m = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ParameterError
from .numerics import LOG2, golden_section_max, logcosh
from .params import INF, Depth, ModelParams, coupling_sum_c1, coupling_sum_c2

KINDS = ("mf", "nmf")
GRID_POINTS = 201


@dataclass(frozen=True)
class BoundResult:
    kind: str
    m_star: float
    value: float
    depth: Depth


def _resolve_depth(params: ModelParams, depth) -> Depth:
    return params.depth if depth is None else depth


def _check_params(params: ModelParams) -> None:
    if not params.field.is_point:
        raise ParameterError("DHM bounds need a deterministic (point) field")
    if params.beta < 0 or params.j_coupling < 0:
        raise ParameterError("beta and j_coupling must be >= 0")


def bound_coefficients(kind: str, params: ModelParams, depth=None):
    """Return ``(a, offset)``: the effective coupling ``beta J C`` and the
    constant subtracted from the bound."""
    depth = _resolve_depth(params, depth)
    c1 = coupling_sum_c1(params.sigma, depth)
    c2 = coupling_sum_c2(params.sigma, depth)
    bj = params.beta * params.j_coupling
    if kind == "mf":
        return bj * c1, 0.5 * bj * c2
    if kind == "nmf":
        return bj * (c1 - c2), 0.0
    raise ParameterError(f"bound kind must be 'mf' or 'nmf', got {kind!r}")


def _phi(kind, m, params, depth):
    _check_params(params)
    m_arr = np.asarray(m, dtype=float)
    if np.any(np.abs(m_arr) > 1.0):
        raise ParameterError("trial magnetization must lie in [-1, 1]")
    a, offset = bound_coefficients(kind, params, depth)
    out = LOG2 + logcosh(a * m_arr + params.field.mean) - 0.5 * a * m_arr * m_arr - offset
    return float(out) if np.ndim(out) == 0 else out


def phi_mf(m, params: ModelParams, depth=None):
    """Mean-field bound at trial magnetization ``m`` (scalar or array)."""
    return _phi("mf", m, params, depth)


def phi_nmf(m, params: ModelParams, depth=None):
    """Non-mean-field bound at trial magnetization ``m`` (scalar or array)."""
    return _phi("nmf", m, params, depth)


def phi(kind: str, m, params: ModelParams, depth=None):
    return _phi(kind, m, params, depth)


def _stationary_maximizer(a: float, h: float) -> float:
    if a == 0.0:
        return 0.0
    if h == 0.0:
        if a <= 1.0:
            return 0.0

        def excess(m):
            return math.tanh(a * m) / m - 1.0

        hi = 1.0
        if excess(hi) >= 0.0:
            return hi
        return brentq(excess, 1e-300, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    sign = 1.0 if h > 0 else -1.0
    ah = abs(h)

    def g(m):
        return math.tanh(a * m + ah) - m

    if g(1.0) >= 0.0:
        return sign
    return sign * brentq(g, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def _grid_maximizer(kind, params, depth) -> float:
    """Grid scan on ``GRID_POINTS`` points, then golden-section refinement."""
    grid = np.linspace(-1.0, 1.0, GRID_POINTS)
    values = _phi(kind, grid, params, depth)
    best = int(np.argmax(values))
    if params.field.mean == 0.0 and grid[best] < 0.0:
        best = GRID_POINTS - 1 - best
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, GRID_POINTS - 1)]
    lo, hi = golden_section_max(lambda x: _phi(kind, x, params, depth), lo, hi, tol=1e-12)
    m = 0.5 * (lo + hi)
    if params.field.mean == 0.0:
        m = abs(m)
    return m


def maximize_bound(kind: str, params: ModelParams, depth=None, method: str = "stationary") -> BoundResult:
    """Global maximum of the ``kind`` bound over ``m`` in ``[-1, 1]``.

    ``method="stationary"`` (default) solves the fixed-point equation on the
    half-line selected by the sign of ``h``, which pins ``m_star`` to ~1e-15
    even next to the transition. ``method="grid"`` is a 201-point scan plus
    golden-section search; it cannot resolve ``m_star`` where the objective is
    flat to machine precision (near the critical point) and is kept as an
    independent cross-check. At ``h = 0`` the nonnegative member of the
    symmetric pair is returned, and ``m_star = 0`` exactly at and below ``beta_c``.
    """
    _check_params(params)
    depth = _resolve_depth(params, depth)
    if method == "stationary":
        a, _ = bound_coefficients(kind, params, depth)
        m_star = _stationary_maximizer(a, params.field.mean)
    elif method == "grid":
        m_star = _grid_maximizer(kind, params, depth)
    else:
        raise ParameterError(f"unknown maximization method {method!r}")
    return BoundResult(kind, m_star, _phi(kind, m_star, params, depth), depth)


def beta_critical(kind: str, sigma: float, j_coupling: float = 1.0) -> float:
    """Inverse critical temperature of the infinite-depth bound at ``h = 0``.

    ``2**(2 sigma - 1) - 1`` for ``"mf"`` and ``2**(1 - 2 sigma) - 3 + 2**(2 sigma)``
    for ``"nmf"``, divided by ``j_coupling``.
    """
    if not (0.5 < sigma <= 1.0):
        raise ParameterError(f"sigma must lie in (1/2, 1], got {sigma}")
    if j_coupling <= 0:
        raise ParameterError("j_coupling must be positive")
    if kind == "mf":
        value = 2.0 ** (2.0 * sigma - 1.0) - 1.0
    elif kind == "nmf":
        value = 2.0 ** (1.0 - 2.0 * sigma) - 3.0 + 2.0 ** (2.0 * sigma)
    else:
        raise ParameterError(f"bound kind must be 'mf' or 'nmf', got {kind!r}")
    return value / j_coupling


def detect_transition(
    kind: str,
    sigma: float,
    j_coupling: float = 1.0,
    depth: Depth = INF,
    tol: float = 1e-4,
    threshold: float = 1e-6,
    method: str = "stationary",
) -> float:
    """Smallest ``beta`` at which the ``h = 0`` maximizer exceeds ``threshold``,
    located by bisection to width ``tol``."""

    def ordered(beta):
        p = ModelParams(sigma=sigma, beta=beta, depth=depth, j_coupling=j_coupling)
        return maximize_bound(kind, p, method=method).m_star > threshold

    lo, hi = 0.0, 1.0
    while not ordered(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise RuntimeError("no ordered phase found below beta = 1e6")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ordered(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
