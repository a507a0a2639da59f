"""Run the proved inequalities for both models and collect a pass/fail report.

Each check compares ``lhs`` against ``rhs`` under a relation and records the
raw ``slack`` (positive means the relation holds with room to spare):

* ``"<="``: slack = rhs - lhs;  ``">="``: slack = lhs - rhs;
* ``"trend-decreasing"``: lhs is the earlier value, rhs the later one,
  slack = lhs - rhs and strictness is required.

``tolerance`` is the allowed shortfall. Deterministic checks carry a
floating-point allowance and report ``pass`` or ``fail``. Statistical checks
carry ``STDERR_MULTIPLE`` combined standard errors and report ``pass`` when
the relation holds outright, ``statistical-pass`` when the shortfall is within
tolerance, and ``fail`` otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .bounds import KINDS, maximize_bound, phi
from .dhm import dhm_free_energy
from .hea import QuenchedEstimate, quenched_samples, single_spin_free_energy
from .numerics import LOG2, logcosh
from .params import ModelParams, coupling_sum_c1
from .rsb import QuadratureSpec, annealed_bound, optimize_parisi

STDERR_MULTIPLE = 3.0
DHM_ATOL = 1e-10
EQUALITY_ATOL = 1e-10


@dataclass
class Check:
    name: str
    lhs: float
    rhs: float
    relation: str
    slack: float
    status: str
    tolerance: float = 0.0


@dataclass
class CheckReport:
    checks: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if c.status == "fail"]

    def add(self, name, lhs, rhs, relation, tolerance=0.0, statistical=False):
        lhs, rhs = float(lhs), float(rhs)
        if relation == "<=":
            slack = rhs - lhs
        elif relation in (">=", "trend-decreasing"):
            slack = lhs - rhs
        else:
            raise ValueError(f"unknown relation {relation!r}")
        holds = slack > 0 if relation == "trend-decreasing" else slack >= 0
        if relation == "trend-decreasing" and lhs == 0.0 and rhs == 0.0:
            holds = True  # a deterministic quantity has nothing left to average out
        if holds:
            status = "pass"
        elif tolerance > 0 and slack >= -tolerance:
            status = "statistical-pass" if statistical else "pass"
        else:
            status = "fail"
        check = Check(name, lhs, rhs, relation, slack, status, float(tolerance))
        self.checks.append(check)
        return check

    def extend(self, other: "CheckReport") -> "CheckReport":
        self.checks.extend(other.checks)
        self.metadata.update(other.metadata)
        return self

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "checks": [asdict(c) for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False, default=_jsonable)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    raise TypeError(f"cannot serialize {type(x)}")


def _params_meta(params: ModelParams) -> dict:
    return {
        "sigma": params.sigma,
        "beta": params.beta,
        "depth": params.depth if not math.isinf(params.depth) else "inf",
        "j_coupling": params.j_coupling,
        "field": {"kind": params.field.kind, "mean": params.field.mean, "std": params.field.effective_std},
    }


def check_dhm(params: ModelParams, depth: int, m_grid_size: int = 41, bound_offset: float = 0.0) -> CheckReport:
    """Lower-bound, ordering and beta = 0 checks for the ferromagnet.

    ``bound_offset`` is added to every bound value; a positive offset is a
    negative control that must make the lower-bound checks fail.
    """
    p = params.with_(depth=depth)
    report = CheckReport(metadata={"dhm": {**_params_meta(p), "m_grid_size": m_grid_size}})
    f_exact = dhm_free_energy(p)
    grid = np.linspace(-1.0, 1.0, m_grid_size)
    for kind in KINDS:
        values = phi(kind, grid, p) + bound_offset
        worst = int(np.argmax(values - f_exact))
        report.add(
            f"dhm_{kind}_lower_bound[depth={depth},worst_m={grid[worst]:+.4f}]",
            f_exact, values[worst], ">=", tolerance=DHM_ATOL,
        )
    mf = maximize_bound("mf", p).value + bound_offset
    nmf = maximize_bound("nmf", p).value + bound_offset
    report.add(f"dhm_max_mf_le_max_nmf[depth={depth}]", mf, nmf, "<=", tolerance=DHM_ATOL)

    p0 = p.with_(beta=0.0)
    target = LOG2 + logcosh(p.field.mean)
    f0 = dhm_free_energy(p0)
    report.add("dhm_beta0_exact_equals_log2cosh", abs(f0 - target), EQUALITY_ATOL, "<=")
    for kind in KINDS:
        dev = float(np.max(np.abs(phi(kind, grid, p0) + bound_offset - target)))
        report.add(f"dhm_beta0_{kind}_equals_log2cosh", dev, EQUALITY_ATOL, "<=")
    return report


def _sd_stderr(values: np.ndarray) -> float:
    """Asymptotic standard error of the sample standard deviation,
    ``sqrt((mu4 - s**4) / (4 s**2 n))``, valid for non-Gaussian samples."""
    n = values.size
    s2 = float(np.var(values, ddof=1))
    if s2 == 0.0:
        return 0.0
    mu4 = float(np.mean((values - values.mean()) ** 4))
    return math.sqrt(max(mu4 - s2 * s2, 0.0) / (4.0 * s2 * n))


def check_hea(
    params: ModelParams,
    max_depth: int,
    n_samples: int,
    seed: int,
    K: int = 1,
    workers: int = 1,
    quad: QuadratureSpec = QuadratureSpec(),
    bound_offset: float = 0.0,
    compare_k1: bool | None = None,
) -> CheckReport:
    """Quenched-estimate inequalities for depths ``1..max_depth``.

    Depth 0 (a single spin) enters exactly as ``E[log 2 cosh h]``. Each
    statistical comparison allows ``STDERR_MULTIPLE`` combined standard errors.
    ``bound_offset`` is subtracted from every upper bound (negative control).
    """
    beta, sigma = params.beta, params.sigma
    f0 = single_spin_free_energy(params.field)
    estimates = {0: QuenchedEstimate(f0, 0.0, n_samples)}
    sds = {}
    sd_errs = {}
    rsb = {}
    rsb_k1 = {}
    ladders = {}
    compare_k1 = (K == 2) if compare_k1 is None else compare_k1
    for d in range(1, max_depth + 1):
        p = params.with_(depth=d)
        values = quenched_samples(p, n_samples, seed, workers)
        estimates[d] = QuenchedEstimate.from_samples(values)
        sds[d] = 0.0 if estimates[d].stderr == 0.0 else float(np.std(values, ddof=1))
        sd_errs[d] = _sd_stderr(values)
        ladder, rsb[d] = optimize_parisi(p, K, quad)
        ladders[d] = {"q": list(ladder.q), "m": list(ladder.m)}
        if compare_k1 and K != 1:
            rsb_k1[d] = optimize_parisi(p, 1, quad)[1]

    report = CheckReport()
    for d in range(1, max_depth + 1):
        cur, prev = estimates[d], estimates[d - 1]
        tol = STDERR_MULTIPLE * math.hypot(cur.stderr, prev.stderr)
        report.add(f"hea_monotone[depth={d - 1}->{d}]", cur.mean, prev.mean, ">=", tol, statistical=True)
        step = 0.25 * beta**2 * 2.0 ** (d * (1.0 - 2.0 * sigma))
        report.add(
            f"hea_increment_bound[depth={d - 1}->{d}]",
            cur.mean, prev.mean + step - bound_offset, "<=", tol, statistical=True,
        )
        tol_single = STDERR_MULTIPLE * cur.stderr
        p = params.with_(depth=d)
        report.add(
            f"hea_annealed_bound[depth={d}]",
            cur.mean, annealed_bound(p) - bound_offset, "<=", tol_single, statistical=True,
        )
        report.add(
            f"hea_rsb_bound[K={K},depth={d}]",
            cur.mean, rsb[d] - bound_offset, "<=", tol_single, statistical=True,
        )
        if d in rsb_k1:
            report.add(f"hea_rsb_nesting[K={K}<=K=1,depth={d}]", rsb[d], rsb_k1[d] + 1e-8, "<=")
    for d in range(1, max_depth):
        tol = STDERR_MULTIPLE * math.hypot(sd_errs[d], sd_errs[d + 1])
        report.add(
            f"hea_self_averaging_sd[depth={d}->{d + 1}]",
            sds[d], sds[d + 1], "trend-decreasing", tol, statistical=True,
        )

    report.metadata["hea"] = {
        **_params_meta(params),
        "max_depth": max_depth,
        "n_samples": n_samples,
        "seed": seed,
        "K": K,
        "quadrature": {"nodes": quad.nodes, "validation_nodes": quad.validation_nodes, "rule": quad.rule},
        "stderr_multiple": STDERR_MULTIPLE,
        "estimates": {
            str(d): {"mean": e.mean, "stderr": e.stderr, "sd": sds.get(d, 0.0)}
            for d, e in estimates.items()
        },
        "rsb_bound": {str(d): v for d, v in rsb.items()},
        "rsb_ladder": {str(d): v for d, v in ladders.items()},
        "coupling_sum_c1": {str(d): coupling_sum_c1(sigma, d) for d in range(1, max_depth + 1)},
    }
    return report
