import math

import numpy as np
import pytest
from scipy import integrate

from hierspin.errors import ParameterError, QuadratureError
from hierspin.hea import quenched_free_energy
from hierspin.params import FieldSpec, ModelParams, coupling_sum_c1
from hierspin.rsb import (
    ParisiParams,
    QuadratureSpec,
    annealed_bound,
    optimize_parisi,
    parisi_log_z0,
    rsb_bound,
)

LOG2 = math.log(2)
GAUSS = 1 / math.sqrt(2 * math.pi)


def log2cosh(x):
    return np.logaddexp(x, -x)


def oracle_k1(h, s, m):
    """(1/m) log E[cosh(h + s z)**m] by adaptive quadrature."""
    shift = abs(h) + s * s * m  # keep the integrand near 1 around its peak

    def f(z):
        return math.exp(m * (log2cosh(h + s * z) - LOG2) - shift * m) * GAUSS * math.exp(-z * z / 2)

    val, _ = integrate.quad(f, -40, 40, epsabs=0, epsrel=1e-13, limit=400, points=[-h / s] if s else None)
    return (math.log(val) + shift * m) / m


def oracle_k2(h, s1, s2, m1, m2):
    def inner(z1):
        return oracle_k1(h + s1 * z1, s2, m2)

    def f(z1):
        return math.exp(m1 * inner(z1) - m1 * (abs(h) + 8)) * GAUSS * math.exp(-z1 * z1 / 2)

    val, _ = integrate.quad(f, -12, 12, epsabs=0, epsrel=1e-12, limit=200)
    return math.log(val) / m1 + abs(h) + 8


def scales(params, q):
    c1 = coupling_sum_c1(params.sigma, params.depth)
    return [params.beta * math.sqrt(c1 * (b - a)) for a, b in zip(q, q[1:])]


def test_parisi_params_validation():
    ParisiParams((0, 0.5, 1), (0, 0.2, 0.7, 1))
    bad = [
        ((0, 1), (0, 0, 1)),
        ((0.1, 1), (0, 0.5, 1)),
        ((0, 0.7, 0.5, 1), (0, 0.1, 0.2, 0.3, 1)),
        ((0, 1), (0, 0.5, 0.4)),
        ((0, 0.5, 1), (0, 0.6, 0.5, 1)),
        ((0, 0.5, 1), (0, 0.5, 1)),
        ((0, 0.9), (0, 0.5, 1)),
    ]
    for q, m in bad:
        with pytest.raises(ParameterError):
            ParisiParams(q, m)
    pp = ParisiParams.two_step(0.3, 0.2, 0.6)
    assert pp.levels == 2
    assert pp.free_parameters() == (0.3, 0.2, 0.6)


def test_quadrature_spec_validation():
    with pytest.raises(ParameterError):
        QuadratureSpec(nodes=8)
    with pytest.raises(ParameterError):
        QuadratureSpec(nodes=64, validation_nodes=64)
    with pytest.raises(ParameterError):
        QuadratureSpec(rule="simpson")


@pytest.mark.parametrize("h", [0.0, 0.4, -1.3])
def test_beta_zero(h):
    p = ModelParams(sigma=0.8, beta=0.0, depth=3, field=FieldSpec.point(h))
    pp = ParisiParams.two_step(0.4, 0.3, 0.8)
    assert parisi_log_z0(p, pp) == pytest.approx(math.log(math.cosh(h)), abs=1e-15)
    assert rsb_bound(p, pp) == pytest.approx(LOG2 + math.log(math.cosh(h)), abs=1e-15)


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0, 3.0])
@pytest.mark.parametrize("depth", [2, 4])
def test_k1_m1_closed_form(beta, depth):
    p = ModelParams(sigma=0.8, beta=beta, depth=depth)
    c1 = coupling_sum_c1(0.8, depth)
    pp = ParisiParams.one_step(1.0)
    assert parisi_log_z0(p, pp) == pytest.approx(beta**2 * c1 / 2, abs=1e-8)
    assert rsb_bound(p, pp) == pytest.approx(LOG2 + beta**2 * c1 / 4, abs=1e-8)
    assert rsb_bound(p, pp) == pytest.approx(annealed_bound(p), abs=1e-8)


@pytest.mark.parametrize("m1", [0.05, 0.4, 0.9])
def test_degenerate_second_level(m1):
    p = ModelParams(sigma=0.7, beta=1.5, depth=3, field=FieldSpec.point(0.2))
    k1 = rsb_bound(p, ParisiParams.one_step(m1))
    for m2 in (m1, 0.5 * (m1 + 1), 1.0):
        assert rsb_bound(p, ParisiParams.two_step(1.0, m1, m2)) == pytest.approx(k1, abs=1e-13)


def test_zero_first_overlap_collapses_to_other_m():
    # q_1 = 0 leaves only the outer level, which is raised to m_2
    p = ModelParams(sigma=0.7, beta=1.5, depth=3)
    two = parisi_log_z0(p, ParisiParams.two_step(0.0, 0.3, 0.6))
    one = parisi_log_z0(p, ParisiParams.one_step(0.6))
    assert two == pytest.approx(one, abs=1e-13)


@pytest.mark.parametrize("beta,sigma,depth,h,m", [
    (1.0, 0.9, 2, 0.0, 0.5),
    (2.5, 0.6, 3, 0.3, 0.2),
    (3.0, 0.7, 6, 0.0, 0.05),
    (0.7, 1.0, 1, -0.6, 0.95),
])
def test_k1_matches_adaptive_quadrature(beta, sigma, depth, h, m):
    p = ModelParams(sigma=sigma, beta=beta, depth=depth, field=FieldSpec.point(h))
    pp = ParisiParams.one_step(m)
    (s,) = scales(p, pp.q)
    assert parisi_log_z0(p, pp) == pytest.approx(oracle_k1(h, s, m), abs=1e-9)


@pytest.mark.parametrize("beta,sigma,depth,h,q1,m1,m2", [
    (1.0, 0.9, 2, 0.0, 0.5, 0.3, 0.7),
    (2.0, 0.7, 3, 0.2, 0.8, 0.1, 0.4),
    (3.0, 0.6, 4, 0.0, 0.3, 0.5, 0.5),
])
def test_k2_matches_nested_quadrature(beta, sigma, depth, h, q1, m1, m2):
    p = ModelParams(sigma=sigma, beta=beta, depth=depth, field=FieldSpec.point(h))
    pp = ParisiParams.two_step(q1, m1, m2)
    s1, s2 = scales(p, pp.q)
    assert parisi_log_z0(p, pp) == pytest.approx(oracle_k2(h, s1, s2, m1, m2), abs=1e-8)


def test_gaussian_field_averages_over_h():
    field = FieldSpec.gaussian(0.3, 0.7)
    p = ModelParams(sigma=0.8, beta=1.2, depth=2, field=field)
    pp = ParisiParams.one_step(0.4)
    (s,) = scales(p, pp.q)

    def f(x):
        return oracle_k1(0.3 + 0.7 * x, s, 0.4) * GAUSS * math.exp(-x * x / 2)

    expected, _ = integrate.quad(f, -12, 12, epsabs=1e-12)
    assert parisi_log_z0(p, pp) == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize("beta", [0.5, 1.5, 3.0])
@pytest.mark.parametrize("sigma", [0.6, 0.8, 1.0])
@pytest.mark.parametrize("depth", [1, 3, 6])
def test_doubling_nodes_converged(beta, sigma, depth):
    p = ModelParams(sigma=sigma, beta=beta, depth=depth)
    for pp in (ParisiParams.one_step(0.3), ParisiParams.two_step(0.6, 0.1, 0.7)):
        a = parisi_log_z0(p, pp, QuadratureSpec(64, 96), validate_quadrature=False)
        b = parisi_log_z0(p, pp, QuadratureSpec(128, 192), validate_quadrature=False)
        assert abs(a - b) < 1e-8


def test_hermite_rule_agrees_at_moderate_noise():
    p = ModelParams(sigma=0.9, beta=0.8, depth=3, field=FieldSpec.point(0.1))
    pp = ParisiParams.two_step(0.5, 0.3, 0.8)
    gh = parisi_log_z0(p, pp, QuadratureSpec(64, 96, rule="hermite"))
    assert gh == pytest.approx(parisi_log_z0(p, pp), abs=1e-9)


def test_self_check_flags_underresolved_hermite():
    # kink-like cosh**m integrands at large noise defeat a fixed Gauss-Hermite rule
    p = ModelParams(sigma=0.6, beta=3.0, depth=6)
    with pytest.raises(QuadratureError):
        parisi_log_z0(p, ParisiParams.one_step(0.05), QuadratureSpec(16, 24, rule="hermite"))


def test_needs_finite_depth():
    with pytest.raises(ParameterError):
        parisi_log_z0(ModelParams(sigma=0.8, beta=1.0, depth=math.inf), ParisiParams.one_step(0.5))


def test_bound_assembly():
    p = ModelParams(sigma=0.75, beta=1.4, depth=3, field=FieldSpec.point(0.1))
    pp = ParisiParams.two_step(0.4, 0.2, 0.6)
    c1 = coupling_sum_c1(0.75, 3)
    bracket = (0.6 - 0.2) * 0.4**2 + (1.0 - 0.6) * 1.0 - 1.0
    expected = LOG2 + parisi_log_z0(p, pp) + 0.25 * 1.4**2 * c1 * bracket
    assert rsb_bound(p, pp) == pytest.approx(expected, abs=1e-15)


def test_annealed_bound_gaussian_field():
    p = ModelParams(sigma=0.8, beta=1.0, depth=2, field=FieldSpec.gaussian(0.0, 1.0))

    def f(x):
        return log2cosh(x) * GAUSS * math.exp(-x * x / 2)

    expected = 0.25 * coupling_sum_c1(0.8, 2) + integrate.quad(f, -40, 40, epsabs=1e-13)[0]
    assert annealed_bound(p) == pytest.approx(expected, abs=1e-10)


def test_optimize_small_beta_is_insensitive():
    p = ModelParams(sigma=0.8, beta=1e-4, depth=3, field=FieldSpec.point(0.3))
    pp, bound = optimize_parisi(p, 1)
    assert bound == pytest.approx(LOG2 + math.log(math.cosh(0.3)), abs=1e-8)
    assert rsb_bound(p, ParisiParams.one_step(0.5)) == pytest.approx(bound, abs=1e-8)


def test_optimize_rejects_large_k():
    with pytest.raises(ParameterError):
        optimize_parisi(ModelParams(sigma=0.8, beta=1.0, depth=2), 3)


@pytest.mark.parametrize("beta,sigma,depth", [(0.5, 0.6, 3), (2.0, 0.9, 3), (3.0, 0.7, 2)])
def test_k2_not_above_k1(beta, sigma, depth):
    p = ModelParams(sigma=sigma, beta=beta, depth=depth)
    _, b1 = optimize_parisi(p, 1)
    pp2, b2 = optimize_parisi(p, 2)
    assert b2 <= b1 + 1e-8
    assert pp2.levels == 2


def test_optimum_not_above_annealed():
    for beta in (1.0, 2.0, 3.0):
        p = ModelParams(sigma=0.9, beta=beta, depth=3)
        pp, bound = optimize_parisi(p, 1)
        annealed = LOG2 + 0.25 * beta**2 * coupling_sum_c1(0.9, 3)
        if pp.m[1] < 1.0 - 1e-4:
            assert bound < annealed
        else:
            assert bound == pytest.approx(annealed, abs=1e-8)


def test_optimum_is_local_minimum_on_grid():
    p = ModelParams(sigma=0.7, beta=2.5, depth=3)
    pp, bound = optimize_parisi(p, 1)
    for m in np.linspace(1e-3, 1, 41):
        assert bound <= rsb_bound(p, ParisiParams.one_step(m)) + 1e-10


@pytest.fixture(scope="module")
def quenched_estimates():
    out = {}
    for depth in (1, 2, 3):
        p = ModelParams(sigma=0.9, beta=1.0, depth=depth)
        out[depth] = (p, quenched_free_energy(p, 500, seed=3))
    return out


def test_random_ladders_bound_the_estimate(quenched_estimates):
    rng = np.random.default_rng(20261015)
    for depth, (p, est) in quenched_estimates.items():
        floor = est.mean - 3 * est.stderr
        for _ in range(10):
            assert rsb_bound(p, ParisiParams.one_step(rng.uniform(1e-3, 1))) >= floor
            q1 = rng.uniform(0, 1)
            m1, m2 = np.sort(rng.uniform(1e-3, 1, size=2))
            assert rsb_bound(p, ParisiParams.two_step(q1, m1, m2)) >= floor
        assert optimize_parisi(p, 1)[1] >= floor
