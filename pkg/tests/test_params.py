import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from hierspin.errors import DivergentSeriesError, ParameterError
from hierspin.params import INF, FieldSpec, ModelParams, coupling_sum_c1, coupling_sum_c2, validate

mp.mp.dps = 30


def c1_partial(sigma, depth):
    s = mp.mpf(str(sigma))
    return mp.fsum(mp.power(2, l * (1 - 2 * s)) for l in range(1, depth + 1))


def c2_partial(sigma, depth):
    s = mp.mpf(str(sigma))
    return mp.fsum(mp.power(2, -2 * l * s) for l in range(1, depth + 1))


def test_c1_sigma_one_infinite_is_one():
    assert coupling_sum_c1(1.0, INF) == pytest.approx(1.0, abs=1e-15)


def test_c1_single_term():
    assert coupling_sum_c1(0.75, 1) == pytest.approx(0.7071067812, abs=1e-10)


def test_c1_closed_form_matches_partial_sums():
    # high-precision partial sum to depth 200 and the closed form agree
    closed = 1 / (mp.power(2, mp.mpf("0.8")) - 1)
    assert abs(c1_partial(0.9, 200) - closed) < mp.mpf("1e-25")
    assert coupling_sum_c1(0.9, INF) == pytest.approx(1.3493435161787268, rel=1e-14)


def test_c2_examples():
    assert coupling_sum_c2(0.5, INF) == pytest.approx(1.0, rel=1e-15)
    assert coupling_sum_c2(1.0, 2) == 0.3125
    closed = 1 / (mp.power(2, mp.mpf("1.8")) - 1)
    assert abs(c2_partial(0.9, 200) - closed) < mp.mpf("1e-25")
    assert coupling_sum_c2(0.9, INF) == pytest.approx(0.40286805747479604, rel=1e-14)


@pytest.mark.parametrize("sigma", [0.6, 0.75, 0.9, 1.0, 1.5])
def test_finite_sums_match_high_precision(sigma):
    for depth in (1, 3, 12, 40):
        assert coupling_sum_c1(sigma, depth) == pytest.approx(float(c1_partial(sigma, depth)), rel=1e-14)
        assert coupling_sum_c2(sigma, depth) == pytest.approx(float(c2_partial(sigma, depth)), rel=1e-14)


def test_c1_divergent_at_infinite_depth():
    with pytest.raises(DivergentSeriesError):
        coupling_sum_c1(0.5, INF)
    with pytest.raises(DivergentSeriesError):
        coupling_sum_c1(0.3, INF)
    # finite depth is fine for any positive sigma
    assert coupling_sum_c1(0.3, 5) > 5


def test_c2_converges_for_small_sigma():
    assert coupling_sum_c2(0.1, INF) == pytest.approx(1 / (2**0.2 - 1))


@pytest.mark.parametrize("sigma", [0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0])
def test_c1_converges_by_depth_200(sigma):
    # the gap is exactly the geometric tail beyond level 200
    r = 2.0 ** (1.0 - 2.0 * sigma)
    tail = r**201 / (1.0 - r)
    gap = coupling_sum_c1(sigma, INF) - coupling_sum_c1(sigma, 200)
    assert gap == pytest.approx(tail, rel=1e-3, abs=1e-14)
    if sigma >= 0.65:
        assert abs(gap) < 1e-12


@given(st.floats(0.55, 2.0), st.integers(1, 60))
def test_c1_increasing_in_depth(sigma, depth):
    # the next term must still be resolvable in double precision
    assume((depth + 1) * (2 * sigma - 1) < 40)
    assert coupling_sum_c1(sigma, depth + 1) > coupling_sum_c1(sigma, depth)
    assert coupling_sum_c1(sigma, depth) < coupling_sum_c1(sigma, INF)


@given(st.floats(0.2, 2.0), st.floats(0.001, 0.5), st.integers(1, 40))
def test_sums_decreasing_in_sigma(sigma, step, depth):
    assert coupling_sum_c1(sigma + step, depth) < coupling_sum_c1(sigma, depth)
    assert coupling_sum_c2(sigma + step, depth) < coupling_sum_c2(sigma, depth)


def test_c1_exceeds_c2_on_grid():
    for sigma in np.linspace(0.5, 1.0, 101)[1:]:
        assert coupling_sum_c1(sigma, INF) - coupling_sum_c2(sigma, INF) > 0


def test_validate_ok():
    validate(ModelParams(sigma=0.9, beta=1.0, depth=3), needs_limit=True)


def test_validate_sigma_limit():
    with pytest.raises(ParameterError, match="sigma must exceed 1/2"):
        validate(ModelParams(sigma=0.4, beta=1.0, depth=3), needs_limit=True)
    validate(ModelParams(sigma=0.4, beta=1.0, depth=3), needs_limit=False)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(sigma=0.9, beta=-1.0, depth=3),
        dict(sigma=0.9, beta=1.0, depth=0),
        dict(sigma=0.9, beta=1.0, depth=2.5),
        dict(sigma=-0.1, beta=1.0, depth=3),
        dict(sigma=0.9, beta=1.0, depth=3, j_coupling=-1.0),
    ],
)
def test_validate_rejects(kwargs):
    with pytest.raises(ParameterError):
        validate(ModelParams(**kwargs))


def test_infinite_depth_requires_limit():
    with pytest.raises(ParameterError):
        validate(ModelParams(sigma=0.5, beta=1.0, depth=INF))


def test_field_spec():
    f = FieldSpec("point", 0.3, 5.0)
    assert f.is_point and f.effective_std == 0.0
    g = FieldSpec.gaussian(0.0, 0.5)
    assert not g.is_point and g.effective_std == 0.5
    with pytest.raises(ParameterError):
        FieldSpec("uniform")
    with pytest.raises(ParameterError):
        FieldSpec.gaussian(0.0, -1.0)
