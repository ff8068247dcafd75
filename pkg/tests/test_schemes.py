import pytest
from hypothesis import given
from hypothesis import strategies as st

from catsim.schemes import (
    SchemeConfig,
    SchemeKind,
    cat_probability,
    clamp_sinr,
    decide,
    pcat_probability,
    pcat_z,
    periodic_decide,
    sample_decision,
)

CFG = SchemeConfig()
sinr_st = st.floats(-30, 60, allow_nan=False)
dt_st = st.floats(0, 300, allow_nan=False)


def test_defaults_match_parameter_table():
    assert (CFG.t_min, CFG.t_max, CFG.alpha, CFG.gamma, CFG.tau, CFG.sinr_max, CFG.period) == (
        30, 120, 6, 2, 10, 30, 30
    )


@pytest.mark.parametrize("kw", [dict(t_min=0), dict(t_min=50, t_max=40), dict(alpha=0), dict(tau=-1)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SchemeConfig(**kw)


@pytest.mark.parametrize("s, expected", [(-3, 0), (35, 30), (15, 15)])
def test_clamp(s, expected):
    assert clamp_sinr(s, 30) == expected


def test_cat_branches():
    assert cat_probability(15, 10, 1, CFG) == 0.0
    assert cat_probability(15, 120, 1, CFG) == 1.0
    assert cat_probability(15, 60, 1, CFG) == 0.015625
    assert cat_probability(30, 60, 1, CFG) == 1.0
    assert cat_probability(-5, 60, 1, CFG) == 0.0


@given(sinr_st, dt_st, st.floats(0.01, 50))
def test_cat_in_unit_interval(s, dt, z):
    p = cat_probability(s, dt, z, CFG)
    assert 0.0 <= p <= 1.0
    if dt < CFG.t_min:
        assert p == 0.0
    if dt >= CFG.t_max:
        assert p == 1.0


@given(sinr_st, sinr_st, st.floats(30, 119.99), st.floats(0.01, 50))
def test_cat_monotone_in_sinr(a, b, dt, z):
    lo, hi = sorted((a, b))
    assert cat_probability(lo, dt, z, CFG) <= cat_probability(hi, dt, z, CFG)


@pytest.mark.parametrize(
    "sinr, delta, expected",
    [(15, 5, 5.0), (15, -5, 0.2), (15, 0, 1.0), (29, 0.1, 1.0)],
)
def test_pcat_z_examples(sinr, delta, expected):
    assert pcat_z(sinr, delta, CFG) == pytest.approx(expected, rel=1e-12)


@given(st.floats(0, 30), st.floats(-60, 60))
def test_pcat_z_sign_property(s, delta):
    z = pcat_z(s, delta, CFG)
    if delta >= 0:
        assert z >= 1
    else:
        assert 0 < z <= 1


@given(st.floats(0, 60))
def test_pcat_z_at_sinr_max(delta):
    assert pcat_z(30, delta, CFG) == 1.0


def test_pcat_probability_examples():
    p, z, d = pcat_probability(15, 60, 20, CFG)
    assert (z, d) == (5.0, 5.0)
    assert p == pytest.approx(0.5**30, rel=1e-12)
    p, z, d = pcat_probability(15, 60, 10, CFG)
    assert z == pytest.approx(0.2, rel=1e-12)
    assert p == pytest.approx(0.5**1.2, rel=1e-12)
    assert p == pytest.approx(0.4353, abs=5e-5)


def test_pcat_delta_uses_raw_db():
    _, z, d = pcat_probability(-4, 60, -1, CFG)
    assert d == 3
    # clamped sinr 0 -> (1 - 0/30) factor is 1
    assert z == 6.0


@given(sinr_st, dt_st)
def test_flat_prediction_reduces_to_cat(s, dt):
    p, z, _ = pcat_probability(s, dt, s, CFG)
    assert z == 1.0
    assert p == cat_probability(s, dt, 1.0, CFG)


@given(st.floats(-10, 40), st.floats(-20, 20), st.floats(30, 119))
def test_pcat_vs_cat_ordering(s, delta, dt):
    p_cat = cat_probability(s, dt, 1.0, CFG)
    p, _, _ = pcat_probability(s, dt, s + delta, CFG)
    if delta >= 0:
        assert p <= p_cat
    else:
        assert p >= p_cat


def test_periodic():
    assert not periodic_decide(29, CFG).transmit
    assert periodic_decide(30, CFG).transmit
    assert periodic_decide(30, CFG).probability == 1.0
    assert decide(SchemeKind.PERIODIC, -20, 45, CFG, 0.99) == decide(SchemeKind.PERIODIC, 40, 45, CFG, 0.0)


def test_sample_decision():
    assert sample_decision(1.0, 0.999999)
    assert not sample_decision(0.0, 0.0)
    assert sample_decision(0.5, 0.4999)
    assert not sample_decision(0.5, 0.5)
    with pytest.raises(ValueError):
        sample_decision(1.5, 0.1)
    with pytest.raises(ValueError):
        sample_decision(-0.1, 0.1)


def test_decide_pcat_needs_prediction():
    with pytest.raises(ValueError):
        decide("pcat", 10, 60, CFG, 0.5)
    d = decide("pcat", 15, 60, CFG, 0.3, predicted_mean=10)
    assert d.transmit and d.z_value == pytest.approx(0.2) and d.delta_sinr == -5
