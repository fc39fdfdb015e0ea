import math

import pytest
from hypothesis import given, strategies as st

from weyl_tbc.errors import InvariantViolation, OutOfDomain, SchemaError
from weyl_tbc.potentials import (
    Free,
    Harmonic,
    PoschlTeller,
    Shifted,
    Tabulated,
    dump_potential,
    eval_potential,
    load_potential,
    parse_potential,
    wkb_log_derivative,
)

xs_ = st.floats(-30, 30, allow_nan=False)


@given(xs_)
def test_analytic_values(x):
    assert eval_potential(Free(), x) == 0
    assert eval_potential(Harmonic(), x) == pytest.approx(x * x / 4)
    assert eval_potential(PoschlTeller(2), x) == pytest.approx(-6 / math.cosh(x) ** 2)


@given(xs_, st.floats(-5, 5), st.floats(-5, 5))
def test_shift(x, x0, v0):
    s = Shifted(Harmonic(), x0, v0)
    assert eval_potential(s, x) == pytest.approx((x - x0) ** 2 / 4 + v0)


tables = st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=2, max_size=12, unique_by=lambda t: t[0])


@given(tables)
def test_tabulated_interpolates_knots_and_round_trips(pairs):
    pairs = sorted(pairs)
    xs, vs = zip(*pairs)
    if any(b - a < 1e-6 for a, b in zip(xs, xs[1:])):
        return
    t = Tabulated(xs, vs)
    for x, v in pairs:
        assert eval_potential(t, x) == pytest.approx(v)
    assert load_potential(dump_potential(t)) == t


@pytest.mark.parametrize("pot", [Free(), Harmonic(), PoschlTeller(3), Shifted(PoschlTeller(1), 1.0, -0.5)])
def test_round_trip(pot):
    assert load_potential(dump_potential(pot)) == pot


def test_tabulated_rejects_outside_range():
    t = Tabulated((0.0, 1.0), (1.0, 2.0))
    assert eval_potential(t, 0.5) == pytest.approx(1.5)
    with pytest.raises(OutOfDomain):
        eval_potential(t, 1.1)


@pytest.mark.parametrize("cfg,err", [
    ({"kind": "nope"}, SchemaError),
    ({"kind": "free", "colour": 1}, SchemaError),
    ({"kind": "poschl_teller", "ell": 0}, InvariantViolation),
    ({"kind": "poschl_teller", "ell": 1.5}, SchemaError),
    ({"kind": "tabulated", "xs": [0, 1], "vs": [1]}, InvariantViolation),
    ({"kind": "tabulated", "xs": [1, 0], "vs": [1, 2]}, InvariantViolation),
    ({"kind": "shifted"}, SchemaError),
])
def test_parse_errors(cfg, err):
    with pytest.raises(err):
        parse_potential(cfg)


def test_wkb_signs():
    # below V the decaying solution has negative log-derivative going right
    assert wkb_log_derivative(Harmonic(), 0.5, 4.0, "right").real < 0
    assert wkb_log_derivative(Harmonic(), 0.5, -4.0, "left").real > 0
    assert wkb_log_derivative(Free(), -1.0, 0.0, "right") == pytest.approx(-1.0)
