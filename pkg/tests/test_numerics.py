import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from weyl_tbc.errors import LengthMismatch, NoSignChange
from weyl_tbc.numerics import (
    SolutionPath,
    Tolerances,
    cumulative_quadrature,
    find_root_bracketed,
    integrate_riccati,
    integrate_schrodinger,
    quadrature,
    scan_sign_changes,
    sqrt_branch,
)
from weyl_tbc.potentials import Free, Harmonic


finite = st.floats(-50, 50, allow_nan=False)


@given(finite, st.floats(1e-6, 50))
def test_sqrt_branch_upper_half_plane(re, im):
    r = sqrt_branch(complex(re, im))
    assert r.imag >= 0
    assert abs(r * r - complex(re, im)) <= 1e-12 * (1 + abs(complex(re, im)))


@given(st.floats(0, 1e6))
def test_sqrt_branch_on_cut_is_upper_limit(x):
    assert sqrt_branch(x) == pytest.approx(math.sqrt(x))
    assert sqrt_branch(-x).imag == pytest.approx(math.sqrt(x))


def test_tolerances_validation():
    with pytest.raises(ValueError):
        Tolerances(rel=0)
    with pytest.raises(ValueError):
        Tolerances(max_steps=0)
    assert Tolerances().scaled(10).rel == pytest.approx(1e-9)


def test_solution_path_rejects_non_monotone():
    with pytest.raises(ValueError):
        SolutionPath(np.array([0.0, 1.0, 0.5]), np.zeros(3), np.zeros(3))


def test_free_oscillation_matches_cosine():
    # -phi'' = phi -> cos
    path = integrate_schrodinger(Free(), 1.0, 0.0, 10.0, (1.0, 0.0))
    assert abs(path.end[0] - math.cos(10)) < 1e-9
    assert abs(path.end[1] + math.sin(10)) < 1e-9


def test_grid_output_holds_exactly_requested_points():
    grid = np.linspace(0, 1, 11)[1:-1]
    path = integrate_schrodinger(Free(), -1.0, 0.0, 1.0, (1.0, 1.0), grid=grid)
    assert np.allclose(path.xs, np.linspace(0, 1, 11))
    assert np.allclose(path.phi, np.exp(path.xs), atol=1e-10)


def test_backward_integration_and_complex_lambda():
    lam = 2 + 1j
    k = np.sqrt(lam)
    path = integrate_schrodinger(Free(), lam, 3.0, -1.0, (np.exp(1j * k * 3), 1j * k * np.exp(1j * k * 3)))
    assert abs(path.end[0] - np.exp(-1j * k)) < 1e-8


def test_ground_state_is_invariant_under_flow():
    # phi = exp(-x^2/4) solves the oscillator at E = 1/2
    p = integrate_schrodinger(Harmonic(), 0.5, 0.0, 3.0, (1.0, 0.0))
    assert abs(p.end[0] - math.exp(-9 / 4)) < 1e-9


def test_riccati_crosses_poles():
    # free, lam = 1, m(0) = 0 -> m(x) = -tan x crosses a pole at pi/2
    m = integrate_riccati(Free(), 1.0, 0.0, 2.0, 0.0)
    assert abs(m + math.tan(2.0)) < 1e-8


def test_root_finder_and_scan():
    grid = np.linspace(0, 10, 101)
    brackets = scan_sign_changes(math.sin, grid)
    roots = [find_root_bracketed(math.sin, a, b) for a, b in brackets]
    assert np.allclose(roots, [math.pi, 2 * math.pi, 3 * math.pi], atol=1e-11)
    with pytest.raises(NoSignChange):
        find_root_bracketed(math.cos, 0.0, 1.0)


def test_scan_skips_non_finite():
    grid = [0.0, 1.0, 2.0]
    assert scan_sign_changes(None, grid, [-1.0, math.nan, 1.0]) == []


def test_quadrature():
    xs = np.linspace(0, math.pi, 201)
    assert abs(quadrature(xs, np.sin(xs)) - 2) < 1e-8
    cum = cumulative_quadrature(xs, np.exp(1j * xs))
    assert np.allclose(cum, (np.exp(1j * xs) - 1) / 1j, atol=1e-7)
    with pytest.raises(LengthMismatch):
        quadrature([0, 1], [1, 2, 3])
