import numpy as np
import pytest

from weyl_tbc.errors import GridMismatch, NotRegularPoint
from weyl_tbc.potentials import Free, Harmonic, PoschlTeller
from weyl_tbc.resolvent import SourceTerm, regular_point_scan, solve_tbc_bvp, truncated_domain_oracle


def test_free_closed_form():
    g = SourceTerm.constant(0.0, 1.0, 1.0, 201)
    sol = solve_tbc_bvp(Free(), 0.0, 1.0, -1.0, g)
    exact = 1 - (np.exp(-g.xs) + np.exp(-(1 - g.xs))) / 2
    assert np.max(np.abs(sol.path.phi - exact)) < 1e-8
    assert sol.path.phi[0] == pytest.approx((1 - np.exp(-1)) / 2)
    assert sol.left_residual < 1e-8 and sol.right_residual < 1e-8


def test_zero_source_gives_zero():
    g = SourceTerm(np.linspace(0, 1, 50), np.zeros(50))
    assert np.all(solve_tbc_bvp(Free(), 0.0, 1.0, 2j, g).path.phi == 0)


def test_linearity():
    g1 = SourceTerm.gaussian(-1, 2, 0.0, 0.5, 1.0, 301)
    g2 = SourceTerm.constant(-1, 2, 2.0 - 1j, 301)
    g3 = SourceTerm(g1.xs, g1.values + 3 * g2.values)
    lam = 0.7 + 0.4j
    s1, s2, s3 = (solve_tbc_bvp(Harmonic(), -1, 2, lam, g).path.phi for g in (g1, g2, g3))
    assert np.allclose(s3, s1 + 3 * s2, atol=1e-10)


@pytest.mark.parametrize("pot,lam", [(Harmonic(), 1j), (PoschlTeller(1), -0.5 + 0.5j), (Free(), 2 + 1j)])
def test_against_oracle(pot, lam):
    g = SourceTerm.gaussian(-1.0, 2.0, 0.3, 0.8, 1.0, 301)
    sol = solve_tbc_bvp(pot, -1.0, 2.0, lam, g)
    ref = truncated_domain_oracle(pot, lam, g, 14.0 if not isinstance(pot, Harmonic) else 12.0, 24001)
    assert np.max(np.abs(sol.path.phi - ref.phi)) < 1e-4


def test_eigenvalue_is_not_regular():
    g = SourceTerm.constant(-1.0, 2.0)
    with pytest.raises(NotRegularPoint):
        solve_tbc_bvp(Harmonic(), -1.0, 2.0, 0.5, g)


def test_regular_scan_dips_at_bound_state():
    scan = dict(regular_point_scan(PoschlTeller(1), -2.0, 2.0, [-1.5, -1.0, -0.5]))
    assert scan[-1.0] < 1e-8 < scan[-1.5] and scan[-0.5] > 1e-8


def test_grid_must_span_interval():
    with pytest.raises(GridMismatch):
        solve_tbc_bvp(Free(), 0.0, 2.0, -1.0, SourceTerm.constant(0.0, 1.0))


def test_source_validation():
    with pytest.raises(ValueError):
        SourceTerm(np.linspace(0, 1, 5), np.ones(5))
    with pytest.raises(GridMismatch):
        SourceTerm(np.linspace(0, 1, 20), np.ones(19))
