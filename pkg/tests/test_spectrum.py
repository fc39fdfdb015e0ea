import math

import numpy as np
import pytest

from weyl_tbc import spectrum as sp
from weyl_tbc.numerics import integrate_schrodinger
from weyl_tbc.potentials import Free, Harmonic, PoschlTeller
from weyl_tbc.spectrum import (
    Absorbing,
    Dirichlet,
    Robin,
    SpectralProblem,
    Transparent,
    absorbing_spectrum,
    find_spectrum,
    green_identity_check,
    restriction_check,
    tbc_residual,
)


def test_residual_vanishes_at_ground_state():
    r, _ = tbc_residual(SpectralProblem(Harmonic(), -1.0, 2.0), 0.5)
    assert abs(r) <= 1e-8


def test_residual_nonzero_off_spectrum():
    r, _ = tbc_residual(SpectralProblem(Harmonic(), -1.0, 2.0), 1.0)
    assert abs(r) > 1e-3


def test_harmonic_levels(harmonic_spectrum):
    assert [round(p.E, 8) for p in harmonic_spectrum] == [0.5, 1.5, 2.5, 3.5, 4.5, 5.5]
    assert all(p.residual < 1e-6 for p in harmonic_spectrum)


def test_eigenfunctions_match_hermite(harmonic_spectrum):
    # n = 1: x exp(-x^2/4)
    f = harmonic_spectrum[1].eigenfunction
    ref = f.xs * np.exp(-f.xs ** 2 / 4)
    cos = abs(np.vdot(f.phi, ref)) / (np.linalg.norm(f.phi) * np.linalg.norm(ref))
    assert 1 - cos < 1e-10


def test_restriction(harmonic_spectrum):
    prob = SpectralProblem(Harmonic(), -1.0, 2.0)
    for pair in harmonic_spectrum[:3]:
        rep = restriction_check(prob, pair)
        assert rep.passed, rep.messages


def test_poschl_teller_single_level():
    pairs = find_spectrum(SpectralProblem(PoschlTeller(1), -2.0, 2.0), -3.0, -0.01, 150)
    assert len(pairs) == 1 and abs(pairs[0].E + 1) < 1e-8


def test_free_has_no_eigenvalues():
    assert find_spectrum(SpectralProblem(Free(), -1.0, 1.0), -3.0, -0.01, 60) == []


def test_pole_of_tau_is_found():
    # at a- = 0 the odd levels have phi(0) = 0, i.e. tau_- has a pole there
    pairs = find_spectrum(SpectralProblem(Harmonic(), 0.0, 2.0), 0.0, 4.0, 300)
    assert np.allclose([p.E for p in pairs], [0.5, 1.5, 2.5, 3.5], atol=1e-7)


def test_dirichlet_levels_lie_above():
    prob = SpectralProblem(Harmonic(), -1.0, 2.0, Dirichlet(), Dirichlet())
    pairs = find_spectrum(prob, 0.0, 6.0, 300, method="dirichlet")
    assert pairs and pairs[0].E > 0.5
    assert len(pairs) < 6


def test_halfline_odd_levels():
    prob = SpectralProblem.on_halfline(Harmonic(), 2.0)
    assert np.allclose([p.E for p in find_spectrum(prob, 0.0, 6.0, 300)], [1.5, 3.5, 5.5], atol=1e-7)


def test_robin_rule_zero_is_neumann():
    prob = SpectralProblem(Free(), 0.0, math.pi, Robin(0.0), Robin(0.0))
    pairs = find_spectrum(prob, 0.5, 4.5, 200)
    assert np.allclose([p.E for p in pairs], [1.0, 4.0], atol=1e-8)


def test_threads_give_identical_results():
    prob = SpectralProblem(PoschlTeller(1), -2.0, 2.0)
    a = find_spectrum(prob, -3.0, -0.01, 60)
    b = find_spectrum(prob, -3.0, -0.01, 60, workers=4)
    assert [p.E for p in a] == [p.E for p in b]


def test_absorbing_improves_with_width():
    wide = absorbing_spectrum(SpectralProblem(Harmonic(), -6.0, 6.0, Absorbing(), Absorbing()), 0.0, 1.0, 100)
    narrow = absorbing_spectrum(SpectralProblem(Harmonic(), -1.0, 1.0, Absorbing(), Absorbing()), 0.0, 1.0, 100)
    assert abs(wide[0].E - 0.5) < abs(narrow[0].E - 0.5)


def test_invalid_problems():
    with pytest.raises(ValueError):
        SpectralProblem(Free(), 1.0, 0.0)
    with pytest.raises(ValueError):
        SpectralProblem(Free(), -1.0, 1.0, halfline=True)
    with pytest.raises(ValueError):
        find_spectrum(SpectralProblem(Free(), 0.0, 1.0), 1.0, 0.0)


def test_green_identity():
    a, b = -1.0, 2.0
    xs = np.linspace(a, b, 401)
    f = integrate_schrodinger(Harmonic(), 1 + 0.5j, a, b, (1.0, 0.3), grid=xs[1:-1])
    g = integrate_schrodinger(Harmonic(), 2 - 1j, a, b, (0.2, 1.0), grid=xs[1:-1])
    assert green_identity_check(Harmonic(), (a, b), f, g) < 1e-6


def test_left_sign_mutation_breaks_spectrum(monkeypatch):
    """Flipping the left trace sign must be caught by the oscillator check."""
    def wrong_launch(tau_m, pole_m):
        if pole_m:
            return (0j, 1 + 0j)
        n = math.sqrt(1 + abs(tau_m) ** 2)
        return (1 / n, tau_m / n)

    monkeypatch.setattr(sp, "_launch", wrong_launch)
    rule = Transparent(method="parabolic_cylinder")
    pairs = find_spectrum(SpectralProblem(Harmonic(), -1.0, 2.0, rule, rule), 0.0, 6.0, 200)
    levels = [p.E for p in pairs]
    assert len(levels) != 6 or max(abs(e - (n + 0.5)) for n, e in enumerate(levels)) > 1e-6
