"""End-to-end acceptance checks.

Each check reproduces one headline result (oscillator and Poschl-Teller
spectra, Weyl-function cross validation, the compressed resolvent, ...)
at a fixed tolerance and returns a :class:`CheckResult`.  Used both by
``weyl-tbc verify`` and by ``tests/test_acceptance.py``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .numerics import find_root_bracketed, sqrt_branch
from .potentials import Free, Harmonic, PoschlTeller
from .resolvent import SourceTerm, regular_point_scan, solve_tbc_bvp, truncated_domain_oracle
from .spectrum import Absorbing, SpectralProblem, Transparent, absorbing_spectrum, find_spectrum
from .weyl import (
    asymptotic_m,
    herglotz_sample_check,
    parabolic_cylinder_U,
    rgamma,
    weyl_free,
    weyl_harmonic,
    weyl_numeric,
    weyl_poschl_teller,
)

HARMONIC_LEVELS = [n + 0.5 for n in range(6)]


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: str
    expected: str
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        return f"[{state}] {self.name}: measured {self.measured}; expected {self.expected} ({self.seconds:.1f}s)"


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _max_level_error(eigs, levels=HARMONIC_LEVELS):
    if len(eigs) != len(levels):
        return math.inf
    return max(abs(e - l) for e, l in zip(eigs, levels))


def _harmonic_transparent(a_minus, a_plus):
    rule = Transparent(method="parabolic_cylinder")
    return SpectralProblem(Harmonic(), a_minus, a_plus, rule, rule)


@_timed
def check_harmonic_spectrum() -> CheckResult:
    """Oscillator on (-1, 2), window [0, 6]: six levels n + 1/2 within 1e-6 in under 30 s."""
    t0 = time.perf_counter()
    eigs = [p.E for p in find_spectrum(_harmonic_transparent(-1.0, 2.0), 0.0, 6.0, 600)]
    elapsed = time.perf_counter() - t0
    err = _max_level_error(eigs)
    ok = err <= 1e-6 and elapsed <= 30.0
    return CheckResult("1 harmonic spectrum on (-1,2)", ok,
                       f"{len(eigs)} levels, max |dE| = {err:.2e}, {elapsed:.1f}s",
                       "6 levels n+1/2, |dE| <= 1e-6, <= 30s", details={"eigenvalues": eigs})


@_timed
def check_interval_independence() -> CheckResult:
    """Same six oscillator levels on (-0.3, 0.5)."""
    eigs = [p.E for p in find_spectrum(_harmonic_transparent(-0.3, 0.5), 0.0, 6.0, 600)]
    err = _max_level_error(eigs)
    return CheckResult("2 harmonic interval independence (-0.3,0.5)", err <= 1e-6,
                       f"{len(eigs)} levels, max |dE| = {err:.2e}", "6 levels n+1/2, |dE| <= 1e-6",
                       details={"eigenvalues": eigs})


@_timed
def check_poschl_teller() -> CheckResult:
    """Poschl-Teller on (-2, 2): single level -1 (closed form 1e-8, numeric 1e-6), eigenfunction ~ sech."""
    pt = PoschlTeller(1)
    closed = find_spectrum(SpectralProblem(pt, -2.0, 2.0), -3.0, -0.01, 200)
    num_rule = Transparent(method="numeric")
    numeric = find_spectrum(SpectralProblem(pt, -2.0, 2.0, num_rule, num_rule), -3.0, -0.01, 200)
    err_c = abs(closed[0].E + 1) if len(closed) == 1 else math.inf
    err_n = abs(numeric[0].E + 1) if len(numeric) == 1 else math.inf
    cos_sim = 0.0
    if len(closed) == 1:
        f = closed[0].eigenfunction
        s = 1 / np.cosh(f.xs)
        cos_sim = abs(np.vdot(f.phi, s)) / (np.linalg.norm(f.phi) * np.linalg.norm(s))
    ok = err_c <= 1e-8 and err_n <= 1e-6 and cos_sim >= 1 - 1e-8
    return CheckResult("3 poschl-teller single level", ok,
                       f"closed |E+1| = {err_c:.2e} ({len(closed)} level), numeric |E+1| = {err_n:.2e} "
                       f"({len(numeric)} level), 1 - cos = {1 - cos_sim:.2e}",
                       "one level; 1e-8 closed, 1e-6 numeric; 1 - cos <= 1e-8")


def _harmonic_poles(side, anchor, lo, hi, n=400):
    """Real poles of the oscillator m-function at ``anchor`` inside ``[lo, hi]``."""
    grid = np.linspace(lo, hi, n)

    def inv(E):
        return weyl_harmonic(E, side, anchor).inverse.real

    vals = [inv(E) for E in grid]
    poles = []
    for e0, e1, w0, w1 in zip(grid, grid[1:], vals, vals[1:]):
        if w0 * w1 < 0 and min(abs(w0), abs(w1)) < 1:
            poles.append(find_root_bracketed(inv, e0, e1))
    return poles


@_timed
def check_weyl_cross_validation() -> CheckResult:
    """Numeric m against the closed forms (Poschl-Teller, 1e-7) and the parabolic-cylinder values (oscillator, 1e-6)."""
    pt = PoschlTeller(1)
    real_pts = list(np.linspace(-3.0, -0.1, 10))
    complex_pts = [complex(re, im) for re in (-2.0, -0.5, 0.5, 1.5, 3.0) for im in (0.5, 2.0)]
    worst_pt = 0.0
    for lam in real_pts + complex_pts:
        for side, anchor in (("right", 1.0), ("left", -1.0)):
            num = weyl_numeric(pt, side, anchor, lam).m
            ref = weyl_poschl_teller(lam, side, anchor).m
            worst_pt = max(worst_pt, abs(num - ref))
    worst_h = 0.0
    used = 0
    for side, anchor in (("right", 1.0), ("left", -1.0)):
        poles = _harmonic_poles(side, anchor, -2.0, 5.0)
        for E in np.linspace(-2.0, 5.0, 20):
            if any(abs(E - p) < 1e-2 for p in poles):
                continue
            used += 1
            worst_h = max(worst_h, abs(weyl_numeric(Harmonic(), side, anchor, E).m
                                       - weyl_harmonic(E, side, anchor).m))
    ok = worst_pt <= 1e-7 and worst_h <= 1e-6
    return CheckResult("4 weyl cross-validation", ok,
                       f"poschl-teller max diff {worst_pt:.2e} (40 evals), harmonic max diff {worst_h:.2e} "
                       f"({used} evals)", "<= 1e-7 and <= 1e-6")


@_timed
def check_asymptotic_expansion() -> CheckResult:
    """Oscillator at a+ = 2, lam = iT: |m - asymptotic| |lam| bounded and non-increasing; sqrt scaling to V(a+)/2."""
    v = 1.0
    scaled = []
    second = []
    for T in (1e2, 1e3, 1e4):
        lam = 1j * T
        m = weyl_numeric(Harmonic(), "right", 2.0, lam).m
        scaled.append(abs(m - asymptotic_m(lam, v)) * abs(lam))
        second.append(abs(m - 1j * sqrt_branch(lam)) * math.sqrt(abs(lam)))
    bounded = all(math.isfinite(s) for s in scaled) and max(scaled) <= 10 * scaled[0]
    non_increasing = scaled[1] <= scaled[0] and scaled[2] <= scaled[1]
    limit_ok = abs(second[-1] - v / 2) <= 0.2 * (v / 2)
    ok = bounded and non_increasing and limit_ok
    return CheckResult("5 asymptotic expansion at a+=2", ok,
                       f"|m-asym||lam| = {', '.join(f'{s:.5f}' for s in scaled)} "
                       f"(bounded={bounded}, non-increasing={non_increasing}); "
                       f"|m-i sqrt(lam)| sqrt|lam| at 1e4 = {second[-1]:.4f}",
                       "bounded and non-increasing; 0.5 within 20%",
                       details={"scaled": scaled, "second": second, "bounded": bounded,
                                "non_increasing": non_increasing, "limit_ok": limit_ok})


@_timed
def check_compressed_resolvent() -> CheckResult:
    """Free (0,1), lam=-1, g=1 against the closed form (1e-8); oscillator, lam=i, Gaussian against the FD oracle (1e-4)."""
    g = SourceTerm.constant(0.0, 1.0, 1.0, 401)
    sol = solve_tbc_bvp(Free(), 0.0, 1.0, -1.0, g)
    exact = 1 - (np.exp(-g.xs) + np.exp(-(1 - g.xs))) / 2
    err_free = float(np.max(np.abs(sol.path.phi - exact)))
    g2 = SourceTerm.gaussian(-1.0, 2.0, 0.0, 1.0, 1.0, 601)
    sol2 = solve_tbc_bvp(Harmonic(), -1.0, 2.0, 1j, g2)
    oracle = truncated_domain_oracle(Harmonic(), 1j, g2, 12.0, 24001)
    err_h = float(np.max(np.abs(sol2.path.phi - oracle.phi)))
    ok = err_free <= 1e-8 and err_h <= 1e-4
    return CheckResult("6 compressed resolvent", ok,
                       f"free sup error {err_free:.2e}, harmonic vs oracle {err_h:.2e}", "<= 1e-8 and <= 1e-4")


@_timed
def check_regularity_duality() -> CheckResult:
    """Wronskian dips of the TBC pair coincide with the spectrum of the oscillator on (-1,2)."""
    eigs = [p.E for p in find_spectrum(_harmonic_transparent(-1.0, 2.0), 0.0, 6.0, 600)]
    grid = list(np.linspace(0.0, 6.0, 241)[1:-1] + 0.0123)
    lams = sorted(grid + eigs)
    scan = regular_point_scan(Harmonic(), -1.0, 2.0, lams)
    dips = [lam for lam, w in scan if w < 1e-6]
    extra = [d for d in dips if not any(abs(d - e) <= 1e-5 for e in eigs)]
    missing = [e for e in eigs if not any(abs(d - e) <= 1e-5 for d in dips)]
    ok = not extra and not missing and len(eigs) == 6
    return CheckResult("7 regular points vs spectrum", ok,
                       f"{len(dips)} dips, extra {extra}, missing {missing}",
                       "dips exactly at the 6 eigenvalues (radius 1e-5)")


@_timed
def check_herglotz() -> CheckResult:
    """Im m >= -1e-8 and conjugate symmetry on a 10x10 upper half-plane grid."""
    lams = [complex(re, im) for re in np.linspace(-5, 5, 10) for im in np.linspace(0.1, 10, 10)]
    evaluators = {
        "free": weyl_free,
        "poschl-teller right": lambda l: weyl_poschl_teller(l, "right", 0.5),
        "poschl-teller left": lambda l: weyl_poschl_teller(l, "left", -0.5),
        "harmonic numeric right": lambda l: weyl_numeric(Harmonic(), "right", 0.5, l),
        "harmonic numeric left": lambda l: weyl_numeric(Harmonic(), "left", -0.5, l),
    }
    reports = {k: herglotz_sample_check(f, lams) for k, f in evaluators.items()}
    ok = all(r.passed for r in reports.values())
    worst_im = min(r.min_im for r in reports.values())
    worst_conj = max(r.max_conj_defect for r in reports.values())
    return CheckResult("8 herglotz structure", ok, f"min Im m = {worst_im:.3e}, max conj defect = {worst_conj:.2e}",
                       "Im m >= -1e-8, conj defect <= 1e-8")


def _wronskian_reflected(E, x):
    u, du = parabolic_cylinder_U(E, x)
    v, dv = parabolic_cylinder_U(E, -x)
    # W(U(x), U(-x)) with d/dx U(-x) = -U'(-x)
    return u * (-dv) - du * v


@_timed
def check_parabolic_cylinder() -> CheckResult:
    """W(U(0,.), U(0,-.)) = sqrt 2; Gamma identity at E = 0, 0.25; zero at E = 1/2."""
    w0 = [abs(_wronskian_reflected(0.0, x) - math.sqrt(2)) for x in (0.0, 0.5, 1.0)]
    gam = [abs(_wronskian_reflected(E, 0.5) - math.sqrt(2 * math.pi) * rgamma(0.5 - E)) for E in (0.0, 0.25)]
    zero = abs(_wronskian_reflected(0.5, 0.5))
    ok = max(w0) <= 1e-6 and max(gam) <= 1e-6 and zero <= 1e-6
    return CheckResult("9 parabolic-cylinder wronskian", ok,
                       f"|W - sqrt2| max {max(w0):.2e}, gamma identity max {max(gam):.2e}, |W(E=1/2)| = {zero:.2e}",
                       "all <= 1e-6")


@_timed
def check_absorbing_vs_transparent() -> CheckResult:
    """Absorbing-condition ground state is closer to 1/2 on (-6,6) than on (-1,1)."""
    offsets = {}
    for a in (6.0, 1.0):
        pairs = absorbing_spectrum(SpectralProblem(Harmonic(), -a, a, Absorbing(), Absorbing()), 0.0, 2.0, 200)
        offsets[a] = abs(pairs[0].E - 0.5) if pairs else math.inf
    ok = offsets[6.0] < offsets[1.0]
    return CheckResult("10 absorbing vs transparent", ok,
                       f"offset (-6,6) = {offsets[6.0]:.2e}, offset (-1,1) = {offsets[1.0]:.2e}",
                       "offset(-6,6) < offset(-1,1)")


CHECKS: dict[str, Callable[[], CheckResult]] = {
    "harmonic_spectrum": check_harmonic_spectrum,
    "harmonic_interval_independence": check_interval_independence,
    "poschl_teller_spectrum": check_poschl_teller,
    "weyl_cross_validation_poschl_harmonic": check_weyl_cross_validation,
    "asymptotic_expansion_harmonic": check_asymptotic_expansion,
    "compressed_resolvent_free_harmonic": check_compressed_resolvent,
    "regularity_duality_harmonic": check_regularity_duality,
    "herglotz_free_poschl_harmonic": check_herglotz,
    "parabolic_cylinder_wronskian_harmonic": check_parabolic_cylinder,
    "absorbing_vs_transparent_harmonic": check_absorbing_vs_transparent,
}


def run_checks(filter_substr: str | None = None, echo: Callable[[str], None] | None = print) -> list[CheckResult]:
    results = []
    for key, fn in CHECKS.items():
        if filter_substr and filter_substr.lower() not in key:
            continue
        res = fn()
        results.append(res)
        if echo is not None:
            echo(res.line())
    return results
