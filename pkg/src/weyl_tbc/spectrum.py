"""Finite-interval eigenproblems with energy-dependent boundary conditions.

The left condition ``phi'(a-) + tau_-(E) phi(a-) = 0`` fixes the launch,
the right condition ``phi'(a+) - tau_+(E) phi(a+) = 0`` is the shooting
mismatch.  With ``tau = m`` (the Weyl coefficients of the two outer
half-lines) the eigenvalues of the interval problem are exactly the
eigenvalues of the whole-line operator.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize as _sp_optimize
from scipy.interpolate import CubicSpline

from .errors import GridMismatch, StepLimitExceeded
from .numerics import (
    DEFAULT_TOL,
    SolutionPath,
    Tolerances,
    find_root_bracketed,
    integrate_schrodinger,
    quadrature,
    scan_sign_changes,
    sqrt_branch,
)
from .potentials import Potential, Side, eval_potential
from .weyl import WeylEvaluation, weyl_m, weyl_solution

__all__ = [
    "Transparent",
    "Absorbing",
    "Dirichlet",
    "Robin",
    "SpectralProblem",
    "Eigenpair",
    "RestrictionReport",
    "tbc_residual",
    "find_spectrum",
    "restriction_check",
    "absorbing_spectrum",
    "green_identity_check",
    "eigenfunction",
]

# A refined bracket is a genuine root only if |R| dropped by this factor
# relative to the bracket ends; a jump of R across a pole of tau also
# flips the sign but leaves |R| comparable to the ends.
ROOT_ACCEPT = 1e-6
EIGENFUNCTION_NODES = 2001


@dataclass(frozen=True)
class Transparent:
    """``tau = m`` of the outer half-line.

    ``source`` may supply the m-evaluator (``E -> WeylEvaluation`` for the
    matching side); otherwise :func:`weyl_m` is used with ``method``.
    """

    source: Callable[[complex], WeylEvaluation] | None = None
    method: str = "auto"

    def tau(self, problem, side, E, tol):
        if self.source is not None:
            ev = self.source(E)
            if isinstance(ev, WeylEvaluation):
                if ev.side != side:
                    raise ValueError(f"m-evaluator for side {ev.side!r} used on side {side!r}")
                return ev.m, ev.pole
            return complex(ev), False
        anchor = problem.a_plus if side == Side.RIGHT else problem.a_minus
        ev = weyl_m(problem.potential, side, anchor, E, self.method, tol)
        return ev.m, ev.pole


@dataclass(frozen=True)
class Absorbing:
    """Second-order absorbing condition ``tau = i sqrt(E - V(a))``."""

    def tau(self, problem, side, E, tol):
        anchor = problem.a_plus if side == Side.RIGHT else problem.a_minus
        return 1j * sqrt_branch(complex(E) - eval_potential(problem.potential, anchor)), False


@dataclass(frozen=True)
class Dirichlet:
    def tau(self, problem, side, E, tol):
        return complex(math.inf), True


@dataclass(frozen=True)
class Robin:
    value: complex = 0.0

    def tau(self, problem, side, E, tol):
        return complex(self.value), False


@dataclass(frozen=True)
class SpectralProblem:
    potential: Potential
    a_minus: float
    a_plus: float
    left: object = field(default_factory=Transparent)
    right: object = field(default_factory=Transparent)
    halfline: bool = False

    def __post_init__(self):
        if not (float(self.a_minus) < float(self.a_plus)):
            raise ValueError(f"empty interval ({self.a_minus}, {self.a_plus})")
        if self.halfline and (self.a_minus != 0 or not isinstance(self.left, Dirichlet)):
            raise ValueError("half-line mode needs a_minus = 0 and a Dirichlet left rule")
        lo, hi = self.potential.domain
        if self.a_minus < lo or self.a_plus > hi:
            raise ValueError("interval leaves the potential's domain")

    @classmethod
    def on_halfline(cls, potential, a_plus, right=None) -> "SpectralProblem":
        """Problem on ``(0, a_plus)`` with a Dirichlet wall at the origin."""
        return cls(potential, 0.0, a_plus, Dirichlet(), right if right is not None else Transparent(), True)

    def taus(self, E, tol=DEFAULT_TOL):
        left = self.left.tau(self, Side.LEFT, E, tol)
        right = self.right.tau(self, Side.RIGHT, E, tol)
        return left, right


@dataclass
class Eigenpair:
    """``residual`` is ``|R(E)|`` divided by ``|(phi, phi')(a+)|`` of the shot solution."""

    E: float
    eigenfunction: SolutionPath
    residual: float
    multiplicity_note: str = ""
    method: str = "transparent"


def _launch(tau_m, pole_m):
    if pole_m:
        return (0j, 1 + 0j)
    n = math.sqrt(1 + abs(tau_m) ** 2)
    return (1 / n, -tau_m / n)


def _mismatch(phi, dphi, tau_p, pole_p):
    if pole_p:
        return phi / math.hypot(abs(phi), abs(dphi))
    return (dphi - tau_p * phi) / math.sqrt(1 + abs(tau_p) ** 2)


def _is_real(z: complex, scale: float = 1.0) -> bool:
    return abs(z.imag) <= 1e-9 * (scale + abs(z.real))


def tbc_residual(problem: SpectralProblem, E: float, tol: Tolerances = DEFAULT_TOL,
                 taus=None, grid=None):
    """Normalised shooting mismatch ``R(E)`` and the launched solution.

    ``R`` is returned as a float when ``E`` and both ``tau`` values are
    real, otherwise as a complex number.
    """
    (tm, pm), (tp, pp) = taus if taus is not None else problem.taus(E, tol)
    init = _launch(tm, pm)
    path = integrate_schrodinger(problem.potential, E, problem.a_minus, problem.a_plus, init, tol, grid=grid)
    phi, dphi = path.end
    r = _mismatch(phi, dphi, tp, pp)
    real = (complex(E).imag == 0 and (pm or _is_real(complex(tm))) and (pp or _is_real(complex(tp))))
    return (float(r.real) if real else complex(r)), path


def _normalise(path: SolutionPath) -> SolutionPath:
    norm = math.sqrt(quadrature(path.xs, np.abs(path.phi) ** 2).real)
    phi0, dphi0 = path.phi[0], path.dphi[0]
    ref = phi0 if abs(phi0) > 1e-8 * max(1.0, abs(dphi0)) else dphi0
    phase = abs(ref) / ref if ref != 0 else 1.0
    c = phase / norm
    phi, dphi = path.phi * c, path.dphi * c
    if np.max(np.abs(phi.imag)) <= 1e-12 * np.max(np.abs(phi)):
        phi, dphi = phi.real + 0j, dphi.real + 0j
    return SolutionPath(path.xs, phi, dphi)


def eigenfunction(problem: SpectralProblem, E: float, tol: Tolerances = DEFAULT_TOL,
                  nodes: int = EIGENFUNCTION_NODES, taus=None) -> tuple[SolutionPath, float | complex]:
    """L2-normalised shooting solution at ``E`` on a uniform grid."""
    grid = np.linspace(problem.a_minus, problem.a_plus, nodes)
    r, path = tbc_residual(problem, E, tol, taus=taus, grid=grid[1:-1])
    return _normalise(path), r


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


def _grid_eval(problem, E, tol):
    taus = problem.taus(E, tol)
    (tm, pm), (tp, pp) = taus
    # only energy-dependent poles split the scan; a Dirichlet rule is a fixed pole
    if (pm and not isinstance(problem.left, Dirichlet)) or (pp and not isinstance(problem.right, Dirichlet)):
        return math.nan, taus
    r, _ = tbc_residual(problem, E, tol, taus=taus)
    if isinstance(r, complex):
        return math.nan, taus
    return r, taus


def _inverse_tau(tau, pole):
    if pole:
        return 0.0
    t = complex(tau)
    return (1 / t).real if t != 0 else math.inf


def _pole_candidates(problem, grid, taus_list, side_index, tol):
    """Real poles of one side's tau inside the grid, located on ``1/tau``."""
    rule = problem.left if side_index == 0 else problem.right
    if isinstance(rule, (Dirichlet, Robin)):
        return []
    side = Side.LEFT if side_index == 0 else Side.RIGHT
    inv = [_inverse_tau(*t[side_index]) for t in taus_list]
    out = []
    for i in range(len(grid) - 1):
        w0, w1 = inv[i], inv[i + 1]
        if not (math.isfinite(w0) and math.isfinite(w1)):
            continue
        if w0 == 0.0:
            out.append(grid[i])
            continue
        if w0 * w1 < 0 and min(abs(w0), abs(w1)) <= 1.0:

            def f(E):
                return _inverse_tau(*rule.tau(problem, side, E, tol))

            try:
                e = find_root_bracketed(f, grid[i], grid[i + 1], tol)
            except Exception:
                continue
            tau, pole = rule.tau(problem, side, e, tol)
            if pole or abs(tau) > 1e6:
                out.append(e)
    return out


def find_spectrum(problem: SpectralProblem, e_lo: float, e_hi: float, grid_n: int = 200,
                  tol: Tolerances = DEFAULT_TOL, workers: int = 1, nodes: int = EIGENFUNCTION_NODES,
                  method: str = "transparent") -> list[Eigenpair]:
    """Eigenvalues of the interval problem in ``[e_lo, e_hi]``.

    Scans ``R(E)`` on a uniform grid, refines each sign change and keeps
    the refined point only if ``|R|`` really vanishes there (a pole of
    ``tau`` also flips the sign of ``R``).  Poles of ``tau`` inside the
    window are tested separately with the Dirichlet reading of the
    condition.  Completeness is relative to the window and the grid.
    """
    if not e_lo < e_hi:
        raise ValueError("need e_lo < e_hi")
    if grid_n < 8:
        raise ValueError("grid_n must be at least 8")
    grid = [float(e) for e in np.linspace(e_lo, e_hi, int(grid_n))]
    evals = _map(lambda E: _grid_eval(problem, E, tol), grid, workers)
    values = [v for v, _ in evals]
    taus_list = [t for _, t in evals]

    def rfun(E):
        r, _ = tbc_residual(problem, E, tol)
        return r.real if isinstance(r, complex) else r

    candidates: list[tuple[float, float]] = []
    at = dict(zip(grid, values))
    for lo, hi in scan_sign_changes(rfun, grid, values):
        try:
            e = find_root_bracketed(rfun, lo, hi, tol)
        except (StepLimitExceeded, ValueError):
            continue
        r, path = tbc_residual(problem, e, tol)
        if abs(r) <= ROOT_ACCEPT * max(abs(at[lo]), abs(at[hi])):
            candidates.append((e, abs(r) / math.hypot(*map(abs, path.end))))
    for i in (0, 1):
        for e in _pole_candidates(problem, grid, taus_list, i, tol):
            r, path = tbc_residual(problem, e, tol)
            r = abs(r) / math.hypot(*map(abs, path.end))
            if math.isfinite(r) and r <= ROOT_ACCEPT:
                candidates.append((e, r))
    # exact zeros on grid points
    for e, v in zip(grid, values):
        if v == 0.0:
            candidates.append((e, 0.0))
    candidates.sort()
    radius = 1e-6 * (e_hi - e_lo)
    merged: list[list] = []
    for e, r in candidates:
        if merged and e - merged[-1][0] <= radius:
            merged[-1][2] += 1
            if r < merged[-1][1]:
                merged[-1][0], merged[-1][1] = e, r
            continue
        merged.append([e, r, 1])
    out = []
    for e, r, count in merged:
        path, _ = eigenfunction(problem, e, tol, nodes)
        note = f"{count} roots merged within {radius:.1e}" if count > 1 else ""
        out.append(Eigenpair(float(e), path, float(r), note, method))
    return out


def absorbing_spectrum(problem: SpectralProblem, e_lo: float, e_hi: float, grid_n: int = 200,
                       tol: Tolerances = DEFAULT_TOL, threshold: float = 1e-2,
                       workers: int = 1, nodes: int = EIGENFUNCTION_NODES) -> list[Eigenpair]:
    """Approximate eigenvalues under absorbing conditions.

    Below ``V(a)`` the residual is real and roots are refined on sign
    changes.  Above it the residual is complex and candidates are local
    minima of ``|R| / |(phi, phi')(a+)|`` (the residual relative to the
    size of the shot solution) that fall below ``threshold``.
    """
    if not (isinstance(problem.left, (Absorbing, Dirichlet)) and isinstance(problem.right, Absorbing)):
        raise ValueError("absorbing_spectrum needs Absorbing boundary rules")
    if not e_lo < e_hi or grid_n < 8:
        raise ValueError("need e_lo < e_hi and grid_n >= 8")
    grid = [float(e) for e in np.linspace(e_lo, e_hi, int(grid_n))]

    def rel(E):
        r, path = tbc_residual(problem, float(E), tol)
        phi, dphi = path.end
        return r, abs(r) / math.hypot(abs(phi), abs(dphi))

    evals = _map(rel, grid, workers)
    real_vals = [r if isinstance(r, float) else math.nan for r, _ in evals]
    mags = [m for _, m in evals]

    def rfun(E):
        r = tbc_residual(problem, E, tol)[0]
        return r if isinstance(r, float) else math.nan

    found: list[tuple[float, float]] = []
    used = set()
    for lo, hi in scan_sign_changes(rfun, grid, real_vals):
        e = find_root_bracketed(rfun, lo, hi, tol)
        m = rel(e)[1]
        if m <= threshold:
            found.append((e, m))
        used.update((lo, hi))
    for i in range(1, len(grid) - 1):
        if grid[i] in used or not (mags[i] <= mags[i - 1] and mags[i] <= mags[i + 1]):
            continue
        res = _sp_optimize.minimize_scalar(lambda E: rel(E)[1] ** 2, bounds=(grid[i - 1], grid[i + 1]),
                                           method="bounded", options={"xatol": 1e-12})
        e = float(res.x)
        m = rel(e)[1]
        if m <= threshold:
            found.append((e, m))
    found.sort()
    out = []
    for e, m in found:
        if out and e - out[-1].E <= 1e-6 * (e_hi - e_lo):
            continue
        path, _ = eigenfunction(problem, e, tol, nodes)
        out.append(Eigenpair(e, path, m, "", "absorbing"))
    return out


@dataclass
class RestrictionReport:
    passed: bool
    jumps: dict
    tail_norms: dict
    extensions: dict
    messages: list

    def __str__(self):
        state = "pass" if self.passed else "FAIL"
        return f"restriction {state}: jumps={self.jumps} tails={self.tail_norms}"


def restriction_check(problem: SpectralProblem, eigenpair: Eigenpair, extension_width: float = 4.0,
                      tol: Tolerances = DEFAULT_TOL, jump_tol: float = 1e-7, n: int = 801) -> RestrictionReport:
    """Check that an eigenfunction continues as a square-integrable solution.

    Each side is extended by the decaying Weyl solution matched at the
    endpoint; the value and derivative jumps must be tiny and the tail
    must shrink with distance.  Failures are reported, not raised.
    """
    if not (isinstance(problem.left, Transparent) and isinstance(problem.right, Transparent)):
        raise ValueError("restriction_check applies to transparent boundary rules only")
    f = eigenpair.eigenfunction
    ends = {Side.LEFT: (problem.a_minus, complex(f.phi[0]), complex(f.dphi[0])),
            Side.RIGHT: (problem.a_plus, complex(f.phi[-1]), complex(f.dphi[-1]))}
    jumps, tails, exts, msgs = {}, {}, {}, []
    ok = True
    for side, (a, phi, dphi) in ends.items():
        psi = weyl_solution(problem.potential, side, a, eigenpair.E, extension_width, n, tol)
        p0, d0 = complex(psi.phi[0]), complex(psi.dphi[0])
        c = (phi * p0.conjugate() + dphi * d0.conjugate()) / (abs(p0) ** 2 + abs(d0) ** 2)
        scale = max(math.hypot(abs(phi), abs(dphi)), 1e-300)
        j0 = abs(phi - c * p0) / scale
        j1 = abs(dphi - c * d0) / scale
        ext = psi.scaled(c)
        exts[side] = ext
        jumps[side] = (j0, j1)
        half = len(ext.xs) // 2
        xs = np.abs(ext.xs - a)
        inner = math.sqrt(quadrature(xs[: half + 1], np.abs(ext.phi[: half + 1]) ** 2).real)
        outer = math.sqrt(quadrature(xs[half:], np.abs(ext.phi[half:]) ** 2).real)
        tails[side] = (inner, outer)
        if max(j0, j1) > jump_tol:
            ok = False
            msgs.append(f"{side}: C1 jump ({j0:.2e}, {j1:.2e}) exceeds {jump_tol:.0e}")
        if not (math.isfinite(inner) and math.isfinite(outer) and outer < inner):
            ok = False
            msgs.append(f"{side}: tail norm not decreasing ({inner:.3e} -> {outer:.3e})")
    return RestrictionReport(ok, jumps, tails, exts, msgs)


def green_identity_check(potential: Potential, interval: tuple[float, float],
                         f: SolutionPath, g: SolutionPath) -> float:
    """``|LHS - RHS|`` of the Green identity on the interval.

    LHS is the quadrature of ``(A f) conj(g) - f conj(A g)`` with
    ``A = -d^2/dx^2 + V``; second derivatives come from a cubic spline of
    the sampled first derivatives.  RHS is minus the sum, over both outer
    half-lines, of ``G1 f conj(G0 g) - G0 f conj(G1 g)``.
    """
    a_minus, a_plus = map(float, interval)
    if len(f.xs) != len(g.xs) or not np.allclose(f.xs, g.xs, rtol=0, atol=1e-12):
        raise GridMismatch("f and g must be sampled on the same grid")
    f, g = f.ascending(), g.ascending()
    xs = f.xs
    if abs(xs[0] - a_minus) > 1e-12 or abs(xs[-1] - a_plus) > 1e-12:
        raise GridMismatch("paths must span the interval")
    v = np.array([eval_potential(potential, x) for x in xs])

    def second(p):
        return CubicSpline(xs, p.dphi.real)(xs, 1) + 1j * CubicSpline(xs, p.dphi.imag)(xs, 1)

    af = -second(f) + v * f.phi
    ag = -second(g) + v * g.phi
    lhs = quadrature(xs, af * np.conj(g.phi) - f.phi * np.conj(ag))

    def form(g0f, g1f, g0g, g1g):
        return g1f * np.conj(g0g) - g0f * np.conj(g1g)

    right = form(f.phi[-1], f.dphi[-1], g.phi[-1], g.dphi[-1])
    left = form(f.phi[0], -f.dphi[0], g.phi[0], -g.dphi[0])
    rhs = -(right + left)
    return float(abs(lhs - rhs))
