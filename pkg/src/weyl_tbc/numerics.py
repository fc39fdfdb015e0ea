"""Adaptive integration of the Schrodinger equation and its Riccati form,
plus root bracketing and quadrature.

The ODE is ``-phi'' + V phi = lam phi`` with real ``x`` and complex ``lam``.
State vectors are tiny (two complex numbers), so the Runge-Kutta kernel
works on Python scalars instead of numpy arrays; this is several times
faster than going through ``scipy.integrate.solve_ivp`` for this size.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate as _sp_integrate
from scipy import optimize as _sp_optimize

from .errors import LengthMismatch, NoSignChange, StepLimitExceeded

__all__ = [
    "Tolerances",
    "SolutionPath",
    "sqrt_branch",
    "integrate_schrodinger",
    "integrate_riccati",
    "riccati_flow",
    "find_root_bracketed",
    "scan_sign_changes",
    "quadrature",
    "cumulative_quadrature",
]


@dataclass(frozen=True)
class Tolerances:
    """Error control for the adaptive integrators and the root finder."""

    rel: float = 1e-10
    abs: float = 1e-12
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not (self.rel >= 1e-14 and math.isfinite(self.rel)):
            raise ValueError(f"rel tolerance must be >= 1e-14, got {self.rel}")
        if not (self.abs >= 1e-300 and math.isfinite(self.abs)):
            raise ValueError(f"abs tolerance must be >= 1e-300, got {self.abs}")
        if int(self.max_steps) <= 0:
            raise ValueError("max_steps must be positive")

    def scaled(self, factor: float) -> "Tolerances":
        return Tolerances(max(self.rel * factor, 1e-14), max(self.abs * factor, 1e-300), self.max_steps)


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class SolutionPath:
    """Sampled solution ``(phi, phi')`` along a strictly monotone grid."""

    xs: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        phi = np.asarray(self.phi, dtype=complex)
        dphi = np.asarray(self.dphi, dtype=complex)
        if not (len(xs) == len(phi) == len(dphi)):
            raise LengthMismatch("xs, phi and dphi must have equal length")
        if len(xs) < 2:
            raise ValueError("a SolutionPath needs at least two abscissae")
        d = np.diff(xs)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("xs must be strictly monotone")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "dphi", dphi)

    @property
    def direction(self) -> int:
        return 1 if self.xs[-1] > self.xs[0] else -1

    @property
    def end(self) -> tuple[complex, complex]:
        return complex(self.phi[-1]), complex(self.dphi[-1])

    def reversed(self) -> "SolutionPath":
        return SolutionPath(self.xs[::-1], self.phi[::-1], self.dphi[::-1])

    def scaled(self, c: complex) -> "SolutionPath":
        return SolutionPath(self.xs, self.phi * c, self.dphi * c)

    def ascending(self) -> "SolutionPath":
        return self if self.direction > 0 else self.reversed()


def sqrt_branch(lam: complex) -> complex:
    """Square root with the cut on ``[0, inf)`` and ``Im >= 0``.

    Real non-negative input is read as the limit from the upper half-plane,
    so ``sqrt_branch(4) == 2``.
    """
    lam = complex(lam)
    if lam.imag == 0.0 and lam.real >= 0.0:
        return complex(math.sqrt(lam.real), 0.0)
    return 1j * cmath.sqrt(-lam)


def _potential_callable(potential) -> Callable[[float], float]:
    if hasattr(potential, "evaluator"):
        return potential.evaluator()
    if callable(potential):
        return potential
    raise TypeError(f"cannot evaluate potential of type {type(potential).__name__}")


# Dormand-Prince 5(4) tableau.
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40


def _dopri(rhs, x0: float, y0: tuple, x1: float, tol: Tolerances, stops: Sequence[float] = (),
           on_accept=None, h0: float | None = None):
    """Integrate ``y' = rhs(x, y)`` from ``x0`` to ``x1`` for a tuple state.

    ``stops`` are abscissae (ordered in the direction of integration) that
    the stepper must land on exactly. ``on_accept(x, y)`` is called after
    every accepted step and may return a replacement state (used for the
    Riccati pole switch) or ``None``.  Returns the list of visited
    ``(x, y)`` pairs including the start.
    """
    span = x1 - x0
    sgn = 1.0 if span > 0 else -1.0
    n = len(y0)
    rtol, atol = tol.rel, tol.abs
    x, y = x0, tuple(complex(v) for v in y0)
    out = [(x, y)]
    stop_iter = iter(list(stops) + [x1])
    target = next(stop_iter)
    f1 = rhs(x, y)
    if h0 is None:
        scale = max(max(abs(v) for v in y), 1e-300)
        dscale = max(abs(v) for v in f1)
        h0 = 0.01 * scale / dscale if dscale > 0 else abs(span)
        h0 = min(max(h0, 1e-8 * abs(span)), abs(span), 0.1)
    h = h0
    steps = 0
    while True:
        remaining = target - x
        if remaining * sgn <= 0:
            try:
                target = next(stop_iter)
            except StopIteration:
                break
            continue
        last = False
        h_prop = h
        if h >= abs(remaining) * (1 - 1e-12):
            h = abs(remaining)
            last = True
        steps += 1
        if steps > tol.max_steps:
            raise StepLimitExceeded(f"more than {tol.max_steps} steps integrating from {x0} to {x1}")
        hs = sgn * h
        k1 = f1
        yt = tuple(y[i] + hs * _A21 * k1[i] for i in range(n))
        k2 = rhs(x + _C2 * hs, yt)
        yt = tuple(y[i] + hs * (_A31 * k1[i] + _A32 * k2[i]) for i in range(n))
        k3 = rhs(x + _C3 * hs, yt)
        yt = tuple(y[i] + hs * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i]) for i in range(n))
        k4 = rhs(x + _C4 * hs, yt)
        yt = tuple(y[i] + hs * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i]) for i in range(n))
        k5 = rhs(x + _C5 * hs, yt)
        yt = tuple(y[i] + hs * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
                   for i in range(n))
        xn = target if last else x + hs
        k6 = rhs(x + hs, yt)
        yn = tuple(y[i] + hs * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
                   for i in range(n))
        k7 = rhs(xn, yn)
        err = 0.0
        for i in range(n):
            e = hs * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
            sc = atol + rtol * max(abs(y[i]), abs(yn[i]))
            err = max(err, abs(e) / sc)
        if not math.isfinite(err):
            h *= 0.1
            if h < 1e-14 * max(1.0, abs(x)):
                raise StepLimitExceeded(f"non-finite state near x={x}")
            continue
        if err <= 1.0:
            x, y, f1 = xn, yn, k7
            if on_accept is not None:
                repl = on_accept(x, y)
                if repl is not None:
                    y = repl
                    f1 = rhs(x, y)
            out.append((x, y))
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h = h * fac if not last else max(h_prop, h * fac)
        else:
            h *= max(0.1, 0.9 * err ** -0.25)
            if h < 1e-14 * max(1.0, abs(x)):
                raise StepLimitExceeded(f"step size underflow near x={x}")
    return out


def integrate_schrodinger(potential, lam: complex, x_from: float, x_to: float,
                          init: tuple[complex, complex], tol: Tolerances = DEFAULT_TOL,
                          grid: Iterable[float] | None = None) -> SolutionPath:
    """Solve ``-phi'' + V phi = lam phi`` from ``x_from`` to ``x_to``.

    Without ``grid`` the returned path holds every accepted step. With
    ``grid`` (abscissae strictly inside the segment, any order) the path
    holds exactly the grid points plus both endpoints.
    """
    x_from, x_to = float(x_from), float(x_to)
    if x_from == x_to:
        raise ValueError("x_from and x_to must differ")
    v = _potential_callable(potential)
    lam = complex(lam)

    def rhs(x, y):
        return (y[1], (v(x) - lam) * y[0])

    stops: list[float] = []
    if grid is not None:
        lo, hi = min(x_from, x_to), max(x_from, x_to)
        pts = sorted({float(g) for g in grid if lo < float(g) < hi}, reverse=x_to < x_from)
        stops = pts
    visited = _dopri(rhs, x_from, (init[0], init[1]), x_to, tol, stops)
    if grid is not None:
        keep = {x_from, x_to, *stops}
        visited = [p for p in visited if p[0] in keep]
    xs = np.fromiter((p[0] for p in visited), float, len(visited))
    phi = np.fromiter((p[1][0] for p in visited), complex, len(visited))
    dphi = np.fromiter((p[1][1] for p in visited), complex, len(visited))
    return SolutionPath(xs, phi, dphi)


POLE_SWITCH = 10.0


def riccati_flow(potential, lam: complex, x_from: float, x_to: float, m_init: complex,
                 tol: Tolerances = DEFAULT_TOL, inverted: bool = False) -> tuple[complex, bool]:
    """Riccati flow with pole switching.

    Returns ``(value, inverted)``: when ``inverted`` is true the value is
    ``w = 1/m`` rather than ``m``, which lets callers see a pole (``w = 0``)
    without overflow.  ``m_init`` is interpreted as ``w`` if ``inverted``.
    """
    x_from, x_to = float(x_from), float(x_to)
    if x_from == x_to:
        raise ValueError("x_from and x_to must differ")
    v = _potential_callable(potential)
    lam = complex(lam)
    state = {"inv": bool(inverted)}
    val = complex(m_init)
    if not state["inv"] and abs(val) > POLE_SWITCH:
        val, state["inv"] = 1 / val, True
    elif state["inv"] and abs(val) > POLE_SWITCH:
        val, state["inv"] = 1 / val, False

    # m' = (V - lam) - m^2 ; w' = -w^2 m' = 1 - (V - lam) w^2
    def rhs(x, y):
        q = v(x) - lam
        if state["inv"]:
            return (1.0 - q * y[0] * y[0],)
        return (q - y[0] * y[0],)

    def on_accept(x, y):
        if abs(y[0]) > POLE_SWITCH:
            state["inv"] = not state["inv"]
            return (1 / y[0],)
        return None

    visited = _dopri(rhs, x_from, (val,), x_to, tol, on_accept=on_accept)
    return visited[-1][1][0], state["inv"]


def integrate_riccati(potential, lam: complex, x_from: float, x_to: float, m_init: complex,
                      tol: Tolerances = DEFAULT_TOL) -> complex:
    """Log-derivative ``m = phi'/phi`` at ``x_to`` given ``m(x_from) = m_init``.

    Poles of ``m`` along the way are crossed in the variable ``w = 1/m``.
    A pole landing exactly on ``x_to`` returns ``complex(inf)``.
    """
    val, inv = riccati_flow(potential, lam, x_from, x_to, m_init, tol)
    if not inv:
        return val
    if val == 0:
        return complex(math.inf, 0.0)
    return 1 / val


def find_root_bracketed(f: Callable[[float], float], lo: float, hi: float,
                        tol: Tolerances = DEFAULT_TOL) -> float:
    """Root of ``f`` inside a sign-change bracket (Brent's method)."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return float(lo)
    if fhi == 0:
        return float(hi)
    if not (np.sign(flo) * np.sign(fhi) < 0):
        raise NoSignChange(f"f({lo})={flo} and f({hi})={fhi} do not bracket a root")
    try:
        r, info = _sp_optimize.brentq(f, lo, hi, xtol=tol.abs, rtol=max(tol.rel, 4 * np.finfo(float).eps),
                                      maxiter=min(tol.max_steps, 10_000), full_output=True, disp=False)
    except RuntimeError as exc:  # pragma: no cover - brentq only raises on disp=True
        raise StepLimitExceeded(str(exc)) from exc
    if not info.converged:
        raise StepLimitExceeded(f"root finder did not converge in {info.iterations} iterations")
    return float(r)


def scan_sign_changes(f: Callable[[float], float], grid: Sequence[float],
                      values: Sequence[float] | None = None) -> list[tuple[float, float]]:
    """Adjacent grid pairs where ``f`` changes sign strictly.

    Non-finite values (e.g. residuals flagged at a pole) break the scan:
    brackets never straddle them.  Pass precomputed ``values`` to skip the
    evaluation.
    """
    grid = list(grid)
    if len(grid) < 2:
        raise ValueError("grid needs at least two points")
    vals = list(values) if values is not None else [f(x) for x in grid]
    out = []
    for (x0, v0), (x1, v1) in zip(zip(grid, vals), zip(grid[1:], vals[1:])):
        if not (math.isfinite(v0) and math.isfinite(v1)):
            continue
        if (v0 < 0 < v1) or (v1 < 0 < v0):
            out.append((x0, x1))
    return out


def _check_xy(xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys)
    if xs.shape != ys.shape:
        raise LengthMismatch(f"xs has {xs.shape} entries, ys has {ys.shape}")
    if len(xs) < 2:
        raise LengthMismatch("need at least two samples")
    return xs, ys


def quadrature(xs: Sequence[float], ys: Sequence[complex]) -> complex:
    """Composite Simpson rule (trapezoid for two points)."""
    xs, ys = _check_xy(xs, ys)
    if len(xs) == 2:
        return complex(0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
    return complex(_sp_integrate.simpson(ys, x=xs))


def cumulative_quadrature(xs: Sequence[float], ys: Sequence[complex]) -> np.ndarray:
    """Running integral ``int_{xs[0]}^{xs[k]} y`` for every node (starts at 0)."""
    xs, ys = _check_xy(xs, ys)
    if len(xs) == 2:
        return np.array([0.0, 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])], dtype=complex)
    ys = ys.astype(complex)
    re = _sp_integrate.cumulative_simpson(ys.real, x=xs, initial=0.0)
    im = _sp_integrate.cumulative_simpson(ys.imag, x=xs, initial=0.0)
    return re + 1j * im
