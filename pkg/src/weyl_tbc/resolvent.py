"""Inhomogeneous transparent-boundary problems: ``(A - lam) phi = g`` on an
interval, solved with a Green kernel built from the two Weyl-matched
solutions, and an independent finite-difference oracle on a large box."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import GridMismatch, NotRegularPoint, SingularSystem
from .numerics import DEFAULT_TOL, SolutionPath, Tolerances, cumulative_quadrature, integrate_schrodinger
from .potentials import Potential, Side
from .weyl import weyl_m

__all__ = [
    "SourceTerm",
    "ResolventSolution",
    "solve_tbc_bvp",
    "truncated_domain_oracle",
    "regular_point_scan",
    "REGULARITY_THRESHOLD",
]

REGULARITY_THRESHOLD = 1e-10


@dataclass(frozen=True)
class SourceTerm:
    """Right-hand side ``g`` sampled on a monotone grid over the interval."""

    xs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        vals = np.asarray(self.values, dtype=complex)
        if xs.shape != vals.shape:
            raise GridMismatch("source grid and values differ in length")
        if len(xs) < 16:
            raise ValueError("a source term needs at least 16 nodes")
        if not np.all(np.diff(xs) > 0):
            raise ValueError("source grid must be strictly increasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, a_minus, a_plus, value=1.0, n=401):
        xs = np.linspace(a_minus, a_plus, n)
        return cls(xs, np.full(n, value, dtype=complex))

    @classmethod
    def gaussian(cls, a_minus, a_plus, center=0.0, width=1.0, amplitude=1.0, n=401):
        """``amplitude * exp(-((x - center) / width)^2)``."""
        xs = np.linspace(a_minus, a_plus, n)
        return cls(xs, amplitude * np.exp(-(((xs - center) / width) ** 2)) + 0j)


@dataclass
class ResolventSolution:
    lam: complex
    path: SolutionPath
    wronskian: complex
    left_residual: float
    right_residual: float
    ode_residual: float
    wronskian_variation: float = 0.0


def _grid_path(potential, lam, x_from, x_to, init, xs, tol):
    inner = xs[1:-1]
    path = integrate_schrodinger(potential, lam, x_from, x_to, init, tol, grid=inner)
    return path.ascending()


def _weyl_pair(potential, a_minus, a_plus, lam, xs, tol, method):
    """``u_-`` satisfying the left condition and ``u_+`` the right one, on ``xs``."""
    ml = weyl_m(potential, Side.LEFT, a_minus, lam, method, tol)
    mr = weyl_m(potential, Side.RIGHT, a_plus, lam, method, tol)
    init_l = (0.0, 1.0) if ml.pole else (1.0, -ml.m)
    init_r = (0.0, 1.0) if mr.pole else (1.0, mr.m)
    u_l = _grid_path(potential, lam, a_minus, a_plus, init_l, xs, tol)
    u_r = _grid_path(potential, lam, a_plus, a_minus, init_r, xs, tol)
    # unit sup-norm so the regularity threshold is scale free
    u_l = u_l.scaled(1 / np.max(np.abs(u_l.phi)))
    u_r = u_r.scaled(1 / np.max(np.abs(u_r.phi)))
    return ml, mr, u_l, u_r


def _boundary_residuals(path, ml, mr):
    p0, d0 = path.phi[0], path.dphi[0]
    p1, d1 = path.phi[-1], path.dphi[-1]
    left = abs(p0) if ml.pole else abs(d0 + ml.m * p0)
    right = abs(p1) if mr.pole else abs(d1 - mr.m * p1)
    return float(left), float(right)


def _ode_residual(potential, lam, xs, phi, g):
    """Max of ``|-phi'' + (V - lam) phi - g|`` with three-point differences."""
    if len(xs) < 3:
        return 0.0
    h0 = xs[1:-1] - xs[:-2]
    h1 = xs[2:] - xs[1:-1]
    d2 = 2 * (phi[:-2] / (h0 * (h0 + h1)) - phi[1:-1] / (h0 * h1) + phi[2:] / (h1 * (h0 + h1)))
    v = potential.evaluator()
    vv = np.array([v(x) for x in xs[1:-1]])
    res = -d2 + (vv - lam) * phi[1:-1] - g[1:-1]
    return float(np.max(np.abs(res)))


def solve_tbc_bvp(potential: Potential, a_minus: float, a_plus: float, lam: complex, g: SourceTerm,
                  tol: Tolerances = DEFAULT_TOL, method: str = "auto") -> ResolventSolution:
    """Solve ``-phi'' + (V - lam) phi = g`` with transparent conditions.

    ``phi(x) = [u_+(x) int_{a-}^x u_- g + u_-(x) int_x^{a+} u_+ g] / W(u_+, u_-)``
    where ``u_-`` satisfies the left and ``u_+`` the right condition.
    The stored ``wronskian`` is ``W(u_-, u_+) = u_- u_+' - u_-' u_+`` of the
    sup-normalised pair; :class:`NotRegularPoint` is raised when it is
    below ``REGULARITY_THRESHOLD``.
    """
    lam = complex(lam)
    xs = g.xs
    if abs(xs[0] - a_minus) > 1e-12 * (1 + abs(a_minus)) or abs(xs[-1] - a_plus) > 1e-12 * (1 + abs(a_plus)):
        raise GridMismatch("source grid must start at a_minus and end at a_plus")
    ml, mr, u_l, u_r = _weyl_pair(potential, a_minus, a_plus, lam, xs, tol, method)
    w_nodes = u_l.phi * u_r.dphi - u_l.dphi * u_r.phi
    w = complex(w_nodes[len(w_nodes) // 2])
    if abs(w) <= REGULARITY_THRESHOLD:
        raise NotRegularPoint(f"lam={lam} is not a regular point: |W| = {abs(w):.3e}")
    w_var = float(np.max(np.abs(w_nodes - w)) / abs(w))
    gv = g.values
    left_int = cumulative_quadrature(xs, u_l.phi * gv)
    right_cum = cumulative_quadrature(xs, u_r.phi * gv)
    right_int = right_cum[-1] - right_cum
    den = -w
    phi = (u_r.phi * left_int + u_l.phi * right_int) / den
    dphi = (u_r.dphi * left_int + u_l.dphi * right_int) / den
    path = SolutionPath(xs, phi, dphi)
    left_res, right_res = _boundary_residuals(path, ml, mr)
    ode = _ode_residual(potential, lam, xs, phi, gv)
    return ResolventSolution(lam, path, w, left_res, right_res, ode, w_var)


def truncated_domain_oracle(potential: Potential, lam: complex, g: SourceTerm, L: float = 12.0,
                            n_nodes: int = 24001) -> SolutionPath:
    """Whole-line resolvent approximated on ``[-L, L]`` with Dirichlet ends.

    Second-order central differences on a uniform grid (tridiagonal solve),
    with ``g`` extended by zero outside its grid (cell averages at the two
    jumps). The result is linearly
    interpolated back to the source grid.
    """
    lam = complex(lam)
    a_minus, a_plus = float(g.xs[0]), float(g.xs[-1])
    if L < max(abs(a_minus), abs(a_plus)) + 10:
        raise ValueError(f"L={L} too small for the interval ({a_minus}, {a_plus})")
    if n_nodes < 5:
        raise ValueError("n_nodes must be at least 5")
    x = np.linspace(-L, L, n_nodes)
    h = x[1] - x[0]
    inner = x[1:-1]
    v = potential.evaluator()
    vv = np.array([v(t) for t in inner])
    # cell-averaged indicator of the interval keeps second order at the jumps of g
    frac = np.clip((np.minimum(inner + h / 2, a_plus) - np.maximum(inner - h / 2, a_minus)) / h, 0.0, 1.0)
    xc = np.clip(inner, a_minus, a_plus)
    rhs = frac * (np.interp(xc, g.xs, g.values.real) + 1j * np.interp(xc, g.xs, g.values.imag))
    ab = np.empty((3, len(inner)), dtype=complex)
    ab[0, :] = -1.0 / h**2
    ab[1, :] = 2.0 / h**2 + vv - lam
    ab[2, :] = -1.0 / h**2
    try:
        sol = solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(sol)):
        raise SingularSystem("finite-difference system is singular at this lam")
    psi = np.concatenate([[0.0], sol, [0.0]])
    dpsi = np.gradient(psi, x)
    xs = g.xs

    def interp(y):
        return np.interp(xs, x, y.real) + 1j * np.interp(xs, x, y.imag)

    return SolutionPath(xs, interp(psi), interp(dpsi))


def regular_point_scan(potential: Potential, a_minus: float, a_plus: float, lambdas,
                       tol: Tolerances = DEFAULT_TOL, method: str = "auto", nodes: int = 201) -> list[tuple]:
    """``|W(u_-, u_+)|`` of the sup-normalised TBC pair at each ``lam``.

    Zeros mark the eigenvalues of the interval problem; everywhere else
    the boundary-value problem is uniquely solvable.
    """
    xs = np.linspace(a_minus, a_plus, nodes)
    out = []
    for lam in lambdas:
        _, _, u_l, u_r = _weyl_pair(potential, a_minus, a_plus, complex(lam), xs, tol, method)
        w = u_l.phi[0] * u_r.dphi[0] - u_l.dphi[0] * u_r.phi[0]
        out.append((lam, float(abs(w))))
    return out
