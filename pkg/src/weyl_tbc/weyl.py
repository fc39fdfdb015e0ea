"""Weyl-Titchmarsh coefficients of half-line Schrodinger operators.

Sign convention: with trace maps ``G0 f = f(a)`` and ``G1 f = +f'(a)`` on
the right half-line ``[a, inf)`` and ``G1 f = -f'(a)`` on the left half-line
``(-inf, a]``, the coefficient is ``m = G1 psi / G0 psi`` for the square
integrable solution ``psi``.  So ``m_right = psi'/psi`` and
``m_left = -psi'/psi``; both are Herglotz functions of ``lam``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import PoleDetected
from .numerics import (
    DEFAULT_TOL,
    SolutionPath,
    Tolerances,
    integrate_schrodinger,
    riccati_flow,
    sqrt_branch,
)
from .potentials import Free, Harmonic, PoschlTeller, Potential, Side, eval_potential, wkb_log_derivative

__all__ = [
    "WeylEvaluation",
    "FundamentalPair",
    "HerglotzReport",
    "sqrt_branch",
    "fundamental_system",
    "weyl_numeric",
    "weyl_free",
    "weyl_poschl_teller",
    "parabolic_cylinder_U",
    "weyl_harmonic",
    "asymptotic_m",
    "herglotz_sample_check",
    "weyl_m",
    "weyl_solution",
    "gamma",
    "rgamma",
    "POLE_THRESHOLD",
]

POLE_THRESHOLD = 1e8


class Method:
    CLOSED_FORM = "closed_form"
    PARABOLIC_CYLINDER = "parabolic_cylinder"
    NUMERIC = "numeric"
    ASYMPTOTIC = "asymptotic"
    ALL = (CLOSED_FORM, PARABOLIC_CYLINDER, NUMERIC, ASYMPTOTIC)


@dataclass(frozen=True)
class WeylEvaluation:
    """One value of ``m(lam)``.

    At a pole ``m`` is ``inf`` and ``pole`` is set; ``inverse`` always holds
    ``1/m`` (zero at a pole) so callers can use the projective value.
    """

    lam: complex
    m: complex
    side: str
    anchor: float
    method: str
    err_estimate: float = 0.0
    pole: bool = False
    inverse: complex = complex("nan")

    def require(self) -> complex:
        if self.pole:
            raise PoleDetected(f"m_{self.side}({self.lam}) has a pole at anchor {self.anchor}")
        return self.m


def _evaluation(lam, d_or_w, inverted, side, anchor, method, err=0.0) -> WeylEvaluation:
    """Package a log-derivative ``d = phi'/phi`` (or ``w = 1/d``) in the side's sign convention."""
    sgn = 1.0 if side == Side.RIGHT else -1.0
    if inverted:
        w = complex(d_or_w) * sgn
        if abs(w) * POLE_THRESHOLD <= 1.0:
            return WeylEvaluation(complex(lam), complex(math.inf, 0.0), side, anchor, method, err, True, w)
        return WeylEvaluation(complex(lam), 1 / w, side, anchor, method, err, False, w)
    m = complex(d_or_w) * sgn
    if not cmath.isfinite(m) or abs(m) > POLE_THRESHOLD:
        w = 0j if not cmath.isfinite(m) else 1 / m
        return WeylEvaluation(complex(lam), complex(math.inf, 0.0), side, anchor, method, err, True, w)
    return WeylEvaluation(complex(lam), m, side, anchor, method, err, False, 1 / m if m != 0 else complex(math.inf))


@dataclass(frozen=True)
class FundamentalPair:
    """``c`` and ``s`` with unit initial data at ``anchor``, sampled at ``x``."""

    c: tuple[complex, complex]
    s: tuple[complex, complex]
    lam: complex
    anchor: float
    x: float

    @property
    def wronskian(self) -> complex:
        return self.c[0] * self.s[1] - self.c[1] * self.s[0]


def fundamental_system(potential: Potential, lam: complex, anchor: float, x: float,
                       tol: Tolerances = DEFAULT_TOL) -> FundamentalPair:
    if x == anchor:
        return FundamentalPair((1 + 0j, 0j), (0j, 1 + 0j), complex(lam), anchor, x)
    c = integrate_schrodinger(potential, lam, anchor, x, (1.0, 0.0), tol).end
    s = integrate_schrodinger(potential, lam, anchor, x, (0.0, 1.0), tol).end
    return FundamentalPair(c, s, complex(lam), float(anchor), float(x))


def weyl_numeric(potential: Potential, side, anchor: float, lam: complex,
                 tol: Tolerances = DEFAULT_TOL, x_far: float | None = None) -> WeylEvaluation:
    """Riccati integration from the far field inward to ``anchor``.

    The flow starts from the WKB log-derivative at ``x_far`` and is
    integrated toward the anchor, where the decaying solution dominates.
    The error estimate is the change when ``x_far`` moves 5 units outward
    (inward for tabulated potentials, whose table ends the domain).
    """
    side = Side.parse(side)
    lam = complex(lam)
    anchor = float(anchor)
    outward = 1.0 if side == Side.RIGHT else -1.0
    if x_far is None:
        x_far = potential.far_field(anchor, lam, side)
    if (x_far - anchor) * outward <= 0:
        raise ValueError(f"far-field point {x_far} is not beyond anchor {anchor} on the {side}")

    def run(xf):
        d0 = wkb_log_derivative(potential, lam, xf, side)
        return riccati_flow(potential, lam, xf, anchor, d0, tol)

    val, inv = run(x_far)
    lo, hi = potential.domain
    x_alt = x_far + 5.0 * outward
    if not (lo <= x_alt <= hi):
        x_alt = x_far - min(5.0, 0.5 * abs(x_far - anchor)) * outward
    val2, inv2 = run(x_alt)
    d1 = 1 / val if inv else val
    d2 = 1 / val2 if inv2 else val2
    if inv and inv2:
        err = abs(val - val2) * (abs(d1) ** 2 if val != 0 and val2 != 0 else 0.0)
        err = err if math.isfinite(err) else math.inf
    elif cmath.isfinite(d1) and cmath.isfinite(d2):
        err = abs(d1 - d2)
    else:
        err = math.inf
    return _evaluation(lam, val, inv, side, anchor, Method.NUMERIC, err)


def weyl_free(lam: complex) -> complex:
    """``m(lam) = i sqrt(lam)``, the same for both sides and every anchor."""
    return 1j * sqrt_branch(lam)


def weyl_poschl_teller(lam: complex, side, anchor: float) -> WeylEvaluation:
    """Closed form for ``V = -2 / cosh^2 x``.

    ``m_+ = i k + 1 / (cosh^2 a (tanh a - i k))`` and
    ``m_- = i k - 1 / (cosh^2 a (tanh a + i k))`` with ``k = sqrt_branch(lam)``.
    """
    side = Side.parse(side)
    lam = complex(lam)
    ik = 1j * sqrt_branch(lam)
    ch2 = math.cosh(anchor) ** 2
    th = math.tanh(anchor)
    if side == Side.RIGHT:
        den = ch2 * (th - ik)
        sgn = 1.0
    else:
        den = ch2 * (th + ik)
        sgn = -1.0
    # m = ik + sgn/den = (ik*den + sgn)/den
    num = ik * den + sgn
    if den == 0 or abs(num) > POLE_THRESHOLD * abs(den):
        w = den / num if num != 0 else complex(math.inf)
        return WeylEvaluation(lam, complex(math.inf, 0.0), side, float(anchor), Method.CLOSED_FORM, 0.0, True, w)
    m = num / den
    return WeylEvaluation(lam, m, side, float(anchor), Method.CLOSED_FORM, 0.0, False,
                          1 / m if m != 0 else complex(math.inf))


def _pcf_start(E: complex) -> float:
    return max(12.0, 2.0 * math.sqrt(abs(E)) + 10.0)


def _pcf_series(E: complex, x: float) -> tuple[complex, complex, complex]:
    """Large-``x`` expansion of ``U(-E, x)``.

    Returns ``(log_prefactor, S, dS/dx)`` where
    ``U = exp(log_prefactor) * S`` and
    ``log_prefactor = -x^2/4 + (E - 1/2) log x``.
    Summed until the terms stop shrinking (optimal truncation).
    """
    a_half = 0.5 - E  # (a + 1/2) with a = -E
    two_x2 = 2.0 * x * x
    term = 1.0 + 0j
    s, ds = term, 0j
    prev = math.inf
    for k in range(200):
        ratio = -(a_half + 2 * k) * (a_half + 2 * k + 1) / ((k + 1) * two_x2)
        nxt = term * ratio
        if abs(nxt) >= prev or abs(nxt) < 1e-18 * abs(s):
            if abs(nxt) < prev and abs(nxt) != 0:
                s += nxt
                ds += nxt * (-2 * (k + 1)) / x
            break
        prev = abs(nxt)
        term = nxt
        s += term
        ds += term * (-2 * (k + 1)) / x
    logpre = -0.25 * x * x + (E - 0.5) * math.log(x)
    return logpre, s, ds


def _pcf_log_derivative_far(E: complex, x: float) -> complex:
    _, s, ds = _pcf_series(E, x)
    return -0.5 * x + (E - 0.5) / x + ds / s


def parabolic_cylinder_U(E: complex, x: float, tol: Tolerances = DEFAULT_TOL) -> tuple[complex, complex]:
    """``U(-E, x)`` and its ``x``-derivative.

    Initialised from the large-``x`` expansion at
    ``X0 = max(12, 2 sqrt|E| + 10)`` and integrated inward along the Weber
    equation ``phi'' = (x^2/4 - E) phi``. Validity window ``|E| <= 50``.
    """
    E = complex(E)
    if abs(E) > 50:
        raise ValueError(f"|E| = {abs(E)} outside the supported window |E| <= 50")
    x = float(x)
    x0 = _pcf_start(E)
    if x >= x0:
        logpre, s, ds = _pcf_series(E, x)
        pre = cmath.exp(logpre)
        u = pre * s
        return u, pre * ((-0.5 * x + (E - 0.5) / x) * s + ds)
    logpre, s, ds = _pcf_series(E, x0)
    d0 = -0.5 * x0 + (E - 0.5) / x0 + ds / s
    # normalise so the integrator works with O(1) numbers, rescale after
    u, du = integrate_schrodinger(Harmonic(), E, x0, x, (1.0, d0), tol).end
    scale = cmath.exp(logpre) * s
    return u * scale, du * scale


def weyl_harmonic(E: complex, side, anchor: float, tol: Tolerances = DEFAULT_TOL) -> WeylEvaluation:
    """``m_+ = U'(-E, a)/U(-E, a)`` and ``m_- = U'(-E, -a)/U(-E, -a)``.

    The ratio is propagated in log-derivative (Riccati) form from the
    expansion point, which is the same Weber integration but keeps the
    step count low where ``U`` varies exponentially.
    """
    side = Side.parse(side)
    E = complex(E)
    if abs(E) > 50:
        raise ValueError(f"|E| = {abs(E)} outside the supported window |E| <= 50")
    x = float(anchor) if side == Side.RIGHT else -float(anchor)
    x0 = _pcf_start(E)
    if x >= x0:
        val, inv = _pcf_log_derivative_far(E, x), False
    else:
        val, inv = riccati_flow(Harmonic(), E, x0, x, _pcf_log_derivative_far(E, x0), tol)
    # both formulas are U'/U at the reflected point: no extra sign on the left
    ev = _evaluation(E, val, inv, Side.RIGHT, float(anchor), Method.PARABOLIC_CYLINDER)
    return WeylEvaluation(ev.lam, ev.m, side, ev.anchor, ev.method, ev.err_estimate, ev.pole, ev.inverse)


def asymptotic_m(lam: complex, v_at_anchor: float) -> complex:
    """Two-term large-energy expansion ``i sqrt(lam) + V(a) / (2 i sqrt(lam))``."""
    lam = complex(lam)
    if lam == 0:
        raise ValueError("asymptotic expansion undefined at lam = 0")
    ik = 1j * sqrt_branch(lam)
    return ik + v_at_anchor / (2 * ik)


# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(z: complex) -> complex:
    z = complex(z)
    if z.real < 0.5:
        s = cmath.sin(math.pi * z)
        if s == 0:
            return complex(math.inf)
        return math.pi / (s * gamma(1 - z))
    z -= 1
    acc = _LANCZOS[0]
    for i, c in enumerate(_LANCZOS[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * t ** (z + 0.5) * cmath.exp(-t) * acc


def rgamma(z: complex) -> complex:
    """``1/Gamma(z)``, finite (zero) at the non-positive integers."""
    z = complex(z)
    if z.real < 0.5:
        return cmath.sin(math.pi * z) * gamma(1 - z) / math.pi
    return 1 / gamma(z)


@dataclass
class HerglotzReport:
    passed: bool
    min_im: float
    max_conj_defect: float
    offenders: list

    def __str__(self):
        state = "pass" if self.passed else "FAIL"
        return f"herglotz {state}: min Im m = {self.min_im:.3e}, max conj defect = {self.max_conj_defect:.3e}"


def _as_value(v) -> complex:
    return v.require() if isinstance(v, WeylEvaluation) else complex(v)


def herglotz_sample_check(evaluator: Callable[[complex], complex], lambdas: Iterable[complex],
                          im_tol: float = 1e-8, conj_tol: float = 1e-8, worst: int = 5) -> HerglotzReport:
    """Sample ``Im m >= 0`` and ``m(conj lam) = conj m(lam)`` on upper half-plane points."""
    lambdas = [complex(l) for l in lambdas]
    if any(l.imag <= 0 for l in lambdas):
        raise ValueError("herglotz_sample_check needs points with Im lam > 0")
    rows = []
    for lam in lambdas:
        m = _as_value(evaluator(lam))
        mc = _as_value(evaluator(lam.conjugate()))
        conj_defect = abs(mc - m.conjugate()) / max(1.0, abs(m))
        rows.append((lam, m.imag, conj_defect))
    min_im = min(r[1] for r in rows) if rows else 0.0
    max_conj = max(r[2] for r in rows) if rows else 0.0
    bad = [r for r in rows if r[1] < -im_tol or r[2] > conj_tol]
    bad.sort(key=lambda r: (r[1], -r[2]))
    return HerglotzReport(not bad, min_im, max_conj, bad[:worst])


def weyl_m(potential: Potential, side, anchor: float, lam: complex, method: str = "auto",
           tol: Tolerances = DEFAULT_TOL) -> WeylEvaluation:
    """Dispatch to the best available method for ``potential``.

    ``auto`` picks the closed form for free motion and the ``ell = 1``
    Poschl-Teller well, the parabolic-cylinder route for the oscillator,
    and Riccati integration otherwise.
    """
    side = Side.parse(side)
    lam = complex(lam)
    if method == "auto":
        if isinstance(potential, Free) or (isinstance(potential, PoschlTeller) and potential.ell == 1):
            method = Method.CLOSED_FORM
        elif isinstance(potential, Harmonic) and abs(lam) <= 50:
            method = Method.PARABOLIC_CYLINDER
        else:
            method = Method.NUMERIC
    if method == Method.CLOSED_FORM:
        if isinstance(potential, Free):
            m = weyl_free(lam)
            return WeylEvaluation(lam, m, side, float(anchor), Method.CLOSED_FORM, 0.0, False,
                                  1 / m if m != 0 else complex(math.inf))
        if isinstance(potential, PoschlTeller) and potential.ell == 1:
            return weyl_poschl_teller(lam, side, anchor)
        raise ValueError(f"no closed form for {potential.kind}")
    if method == Method.PARABOLIC_CYLINDER:
        if not isinstance(potential, Harmonic):
            raise ValueError("parabolic-cylinder method applies to the harmonic potential only")
        return weyl_harmonic(lam, side, anchor, tol)
    if method == Method.NUMERIC:
        return weyl_numeric(potential, side, anchor, lam, tol)
    if method == Method.ASYMPTOTIC:
        m = asymptotic_m(lam, eval_potential(potential, anchor))
        return WeylEvaluation(lam, m, side, float(anchor), Method.ASYMPTOTIC, math.nan, False, 1 / m)
    raise ValueError(f"unknown method {method!r}")


def weyl_solution(potential: Potential, side, anchor: float, lam: complex, width: float,
                  n: int = 401, tol: Tolerances = DEFAULT_TOL) -> SolutionPath:
    """Decaying solution on ``[anchor, anchor + width]`` (right) or
    ``[anchor - width, anchor]`` (left), ordered from the anchor outward.

    Obtained by integrating the linear equation inward from the far
    field, so the decaying solution is the dominant one along the way.
    Scaled so that ``|psi(anchor)|^2 + |psi'(anchor)|^2 = 1``.
    """
    side = Side.parse(side)
    outward = 1.0 if side == Side.RIGHT else -1.0
    x_far = potential.far_field(anchor, lam, side)
    if (x_far - anchor) * outward < width + 1.0:
        x_far = anchor + outward * (width + 5.0)
    grid = anchor + outward * np.linspace(0.0, width, n)
    d0 = wkb_log_derivative(potential, lam, x_far, side)
    path = integrate_schrodinger(potential, lam, x_far, anchor, (1.0, d0), tol, grid=grid[1:]).reversed()
    keep = np.isin(path.xs, grid)
    xs, phi, dphi = path.xs[keep], path.phi[keep], path.dphi[keep]
    c = 1 / math.hypot(abs(phi[0]), abs(dphi[0]))
    return SolutionPath(xs, phi * c, dphi * c)
