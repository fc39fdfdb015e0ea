"""Potential descriptors: the two analytic families used in the examples,
free motion, tabulated samples and shifted/offset combinations."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from .errors import InvariantViolation, OutOfDomain, SchemaError
from .numerics import sqrt_branch

__all__ = [
    "Potential",
    "Free",
    "Harmonic",
    "PoschlTeller",
    "Tabulated",
    "Shifted",
    "Side",
    "eval_potential",
    "parse_potential",
    "potential_to_config",
    "load_potential",
    "dump_potential",
    "wkb_log_derivative",
]


class Side:
    LEFT = "left"
    RIGHT = "right"

    @staticmethod
    def parse(side) -> str:
        s = str(side).lower()
        if s in ("left", "-", "minus", "l"):
            return Side.LEFT
        if s in ("right", "+", "plus", "r"):
            return Side.RIGHT
        raise ValueError(f"unknown side {side!r}")


class Potential:
    """Base class. Subclasses are frozen dataclasses (immutable)."""

    kind: str = ""
    label: str = ""

    def __call__(self, x: float) -> float:
        return self.evaluator()(x)

    def evaluator(self) -> Callable[[float], float]:
        raise NotImplementedError

    @property
    def domain(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def far_field(self, anchor: float, lam: complex, side: str) -> float:
        """Abscissa where the decaying solution is initialised."""
        raise NotImplementedError


@dataclass(frozen=True)
class Free(Potential):
    label: str = "free"
    kind = "free"

    def evaluator(self):
        return lambda x: 0.0

    def far_field(self, anchor, lam, side):
        return anchor + (25.0 if Side.parse(side) == Side.RIGHT else -25.0)


@dataclass(frozen=True)
class Harmonic(Potential):
    """``V(x) = x^2 / 4``."""

    label: str = "harmonic"
    kind = "harmonic"

    def evaluator(self):
        return lambda x: 0.25 * x * x

    def far_field(self, anchor, lam, side):
        d = max(10.0, 2.0 * math.sqrt(abs(complex(lam))) + 10.0)
        return anchor + (d if Side.parse(side) == Side.RIGHT else -d)


@dataclass(frozen=True)
class PoschlTeller(Potential):
    """``V(x) = -ell (ell + 1) / cosh^2 x``."""

    ell: int = 1
    label: str = "poschl_teller"
    kind = "poschl_teller"

    def __post_init__(self):
        if isinstance(self.ell, bool) or int(self.ell) != self.ell or self.ell < 1:
            raise InvariantViolation(f"Poschl-Teller ell must be a positive integer, got {self.ell!r}")

    def evaluator(self):
        c = -float(self.ell * (self.ell + 1))
        cosh = math.cosh

        def v(x):
            if abs(x) > 350.0:
                return 0.0
            ch = cosh(x)
            return c / (ch * ch)

        return v

    def far_field(self, anchor, lam, side):
        return anchor + (25.0 if Side.parse(side) == Side.RIGHT else -25.0)


@dataclass(frozen=True)
class Tabulated(Potential):
    """Piecewise-linear interpolation of samples; no extrapolation.

    The far field for the Weyl solution is the table edge itself, so the
    table must extend far enough that the potential is asymptotically
    flat or confining there.  This is assumed, not checked.
    """

    xs: tuple = ()
    vs: tuple = ()
    label: str = "tabulated"
    kind = "tabulated"

    def __post_init__(self):
        xs = tuple(float(x) for x in self.xs)
        vs = tuple(float(v) for v in self.vs)
        if len(xs) != len(vs):
            raise InvariantViolation(f"xs has {len(xs)} entries but vs has {len(vs)}")
        if len(xs) < 2:
            raise InvariantViolation("a tabulated potential needs at least two knots")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise InvariantViolation("tabulated xs must be strictly increasing")
        if not all(math.isfinite(v) for v in xs + vs):
            raise InvariantViolation("tabulated values must be finite")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "vs", vs)

    @property
    def domain(self):
        return (self.xs[0], self.xs[-1])

    def evaluator(self):
        xs = np.asarray(self.xs)
        vs = self.vs
        lo, hi = self.xs[0], self.xs[-1]
        n = len(xs)
        searchsorted = np.searchsorted

        def v(x):
            if x < lo or x > hi:
                # tolerate rounding at the knots
                if lo - 1e-12 * (1 + abs(lo)) <= x < lo:
                    return vs[0]
                if hi < x <= hi + 1e-12 * (1 + abs(hi)):
                    return vs[-1]
                raise OutOfDomain(f"x={x} outside tabulated range [{lo}, {hi}]")
            i = int(searchsorted(xs, x, side="right")) - 1
            if i >= n - 1:
                return vs[-1]
            x0, x1 = xs[i], xs[i + 1]
            t = (x - x0) / (x1 - x0)
            return vs[i] + t * (vs[i + 1] - vs[i])

        return v

    def far_field(self, anchor, lam, side):
        return self.xs[-1] if Side.parse(side) == Side.RIGHT else self.xs[0]


@dataclass(frozen=True)
class Shifted(Potential):
    """``V(x) = base(x - x0) + v0``."""

    base: Potential = field(default_factory=Free)
    x0: float = 0.0
    v0: float = 0.0
    label: str = "shifted"
    kind = "shifted"

    def evaluator(self):
        b = self.base.evaluator()
        x0, v0 = float(self.x0), float(self.v0)
        return lambda x: b(x - x0) + v0

    @property
    def domain(self):
        lo, hi = self.base.domain
        return (lo + self.x0, hi + self.x0)

    def far_field(self, anchor, lam, side):
        return self.base.far_field(anchor - self.x0, complex(lam) - self.v0, side) + self.x0


def eval_potential(potential: Potential, x: float) -> float:
    return potential.evaluator()(float(x))


_KNOWN_KEYS = {"kind", "ell", "xs", "vs", "x0", "v0", "label", "base"}


def parse_potential(config: Mapping[str, Any]) -> Potential:
    """Build a potential from its JSON-shaped description."""
    if not isinstance(config, Mapping):
        raise SchemaError("potential config must be an object")
    unknown = set(config) - _KNOWN_KEYS
    if unknown:
        raise SchemaError(f"unknown potential keys: {sorted(unknown)}")
    kind = str(config.get("kind", "")).lower()
    label = config.get("label")
    kw = {} if label is None else {"label": str(label)}
    if kind == "free":
        return Free(**kw)
    if kind == "harmonic":
        return Harmonic(**kw)
    if kind in ("poschl_teller", "poschl-teller", "poeschl_teller"):
        ell = config.get("ell", 1)
        if isinstance(ell, bool) or not isinstance(ell, int):
            raise SchemaError(f"ell must be an integer, got {ell!r}")
        return PoschlTeller(ell=ell, **kw)
    if kind == "tabulated":
        xs, vs = config.get("xs"), config.get("vs")
        if not isinstance(xs, (list, tuple)) or not isinstance(vs, (list, tuple)):
            raise SchemaError("tabulated potential needs 'xs' and 'vs' arrays")
        try:
            xs = [float(x) for x in xs]
            vs = [float(v) for v in vs]
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"non-numeric table entry: {exc}") from exc
        return Tabulated(xs=tuple(xs), vs=tuple(vs), **kw)
    if kind == "shifted":
        base = config.get("base")
        if base is None:
            raise SchemaError("shifted potential needs a 'base' object")
        try:
            x0 = float(config.get("x0", 0.0))
            v0 = float(config.get("v0", 0.0))
        except (TypeError, ValueError) as exc:
            raise SchemaError(str(exc)) from exc
        return Shifted(base=parse_potential(base), x0=x0, v0=v0, **kw)
    raise SchemaError(f"unknown potential kind {config.get('kind')!r}")


def potential_to_config(potential: Potential) -> dict:
    """Inverse of :func:`parse_potential`."""
    doc: dict[str, Any] = {"kind": potential.kind}
    if isinstance(potential, PoschlTeller):
        doc["ell"] = int(potential.ell)
    elif isinstance(potential, Tabulated):
        doc["xs"] = list(potential.xs)
        doc["vs"] = list(potential.vs)
    elif isinstance(potential, Shifted):
        doc["base"] = potential_to_config(potential.base)
        doc["x0"] = potential.x0
        doc["v0"] = potential.v0
    doc["label"] = potential.label
    return doc


def load_potential(text: str) -> Potential:
    try:
        return parse_potential(json.loads(text))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc


def dump_potential(potential: Potential) -> str:
    return json.dumps(potential_to_config(potential), sort_keys=True)


def wkb_log_derivative(potential: Potential, lam: complex, x: float, side) -> complex:
    """Log-derivative of the solution decaying towards the given side.

    Right: ``-sqrt(V(x) - lam)``; left: ``+sqrt(V(x) - lam)``, both with the
    root in the right half-plane.  Written via :func:`sqrt_branch` so that
    real ``lam`` above ``V`` picks the outgoing (``+i0``) solution.
    """
    root = sqrt_branch(complex(lam) - eval_potential(potential, x))
    return 1j * root if Side.parse(side) == Side.RIGHT else -1j * root
