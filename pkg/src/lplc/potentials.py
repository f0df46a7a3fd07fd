"""Potential models for the one-dimensional operator -y'' + q(x) y.

A small closed family of analytic potentials plus linearly interpolated
tables. Each analytic member knows the exact limit of x^2 q(x) at the
origin, which is what the asymptotic endpoint classifier consumes. The
centrifugal reduction of an n-dimensional central potential to the half
line is provided by :func:`effective_potential`.

All instances are immutable after construction and safe for concurrent
reads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import NonFiniteError, OutOfRangeError


class Potential:
    """Base class for potential terms q(x).

    Subclasses implement ``_raw(x)`` (may raise arithmetic errors),
    ``origin_coefficient`` and the canonical dict encoding.
    """

    def _raw(self, x: float) -> float:
        raise NotImplementedError

    def __call__(self, x: float) -> float:
        return evaluate(self, x)

    def origin_coefficient(self) -> Optional[float]:
        """Limit of x^2 q(x) as x -> 0+, or None when absent/divergent."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class Zero(Potential):
    """q(x) = 0."""

    def _raw(self, x: float) -> float:
        return 0.0

    def origin_coefficient(self) -> Optional[float]:
        return 0.0

    def to_dict(self) -> dict:
        return {"type": "zero"}


@dataclass(frozen=True)
class InverseSquare(Potential):
    """q(x) = c / x^2."""

    c: float

    def _raw(self, x: float) -> float:
        return self.c / (x * x)

    def origin_coefficient(self) -> Optional[float]:
        return float(self.c)

    def to_dict(self) -> dict:
        return {"type": "inverse_square", "c": float(self.c)}


@dataclass(frozen=True)
class Coulomb(Potential):
    """q(x) = z / x."""

    z: float

    def _raw(self, x: float) -> float:
        return self.z / x

    def origin_coefficient(self) -> Optional[float]:
        return 0.0

    def to_dict(self) -> dict:
        return {"type": "coulomb", "z": float(self.z)}


@dataclass(frozen=True)
class PowerLaw(Potential):
    """q(x) = c * x^p."""

    c: float
    p: float

    def _raw(self, x: float) -> float:
        return self.c * math.pow(x, self.p)

    def origin_coefficient(self) -> Optional[float]:
        if self.c == 0.0 or self.p > -2.0:
            return 0.0
        if self.p == -2.0:
            return float(self.c)
        return None  # x^2 * c x^p diverges for p < -2

    def to_dict(self) -> dict:
        return {"type": "power_law", "c": float(self.c), "p": float(self.p)}


@dataclass(frozen=True)
class Harmonic(Potential):
    """q(x) = k * x^2."""

    k: float

    def _raw(self, x: float) -> float:
        return self.k * x * x

    def origin_coefficient(self) -> Optional[float]:
        return 0.0

    def to_dict(self) -> dict:
        return {"type": "harmonic", "k": float(self.k)}


@dataclass(frozen=True)
class Sum(Potential):
    """Pointwise sum of potentials. The term list must be non-empty."""

    terms: Tuple[Potential, ...]

    def __init__(self, terms: Sequence[Potential]):
        terms = tuple(terms)
        if not terms:
            raise ValueError("Sum requires at least one term")
        object.__setattr__(self, "terms", terms)

    def _raw(self, x: float) -> float:
        return sum(t._raw(x) for t in self.terms)

    def origin_coefficient(self) -> Optional[float]:
        total = 0.0
        for t in self.terms:
            part = t.origin_coefficient()
            if part is None:
                return None  # conservative: any unknown member poisons the sum
            total += part
        return total

    def to_dict(self) -> dict:
        return {"type": "sum", "terms": [t.to_dict() for t in self.terms]}


@dataclass(frozen=True)
class Tabulated(Potential):
    """Linear interpolation of sampled values; refuses to extrapolate."""

    x: np.ndarray = field(repr=False)
    q: np.ndarray = field(repr=False)

    def __init__(self, x: Sequence[float], q: Sequence[float]):
        xa = np.asarray(x, dtype=float)
        qa = np.asarray(q, dtype=float)
        if xa.ndim != 1 or xa.shape != qa.shape:
            raise ValueError("x and q must be 1-d arrays of equal length")
        if xa.size < 4:
            raise ValueError("tabulated potential needs at least 4 points")
        if not np.all(np.diff(xa) > 0):
            raise ValueError("tabulated grid must be strictly increasing")
        if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(qa))):
            raise ValueError("tabulated data must be finite")
        object.__setattr__(self, "x", xa)
        object.__setattr__(self, "q", qa)

    def _raw(self, x: float) -> float:
        if x < self.x[0] or x > self.x[-1]:
            raise OutOfRangeError(
                f"x={x} outside tabulated range [{self.x[0]}, {self.x[-1]}]"
            )
        return float(np.interp(x, self.x, self.q))

    def origin_coefficient(self) -> Optional[float]:
        return None  # no trustworthy limit from finite samples

    def to_dict(self) -> dict:
        return {"type": "tabulated", "x": self.x.tolist(), "q": self.q.tolist()}

    def __eq__(self, other):
        return (
            isinstance(other, Tabulated)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.q, other.q)
        )

    def __hash__(self):
        return hash((self.x.tobytes(), self.q.tobytes()))


@dataclass(frozen=True)
class Mirrored(Potential):
    """q(-x); used internally to classify left-infinite endpoints."""

    base: Potential

    def _raw(self, x: float) -> float:
        return self.base._raw(-x)

    def origin_coefficient(self) -> Optional[float]:
        return None

    def to_dict(self) -> dict:
        return {"type": "mirrored", "base": self.base.to_dict()}


def evaluate(q: Potential, x: float) -> float:
    """Evaluate q(x), mapping arithmetic failures to package errors.

    Raises OutOfRangeError for tabulated abscissas outside the grid and
    NonFiniteError when an analytic formula overflows or leaves the real
    domain (for example a fractional power of a negative number).
    """
    try:
        value = q._raw(float(x))
    except OutOfRangeError:
        raise
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise NonFiniteError(f"q({x}) is not finite: {exc}") from None
    if not math.isfinite(value):
        raise NonFiniteError(f"q({x}) evaluated to {value}")
    return value


_DECODERS = {
    "zero": lambda d: Zero(),
    "inverse_square": lambda d: InverseSquare(c=float(d["c"])),
    "coulomb": lambda d: Coulomb(z=float(d["z"])),
    "power_law": lambda d: PowerLaw(c=float(d["c"]), p=float(d["p"])),
    "harmonic": lambda d: Harmonic(k=float(d["k"])),
    "sum": lambda d: Sum([from_dict(t) for t in d["terms"]]),
    "tabulated": lambda d: Tabulated(d["x"], d["q"]),
}


def from_dict(data: dict) -> Potential:
    """Decode the canonical JSON form, e.g. {"type": "inverse_square", "c": 0.75}."""
    try:
        kind = data["type"]
    except (TypeError, KeyError):
        raise ValueError("potential object needs a 'type' field") from None
    try:
        decoder = _DECODERS[kind]
    except KeyError:
        raise ValueError(f"unknown potential type {kind!r}") from None
    return decoder(data)


def loads(text: str) -> Potential:
    return from_dict(json.loads(text))


def rho_nl_exact(n: int, l: int) -> Fraction:
    """Centrifugal coefficient (n-1)(n-3)/4 + l(l+n-2) in exact arithmetic."""
    if not (isinstance(n, int) and isinstance(l, int)):
        raise TypeError("n and l must be integers")
    if n < 1 or l < 0:
        raise ValueError("require n >= 1 and l >= 0")
    return Fraction((n - 1) * (n - 3), 4) + Fraction(l * (l + n - 2))


def rho_nl(n: int, l: int) -> float:
    """Centrifugal coefficient of the n-dimensional reduction.

    Equal to (l + (n-2)/2)^2 - 1/4; the two closed forms agree exactly
    because the arithmetic is done on rationals before conversion.
    """
    return float(rho_nl_exact(n, l))


def lambda_nl(n: int, l: int) -> Tuple[float, float]:
    """Return (lam, L) with lam = l + (n-2)/2 and L = 2*lam + 2."""
    if not (isinstance(n, int) and isinstance(l, int)):
        raise TypeError("n and l must be integers")
    if n < 1 or l < 0:
        raise ValueError("require n >= 1 and l >= 0")
    lam = Fraction(2 * l + n - 2, 2)
    return float(lam), float(2 * lam + 2)


@dataclass(frozen=True)
class EffectiveProblem:
    """A central potential reduced to the half line.

    q_eff(x) = V(x) + rho/x^2 where rho is the exact centrifugal
    coefficient for dimension n and angular momentum l.
    """

    n: int
    l: int
    base: Potential
    rho: float
    q_eff: Potential


def effective_potential(V: Potential, n: int, l: int) -> EffectiveProblem:
    """Wrap V with the centrifugal term for dimension n, angular momentum l."""
    rho_exact = rho_nl_exact(n, l)
    # Both closed forms of the coefficient must coincide identically.
    alt = Fraction(2 * l + n - 2, 2) ** 2 - Fraction(1, 4)
    assert rho_exact == alt
    rho = float(rho_exact)
    if rho == 0.0:
        q_eff: Potential = V
    elif isinstance(V, Zero):
        q_eff = InverseSquare(rho)
    else:
        q_eff = Sum((V, InverseSquare(rho)))
    return EffectiveProblem(n=n, l=l, base=V, rho=rho, q_eff=q_eff)


def origin_coefficient(q: Potential) -> Optional[float]:
    """Exact limit of x^2 q(x) at the origin, or None when unavailable."""
    return q.origin_coefficient()
