"""Numeric regularity oracles on sampled functions.

Three executable identities back the rest of the package: the
fundamental theorem of calculus (integral of f' recovers the boundary
difference), the integration-by-parts identity against compactly
supported C^1 bumps (which is what having a weak derivative means), and
dyadic-shell convergence of the integrals of |f|, |f'|, |f''| toward 0
(membership in the spaces of functions with one or two integrable
derivatives).

Every identity tested here is exact in the continuum, so residuals are
pure quadrature error: composite trapezoid on the supplied grid, with
an h^2 error model. All functions are pure and safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .classify import dyadic_shell_log_integrals, fit_shell_exponent, DEFAULT_MARGIN
from .errors import (
    BumpNotInteriorError,
    InsufficientTailError,
    MissingDerivativeError,
    OutOfRangeError,
)
from .quadrature import cumulative_trapezoid, trapezoid

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class SampledFunction:
    """Function samples on a strictly increasing grid.

    Derivative samples are optional; fixtures carry their own exact
    derivatives because detecting differentiability from raw samples is
    not possible from finite data.
    """

    grid: np.ndarray
    values: np.ndarray
    derivative_values: Optional[np.ndarray] = None
    second_derivative_values: Optional[np.ndarray] = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.ndim != 1 or grid.size < 4:
            raise ValueError("grid needs at least 4 points")
        if not np.all(np.diff(grid) > 0):
            raise ValueError("grid must be strictly increasing")
        if values.shape != grid.shape:
            raise ValueError("values must match the grid")
        for name in ("derivative_values", "second_derivative_values"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr)
                if arr.shape != grid.shape:
                    raise ValueError(f"{name} must match the grid")
                object.__setattr__(self, name, arr)

    def index_of(self, x: float) -> int:
        tol = 4.0 * _EPS * max(1.0, abs(x))
        idx = np.nonzero(np.abs(self.grid - x) <= tol)[0]
        if idx.size == 0:
            raise OutOfRangeError(f"x={x} is not a grid point")
        return int(idx[0])


@dataclass(frozen=True)
class BumpTest:
    """C^1 quartic bump (1 - t^2)^2 with t = (x - center)/width.

    Compactly supported and continuously differentiable, which is all
    the weak-derivative identity requires of a test function.
    """

    center: float
    width: float

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")

    def value(self, x: np.ndarray) -> np.ndarray:
        t = (np.asarray(x, dtype=float) - self.center) / self.width
        inside = np.abs(t) < 1.0
        out = np.zeros_like(t)
        out[inside] = (1.0 - t[inside] ** 2) ** 2
        return out

    def derivative(self, x: np.ndarray) -> np.ndarray:
        t = (np.asarray(x, dtype=float) - self.center) / self.width
        inside = np.abs(t) < 1.0
        out = np.zeros_like(t)
        out[inside] = -4.0 * t[inside] * (1.0 - t[inside] ** 2) / self.width
        return out


def check_fundamental_theorem(f: SampledFunction, a: float, b: float) -> float:
    """| integral of f' over [a, b] - (f(b) - f(a)) | by trapezoid quadrature."""
    if f.derivative_values is None:
        raise MissingDerivativeError("fundamental-theorem check needs f'")
    i, j = f.index_of(a), f.index_of(b)
    if i > j:
        i, j = j, i
    sl = slice(i, j + 1)
    integral = trapezoid(f.derivative_values[sl], f.grid[sl])
    return float(abs(integral - (f.values[j] - f.values[i])))


def check_weak_derivative(
    u: SampledFunction, g: SampledFunction, tests: Sequence[BumpTest]
) -> float:
    """Max over bumps of | integral(u phi') + integral(g phi) |.

    Vanishes identically when g is the weak derivative of u; the residual
    on samples is the trapezoid error of the two integrals.
    """
    if not np.array_equal(u.grid, g.grid):
        raise ValueError("u and g must share one grid")
    x = u.grid
    worst = 0.0
    for bump in tests:
        lo, hi = bump.center - bump.width, bump.center + bump.width
        if lo <= x[0] or hi >= x[-1]:
            raise BumpNotInteriorError(
                f"bump support [{lo}, {hi}] reaches the boundary of [{x[0]}, {x[-1]}]"
            )
        resid = trapezoid(u.values * bump.derivative(x), x) + trapezoid(
            g.values * bump.value(x), x
        )
        worst = max(worst, float(abs(resid)))
    return worst


def antiderivative(g: SampledFunction, y0: float, x: float) -> float:
    """Cumulative trapezoid integral of g from grid point y0 to grid point x."""
    i, j = g.index_of(y0), g.index_of(x)
    cum = cumulative_trapezoid(g.values, g.grid)
    return float((cum[j] - cum[i]).real if np.iscomplexobj(cum) else cum[j] - cum[i])


def antiderivative_samples(g: SampledFunction, y0: float) -> SampledFunction:
    """The running integral of g as a SampledFunction with derivative g."""
    i = g.index_of(y0)
    cum = cumulative_trapezoid(g.values, g.grid)
    return SampledFunction(
        grid=g.grid, values=cum - cum[i], derivative_values=g.values
    )


_INTEGRAND_NAMES = ("|f|", "|f'|", "|f''|")


@dataclass(frozen=True)
class W21Report:
    """Shell convergence of |f|, |f'|, |f''| toward the left edge of the grid.

    statuses[i] is 'convergent', 'divergent' or 'inconclusive' for the
    i-th integrand; membership verdicts are None when the evidence is
    inconclusive. `failing` names the first divergent integral.
    """

    statuses: Tuple[str, str, str]
    shell_integrals: Tuple[Tuple[float, ...], Tuple[float, ...], Tuple[float, ...]]
    fitted_exponents: Tuple[float, float, float]
    margin: float

    @property
    def in_w11(self) -> Optional[bool]:
        return self._conjunction(self.statuses[:2])

    @property
    def in_w21(self) -> Optional[bool]:
        return self._conjunction(self.statuses)

    @staticmethod
    def _conjunction(statuses) -> Optional[bool]:
        if any(s == "divergent" for s in statuses):
            return False
        if all(s == "convergent" for s in statuses):
            return True
        return None

    @property
    def failing(self) -> Optional[str]:
        for name, status in zip(_INTEGRAND_NAMES, self.statuses):
            if status == "divergent":
                return name
        return None

    def verdict(self) -> str:
        if self.in_w21:
            return "w21"
        if self.in_w11:
            return "w11_only"
        if self.in_w11 is False or self.in_w21 is False:
            return "neither"
        return "inconclusive"


def w21_report(
    f: SampledFunction, *, margin: float = DEFAULT_MARGIN, max_shells: int = 32
) -> W21Report:
    """Integrable-derivative membership of f near the left edge of its grid.

    Requires first and second derivative samples (analytic fixtures, or
    reconstructed from a differential equation). The grid must span at
    least four dyadic shells toward its left edge.
    """
    if f.derivative_values is None or f.second_derivative_values is None:
        raise MissingDerivativeError("w21_report needs f' and f'' samples")
    statuses: List[str] = []
    shells: List[Tuple[float, ...]] = []
    exponents: List[float] = []
    for data in (f.values, f.derivative_values, f.second_derivative_values):
        with np.errstate(divide="ignore"):
            log_v = np.log(np.abs(np.asarray(data, dtype=complex))).real
        logs = dyadic_shell_log_integrals(f.grid, log_v, toward=0.0, max_shells=max_shells)
        if len(logs) < 4:
            raise InsufficientTailError("grid spans fewer than 4 dyadic shells")
        slope = fit_shell_exponent(logs)
        ratio = math.exp(slope) if slope < 700 else math.inf
        if ratio < 1.0 - margin:
            statuses.append("convergent")
        elif ratio > 1.0 + margin:
            statuses.append("divergent")
        else:
            statuses.append("inconclusive")
        shells.append(tuple(math.exp(v) if v < 700 else math.inf for v in logs))
        exponents.append(slope)
    return W21Report(
        statuses=tuple(statuses),
        shell_integrals=tuple(shells),
        fitted_exponents=tuple(exponents),
        margin=margin,
    )
