"""Adaptive integration of -y'' + q(x) y = l y as a first-order system.

The equation is advanced as (y, y') with an embedded Dormand-Prince 5(4)
pair under PI step-size control. Because one solution typically grows
exponentially toward a singular endpoint when Im(l) != 0, the state is
kept inside a fixed magnitude band: whenever |y| + |y'| leaves the band
the pair is divided by its sum and the logarithm of that factor is
accumulated separately, so the true solution at a grid point is
exp(log_scale) * (y, y'). The equation is linear, which makes the
rescaling exact.

Recording grids accumulate geometrically toward a finite target (spacing
ratio = cfg.geometric_ratio) and are uniform in log(x) toward infinity,
which is realized as truncation at cfg.x_max. A finite endpoint where
the potential cannot be evaluated is approached no closer than cfg.x_min.

Integration is a pure function of its inputs; traces are immutable, so
independent integrations may run concurrently without shared state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    GridMismatchError,
    MaxStepsExceededError,
    MissingDerivativeError,
    NonFiniteError,
    OutOfRangeError,
    StepUnderflowError,
)
from .potentials import Potential, evaluate

_EPS = float(np.finfo(float).eps)

# Dormand-Prince 5(4) tableau (FSAL: the 7th stage is the 5th-order result).
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
# Difference between the 5th- and embedded 4th-order weights.
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_SAFETY = 0.87  # PI equilibrium near 0.1*tol keeps accumulated error under 10*tol
_PI_ALPHA = 0.7 / 5.0
_PI_BETA = 0.4 / 5.0
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass(frozen=True)
class ComplexState:
    """Mantissa pair (y, y') and its logarithmic scale.

    The true solution values are exp(log_scale) * (y, dy). After every
    rescale the mantissa satisfies |y| + |dy| in [1/band, band].
    """

    y: complex
    dy: complex
    log_scale: float = 0.0

    def true_y(self) -> complex:
        return self.y * math.exp(self.log_scale)

    def true_dy(self) -> complex:
        return self.dy * math.exp(self.log_scale)


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and grid policy for the adaptive integrator."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_steps: int = 1_000_000
    rescale_band: float = 100.0
    geometric_ratio: float = 2.0 ** (-1.0 / 16.0)  # 16 recording points per dyadic shell
    x_min: float = 1e-8
    x_max: float = 1e4

    def __post_init__(self):
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise ValueError("tolerances must be positive")
        if self.max_steps < 1000:
            raise ValueError("max_steps must be at least 1000")
        if not 0.0 < self.geometric_ratio < 1.0:
            raise ValueError("geometric_ratio must lie in (0, 1)")
        if not self.rescale_band > 1.0:
            raise ValueError("rescale_band must exceed 1")
        if not (self.x_min > 0.0 and self.x_max > 0.0):
            raise ValueError("x_min and x_max must be positive")


@dataclass(frozen=True)
class SolutionTrace:
    """A solution of -y'' + q y = l y recorded on a monotone grid.

    Arrays y, dy hold the banded mantissa pair; log_scale holds the
    accumulated logarithmic factors, so exp(log_scale[i]) * y[i] is the
    true solution value at x[i].
    """

    eigenvalue: complex
    x: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    log_scale: np.ndarray
    potential: Potential
    direction: int

    def __len__(self) -> int:
        return self.x.size

    def index_of(self, x: float) -> int:
        tol = 4.0 * _EPS * max(1.0, abs(x))
        idx = np.nonzero(np.abs(self.x - x) <= tol)[0]
        if idx.size == 0:
            raise GridMismatchError(f"x={x} is not a grid point of this trace")
        return int(idx[0])

    def state_at(self, x: float) -> ComplexState:
        i = self.index_of(x)
        return ComplexState(complex(self.y[i]), complex(self.dy[i]), float(self.log_scale[i]))

    @property
    def final_state(self) -> ComplexState:
        return ComplexState(complex(self.y[-1]), complex(self.dy[-1]), float(self.log_scale[-1]))

    def values(self) -> np.ndarray:
        """True solution values; may overflow for extreme log scales."""
        return self.y * np.exp(self.log_scale)

    def derivative_values(self) -> np.ndarray:
        return self.dy * np.exp(self.log_scale)

    def log_abs_y(self) -> np.ndarray:
        """log |true y|, finite even when values() would overflow."""
        with np.errstate(divide="ignore"):
            return self.log_scale + np.log(np.abs(self.y))

    def to_csv(self, destination: Union[str, IO[str]]) -> None:
        """Write columns x, Re y, Im y, Re dy, Im dy, log_scale."""
        close = False
        if isinstance(destination, str):
            destination = open(destination, "w", encoding="utf-8")
            close = True
        try:
            destination.write("x,re_y,im_y,re_dy,im_dy,log_scale\n")
            for i in range(self.x.size):
                destination.write(
                    f"{float(self.x[i])!r},{float(self.y[i].real)!r},{float(self.y[i].imag)!r},"
                    f"{float(self.dy[i].real)!r},{float(self.dy[i].imag)!r},{float(self.log_scale[i])!r}\n"
                )
        finally:
            if close:
                destination.close()


def _normalized(y: complex, dy: complex, log_scale: float, band: float) -> Tuple[complex, complex, float]:
    s = abs(y) + abs(dy)
    if s == 0.0:
        raise ValueError("zero state is not a valid solution seed")
    if not math.isfinite(s):
        raise NonFiniteError("state is not finite")
    if s > band or s < 1.0 / band:
        return y / s, dy / s, log_scale + math.log(s)
    return y, dy, log_scale


class _Stepper:
    """Dormand-Prince 5(4) with PI control for y'' = (q - l) y."""

    def __init__(self, q: Potential, l: complex, cfg: IntegratorConfig):
        self.q = q
        self.l = l
        self.cfg = cfg
        self.steps = 0
        self.h = 0.0  # unsigned, carried across segments
        self.err_prev = 1.0
        self.k1: Optional[Tuple[complex, complex]] = None

    def _deriv(self, x: float, y: complex, dy: complex) -> Tuple[complex, complex]:
        return dy, (evaluate(self.q, x) - self.l) * y

    def _initial_step(self, x: float, y: complex, dy: complex, span: float) -> float:
        f1, f2 = self._deriv(x, y, dy)
        scale = abs(y) + abs(dy)
        rate = abs(f1) + abs(f2)
        if rate > 0.0:
            h = 0.01 * scale / rate
        else:
            h = 0.1 * span
        return min(h, span)

    def advance(self, x0: float, x1: float, y: complex, dy: complex, log_scale: float):
        """Integrate from x0 to x1 (either direction), rescaling as needed."""
        cfg = self.cfg
        sign = 1.0 if x1 > x0 else -1.0
        span = abs(x1 - x0)
        if span <= 64.0 * _EPS * max(abs(x0), abs(x1)):
            raise StepUnderflowError(
                f"recording interval [{x0}, {x1}] is below float resolution"
            )
        if self.h == 0.0:
            self.h = self._initial_step(x0, y, dy, span)
        x = x0
        k1 = self.k1
        while True:
            remaining = abs(x1 - x)
            h = min(self.h, remaining)
            final = h >= remaining * (1.0 - 1e-12)
            if final:
                h = remaining
            if h < 16.0 * _EPS * abs(x) and not final:
                raise StepUnderflowError(f"step {h} at x={x} is below machine spacing")
            self.steps += 1
            if self.steps > cfg.max_steps:
                raise MaxStepsExceededError(f"exceeded {cfg.max_steps} steps")
            hs = sign * h
            if k1 is None:
                k1 = self._deriv(x, y, dy)
            k = [k1]
            for i in range(1, 7):
                ay = y
                ady = dy
                for aij, (f1, f2) in zip(_A[i], k):
                    ay = ay + hs * aij * f1
                    ady = ady + hs * aij * f2
                k.append(self._deriv(x + _C[i] * hs, ay, ady))
            # The stage-7 input is the 5th-order solution (FSAL property).
            y5, dy5 = ay, ady
            err_y = 0.0j
            err_dy = 0.0j
            for ei, (f1, f2) in zip(_E, k):
                err_y += ei * f1
                err_dy += ei * f2
            err_y *= hs
            err_dy *= hs
            sc_y = cfg.abs_tol + cfg.rel_tol * max(abs(y), abs(y5))
            sc_dy = cfg.abs_tol + cfg.rel_tol * max(abs(dy), abs(dy5))
            err = math.sqrt(0.5 * ((abs(err_y) / sc_y) ** 2 + (abs(err_dy) / sc_dy) ** 2))
            if not math.isfinite(err):
                raise NonFiniteError(f"integration blew up near x={x}")
            if err <= 1.0:
                x = x1 if final else x + hs
                y, dy = y5, dy5
                k1 = k[6]
                s = abs(y) + abs(dy)
                if s == 0.0 or not math.isfinite(s):
                    raise NonFiniteError(f"solution state degenerate at x={x}")
                if s > cfg.rescale_band or s < 1.0 / cfg.rescale_band:
                    y /= s
                    dy /= s
                    k1 = (k1[0] / s, k1[1] / s)
                    log_scale += math.log(s)
                if err == 0.0:
                    factor = _MAX_FACTOR
                else:
                    factor = _SAFETY * err ** (-_PI_ALPHA) * self.err_prev ** _PI_BETA
                self.err_prev = max(err, 1e-10)
                self.h = h * min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
                if final:
                    break
            else:
                factor = max(_MIN_FACTOR, _SAFETY * err ** (-0.2))
                self.h = h * factor
                k1 = k[0]
        self.k1 = k1
        return y, dy, log_scale


def build_grid(q: Potential, x_start: float, x_end: float, cfg: IntegratorConfig) -> np.ndarray:
    """Recording grid from x_start toward x_end per the grid policy.

    Toward a finite endpoint the distance to the target shrinks by
    cfg.geometric_ratio per point; the endpoint itself is included only
    when the potential evaluates there, otherwise the grid stops at
    distance cfg.x_min. Toward an infinite endpoint the grid is uniform
    in log|x| and truncated at cfg.x_max.
    """
    if not math.isfinite(x_start):
        raise ValueError("x_start must be finite")
    if x_start == x_end:
        raise ValueError("x_start and x_end must differ")
    r = cfg.geometric_ratio
    if math.isinf(x_end):
        sign = 1.0 if x_end > 0 else -1.0
        s0 = sign * x_start
        if s0 >= cfg.x_max:
            raise ValueError("x_start already beyond the truncation radius")
        pts = [s0]
        base = s0
        if s0 < 1.0:
            # linear ramp up to 1, where the log-uniform section starts
            n_ramp = max(1, math.ceil((1.0 - s0) / (1.0 - r)))
            pts.extend(np.linspace(s0, 1.0, n_ramp + 1)[1:].tolist())
            base = 1.0
        growth = 1.0 / r
        s = base * growth
        while s < cfg.x_max * (1.0 - 1e-12):
            pts.append(s)
            s *= growth
        pts.append(cfg.x_max)
        return sign * np.asarray(pts)
    direction = 1.0 if x_end > x_start else -1.0
    distance = abs(x_end - x_start)
    try:
        evaluate(q, x_end)
        reachable = True
    except Exception:
        reachable = False
    stop = cfg.x_min
    dists = [distance]
    d = distance * r
    while d > stop:
        dists.append(d)
        d *= r
    pts = [x_end - direction * dd for dd in dists]
    if reachable:
        pts.append(x_end)
    if len(pts) < 2:
        pts = [x_start, x_end] if reachable else [x_start, x_end - direction * stop]
    return np.asarray(pts)


def integrate_grid(
    q: Potential,
    l: complex,
    grid: Sequence[float],
    init: ComplexState,
    cfg: Optional[IntegratorConfig] = None,
    *,
    _stepper: Optional[_Stepper] = None,
) -> SolutionTrace:
    """Integrate -y'' + q y = l y recording the state at every grid point."""
    cfg = cfg or IntegratorConfig()
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid must contain at least two points")
    if not np.all(np.isfinite(grid)):
        raise ValueError("grid points must be finite (infinite targets are truncated)")
    steps = np.diff(grid)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise ValueError("grid must be strictly monotone")
    l = complex(l)
    y, dy, ls = _normalized(complex(init.y), complex(init.dy), float(init.log_scale), cfg.rescale_band)
    ys = np.empty(grid.size, dtype=complex)
    dys = np.empty(grid.size, dtype=complex)
    lss = np.empty(grid.size, dtype=float)
    ys[0], dys[0], lss[0] = y, dy, ls
    stepper = _stepper or _Stepper(q, l, cfg)
    for i in range(1, grid.size):
        y, dy, ls = stepper.advance(grid[i - 1], grid[i], y, dy, ls)
        ys[i], dys[i], lss[i] = y, dy, ls
    return SolutionTrace(
        eigenvalue=l,
        x=grid,
        y=ys,
        dy=dys,
        log_scale=lss,
        potential=q,
        direction=1 if grid[-1] > grid[0] else -1,
    )


def integrate(
    q: Potential,
    l: complex,
    x_start: float,
    x_end: float,
    init: ComplexState,
    cfg: Optional[IntegratorConfig] = None,
) -> SolutionTrace:
    """Integrate from x_start toward x_end (or +-inf) on the default grid."""
    cfg = cfg or IntegratorConfig()
    grid = build_grid(q, x_start, x_end, cfg)
    return integrate_grid(q, l, grid, init, cfg)


def fundamental_pair(
    q: Potential,
    l: complex,
    x0: float,
    target: float,
    cfg: Optional[IntegratorConfig] = None,
) -> Tuple[SolutionTrace, SolutionTrace]:
    """Two solutions with data (1, 0) and (0, 1) at the anchor x0.

    Their Wronskian equals 1 at the anchor, so they span the full
    solution space of the equation at this eigenvalue.
    """
    cfg = cfg or IntegratorConfig()
    grid = build_grid(q, x0, target, cfg)
    first = integrate_grid(q, l, grid, ComplexState(1.0, 0.0), cfg)
    second = integrate_grid(q, l, grid, ComplexState(0.0, 1.0), cfg)
    return first, second


def concatenate_traces(traces: Sequence[SolutionTrace]) -> SolutionTrace:
    """Join traces that continue one another (shared junction points)."""
    if not traces:
        raise ValueError("need at least one trace")
    head = traces[0]
    xs = [head.x]
    ys = [head.y]
    dys = [head.dy]
    lss = [head.log_scale]
    for prev, cur in zip(traces, traces[1:]):
        if cur.eigenvalue != prev.eigenvalue or cur.direction != prev.direction:
            raise ValueError("traces do not continue one another")
        if cur.x[0] != prev.x[-1]:
            raise GridMismatchError("traces do not share a junction point")
        xs.append(cur.x[1:])
        ys.append(cur.y[1:])
        dys.append(cur.dy[1:])
        lss.append(cur.log_scale[1:])
    return SolutionTrace(
        eigenvalue=head.eigenvalue,
        x=np.concatenate(xs),
        y=np.concatenate(ys),
        dy=np.concatenate(dys),
        log_scale=np.concatenate(lss),
        potential=head.potential,
        direction=head.direction,
    )


def wronskian(t1: SolutionTrace, t2: SolutionTrace, x: float) -> complex:
    """W(x) = (y1 y2' - y1' y2)(x) including both rescale factors."""
    if t1.eigenvalue != t2.eigenvalue:
        raise ValueError("traces have different eigenvalues")
    i = t1.index_of(x)
    j = t2.index_of(x)
    mantissa = t1.y[i] * t2.dy[j] - t1.dy[i] * t2.y[j]
    return complex(mantissa * math.exp(t1.log_scale[i] + t2.log_scale[j]))


def wronskian_values(t1: SolutionTrace, t2: SolutionTrace) -> np.ndarray:
    """Wronskian along the shared grid of two traces."""
    if t1.eigenvalue != t2.eigenvalue:
        raise ValueError("traces have different eigenvalues")
    if not np.array_equal(t1.x, t2.x):
        raise GridMismatchError("traces are on different grids")
    mantissa = t1.y * t2.dy - t1.dy * t2.y
    return mantissa * np.exp(t1.log_scale + t2.log_scale)


def _as_curve(obj) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Extract (x, values, first, second derivatives) from a trace or sample."""
    if isinstance(obj, SolutionTrace):
        scale = np.exp(obj.log_scale)
        vals = obj.y * scale
        dvals = obj.dy * scale
        qx = np.asarray([evaluate(obj.potential, float(t)) for t in obj.x])
        d2 = (qx - obj.eigenvalue) * vals  # second derivative from the equation itself
        return obj.x, vals, dvals, d2
    grid = np.asarray(obj.grid, dtype=float)
    vals = np.asarray(obj.values)
    dvals = getattr(obj, "derivative_values", None)
    d2 = getattr(obj, "second_derivative_values", None)
    if dvals is None or d2 is None:
        raise MissingDerivativeError(
            "sampled input needs derivative_values and second_derivative_values"
        )
    return grid, vals, np.asarray(dvals), np.asarray(d2)


def green_identity_residual(phi, psi, c: float, d: float) -> float:
    """Defect of the integrated-by-parts Wronskian identity on [c, d].

    Computes | W(d; conj(phi), psi) - W(c; conj(phi), psi)
    - integral of (conj(phi) psi'' - conj(phi)'' psi) | with the integral
    taken by trapezoid quadrature on the shared grid. Second derivatives
    of traces are reconstructed through the differential equation rather
    than finite differences.
    """
    from .quadrature import trapezoid

    x1, v1, dv1, d21 = _as_curve(phi)
    x2, v2, dv2, d22 = _as_curve(psi)
    order = slice(None, None, 1) if x1[0] < x1[-1] else slice(None, None, -1)
    x1, v1, dv1, d21 = x1[order], v1[order], dv1[order], d21[order]
    order2 = slice(None, None, 1) if x2[0] < x2[-1] else slice(None, None, -1)
    x2, v2, dv2, d22 = x2[order2], v2[order2], dv2[order2], d22[order2]
    if not np.array_equal(x1, x2):
        raise GridMismatchError("inputs are on different grids")
    lo, hi = (c, d) if c < d else (d, c)
    tol = 4.0 * _EPS * max(1.0, abs(lo), abs(hi))
    i = np.nonzero(np.abs(x1 - lo) <= tol)[0]
    j = np.nonzero(np.abs(x1 - hi) <= tol)[0]
    if i.size == 0 or j.size == 0:
        raise GridMismatchError("c and d must be grid points")
    i, j = int(i[0]), int(j[0])
    sl = slice(i, j + 1)
    w = np.conj(v1) * dv2 - np.conj(dv1) * v2
    integrand = np.conj(v1[sl]) * d22[sl] - np.conj(d21[sl]) * v2[sl]
    integral = trapezoid(integrand, x1[sl])
    return float(abs((w[j] - w[i]) - integral))
