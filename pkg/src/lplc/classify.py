"""Endpoint classification and the self-adjointness verdict.

Each endpoint of the interval is placed in one of two classes: limit
point (at most one solution square-integrable near the endpoint) or
limit circle (every solution square-integrable there). Two engines are
provided.

* The asymptotic engine applies the exact origin rule: the operator is
  in the limit-point class at 0 precisely when the coefficient of the
  1/x^2 behaviour of the potential is >= 3/4 (non-strict inequality).
* The numeric engine integrates a fundamental pair at the probe
  eigenvalue i toward the endpoint and measures the integrals of |y|^2
  over successive dyadic shells. A geometric decay of the shell
  integrals certifies square integrability; geometric growth certifies
  its failure; shell ratios inside a guard band around 1 are reported
  as inconclusive rather than force-classified, because the borderline
  |y|^2 ~ 1/x case is genuinely log-divergent.

Which eigenvalue is probed does not matter: if every solution is
square-integrable near an endpoint for one non-real eigenvalue, the
same holds for every other one, so a single probe decides the class.
The verdicts of both endpoints compose into the deficiency indices
(2, 2), (1, 1) or (0, 0), and the operator is essentially self-adjoint
exactly when both endpoints are limit point.

All functions here are pure; endpoint classifications are independent
and may run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    AsymptoticsUnavailableError,
    InconclusiveInputError,
    InsufficientTailError,
)
from .odeint import (
    ComplexState,
    IntegratorConfig,
    SolutionTrace,
    concatenate_traces,
    integrate_grid,
)
from .potentials import EffectiveProblem, Mirrored, Potential, evaluate
from .quadrature import log_trapezoid

ORIGIN_LP_THRESHOLD = 0.75  # limit point at 0 iff x^2 q(x) -> value >= 3/4

DEFAULT_MARGIN = 0.15
DEFAULT_MAX_SHELLS = 12
DEFAULT_MIN_SHELLS = 4
DEFAULT_FIT_WINDOW = 6
_DECISIVE_LOG_RATIO = math.log(4.0)
_ZERO_FLOOR = -690.0  # ln of ~1e-300; below this a shell integral counts as zero


class EndpointVerdict(Enum):
    LIMIT_POINT = "LP"
    LIMIT_CIRCLE = "LC"
    INCONCLUSIVE = "inconclusive"


class Engine(Enum):
    ASYMPTOTIC = "asymptotic"
    NUMERIC = "numeric"


@dataclass(frozen=True)
class Endpoint:
    """One end of the working interval; position may be +-inf."""

    position: float
    side: str  # "left" or "right"

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        if math.isnan(self.position):
            raise ValueError("endpoint position must not be NaN")

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.position)

    def label(self) -> str:
        if self.position == math.inf:
            return "inf"
        if self.position == -math.inf:
            return "-inf"
        return repr(self.position)


@dataclass(frozen=True)
class TailReport:
    """Square-integrability evidence for one solution near one endpoint.

    shell_integrals[k] holds the integral of |y|^2 over the k-th dyadic
    shell, ordered toward the endpoint; values may overflow to inf, so
    the least-squares fit of the shell decay uses log_shell_integrals.
    fitted_exponent is the slope of log I_k against k; the per-shell
    ratio is its exponential. The verdict carries a guard band of width
    `margin` around ratio 1.
    """

    shell_integrals: Tuple[float, ...]
    log_shell_integrals: Tuple[float, ...]
    fitted_exponent: float
    margin: float
    solution_index: int

    def __post_init__(self):
        if len(self.shell_integrals) < 4:
            raise InsufficientTailError("need at least 4 dyadic shells")
        if any(v < 0 for v in self.shell_integrals):
            raise ValueError("shell integrals must be non-negative")
        if self.solution_index not in (1, 2):
            raise ValueError("solution_index must be 1 or 2")

    @property
    def fitted_ratio(self) -> float:
        try:
            return math.exp(self.fitted_exponent)
        except OverflowError:
            return math.inf

    @property
    def convergent(self) -> bool:
        return self.fitted_ratio < 1.0 - self.margin

    @property
    def divergent(self) -> bool:
        return self.fitted_ratio > 1.0 + self.margin

    @property
    def inconclusive(self) -> bool:
        return not (self.convergent or self.divergent)


@dataclass(frozen=True)
class EndpointClass:
    """Verdict for one endpoint, with the engine that produced it.

    `tail` is the report that decided a numeric verdict (the divergent
    one for LP, the slowest-decaying one for LC); `tails` keeps the full
    set. Asymptotic verdicts carry no tail reports.
    """

    verdict: EndpointVerdict
    engine: Engine
    tail: Optional[TailReport] = None
    tails: Tuple[TailReport, ...] = ()
    origin_coefficient: Optional[float] = None

    def __post_init__(self):
        if self.engine is Engine.ASYMPTOTIC:
            if self.tail is not None or self.tails:
                raise ValueError("asymptotic verdicts carry no tail report")
            if self.verdict is EndpointVerdict.INCONCLUSIVE:
                raise ValueError("the asymptotic engine is never inconclusive")


@dataclass(frozen=True)
class DeficiencyIndices:
    """The pair (n+, n-); equal for real potentials, each in {0, 1, 2}."""

    n_plus: int
    n_minus: int

    def __post_init__(self):
        if self.n_plus != self.n_minus or self.n_plus not in (0, 1, 2):
            raise ValueError("indices must be equal and in {0, 1, 2}")


@dataclass(frozen=True)
class SelfAdjointness:
    """Global verdict derived from the deficiency indices."""

    essentially_self_adjoint: bool
    extension_dimension: int  # real dimension n+^2 of the extension family

    def label(self) -> str:
        if self.essentially_self_adjoint:
            return "essentially_self_adjoint"
        return "needs_boundary_conditions"


@dataclass(frozen=True)
class RegularityReport:
    """Shell evidence for the convergence of the integral of |q|^2."""

    regular: bool
    finite_endpoint: bool
    shell_integrals: Tuple[float, ...]
    fitted_exponent: float
    margin: float

    def __bool__(self) -> bool:
        return self.regular


def dyadic_shell_log_integrals(
    x: np.ndarray,
    log_v: np.ndarray,
    *,
    toward: float,
    max_shells: int = 64,
) -> List[float]:
    """Log of the integrals of exp(log_v) over dyadic shells toward an endpoint.

    Shells are measured in distance from a finite endpoint position, or
    in |x| itself when `toward` is infinite; shell k spans one factor of
    two, ordered so that increasing k approaches the endpoint. Shell
    boundaries falling between samples are filled in by interpolating
    log_v linearly (exact for exponentials and powers).
    """
    x = np.asarray(x, dtype=float)
    log_v = np.asarray(log_v, dtype=float)
    if math.isinf(toward):
        coord = np.abs(x)
    else:
        coord = np.abs(toward - x)
    order = np.argsort(coord)
    coord = coord[order]
    vals = log_v[order]
    c_lo = coord[0]
    c_hi = coord[-1]
    if c_lo <= 0.0 or c_hi <= 0.0:
        raise ValueError("samples must keep a positive distance from the endpoint")
    n_shells = min(max_shells, int(math.floor(math.log2(c_hi / c_lo) + 1e-9)))
    if n_shells < 1:
        raise InsufficientTailError("samples span less than one dyadic shell")
    out: List[float] = []
    for k in range(n_shells):
        if math.isinf(toward):
            lo, hi = c_lo * 2.0**k, c_lo * 2.0 ** (k + 1)
        else:
            hi, lo = c_hi * 2.0**-k, c_hi * 2.0 ** -(k + 1)
        xs, ls = _clip_samples(coord, vals, lo, hi)
        out.append(log_trapezoid(ls, xs))
    return out


def _clip_samples(coord, vals, lo, hi):
    """Samples inside [lo, hi] with interpolated boundary values."""
    inside = (coord >= lo) & (coord <= hi)
    xs = coord[inside].tolist()
    ls = vals[inside].tolist()
    if not xs or xs[0] > lo * (1 + 1e-12):
        ls.insert(0, float(np.interp(lo, coord, vals)))
        xs.insert(0, lo)
    if xs[-1] < hi * (1 - 1e-12):
        ls.append(float(np.interp(hi, coord, vals)))
        xs.append(hi)
    return np.asarray(xs), np.asarray(ls)


def fit_shell_exponent(log_integrals: Sequence[float], fit_window: int = DEFAULT_FIT_WINDOW) -> float:
    """Least-squares slope of log I_k against k over the last `fit_window` shells."""
    logs = np.asarray(log_integrals, dtype=float)
    if logs.size < 2:
        raise InsufficientTailError("need at least two shells to fit")
    tail = logs[-fit_window:] if logs.size > fit_window else logs
    if np.all(tail <= _ZERO_FLOOR):
        return -math.inf
    if np.any(np.isinf(tail)):
        # a vanishing shell among finite ones: treat as super-geometric decay
        return -math.inf if tail[-1] <= _ZERO_FLOOR else math.inf
    k = np.arange(tail.size, dtype=float)
    slope = np.polyfit(k, tail, 1)[0]
    return float(slope)


def square_integrable_tail(
    trace: SolutionTrace,
    endpoint: Endpoint,
    *,
    margin: float = DEFAULT_MARGIN,
    fit_window: int = DEFAULT_FIT_WINDOW,
    solution_index: int = 1,
) -> TailReport:
    """Dyadic-shell report on the integral of |y|^2 toward the endpoint.

    Shell integrals are accumulated in the log domain (the trace may be
    rescaled by thousands of orders of magnitude), and the decay rate is
    the least-squares slope of log I_k versus the shell index.
    """
    log_v = 2.0 * trace.log_abs_y()
    logs = dyadic_shell_log_integrals(trace.x, log_v, toward=endpoint.position)
    if len(logs) < 4:
        raise InsufficientTailError("trace spans fewer than 4 dyadic shells")
    slope = fit_shell_exponent(logs, fit_window)
    return TailReport(
        shell_integrals=tuple(_safe_exp(v) for v in logs),
        log_shell_integrals=tuple(logs),
        fitted_exponent=slope,
        margin=margin,
        solution_index=solution_index,
    )


def _safe_exp(v: float) -> float:
    try:
        return math.exp(v)
    except OverflowError:
        return math.inf


def is_regular_endpoint(
    q: Potential,
    endpoint: Endpoint,
    probe: float,
    *,
    margin: float = DEFAULT_MARGIN,
    max_shells: int = DEFAULT_MAX_SHELLS,
    samples_per_shell: int = 33,
) -> RegularityReport:
    """Whether the endpoint is finite with a square-integrable potential.

    The integral of |q|^2 over dyadic shells between the probe point and
    the endpoint must decay geometrically (fitted per-shell ratio below
    1 - margin). A regular endpoint is always limit circle.
    """
    if endpoint.is_infinite:
        return RegularityReport(False, False, (), math.nan, margin)
    e = endpoint.position
    distance = abs(probe - e)
    if distance == 0.0:
        raise ValueError("probe must differ from the endpoint")
    sign = 1.0 if probe > e else -1.0
    logs: List[float] = []
    for k in range(max_shells):
        hi = distance * 2.0**-k
        lo = hi / 2.0
        d = np.geomspace(lo, hi, samples_per_shell)
        vals = np.asarray([evaluate(q, e + sign * t) for t in d])
        with np.errstate(divide="ignore"):
            log_v = 2.0 * np.log(np.abs(vals))
        logs.append(log_trapezoid(log_v, d))
    integrals = tuple(_safe_exp(v) for v in logs)
    if all(v <= _ZERO_FLOOR for v in logs):
        return RegularityReport(True, True, integrals, -math.inf, margin)
    slope = fit_shell_exponent(logs)
    regular = _safe_exp(slope) < 1.0 - margin
    return RegularityReport(regular, True, integrals, slope, margin)


def classify_asymptotic(problem: EffectiveProblem) -> EndpointClass:
    """Exact origin classification from the 1/x^2 coefficient of the potential.

    Limit point iff the coefficient is >= 3/4 (the threshold itself is
    limit point). Raises AsymptoticsUnavailableError when the potential
    carries no exact origin coefficient.
    """
    coeff = problem.q_eff.origin_coefficient()
    if coeff is None:
        raise AsymptoticsUnavailableError(
            "potential has no exact origin coefficient; use the numeric engine"
        )
    v = EndpointVerdict.LIMIT_POINT if coeff >= ORIGIN_LP_THRESHOLD else EndpointVerdict.LIMIT_CIRCLE
    return EndpointClass(verdict=v, engine=Engine.ASYMPTOTIC, origin_coefficient=coeff)


def _shell_edges(endpoint: Endpoint, anchor: float, cfg: IntegratorConfig, max_shells: int) -> List[float]:
    """Recording-grid edges, one entry per shell boundary, anchor first."""
    if endpoint.is_infinite:
        if anchor <= 0.0:
            raise ValueError("anchor must be positive toward an infinite endpoint")
        n = min(max_shells, int(math.floor(math.log2(cfg.x_max / anchor))))
        if n < DEFAULT_MIN_SHELLS:
            raise InsufficientTailError("truncation radius leaves too few shells")
        return [anchor * 2.0**k for k in range(n + 1)]
    e = endpoint.position
    distance = abs(anchor - e)
    if distance == 0.0:
        raise ValueError("anchor must be interior, not the endpoint itself")
    n = min(max_shells, int(math.floor(math.log2(distance / cfg.x_min))))
    if n < DEFAULT_MIN_SHELLS:
        raise InsufficientTailError("endpoint stand-off leaves too few shells")
    sign = 1.0 if anchor > e else -1.0
    return [e + sign * distance * 2.0**-k for k in range(n + 1)]


def _segment_grid(a: float, b: float, points: int) -> np.ndarray:
    """Log-uniform recording points from a to b (in distance-to-endpoint terms
    both shell orientations reduce to a geometric progression)."""
    if a > 0 and b > 0:
        return np.geomspace(a, b, points)
    if a < 0 and b < 0:
        return -np.geomspace(-a, -b, points)
    return np.linspace(a, b, points)


def _decisively_divergent(logs: Sequence[float]) -> bool:
    if len(logs) < DEFAULT_MIN_SHELLS:
        return False
    d1 = logs[-1] - logs[-2]
    d2 = logs[-2] - logs[-3]
    return d1 > _DECISIVE_LOG_RATIO and d2 > _DECISIVE_LOG_RATIO


def _shell_log_integral(seg: SolutionTrace) -> float:
    """Log of the integral of |y|^2 over one shell segment."""
    log_v = 2.0 * seg.log_abs_y()
    if seg.x[0] < seg.x[-1]:
        return log_trapezoid(log_v, seg.x)
    return log_trapezoid(log_v[::-1], seg.x[::-1])


def _integrate_shells(q, eigenvalue, edges, init, cfg, points_per_shell, early_stop):
    """March one solution shell by shell; returns (trace, per-shell logs)."""
    state = init
    segments = []
    logs: List[float] = []
    for k in range(len(edges) - 1):
        grid = _segment_grid(edges[k], edges[k + 1], points_per_shell + 1)
        seg = integrate_grid(q, eigenvalue, grid, state, cfg)
        segments.append(seg)
        logs.append(_shell_log_integral(seg))
        state = seg.final_state
        if early_stop and _decisively_divergent(logs):
            break
    return concatenate_traces(segments), logs


def classify_numeric(
    q: Potential,
    endpoint: Endpoint,
    anchor: float,
    cfg: Optional[IntegratorConfig] = None,
    *,
    eigenvalue: complex = 1j,
    margin: float = DEFAULT_MARGIN,
    max_shells: int = DEFAULT_MAX_SHELLS,
    points_per_shell: int = 16,
    fit_window: int = DEFAULT_FIT_WINDOW,
) -> EndpointClass:
    """Numeric endpoint classification at a non-real probe eigenvalue.

    A fundamental pair is integrated from the anchor toward the endpoint
    and the square-integrability of each spanning solution is judged
    from its dyadic-shell report: limit circle iff both tails converge,
    limit point if at least one diverges, inconclusive when a fitted
    ratio falls inside the guard band. Toward an infinite endpoint the
    subdominant solution is recovered by reverse integration from the
    far truncation point, which suppresses contamination by the growing
    mode; the shell march also stops early once divergence is decisive,
    so rapidly growing solutions are not chased across the whole range.

    For a left-infinite endpoint the problem is mirrored (x -> -x) and
    classified toward +infinity.
    """
    cfg = cfg or IntegratorConfig()
    if endpoint.position == -math.inf:
        mirrored = Endpoint(math.inf, "right")
        return classify_numeric(
            Mirrored(q),
            mirrored,
            -anchor,
            cfg,
            eigenvalue=eigenvalue,
            margin=margin,
            max_shells=max_shells,
            points_per_shell=points_per_shell,
            fit_window=fit_window,
        )
    edges = _shell_edges(endpoint, anchor, cfg, max_shells)
    reports: List[TailReport] = []
    shell_logs: List[List[float]] = []
    for seed in (ComplexState(1.0, 0.0), ComplexState(0.0, 1.0)):
        _, logs = _integrate_shells(
            q, eigenvalue, edges, seed, cfg, points_per_shell, early_stop=True
        )
        shell_logs.append(logs)
    # Both solutions must be judged over the same shells.
    n_common = min(len(v) for v in shell_logs)
    for index, logs in enumerate(shell_logs, start=1):
        use = logs[:n_common]
        slope = fit_shell_exponent(use, fit_window)
        reports.append(
            TailReport(
                shell_integrals=tuple(_safe_exp(v) for v in use),
                log_shell_integrals=tuple(use),
                fitted_exponent=slope,
                margin=margin,
                solution_index=index,
            )
        )
    if endpoint.is_infinite:
        # Keep the more divergent forward report as the dominant-solution
        # evidence and replace the other by the reverse-recovered tail.
        dominant = max(reports, key=lambda r: r.fitted_exponent)
        dominant = TailReport(
            shell_integrals=dominant.shell_integrals,
            log_shell_integrals=dominant.log_shell_integrals,
            fitted_exponent=dominant.fitted_exponent,
            margin=margin,
            solution_index=1,
        )
        _, rev_logs = _reverse_subdominant(
            q, eigenvalue, edges[: n_common + 1], cfg, points_per_shell
        )
        rev_slope = fit_shell_exponent(rev_logs, fit_window)
        subdominant = TailReport(
            shell_integrals=tuple(_safe_exp(v) for v in rev_logs),
            log_shell_integrals=tuple(rev_logs),
            fitted_exponent=rev_slope,
            margin=margin,
            solution_index=2,
        )
        reports = [dominant, subdominant]
    return _compose_endpoint_class(reports)


def _reverse_subdominant(q, eigenvalue, edges, cfg, points_per_shell):
    """Integrate backward from the truncation point toward the anchor.

    Backward in x the solution that decays toward infinity is the
    growing direction, so any seed relaxes onto it and the returned
    trace represents the subdominant mode away from the start point.
    """
    segments = []
    logs: List[float] = []
    state = ComplexState(1.0, 0.0)
    for k in range(len(edges) - 1, 0, -1):
        grid = _segment_grid(edges[k], edges[k - 1], points_per_shell + 1)
        seg = integrate_grid(q, eigenvalue, grid, state, cfg)
        segments.append(seg)
        logs.append(_shell_log_integral(seg))
        state = seg.final_state
    logs.reverse()  # order shells toward the endpoint
    return concatenate_traces(segments), logs


def _compose_endpoint_class(reports: List[TailReport]) -> EndpointClass:
    if any(r.divergent for r in reports):
        decisive = next(r for r in reports if r.divergent)
        verdict_ = EndpointVerdict.LIMIT_POINT
    elif all(r.convergent for r in reports):
        decisive = max(reports, key=lambda r: r.fitted_exponent)
        verdict_ = EndpointVerdict.LIMIT_CIRCLE
    else:
        decisive = next(r for r in reports if r.inconclusive)
        verdict_ = EndpointVerdict.INCONCLUSIVE
    return EndpointClass(
        verdict=verdict_,
        engine=Engine.NUMERIC,
        tail=decisive,
        tails=tuple(reports),
    )


def deficiency_indices(class_left: EndpointClass, class_right: EndpointClass) -> DeficiencyIndices:
    """Compose the endpoint classes: each limit-circle end contributes one."""
    for c in (class_left, class_right):
        if c.verdict is EndpointVerdict.INCONCLUSIVE:
            raise InconclusiveInputError("cannot compose an inconclusive endpoint")
    n = sum(1 for c in (class_left, class_right) if c.verdict is EndpointVerdict.LIMIT_CIRCLE)
    return DeficiencyIndices(n_plus=n, n_minus=n)


def verdict(d: DeficiencyIndices) -> SelfAdjointness:
    """Essentially self-adjoint iff the indices vanish; else an n^2 family."""
    return SelfAdjointness(
        essentially_self_adjoint=(d.n_plus == 0),
        extension_dimension=d.n_plus * d.n_plus,
    )


@dataclass(frozen=True)
class ClassificationReport:
    """Both endpoint verdicts with their composition, ready to serialize."""

    a: float
    b: float
    left: EndpointClass
    right: EndpointClass
    indices: Optional[DeficiencyIndices]
    self_adjointness: Optional[SelfAdjointness]

    @property
    def inconclusive(self) -> bool:
        return self.indices is None


def default_anchor(a: float, b: float) -> Tuple[float, float]:
    """Anchor points for the left and right endpoint analyses.

    Midpoint for a finite interval, one unit inside a finite endpoint
    otherwise, and +-1 on a fully infinite line.
    """
    if a >= b:
        raise ValueError("interval must satisfy a < b")
    a_inf = math.isinf(a)
    b_inf = math.isinf(b)
    if not a_inf and not b_inf:
        mid = 0.5 * (a + b)
        return mid, mid
    if a_inf and b_inf:
        return -1.0, 1.0
    if a_inf:
        anchor = min(b - 1.0, -1.0)
        return anchor, b - 1.0
    anchor_left = a + 1.0
    anchor_right = max(a + 1.0, 1.0)
    return anchor_left, anchor_right


def classify_interval(
    q,
    a: float,
    b: float,
    *,
    engine: str = "both",
    cfg: Optional[IntegratorConfig] = None,
    anchors: Optional[Tuple[float, float]] = None,
    eigenvalue: complex = 1j,
    margin: float = DEFAULT_MARGIN,
    max_shells: int = DEFAULT_MAX_SHELLS,
) -> ClassificationReport:
    """Classify both endpoints of (a, b) and compose the global verdict.

    q may be a Potential or an EffectiveProblem (whose q_eff is used).
    engine="asymptotic" uses the exact origin rule only (available just
    for a left endpoint at 0); engine="numeric" integrates at both ends;
    engine="both" (default) prefers the exact rule where it applies and
    falls back to the numeric engine elsewhere.
    """
    if engine not in ("both", "asymptotic", "numeric"):
        raise ValueError("engine must be 'both', 'asymptotic' or 'numeric'")
    cfg = cfg or IntegratorConfig()
    if isinstance(q, EffectiveProblem):
        problem: EffectiveProblem = q
        q = problem.q_eff
    else:
        problem = EffectiveProblem(n=3, l=0, base=q, rho=0.0, q_eff=q)
    anchor_left, anchor_right = anchors or default_anchor(a, b)
    left_ep = Endpoint(a, "left")
    right_ep = Endpoint(b, "right")

    def one(ep: Endpoint, anchor: float) -> EndpointClass:
        asym_ok = ep.side == "left" and ep.position == 0.0
        if engine in ("both", "asymptotic") and asym_ok:
            try:
                return classify_asymptotic(problem)
            except AsymptoticsUnavailableError:
                if engine == "asymptotic":
                    raise
        if engine == "asymptotic":
            raise AsymptoticsUnavailableError(
                f"no asymptotic rule applies at endpoint {ep.label()}"
            )
        return classify_numeric(
            q, ep, anchor, cfg, eigenvalue=eigenvalue, margin=margin, max_shells=max_shells
        )

    left = one(left_ep, anchor_left)
    right = one(right_ep, anchor_right)
    try:
        idx = deficiency_indices(left, right)
        sa = verdict(idx)
    except InconclusiveInputError:
        idx = None
        sa = None
    return ClassificationReport(a=a, b=b, left=left, right=right, indices=idx, self_adjointness=sa)
