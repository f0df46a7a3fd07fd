import math

import numpy as np
import pytest

from lplc.classify import (
    ClassificationReport,
    DeficiencyIndices,
    Endpoint,
    EndpointClass,
    EndpointVerdict,
    Engine,
    classify_asymptotic,
    classify_interval,
    classify_numeric,
    deficiency_indices,
    is_regular_endpoint,
    square_integrable_tail,
    verdict,
)
from lplc.errors import (
    AsymptoticsUnavailableError,
    InconclusiveInputError,
    InsufficientTailError,
)
from lplc.odeint import IntegratorConfig, SolutionTrace
from lplc.potentials import (
    Coulomb,
    Harmonic,
    InverseSquare,
    PowerLaw,
    Tabulated,
    Zero,
    effective_potential,
)

CFG = IntegratorConfig()
ORIGIN = Endpoint(0.0, "left")
PLUS_INF = Endpoint(math.inf, "right")

LP = EndpointVerdict.LIMIT_POINT
LC = EndpointVerdict.LIMIT_CIRCLE
INC = EndpointVerdict.INCONCLUSIVE


def synthetic_trace(fn, grid):
    """A fake trace holding exact samples of a real function (log_scale 0)."""
    grid = np.asarray(grid, dtype=float)
    return SolutionTrace(
        eigenvalue=1j,
        x=grid,
        y=np.asarray([fn(t) for t in grid], dtype=complex),
        dy=np.zeros(grid.size, dtype=complex),
        log_scale=np.zeros(grid.size),
        potential=Zero(),
        direction=-1,
    )


def shells_grid(n_shells=12, per_shell=16):
    return np.geomspace(1.0, 2.0**-n_shells, n_shells * per_shell + 1)


class TestSquareIntegrableTail:
    def test_linear_solution_ratio_one_eighth(self):
        # oracle: integral of x^2 over [2^-k-1, 2^-k] is (1 - 1/8)/3 * 8^-k,
        # so consecutive shells shrink by exactly 2^-3
        report = square_integrable_tail(synthetic_trace(lambda x: x, shells_grid()), ORIGIN)
        exact = [(1.0 - 0.125) / 3.0 * 8.0**-k for k in range(12)]
        got = report.shell_integrals
        assert len(got) == 12
        for g, e in zip(got, exact):
            assert g == pytest.approx(e, rel=2e-3)
        assert report.fitted_ratio == pytest.approx(0.125, rel=1e-3)
        assert report.convergent and not report.divergent

    def test_inverse_solution_doubles(self):
        # oracle: integral of x^-2 over shells doubles toward the origin
        report = square_integrable_tail(synthetic_trace(lambda x: 1.0 / x, shells_grid()), ORIGIN)
        assert report.fitted_ratio == pytest.approx(2.0, rel=1e-3)
        assert report.divergent

    def test_borderline_is_inconclusive(self):
        # |y|^2 = 1/x gives the log-divergent boundary case: every shell
        # integral equals log 2, ratio 1, inside the guard band
        report = square_integrable_tail(
            synthetic_trace(lambda x: x**-0.5, shells_grid()), ORIGIN
        )
        assert report.fitted_ratio == pytest.approx(1.0, abs=5e-3)
        assert report.inconclusive

    def test_insufficient_tail(self):
        grid = np.geomspace(1.0, 0.2, 30)  # spans barely 2 shells
        with pytest.raises(InsufficientTailError):
            square_integrable_tail(synthetic_trace(lambda x: x, grid), ORIGIN)


class TestRegularEndpoint:
    def test_zero_potential_regular(self):
        assert bool(is_regular_endpoint(Zero(), ORIGIN, 1.0)) is True

    def test_coulomb_not_regular(self):
        # oracle: integral of x^-2 diverges at 0; shells grow by 2
        report = is_regular_endpoint(Coulomb(1.0), ORIGIN, 1.0)
        assert bool(report) is False
        assert math.exp(report.fitted_exponent) == pytest.approx(2.0, rel=1e-2)

    def test_mild_singularity_regular(self):
        # oracle: integral of x^-1/2 converges (antiderivative 2 sqrt x)
        report = is_regular_endpoint(PowerLaw(1.0, -0.25), ORIGIN, 1.0)
        assert bool(report) is True

    def test_infinite_endpoint_never_regular(self):
        assert bool(is_regular_endpoint(Zero(), PLUS_INF, 1.0)) is False


class TestAsymptoticEngine:
    def test_free_s_wave_three_dimensions(self):
        cls = classify_asymptotic(effective_potential(Zero(), 3, 0))
        assert cls.verdict is LC
        assert cls.engine is Engine.ASYMPTOTIC
        assert cls.tail is None

    def test_free_p_wave_three_dimensions(self):
        assert classify_asymptotic(effective_potential(Zero(), 3, 1)).verdict is LP

    def test_coulomb_dominated_by_centrifugal_term(self):
        cls = classify_asymptotic(effective_potential(Coulomb(-1.0), 3, 1))
        assert cls.verdict is LP

    def test_threshold_value_is_limit_point(self):
        # n=4, l=0 sits exactly on the 3/4 threshold; inequality non-strict
        ep = effective_potential(Zero(), 4, 0)
        assert ep.rho == 0.75
        assert classify_asymptotic(ep).verdict is LP

    def test_unavailable_for_tabulated(self):
        tab = Tabulated([0.1, 0.2, 0.3, 0.4], [1.0, 1.0, 1.0, 1.0])
        with pytest.raises(AsymptoticsUnavailableError):
            classify_asymptotic(effective_potential(tab, 3, 0))


class TestNumericEngine:
    def test_free_at_infinity_limit_point(self):
        cls = classify_numeric(Zero(), PLUS_INF, 1.0, CFG)
        assert cls.verdict is LP
        assert cls.engine is Engine.NUMERIC
        assert cls.tail is not None and cls.tail.divergent
        # the reverse-recovered subdominant tail is square integrable
        sub = [t for t in cls.tails if t.solution_index == 2][0]
        assert sub.convergent

    def test_free_at_regular_origin_limit_circle(self):
        cls = classify_numeric(Zero(), ORIGIN, 1.0, CFG)
        assert cls.verdict is LC
        assert all(t.convergent for t in cls.tails)

    def test_inverse_square_strong_repulsion_limit_point(self):
        cls = classify_numeric(InverseSquare(2.0), ORIGIN, 1.0, CFG)
        assert cls.verdict is LP

    def test_borderline_constants_inconclusive_not_wrong(self):
        for c, true_verdict in ((0.70, LC), (0.80, LP)):
            got = classify_numeric(InverseSquare(c), ORIGIN, 1.0, CFG).verdict
            assert got in (INC, true_verdict)

    def test_minus_infinity_mirrors(self):
        cls = classify_numeric(Harmonic(1.0), Endpoint(-math.inf, "left"), -1.0, CFG)
        assert cls.verdict is LP


class TestComposition:
    def test_theorem_cases(self):
        lc = EndpointClass(LC, Engine.ASYMPTOTIC)
        lp = EndpointClass(LP, Engine.ASYMPTOTIC)
        assert deficiency_indices(lc, lc) == DeficiencyIndices(2, 2)
        assert deficiency_indices(lp, lc) == DeficiencyIndices(1, 1)
        assert deficiency_indices(lp, lp) == DeficiencyIndices(0, 0)

    def test_symmetry(self):
        lc = EndpointClass(LC, Engine.ASYMPTOTIC)
        lp = EndpointClass(LP, Engine.ASYMPTOTIC)
        assert deficiency_indices(lp, lc) == deficiency_indices(lc, lp)

    def test_inconclusive_rejected(self):
        lc = EndpointClass(LC, Engine.ASYMPTOTIC)
        inc = EndpointClass(INC, Engine.NUMERIC)
        with pytest.raises(InconclusiveInputError):
            deficiency_indices(lc, inc)

    def test_verdict_dimensions(self):
        assert verdict(DeficiencyIndices(0, 0)).essentially_self_adjoint is True
        assert verdict(DeficiencyIndices(0, 0)).extension_dimension == 0
        one = verdict(DeficiencyIndices(1, 1))
        assert not one.essentially_self_adjoint and one.extension_dimension == 1
        assert verdict(DeficiencyIndices(2, 2)).extension_dimension == 4

    def test_indices_invariant(self):
        with pytest.raises(ValueError):
            DeficiencyIndices(2, 1)


def asymptotics_suite():
    """Analytic-asymptotics potentials with origin coefficient outside [0.70, 0.80]."""
    suite = [Zero(), Coulomb(1.0), Coulomb(-1.0)]
    suite += [InverseSquare(c) for c in (0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0)]
    suite += [effective_potential(Zero(), n, l).q_eff for n, l in ((3, 1), (2, 0), (4, 0), (5, 1))]
    suite += [effective_potential(Coulomb(-1.0), 3, 1).q_eff]
    return [q for q in suite if not 0.70 <= (q.origin_coefficient() or 0.0) <= 0.80]


class TestEngineCrossValidation:
    @pytest.mark.parametrize("q", asymptotics_suite(), ids=lambda q: q.dumps())
    def test_engines_agree_at_origin(self, q):
        coeff = q.origin_coefficient()
        assert coeff is not None
        expected = LP if coeff >= 0.75 else LC
        assert classify_numeric(q, ORIGIN, 1.0, CFG).verdict is expected

    @pytest.mark.parametrize("q", asymptotics_suite(), ids=lambda q: q.dumps())
    def test_probe_eigenvalue_independence(self, q):
        at_i = classify_numeric(q, ORIGIN, 1.0, CFG, eigenvalue=1j).verdict
        at_2i = classify_numeric(q, ORIGIN, 1.0, CFG, eigenvalue=2j).verdict
        assert at_i is at_2i

    def test_limit_point_set_upward_closed_in_c(self):
        grid = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0]
        verdicts = [classify_numeric(InverseSquare(c), ORIGIN, 1.0, CFG).verdict for c in grid]
        seen_lp = False
        for v in verdicts:
            if v is LP:
                seen_lp = True
            elif seen_lp:
                pytest.fail(f"LP set not upward closed: {list(zip(grid, verdicts))}")

    def test_regular_endpoint_implies_limit_circle(self):
        cases = [
            (Zero(), ORIGIN, 1.0),
            (PowerLaw(1.0, -0.25), ORIGIN, 1.0),
            (Harmonic(1.0), ORIGIN, 1.0),
            (Zero(), Endpoint(1.0, "right"), 0.5),
        ]
        for q, ep, anchor in cases:
            assert bool(is_regular_endpoint(q, ep, anchor)) is True
            assert classify_numeric(q, ep, anchor, CFG).verdict is LC

    def test_anchor_independence(self):
        for c, expected in ((2.0, LP), (0.25, LC)):
            for anchor in (0.7, 1.0, 1.5):
                got = classify_numeric(InverseSquare(c), ORIGIN, anchor, CFG).verdict
                assert got is expected, (c, anchor)


class TestClassifyInterval:
    def test_free_s_wave_half_line(self):
        report = classify_interval(effective_potential(Zero(), 3, 0), 0.0, math.inf)
        assert report.left.verdict is LC and report.left.engine is Engine.ASYMPTOTIC
        assert report.right.verdict is LP and report.right.engine is Engine.NUMERIC
        assert report.indices == DeficiencyIndices(1, 1)
        assert report.self_adjointness.essentially_self_adjoint is False
        assert report.self_adjointness.extension_dimension == 1

    def test_free_p_wave_half_line_self_adjoint(self):
        report = classify_interval(effective_potential(Zero(), 3, 1), 0.0, math.inf)
        assert report.indices == DeficiencyIndices(0, 0)
        assert report.self_adjointness.essentially_self_adjoint is True

    def test_free_unit_interval(self):
        report = classify_interval(Zero(), 0.0, 1.0)
        assert report.indices == DeficiencyIndices(2, 2)
        assert report.self_adjointness.extension_dimension == 4

    def test_numeric_engine_everywhere(self):
        report = classify_interval(Zero(), 0.0, 1.0, engine="numeric")
        assert report.left.engine is Engine.NUMERIC
        assert report.right.engine is Engine.NUMERIC
        assert report.indices == DeficiencyIndices(2, 2)

    def test_inconclusive_report(self):
        report = classify_interval(InverseSquare(0.75), 0.0, 1.0, engine="numeric")
        assert report.left.verdict is INC
        assert report.inconclusive and report.indices is None

    def test_asymptotic_engine_errors_off_origin(self):
        with pytest.raises(AsymptoticsUnavailableError):
            classify_interval(Zero(), 1.0, math.inf, engine="asymptotic")

    def test_matches_deficiency_space_dimension(self):
        # the half-line free operator has one-dimensional deficiency spaces
        report = classify_interval(Zero(), 0.0, math.inf, engine="numeric")
        assert report.indices == DeficiencyIndices(1, 1)
