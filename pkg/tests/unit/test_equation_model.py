# tests/unit/test_equation_model.py
import json
import math
import os
import sys
from fractions import Fraction

import pytest

# Add scripts directory to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..', 'scripts'))
sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..'))  # Project root

from summa.equation_model import (
    check_conditions,
    is_normal_form,
    newton_polygon,
    parse_series,
    parse_spec,
    prepare_normal_form,
    resonant_order,
)
from summa.errors import (
    ConditionError,
    DegenerateCoefficientError,
    ResonanceError,
    SpecValidationError,
    TruncationOverflowError,
)
from summa.formal_solver import TransformRecord, apply_transform, solve_formal
from summa.series_core import Coeff, TruncatedSeries, valuation
from tests.fixtures.equation_specs import ANTICIPATIVE_SPEC, DEGENERATE_SPEC, EULER_SPEC, RESONANT_SPEC, spec_json


class TestParseSeries:
    """Coefficient descriptions"""

    def test_polynomial_string(self):
        """'x^2+3x' parses with implicit multiplication"""
        series = parse_series("x^2+3x", 4)
        assert series.coefficient(1) == 3
        assert series.coefficient(2) == 1
        assert series.trunc == (4,)

    def test_imaginary_unit(self):
        """i is the imaginary unit"""
        assert parse_series("2 + i", 2).coefficient(0) == Coeff(2, 1)

    def test_coefficient_list(self):
        """Lists give coefficients from the constant term up"""
        series = parse_series(["1/2", 0, 3], 2)
        assert series.coefficient(0) == Fraction(1, 2)
        assert series.coefficient(2) == 3

    def test_degree_extends_truncation(self):
        """A polynomial longer than trunc keeps all its terms"""
        assert parse_series("x^5", 2).trunc == (5,)

    def test_irrational_rejected_in_exact_mode(self):
        """sqrt(2) has no exact representation"""
        with pytest.raises(SpecValidationError):
            parse_series("sqrt(2)*x", 3)

    def test_irrational_accepted_in_float_mode(self):
        """Float mode evaluates irrational coefficients"""
        series = parse_series("sqrt(2)*x", 3, mode="float")
        assert series.coefficient(1) == pytest.approx(math.sqrt(2))

    def test_garbage(self):
        """Unparseable text is a validation error"""
        with pytest.raises(SpecValidationError):
            parse_series("x +* ", 3)


class TestParseSpec:
    """Spec documents"""

    def test_euler_spec(self):
        """The Euler spec parses into a valid equation"""
        eq = parse_spec(spec_json(EULER_SPEC))
        assert eq.k == 1
        assert eq.trunc == (6, 8)
        assert eq.b0 == 0
        assert eq.c0 == 1
        assert eq.nonlinear == {}

    def test_resonance_rejected(self):
        """b(0) = 1 is the resonance case"""
        with pytest.raises(ResonanceError) as exc_info:
            parse_spec(spec_json(RESONANT_SPEC))
        assert "resonance" in str(exc_info.value)
        assert exc_info.value.order == 1

    def test_resonance_allowed_by_flag(self):
        """--allow-resonance defers the failure to the solver"""
        eq = parse_spec(spec_json(RESONANT_SPEC), allow_resonance=True)
        assert eq.allow_resonance

    def test_degenerate_leading_coefficient(self):
        """c(0) = 0 is rejected"""
        with pytest.raises(DegenerateCoefficientError):
            parse_spec(spec_json(DEGENERATE_SPEC))

    def test_overrides(self):
        """trunc and mode arguments override the document"""
        eq = parse_spec(spec_json(EULER_SPEC), trunc=(3, 5), mode="float")
        assert eq.trunc == (3, 5)
        assert eq.mode == "float"
        assert eq.a.mode == "float"

    def test_missing_field(self):
        """k, a, b and c are required"""
        document = dict(EULER_SPEC)
        del document["c"]
        with pytest.raises(SpecValidationError, match="missing"):
            parse_spec(json.dumps(document))

    def test_unknown_field(self):
        """Unknown keys are rejected"""
        with pytest.raises(SpecValidationError, match="Unknown"):
            parse_spec(spec_json(EULER_SPEC, beta=1))

    def test_invalid_json(self):
        """Malformed JSON is a validation error"""
        with pytest.raises(SpecValidationError):
            parse_spec("{not json")

    def test_nonlinear_mapping_form(self):
        """Nonlinear terms may be given as {'(i,j,alpha)': coeff}"""
        eq = parse_spec(spec_json(EULER_SPEC, nonlinear={"(0,2,0)": "1"}))
        assert list(eq.nonlinear) == [(0, 2, 0)]

    def test_duplicate_nonlinear_term(self):
        """The same index twice is ambiguous"""
        term = {"i": 0, "j": 2, "alpha": 0, "coeff": "1"}
        with pytest.raises(SpecValidationError, match="Duplicate"):
            parse_spec(spec_json(EULER_SPEC, nonlinear=[term, term]))

    def test_low_order_nonlinear_term(self):
        """Nonlinear indices must satisfy i + j + alpha ≥ 2"""
        term = {"i": 0, "j": 1, "alpha": 0, "coeff": "1"}
        with pytest.raises(SpecValidationError):
            parse_spec(spec_json(EULER_SPEC, nonlinear=[term]))

    def test_resonant_order_helper(self):
        """Only positive integers are resonant"""
        assert resonant_order(Coeff(3)) == 3
        assert resonant_order(Coeff(0)) is None
        assert resonant_order(Coeff(Fraction(1, 2))) is None
        assert resonant_order(2.0 + 0j) == 2


class TestCheckConditions:
    """(F), (F') and resonance flags"""

    def test_euler_satisfies_f(self):
        """No nonlinear terms: (F) holds vacuously"""
        report = check_conditions(parse_spec(spec_json(EULER_SPEC)))
        assert report.condition_F
        assert report.q == math.inf

    def test_derivative_square_violates_f(self):
        """a_(1,0,2)(0) = 1 ≠ 0 breaks (F)"""
        report = check_conditions(parse_spec(spec_json(ANTICIPATIVE_SPEC)))
        assert not report.condition_F
        assert not report.condition_F_prime
        assert report.offending_terms == [(1, 0, 2)]

    def test_vanishing_derivative_coefficient(self):
        """a_(1,0,1)(x) = x keeps (F)"""
        term = {"i": 1, "j": 0, "alpha": 1, "coeff": "x"}
        report = check_conditions(parse_spec(spec_json(EULER_SPEC, nonlinear=[term])))
        assert report.condition_F

    def test_f_prime_rescues_with_forcing(self):
        """val(a_(0,1,1)(0)) + jq > 0 when a_(2,0,0) supplies q = 1"""
        terms = [{"i": 0, "j": 1, "alpha": 1, "coeff": "1"}, {"i": 2, "j": 0, "alpha": 0, "coeff": "x"}]
        report = check_conditions(parse_spec(spec_json(EULER_SPEC, nonlinear=terms)))
        assert not report.condition_F
        assert report.condition_F_prime
        assert report.q == 1

    def test_idempotent(self):
        """check_conditions is pure"""
        eq = parse_spec(spec_json(ANTICIPATIVE_SPEC))
        assert check_conditions(eq) == check_conditions(eq)

    def test_report_serializes_infinite_q(self):
        """q = +∞ is reported as null"""
        report = check_conditions(parse_spec(spec_json(EULER_SPEC)))
        assert report.to_dict()["q"] is None


class TestPrepareNormalForm:
    """Preparation transform u = v + x·w"""

    def test_euler_already_normal(self):
        """val(a) = 1 ≥ k and no derivative terms: transform skipped"""
        eq = parse_spec(spec_json(EULER_SPEC))
        normal = prepare_normal_form(eq)
        assert not normal.applied
        assert normal.equation is eq
        assert normal.head.coefficient(1, 1) == 1
        assert normal.head.coefficient(1, 2) == 0

    def test_derivative_term_rewritten(self):
        """a_(1,0,1) = x is moved onto the x∂ₓ slot and val(ã) ≥ k"""
        term = {"i": 1, "j": 0, "alpha": 1, "coeff": "x"}
        eq = parse_spec(spec_json(EULER_SPEC, nonlinear=[term], trunc=[5, 7]))
        normal = prepare_normal_form(eq)
        assert normal.applied
        assert normal.equation.euler_form
        assert valuation(normal.equation.a, "x") >= 1
        assert normal.equation.b0 == eq.b0
        assert normal.equation.c0 == eq.c0
        assert is_normal_form(normal.equation)

    def test_solution_agrees_with_transform(self):
        """û = v + x·ŵ on the truncation box"""
        term = {"i": 0, "j": 2, "alpha": 0, "coeff": "1"}
        forcing = {"i": 1, "j": 0, "alpha": 1, "coeff": "x"}
        eq = parse_spec(spec_json(EULER_SPEC, a="1 + x", nonlinear=[term, forcing], trunc=[4, 6]))
        normal = prepare_normal_form(eq)
        assert normal.applied
        original = solve_formal(eq)
        transformed = solve_formal(normal.equation)
        rebuilt = apply_transform(transformed.series, TransformRecord("prepare", normal, inverse=True))
        n_t, n_x = eq.trunc
        for n in range(n_t + 1):
            for m in range(n_x):
                assert rebuilt.coefficient(n, m) == original.series.coefficient(n, m)

    def test_condition_failure(self):
        """The (1,0,2) equation violates (F) and (F')"""
        with pytest.raises(ConditionError):
            prepare_normal_form(parse_spec(spec_json(ANTICIPATIVE_SPEC)))

    def test_ell_below_k(self):
        """ell must be at least k"""
        with pytest.raises(SpecValidationError):
            prepare_normal_form(parse_spec(spec_json(EULER_SPEC)), ell=0)


def series_t(values, trunc):
    return TruncatedSeries.from_coefficients("t", values, trunc)


class TestNewtonPolygon:
    """Newton polygon of the linearized operator"""

    def test_majorant_equation(self):
        """z₀ − t − z₁² along its solution: points (0,0),(1,1), slope 1"""
        trunc = 8
        phi = series_t([0, 1, 1, 4], trunc)
        F = {
            (1, 0): series_t([1], trunc),
            (0, 0): series_t([0, -1], trunc),
            (0, 2): series_t([-1], trunc),
        }
        polygon = newton_polygon(F, phi)
        assert polygon.points == [(0, 0), (1, 1)]
        assert polygon.slopes == [Fraction(1)]
        assert polygon.gevrey_admissible(1)
        assert not polygon.gevrey_admissible(2)
        assert not polygon.fuchsian

    def test_flat_polygon(self):
        """z₁ − z₀: both valuations zero, Fuchsian, no slopes"""
        F = {(0, 1): series_t([1], 4), (1, 0): series_t([-1], 4)}
        polygon = newton_polygon(F, series_t([0, 1], 4))
        assert polygon.slopes == []
        assert polygon.fuchsian

    def test_fuchsian_with_shifted_lower_point(self):
        """z₁ − x z₀: v₁ = 0 ≤ v₀ = 1"""
        F = {(0, 1): series_t([1], 4), (1, 0): series_t([0, -1], 4)}
        polygon = newton_polygon(F, series_t([0, 1], 4))
        assert polygon.points == [(0, 1), (1, 0)]
        assert polygon.fuchsian
        assert polygon.slopes == []

    def test_constant_scaling_invariance(self):
        """Scaling F by a constant leaves the polygon unchanged"""
        F = {(1, 0): series_t([1], 6), (0, 0): series_t([0, -1], 6), (0, 2): series_t([-1], 6)}
        scaled = {key: series_t([3 * v for v in s.coeffs], 6) for key, s in F.items()}
        phi = series_t([0, 1, 1], 6)
        assert newton_polygon(F, phi).points == newton_polygon(scaled, phi).points

    def test_undecidable(self):
        """All partial derivatives vanishing at this order is reported"""
        F = {(0, 0): series_t([0, 1], 4)}
        with pytest.raises(TruncationOverflowError):
            newton_polygon(F, series_t([0, 1], 4))

    def test_serialization(self):
        """Slopes serialize as fraction strings"""
        F = {(1, 0): series_t([1], 6), (0, 0): series_t([0, -1], 6), (0, 2): series_t([-1], 6)}
        payload = newton_polygon(F, series_t([0, 1, 1], 6)).to_dict()
        assert payload["slopes"] == ["1"]
        assert payload["points"] == [[0, 0], [1, 1]]
