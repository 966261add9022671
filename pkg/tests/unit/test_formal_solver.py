# tests/unit/test_formal_solver.py
import math
import os
import sys
from fractions import Fraction

import numpy as np
import pytest

# Add scripts directory to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..', 'scripts'))
sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..'))  # Project root

from summa.config import SummaConfig
from summa.equation_model import parse_spec
from summa.errors import ResonanceError, SpecValidationError, TruncationOverflowError
from summa.formal_solver import (
    TransformRecord,
    apply_transform,
    formal_residual,
    fuchsian_ode_solve,
    majorant_series,
    shift_ode_rhs,
    solve_anticipative,
    solve_formal,
)
from summa.resummation import default_degrees, gevrey_fit, pade_approximant
from summa.series_core import TruncatedSeries, formal_borel_k
from tests.fixtures.equation_specs import ANTICIPATIVE_SPEC, EULER_SPEC, ZERO_FORCING_SPEC, spec_json


def t_series(values, trunc):
    return TruncatedSeries.from_coefficients("t", values, trunc)


class TestSolveFormal:
    """Order-by-order t-recursion"""

    def test_euler_coefficients(self):
        """u_(1,n+1) = n! and all other t-orders vanish"""
        solution = solve_formal(parse_spec(spec_json(EULER_SPEC)))
        n_t, n_x = solution.valid_orders
        for n in range(n_x):
            assert solution.series.coefficient(1, n + 1) == math.factorial(n)
        for n in range(2, n_t + 1):
            for m in range(n_x + 1):
                assert solution.series.coefficient(n, m) == 0

    def test_initial_condition(self):
        """û(0, x) = 0"""
        solution = solve_formal(parse_spec(spec_json(EULER_SPEC)))
        assert all(solution.series.coefficient(0, m) == 0 for m in range(9))

    def test_zero_forcing(self):
        """a ≡ 0 without nonlinear terms gives û = 0"""
        assert solve_formal(parse_spec(spec_json(ZERO_FORCING_SPEC))).series.is_zero()

    def test_constant_b(self):
        """b = −1, γ = x², a = x: u₁ = x/2 + x²/4 + ..."""
        eq = parse_spec(spec_json(EULER_SPEC, b="-1", trunc=[3, 5]))
        series = solve_formal(eq).series
        assert series.coefficient(1, 1) == Fraction(1, 2)
        assert series.coefficient(1, 2) == Fraction(1, 4)
        assert all(series.coefficient(2, m) == 0 for m in range(6))

    def test_residual_vanishes(self):
        """t∂ₜû − F(û) is zero through the certified order"""
        eq = parse_spec(spec_json(EULER_SPEC, nonlinear=[{"i": 0, "j": 2, "alpha": 0, "coeff": "1"}]))
        solution = solve_formal(eq)
        assert formal_residual(eq, solution).is_zero()

    def test_derivative_reach_shrinks_certified_order(self):
        """A ∂ₓu term with nonzero a(0) costs one certified x-order"""
        solution = solve_formal(parse_spec(spec_json(ANTICIPATIVE_SPEC)))
        assert solution.residual_order == (6, 7)
        assert solution.working_x_order == 8 + 5

    def test_resonance_at_order(self):
        """b(0) = 2 fails at n = 2 when resonance is allowed at parse time"""
        eq = parse_spec(spec_json(EULER_SPEC, b="2"), allow_resonance=True)
        with pytest.raises(ResonanceError) as exc_info:
            solve_formal(eq)
        assert exc_info.value.order == 2

    def test_truncation_overflow(self):
        """The working x-order is checked against the configured cap"""
        eq = parse_spec(spec_json(ANTICIPATIVE_SPEC))
        with pytest.raises(TruncationOverflowError) as exc_info:
            solve_formal(eq, SummaConfig(max_x_order=5))
        assert exc_info.value.required_order == 13

    def test_float_mode(self):
        """Float mode reproduces the exact coefficients"""
        solution = solve_formal(parse_spec(spec_json(EULER_SPEC), mode="float"))
        assert solution.series.mode == "float"
        assert solution.series.coefficient(1, 6) == pytest.approx(120)

    def test_json_payload(self):
        """Solutions serialize with their certified orders"""
        payload = solve_formal(parse_spec(spec_json(EULER_SPEC))).to_json()
        assert payload["provenance"] == "t-recursion"
        assert payload["residual_order"] == [6, 8]
        assert [[1, 3], ["2/1", "0/1"]] in payload["coeffs"]


class TestAnticipative:
    """x-expansion through w = t·u, s = t²"""

    def test_seeds_are_factorials(self):
        """∂ₛwₙ(0) = (n−1)! for n ≥ 1 and 0 for n = 0"""
        result = solve_anticipative(TruncatedSeries.from_coefficients("x", [0, 1]), n_s=4, n_x=12)
        assert result.seeds[0] == 0
        for n in range(1, 13):
            assert result.seeds[n] == math.factorial(n - 1)

    def test_seeds_are_gevrey_one(self):
        """The fitted Gevrey order of the seeds is 1"""
        result = solve_anticipative(TruncatedSeries.from_coefficients("x", [0, 1]), n_s=4, n_x=16)
        fit = gevrey_fit(list(result.seeds))
        assert fit.order_inverse == pytest.approx(1.0, abs=0.1)

    def test_seed_borel_poles_on_positive_axis(self):
        """Padé poles of the x-Borel transform of the seeds lie near ℝ⁺"""
        result = solve_anticipative(TruncatedSeries.from_coefficients("x", [0, 1]), n_s=4, n_x=16)
        borel = formal_borel_k(TruncatedSeries.from_coefficients("x", list(result.seeds)), 1, "x", "gamma_1p")
        approximant = pade_approximant(borel, *default_degrees(borel.degree()))
        assert approximant.M > 0
        assert len(approximant.poles) > 0
        assert np.all(np.abs(np.angle(approximant.poles)) <= 0.1)

    def test_parity(self):
        """Even t-derivatives of uₙ vanish at t = 0"""
        result = solve_anticipative(parse_spec(spec_json(ANTICIPATIVE_SPEC, trunc=[11, 10])))
        u = result.u.series
        assert u.trunc == (11, 10)
        for m in range(1, 6):
            for n in range(11):
                assert u.coefficient(2 * m, n) == 0

    def test_matches_t_recursion(self):
        """The anticipative u agrees with solve_formal on the same equation"""
        eq = parse_spec(spec_json(ANTICIPATIVE_SPEC, trunc=[5, 6]))
        direct = solve_formal(eq).series
        anticipative = solve_anticipative(eq).u.series
        for n in range(6):
            for m in range(6):
                assert anticipative.coefficient(n, m) == direct.coefficient(n, m)

    def test_zero_forcing(self):
        """a ≡ 0 gives u ≡ 0"""
        a = TruncatedSeries.zeros(("x",), (6,))
        assert solve_anticipative(a, n_s=3, n_x=6).u.series.is_zero()

    def test_required_order_reported(self):
        """The coupling needs x-order n_x + n_s − 1"""
        a = TruncatedSeries.from_coefficients("x", [0, 1])
        with pytest.raises(TruncationOverflowError) as exc_info:
            solve_anticipative(a, n_s=5, n_x=10, config=SummaConfig(max_x_order=12))
        assert exc_info.value.required_order == 14

    def test_shape_check(self):
        """Only the t(∂ₓu)² equation is accepted"""
        with pytest.raises(SpecValidationError):
            solve_anticipative(parse_spec(spec_json(EULER_SPEC)))


class TestFuchsian:
    """Triangular Fuchsian recursions"""

    def test_riccati(self):
        """t y′ = y² + t: y = t + t²/2 + t³/3 + ..."""
        G = {(2, 0): t_series([1], 0), (0, 0): t_series([0, 1], 1)}
        y = fuchsian_ode_solve(G, 1, 4)
        assert [y.coefficient(n) for n in range(4)] == [0, 1, Fraction(1, 2), Fraction(1, 3)]

    def test_zero_forcing(self):
        """a₃ ≡ 0 gives y ≡ 0"""
        y = fuchsian_ode_solve({(2, 0): t_series([1], 0)}, 1, 6)
        assert y.is_zero()

    def test_majorant_form(self):
        """y = t + (t y′)²: y = t + t² + 4t³ + ..."""
        G = {(0, 0): t_series([0, 1], 1), (0, 2): t_series([1], 0)}
        y = fuchsian_ode_solve(G, 0, 5)
        assert [y.coefficient(n) for n in range(4)] == [0, 1, 1, 4]
        assert y.meta["growth_rate"] is not None

    def test_majorant_form_is_gevrey_one(self):
        """y = t + 2t·ty′ + (ty′)²: coefficients grow like n!"""
        G = {(0, 0): t_series([0, 1], 1), (0, 1): t_series([0, 2], 1), (0, 2): t_series([1], 0)}
        y = fuchsian_ode_solve(G, 0, 24)
        fit = gevrey_fit(y)
        assert fit.order_inverse == pytest.approx(1.0, abs=0.1)

    def test_nonzero_origin_rejected(self):
        """G(0, 0, 0) ≠ 0 contradicts y(0) = 0"""
        with pytest.raises(SpecValidationError):
            fuchsian_ode_solve({(0, 0): t_series([1], 0)}, 1, 3)

    def test_resonant_factor(self):
        """t y′ = y + t² divides by zero at n = 1"""
        G = {(1, 0): t_series([1], 0), (0, 0): t_series([0, 0, 1], 2)}
        with pytest.raises(ResonanceError):
            fuchsian_ode_solve(G, 1, 3)

    def test_shift_rhs_slots(self):
        """a₂ = 1, a₃ = x at k = 1: G = y² − t y"""
        a2 = TruncatedSeries.from_dict(("t", "x"), (2, 1), {(0, 0): 1})
        a3 = TruncatedSeries.from_dict(("t", "x"), (2, 1), {(0, 1): 1})
        G = shift_ode_rhs(a2, a3, 1)
        assert set(G) == {(2, 0), (1, 0)}
        assert G[(2, 0)].coefficient(0) == 1
        assert [G[(1, 0)].coefficient(n) for n in range(3)] == [0, -1, 0]

    def test_shift_rhs_feeds_solver(self):
        """a₂ = a₃ = 1 is the Riccati equation t y′ = y² + t"""
        one = TruncatedSeries.from_dict(("t", "x"), (2, 1), {(0, 0): 1})
        y = fuchsian_ode_solve(shift_ode_rhs(one, one, 1), 1, 4)
        assert [y.coefficient(n) for n in range(4)] == [0, 1, Fraction(1, 2), Fraction(1, 3)]

    def test_shift_rhs_level(self):
        """The shift needs k ≥ 1"""
        one = TruncatedSeries.from_dict(("t", "x"), (2, 1), {(0, 0): 1})
        with pytest.raises(SpecValidationError):
            shift_ode_rhs(one, one, 0)


class TestTransforms:
    """Changes of variables and their inverses"""

    def test_shift(self):
        """f(t) = t on u = xt gives w = zt − t²"""
        u = TruncatedSeries.monomial(("t", "x"), (2, 2), (1, 1))
        record = TransformRecord("shift_x", t_series([0, 1], 2))
        w = apply_transform(u, record)
        assert w.vars == ("t", "z")
        assert w.coefficient(1, 1) == 1
        assert w.coefficient(2, 0) == -1
        back = apply_transform(w, record.inverted())
        assert list(back.coeffs.ravel()) == list(u.coeffs.ravel())

    def test_shift_needs_vanishing_f(self):
        """f(0) ≠ 0 is rejected"""
        with pytest.raises(SpecValidationError):
            TransformRecord("shift_x", t_series([1, 1], 2))

    def test_singular_tau(self):
        """x²t becomes x³τ and returns"""
        u = TruncatedSeries.monomial(("t", "x"), (1, 3), (1, 2))
        record = TransformRecord("singular_tau")
        w = apply_transform(u, record)
        assert w.vars == ("tau", "x")
        assert w.coefficient(1, 3) == 1
        back = apply_transform(w, record.inverted())
        assert back.coefficient(1, 2) == 1

    def test_singular_tau_overflow(self):
        """t x² needs x-order 3"""
        u = TruncatedSeries.monomial(("t", "x"), (1, 2), (1, 2))
        with pytest.raises(TruncationOverflowError):
            apply_transform(u, TransformRecord("singular_tau"))

    def test_square_s(self):
        """t x becomes s x"""
        u = TruncatedSeries.monomial(("t", "x"), (1, 2), (1, 1))
        record = TransformRecord("square_s")
        w = apply_transform(u, record)
        assert w.vars == ("s", "x")
        assert w.coefficient(1, 1) == 1
        assert apply_transform(w, record.inverted()).coefficient(1, 1) == 1

    def test_solution_provenance(self):
        """Transforming a FormalSolution tags its provenance"""
        solution = solve_formal(parse_spec(spec_json(EULER_SPEC, trunc=[2, 8])))
        transformed = apply_transform(solution, TransformRecord("square_s"))
        assert transformed.provenance == "t-recursion+square_s"
        assert transformed.series.coefficient(1, 3) == 2


class TestMajorant:
    """Majorant series Y(t)"""

    def test_linear(self):
        """No nonlinear data: Y = Y₁t"""
        Y = majorant_series(2.0, {}, 0.5, 1.0, order=6)
        assert Y.coefficient(1) == pytest.approx(2.0)
        assert all(Y.coefficient(n) == 0 for n in range(2, 7))

    def test_quadratic(self):
        """W_(0,2,0) = w gives Y₂ = (8w/σ³)Y₁²"""
        y1, w, sigma = 1.5, 0.3, 0.7
        Y = majorant_series(y1, {(0, 2, 0): w}, sigma, 1.0, order=4)
        assert Y.coefficient(2) == pytest.approx(8 * w / sigma ** 3 * y1 ** 2)

    def test_monotone_in_sigma(self):
        """Larger σ never increases a coefficient"""
        weights = {(0, 2, 0): 0.5, (1, 1, 0): 0.2, (0, 0, 2): 0.1}
        small = majorant_series(1.0, weights, 0.5, 2.0, order=8)
        large = majorant_series(1.0, weights, 1.0, 2.0, order=8)
        for n in range(9):
            assert abs(large.coefficient(n)) <= abs(small.coefficient(n)) + 1e-12

    def test_forcing_weights_rejected(self):
        """W_(i,0,0) must vanish"""
        with pytest.raises(SpecValidationError):
            majorant_series(1.0, {(2, 0, 0): 1.0}, 1.0, 1.0)

    def test_sigma_positive(self):
        """σ ≤ 0 is rejected"""
        with pytest.raises(SpecValidationError):
            majorant_series(1.0, {}, 0.0, 1.0)
