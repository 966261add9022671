# tests/unit/test_resummation.py
import math
import os
import sys

import numpy as np
import pytest
from scipy import special

# Add scripts directory to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..', 'scripts'))
sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..'))  # Project root

from summa.config import SummaConfig
from summa.equation_model import parse_spec
from summa.errors import SingularDirectionError, SpecValidationError
from summa.resummation import (
    GRID_COLUMNS,
    SummationOptions,
    borel_sum_solution,
    default_degrees,
    gevrey_fit,
    laplace_sum,
    majorant_tail,
    pade_approximant,
    pde_residual,
    split_head,
    sum_series,
)
from summa.series_core import TruncatedSeries
from tests.fixtures.equation_specs import ANTICIPATIVE_SPEC, CORPUS, EULER_SPEC, ZERO_FORCING_SPEC, spec_json


def euler_function(x):
    """Borel sum of Σ n! x^(n+1) in direction π; E = x + x²E′."""
    x = np.asarray(x, dtype=np.complex128)
    return -np.exp(-1 / x) * special.exp1(-1 / x)


CONFIG = SummaConfig()


def corpus_spec(name, **overrides):
    spec = next(s for s in CORPUS if s["name"] == name)
    return parse_spec(spec_json(spec, **overrides))


class TestPade:
    """Padé continuation"""

    def test_geometric_series(self):
        """[1/1] of 1 + ξ + ξ² is 1/(1 − ξ)"""
        approximant = pade_approximant([1, 1, 1], 1, 1)
        np.testing.assert_allclose(approximant.num, [1, 0], atol=1e-14)
        np.testing.assert_allclose(approximant.den, [1, -1], atol=1e-14)
        assert approximant.nearest_pole() == pytest.approx(1.0)
        assert approximant(0.5) == pytest.approx(2.0)

    def test_residue(self):
        """1/(1 − ξ) has residue −1 at ξ = 1"""
        approximant = pade_approximant([1, 1], 0, 1)
        assert approximant.residues[0] == pytest.approx(-1.0)
        assert approximant.to_dict()["poles"] == [[pytest.approx(1.0), pytest.approx(0.0)]]

    def test_defective_system_lowers_m(self):
        """A geometric series cannot carry two poles: [2/2] becomes [3/1]"""
        approximant = pade_approximant([1, 1, 1, 1, 1], 2, 2)
        assert (approximant.L, approximant.M) == (3, 1)
        assert approximant(-0.5) == pytest.approx(1 / 1.5)

    def test_exponential(self):
        """[2/2] of exp is accurate near 0"""
        coeffs = [1 / math.factorial(n) for n in range(5)]
        assert pade_approximant(coeffs, 2, 2)(0.5) == pytest.approx(math.exp(0.5), rel=1e-4)

    def test_zero_input(self):
        """A zero series gives the zero polynomial"""
        approximant = pade_approximant([0, 0, 0], 1, 1)
        assert approximant.M == 0
        assert approximant(0.7) == 0

    def test_needs_enough_coefficients(self):
        """[L/M] uses L + M + 1 coefficients"""
        with pytest.raises(SpecValidationError):
            pade_approximant([1, 1], 1, 1)

    def test_series_input(self):
        """Truncated series are accepted directly"""
        series = TruncatedSeries.from_coefficients("xi", [1, 1, 1])
        assert pade_approximant(series, 1, 1)(0.25) == pytest.approx(4 / 3)

    def test_default_degrees(self):
        """Near-diagonal split of the available order"""
        assert default_degrees(10) == (5, 5)
        assert default_degrees(10, 3) == (7, 3)
        assert default_degrees(3, 8) == (0, 3)


class TestLaplace:
    """Directional Laplace integrals"""

    def test_constant_gamma_1p(self):
        """φ = 1 sums to x"""
        x = np.array([0.5, 0.3 + 0.1j])
        np.testing.assert_allclose(laplace_sum(1, 0.0, 1, x, "gamma_1p", CONFIG), x, rtol=1e-10)

    def test_linear_gamma_1p(self):
        """φ = ξ sums to 2x²"""
        x = np.array([0.5, 0.3 + 0.1j])
        phi = TruncatedSeries.from_coefficients("xi", [0, 1])
        np.testing.assert_allclose(laplace_sum(phi, 0.0, 1, x, "gamma_1p", CONFIG), 2 * x ** 2, rtol=1e-10)

    def test_constant_gamma(self):
        """Under the Γ(n/k) normalization φ = 1 also sums to x"""
        x = np.array([0.4])
        np.testing.assert_allclose(laplace_sum(1, 0.0, 1, x, "gamma", CONFIG), x, rtol=1e-10)

    def test_euler_first_slice(self):
        """1/(1 − ξ) along d = π gives the Euler function"""
        x = np.array([-0.1, -0.2 + 0.02j])
        values = laplace_sum(lambda xi: 1 / (1 - xi), math.pi, 1, x, "gamma", CONFIG)
        np.testing.assert_allclose(values, euler_function(x), rtol=1e-10)

    def test_level_two(self):
        """Level 2, φ = 1 under gamma_1p: 2x⁻² ∫ ξ³e^{−(ξ/x)²} dξ = x²"""
        x = np.array([0.5])
        np.testing.assert_allclose(laplace_sum(1, 0.0, 2, x, "gamma_1p", CONFIG), x ** 2, rtol=1e-10)

    def test_x_outside_sector(self):
        """x must lie in the half-plane around d"""
        with pytest.raises(SpecValidationError):
            laplace_sum(1, 0.0, 1, [-1.0], "gamma_1p", CONFIG)

    def test_x_zero(self):
        """x = 0 is excluded"""
        with pytest.raises(SpecValidationError):
            laplace_sum(1, 0.0, 1, [0.0], "gamma_1p", CONFIG)

    def test_unknown_normalization(self):
        """Only gamma_1p and gamma"""
        with pytest.raises(SpecValidationError):
            laplace_sum(1, 0.0, 1, [0.5], "borel", CONFIG)

    def test_pole_on_ray(self):
        """A Padé pole on the integration ray is rejected"""
        with pytest.raises(SingularDirectionError):
            laplace_sum(pade_approximant([1, 1], 0, 1), 0.0, 1, [0.5], "gamma", CONFIG)


class TestSumSeries:
    """Borel-Padé-Laplace sums of x-series"""

    def test_split_head(self):
        """Coefficients below xᵏ are split off"""
        head, body = split_head(TruncatedSeries.from_coefficients("x", [1, 2, 3]), 1)
        np.testing.assert_allclose(head, [1])
        assert body.coefficient(0) == 0
        assert body.coefficient(2) == 3

    def test_euler_series(self):
        """Σ n! x^(n+1) summed along d = π"""
        series = TruncatedSeries.from_coefficients("x", [0] + [math.factorial(n) for n in range(16)])
        values = sum_series(series, math.pi, 1, [-0.1, -0.15], config=CONFIG)
        np.testing.assert_allclose(values, euler_function([-0.1, -0.15]), rtol=1e-6)

    def test_polynomial_head_only(self):
        """A constant stays a constant"""
        values = sum_series(TruncatedSeries.from_coefficients("x", [3]), 0.0, 1, [0.2], config=CONFIG)
        np.testing.assert_allclose(values, [3])

    def test_needs_x_series(self):
        """Only series in x"""
        with pytest.raises(SpecValidationError):
            sum_series(TruncatedSeries.from_coefficients("xi", [1, 1]), 0.0, 1, [0.2], config=CONFIG)


class TestGevreyFit:
    """Gevrey-order estimates"""

    def test_order_one(self):
        """aₙ = n!·2ⁿ has 1/k = 1 and A = 2"""
        fit = gevrey_fit([math.factorial(n) * 2.0 ** n for n in range(40)])
        assert fit.order_inverse == pytest.approx(1.0, abs=0.02)
        assert fit.A == pytest.approx(2.0, rel=0.05)
        assert not fit.to_dict()["convergent"]

    def test_order_one_half(self):
        """aₙ = Γ(1 + n/2) has 1/k = 1/2"""
        fit = gevrey_fit([math.gamma(1 + n / 2) for n in range(40)])
        assert fit.order_inverse == pytest.approx(0.5, abs=0.02)

    def test_convergent(self):
        """Geometric coefficients are flagged convergent"""
        fit = gevrey_fit([3.0 ** -n for n in range(30)])
        assert fit.order_inverse == pytest.approx(0.0, abs=0.01)
        assert fit.diagnostics["convergent"]

    def test_skips_zero_coefficients(self):
        """Only odd orders present: ratios are taken across the gaps"""
        coeffs = [math.factorial(n) if n % 2 else 0 for n in range(48)]
        assert gevrey_fit(coeffs).order_inverse == pytest.approx(1.0, abs=0.05)

    def test_too_few_coefficients(self):
        """At least 12 nonzero coefficients"""
        with pytest.raises(SpecValidationError):
            gevrey_fit([1.0] * 11)

    def test_two_variable_series_needs_var(self):
        """A (t, x) series is reduced along the named variable"""
        series = TruncatedSeries.zeros(("t", "x"), (1, 14))
        with pytest.raises(SpecValidationError):
            gevrey_fit(series)


class TestPdeResidual:
    """Finite-difference residuals"""

    def setup_method(self):
        self.eq = parse_spec(spec_json(EULER_SPEC))
        self.grid = [(0.2, -0.1), (0.1 + 0.05j, -0.2)]

    def test_exact_solution(self):
        """u = t·E(x) solves t∂ₜu = xt + x²∂ₓu"""
        residual, frame = pde_residual(self.eq, lambda t, x: t * euler_function(x), self.grid)
        assert residual < 1e-8
        assert frame.columns.tolist() == GRID_COLUMNS
        assert len(frame) == 2

    def test_detects_perturbation(self):
        """Adding 10⁻³·t breaks the equation by about 10⁻³|t|"""
        residual, _ = pde_residual(self.eq, lambda t, x: t * euler_function(x) + 1e-3 * t, self.grid)
        assert residual == pytest.approx(2e-4, rel=1e-3)

    def test_stencil_must_stay_admissible(self):
        """Every finite-difference node is checked"""
        with pytest.raises(SpecValidationError):
            pde_residual(self.eq, lambda t, x: t, self.grid, admissible=lambda t, x: False)


class TestBorelSumSolution:
    """End-to-end summation"""

    def test_euler_normal_route(self):
        """Summed values match t·E(x) and satisfy the PDE"""
        eq = parse_spec(spec_json(EULER_SPEC))
        grid = [(0.1, -0.1), (0.05, -0.2 + 0.02j)]
        report = borel_sum_solution(eq, math.pi, grid, config=CONFIG)
        u = report.grid["u_re"].to_numpy() + 1j * report.grid["u_im"].to_numpy()
        expected = np.array([t * euler_function(x) for t, x in grid]).ravel()
        np.testing.assert_allclose(u, expected, rtol=1e-8)
        assert report.pde_residual < 1e-6
        assert report.route == "normal"
        assert report.tail_estimate == 0.0
        assert report.tail_method == "majorant"
        assert report.poles[1] == [[pytest.approx(1.0), pytest.approx(0.0)]]
        assert any("Gevrey fit skipped" in w for w in report.warnings)

    def test_euler_twenty_point_grid(self):
        """The summed Euler solution satisfies the PDE on a 20-point grid"""
        eq = parse_spec(spec_json(EULER_SPEC))
        grid = [(0.02 * (1 + i % 5), -(0.05 + 0.05 * (i // 5)) * np.exp(0.3j * (i % 3 - 1))) for i in range(20)]
        report = borel_sum_solution(eq, math.pi, grid, config=CONFIG)
        assert len(report.grid) == 20
        assert report.pde_residual <= 1e-6

    def test_nearby_direction_gives_same_values(self):
        """d and d′ on the same side of the singular directions sum to the same function"""
        eq = parse_spec(spec_json(EULER_SPEC))
        grid = [(0.1, -0.1 + 0.01j), (0.05, -0.2 - 0.03j)]
        along_pi = borel_sum_solution(eq, math.pi, grid, config=CONFIG).grid
        nearby = borel_sum_solution(eq, math.pi - 0.2, grid, config=CONFIG).grid
        np.testing.assert_allclose(nearby["u_re"], along_pi["u_re"], atol=1e-12)
        np.testing.assert_allclose(nearby["u_im"], along_pi["u_im"], atol=1e-12)

    def test_tail_bounded_by_majorant(self):
        """A quadratic u-term gets a majorant tail bound and no ratio warning"""
        eq = corpus_spec("quadratic_u", trunc=[6, 8])
        report = borel_sum_solution(eq, math.pi, [(0.02, -0.1), (0.01, -0.15)], config=CONFIG)
        assert report.tail_method == "majorant"
        assert 0 < report.tail_estimate < 1e-6
        assert not any("ratio extrapolation" in w for w in report.warnings)
        assert report.to_json()["tail_method"] == "majorant"

    def test_tail_falls_back_to_ratio(self):
        """Pure t-forcing of order 2 has no majorant; the ratio estimate is used"""
        eq = corpus_spec("second_order_forcing", trunc=[4, 8])
        report = borel_sum_solution(eq, math.pi, [(0.05, -0.1)], config=CONFIG)
        assert report.tail_method == "ratio"

    def test_zero_forcing(self):
        """a ≡ 0 sums to u ≡ 0"""
        eq = parse_spec(spec_json(ZERO_FORCING_SPEC))
        report = borel_sum_solution(eq, math.pi, [(0.1, -0.3)], config=CONFIG)
        assert report.grid["u_re"].abs().max() == 0
        assert report.pde_residual == 0

    def test_singular_direction(self):
        """d = 0 is the Euler singular direction"""
        eq = parse_spec(spec_json(EULER_SPEC))
        with pytest.raises(SingularDirectionError):
            borel_sum_solution(eq, 0.0, [(0.1, 0.1)], config=CONFIG)

    def test_grid_outside_sector(self):
        """Grid points must lie in the summation sector"""
        eq = parse_spec(spec_json(EULER_SPEC))
        with pytest.raises(SpecValidationError):
            borel_sum_solution(eq, math.pi, [(0.1, 0.1)], config=CONFIG)

    def test_conical_domain(self):
        """The conical route needs |t| < R|x|"""
        eq = parse_spec(spec_json(EULER_SPEC))
        with pytest.raises(SpecValidationError):
            borel_sum_solution(eq, math.pi, [(0.1, -0.1)], SummationOptions(route="conical", R=0.5), CONFIG)

    def test_conical_zero_forcing(self):
        """The conical route reports its radius"""
        eq = parse_spec(spec_json(ZERO_FORCING_SPEC))
        report = borel_sum_solution(eq, math.pi, [(0.01, -0.3)], SummationOptions(route="conical"), CONFIG)
        assert report.sector["R"] == 0.5
        assert report.pde_residual == 0

    def test_conical_route_without_condition_f(self):
        """(F) fails and b(0) = 0: the τ = t/x route satisfies the PDE inside |t| < R|x|"""
        eq = parse_spec(spec_json(ANTICIPATIVE_SPEC, trunc=[10, 12]))
        grid = [(0.05, -0.2), (0.08, -0.3), (0.06, -0.25 + 0.03j), (0.1, -0.4), (0.12, -0.35 - 0.02j)]
        report = borel_sum_solution(eq, math.pi, grid, SummationOptions(route="conical", R=0.5), CONFIG)
        assert report.route == "conical"
        assert report.pde_residual <= 1e-5

    def test_options_validation(self):
        """Unknown routes and nonpositive knobs are rejected"""
        with pytest.raises(SpecValidationError):
            SummationOptions(route="diagonal")
        with pytest.raises(SpecValidationError):
            SummationOptions(epsilon=0)

    def test_report_json(self):
        """The report serializes its grid column-wise"""
        eq = parse_spec(spec_json(ZERO_FORCING_SPEC))
        payload = borel_sum_solution(eq, math.pi, [(0.1, -0.3)], config=CONFIG).to_json()
        assert sorted(payload["grid"]) == sorted(GRID_COLUMNS)
        assert payload["direction"] == math.pi


class TestMajorantTail:
    """t-tail bounds from the majorant series"""

    def test_linear_equation_has_no_tail(self):
        """Without nonlinear terms Y = Y₁t, so nothing is left beyond order 1"""
        eq = parse_spec(spec_json(EULER_SPEC))
        bound = majorant_tail(eq, 0.5, 6, [0.1, 0.2], math.pi)
        assert bound.tolist() == [0.0, 0.0]

    def test_quadratic_bound(self):
        """The bound is positive, grows with |t| and is infinite past the majorant's radius"""
        eq = corpus_spec("quadratic_u", trunc=[6, 8])
        small, larger, outside = majorant_tail(eq, 0.1, 6, [0.01, 0.02, 1.0], math.pi)
        assert 0 < small < larger < 1e-6
        assert outside == math.inf

    def test_pure_t_forcing(self):
        """W_(2,0,0) ≠ 0 leaves no majorant"""
        eq = corpus_spec("second_order_forcing", trunc=[4, 8])
        assert majorant_tail(eq, 0.1, 4, [0.05], math.pi) is None
