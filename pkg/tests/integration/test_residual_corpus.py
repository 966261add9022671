# tests/integration/test_residual_corpus.py
"""
Integration test for the formal solver and Borel plane over the residual corpus
"""

import os
import sys

import numpy as np
import pytest

# Add paths for imports (following existing test pattern)
sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..', 'scripts'))
sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..'))

from summa.borel_plane import borel_coefficients, convolution_residual
from summa.config import SummaConfig
from summa.equation_model import is_normal_form, parse_spec
from summa.formal_solver import formal_residual, solve_formal
from summa.nagumo_metrics import verify_inequalities
from tests.fixtures.equation_specs import CORPUS, spec_json

CORPUS_IDS = [spec["name"] for spec in CORPUS]


@pytest.mark.integration
@pytest.mark.slow
class TestResidualCorpus:
    """Exact residuals of every corpus equation on the (12, 12) box"""

    @pytest.mark.parametrize("spec", CORPUS, ids=CORPUS_IDS)
    def test_formal_residual_vanishes(self, spec):
        """t∂ₜû − F(û) is identically zero through the certified orders"""
        eq = parse_spec(spec_json(spec, trunc=[12, 12]))
        solution = solve_formal(eq)
        assert formal_residual(eq, solution).is_zero()
        print(f"✅ {spec['name']}: residual zero through {solution.residual_order}")

    @pytest.mark.parametrize("spec", [s for s in CORPUS if s.get("k", 1) == 1], ids=lambda s: s["name"])
    def test_borel_residuals_vanish(self, spec):
        """Every order of the convolution system holds exactly at level 1"""
        eq = parse_spec(spec_json(spec, trunc=[6, 10]))
        if not is_normal_form(eq):
            pytest.skip(f"{spec['name']} keeps a ∂ₓu slot")
        family = borel_coefficients(solve_formal(eq), eq)
        for n in range(1, family.order + 1):
            assert convolution_residual(family, n).is_zero()

    def test_level_two_borel_residuals(self):
        """Level 2 runs in float; residuals stay at rounding level"""
        spec = next(s for s in CORPUS if s["name"] == "level_two")
        eq = parse_spec(spec_json(spec, trunc=[4, 12]))
        family = borel_coefficients(solve_formal(eq), eq)
        assert family.mode == "float"
        scale = max(float(np.max(np.abs(m.coeffs), initial=0.0)) for m in family.members)
        for n in range(1, family.order + 1):
            residual = convolution_residual(family, n)
            assert float(np.max(np.abs(residual.coeffs), initial=0.0)) <= 1e-9 * max(scale, 1.0)


@pytest.mark.integration
@pytest.mark.slow
class TestInequalitySuites:
    """Full-size runs of the pointwise inequality suites"""

    @pytest.mark.parametrize("suite", ["monotonicity", "inclusion_chain"])
    def test_thousand_trials(self, suite):
        """1000 trials without a failure"""
        report = verify_inequalities(suite, trials=1000, config=SummaConfig(threads=4))
        assert report["failures"] == []
        print(f"✅ {suite}: minimum margin {report['min_margin']:.3g}")
