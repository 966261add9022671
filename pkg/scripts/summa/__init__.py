"""
Summa: Formal Series and Borel Summation Engine

This package computes truncated formal power-series solutions of singular
PDEs t∂ₜu = F(t, x, u, ∂ₓu), studies them in the Borel plane, resums them
along admissible directions and checks the Nagumo-norm estimates behind
their summability.
"""

__version__ = "1.0.0"
