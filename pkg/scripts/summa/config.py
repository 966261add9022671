"""
Runtime Configuration

Settings come from the environment (optionally a local .env.summa file) so
batch runs can be tuned without code changes.
"""

import os
from dataclasses import dataclass

from dotenv import load_dotenv

# Load environment variables from .env.summa
load_dotenv('.env.summa')


@dataclass
class SummaConfig:
    """Engine-wide knobs"""
    threads: int = 1  # worker cap for grid and trial thread pools
    max_x_order: int = 256  # hard cap on working x-orders in recursions
    quadrature_nodes: int = 32  # Gauss-Legendre points per Laplace panel
    tolerance: float = 1e-6  # relative tolerance for inequality margins

    def __post_init__(self):
        self._validate_config()

    def _validate_config(self):
        """Validate configuration parameters"""
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.max_x_order < 1:
            raise ValueError("max_x_order must be positive")
        if self.quadrature_nodes < 2:
            raise ValueError("quadrature_nodes must be at least 2")
        if not 0 < self.tolerance < 1:
            raise ValueError("tolerance must be between 0 and 1")

    @classmethod
    def from_env(cls) -> "SummaConfig":
        """Build a config from SUMMA_* environment variables."""
        return cls(
            threads=int(os.getenv("SUMMA_THREADS", "1")),
            max_x_order=int(os.getenv("SUMMA_MAX_X_ORDER", "256")),
            quadrature_nodes=int(os.getenv("SUMMA_QUADRATURE_NODES", "32")),
            tolerance=float(os.getenv("SUMMA_TOLERANCE", "1e-6")),
        )
