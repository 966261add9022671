"""
Exponential-Nagumo Norms

Numerical realization of the sector norms used in the summability estimates:
- Sector geometry S(d, θ), disc-joined sectors S(R; d, θ) and ramified sectors S^(k)
- The boundary-distance weight δ(ξ) and the constant M₀
- ‖f‖_{S,μ,n} = M₀ sup |f(ξ)e^{−μξ}(1+|ξ|²)δ(ξ)ⁿ| and its level-k pull-back
- A randomized harness checking the convolution, derivative and inclusion inequalities

Design Decision: Suprema are taken on a log-radial × angular grid:
1. Radii e^{j/8} reach past the point where r^D(1+r²)e^{−|μ|r cos θ} starts to decay
2. The five best cells are polished by a bounded 1-D search in log r
3. Inequality trials share one grid for both sides, so pointwise dominance survives sampling
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy import optimize

from .config import SummaConfig
from .errors import MathPreconditionError, SpecValidationError
from .series_core import TruncatedSeries, as_evaluable, convolve

logger = logging.getLogger(__name__)

SECTOR_KINDS = ("pure", "disc_joined", "ramified")
SUITES = (
    "convolution",
    "mixed_mu",
    "key_lemma",
    "key_corollary",
    "disc_division",
    "disc_derivative",
    "disc_corollary",
    "level_k_convolution",
    "level_k_mixed",
    "level_k_key",
    "monotonicity",
    "inclusion_chain",
)
GRID_DENSITY = 8  # radii e^{j/8}
GRID_ANGLES = 65
POLISH_CELLS = 5
E3 = math.exp(3)


def _angle_gap(angle, center):
    return (np.asarray(angle) - center + np.pi) % (2 * np.pi) - np.pi


@dataclass(frozen=True)
class SectorSpec:
    """
    Open sector S(d, θ), optionally joined with the disc |ξ| < R.

    A ramified sector keeps the base parameters (d, θ, R) of S and describes
    S^(k) = S(d/k, θ/k) joined with |ξ| < R^(1/k).
    """
    kind: str = "pure"
    d: float = 0.0
    theta: float = math.pi / 4
    R: float = 0.0
    k: int = 1

    def __post_init__(self):
        self._validate_sector()

    def _validate_sector(self):
        if self.kind not in SECTOR_KINDS:
            raise SpecValidationError(f"Unknown sector kind '{self.kind}'")
        if not 0 < self.theta < math.pi:
            raise SpecValidationError(f"Half-opening must lie in (0, π), got {self.theta}")
        if self.R < 0:
            raise SpecValidationError(f"Disc radius must be nonnegative, got {self.R}")
        if self.kind == "pure" and self.R != 0:
            raise SpecValidationError("Pure sectors have R = 0; use kind='disc_joined'")
        if self.kind == "disc_joined" and self.R <= 0:
            raise SpecValidationError("Disc-joined sectors need R > 0")
        if not isinstance(self.k, int) or self.k < 1:
            raise SpecValidationError(f"Sector level must be a positive integer, got {self.k}")

    @property
    def level(self) -> int:
        return self.k if self.kind == "ramified" else 1

    @property
    def center(self) -> float:
        return self.d / self.level

    @property
    def half_opening(self) -> float:
        return self.theta / self.level

    @property
    def disc_radius(self) -> float:
        return self.R ** (1 / self.level) if self.R > 0 else 0.0

    @property
    def base(self) -> "SectorSpec":
        """The unramified sector carrying the pulled-back functions."""
        if self.kind != "ramified":
            return self
        return SectorSpec("disc_joined" if self.R > 0 else "pure", self.d, self.theta, self.R)

    def contains(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=np.complex128)
        inside = (np.abs(_angle_gap(np.angle(xi), self.center)) < self.half_opening) & (xi != 0)
        if self.disc_radius > 0:
            inside = inside | ((np.abs(xi) < self.disc_radius) & (xi != 0))
        return inside

    def pull_back(self, xi) -> np.ndarray:
        """ρₖ⁻¹: base point ξ ↦ ξ^(1/k) on the branch inside S^(k)."""
        xi = np.asarray(xi, dtype=np.complex128)
        if self.level == 1:
            return xi
        arg = self.d + _angle_gap(np.angle(xi), self.d)
        return np.abs(xi) ** (1 / self.level) * np.exp(1j * arg / self.level)


@dataclass(frozen=True)
class NagumoParams:
    """Weight e^{−μξ} with μe^{id} > 0, Nagumo exponent n and level k."""
    mu: complex
    n: float = 0
    k: int = 1

    def __post_init__(self):
        if abs(self.mu) == 0:
            raise SpecValidationError("μ must be nonzero")
        if self.n < 0:
            raise SpecValidationError(f"Nagumo exponent must be nonnegative, got {self.n}")
        if not isinstance(self.k, int) or self.k < 1:
            raise SpecValidationError(f"Level must be a positive integer, got {self.k}")

    @classmethod
    def along(cls, S: SectorSpec, modulus: float, n: float = 0) -> "NagumoParams":
        return cls(mu=modulus * complex(np.exp(-1j * S.d)), n=n, k=S.level)

    def with_mu(self, modulus: float) -> "NagumoParams":
        direction = self.mu / abs(self.mu)
        return NagumoParams(mu=modulus * direction, n=self.n, k=self.k)

    def with_n(self, n: float) -> "NagumoParams":
        return NagumoParams(mu=self.mu, n=n, k=self.k)


# Geometry


def _delta_base(xi: np.ndarray, d: float, theta: float, R: float) -> np.ndarray:
    """Distance of log ξ to the boundary of the strip (∪ half-plane Re η < ln R), capped at 1."""
    y = _angle_gap(np.angle(xi), d)
    if R <= 0:
        return np.minimum(theta - np.abs(y), 1.0)
    with np.errstate(divide="ignore"):
        x = np.log(np.abs(xi)) - math.log(R)

    def to_ray(edge: float) -> np.ndarray:
        return np.where(x >= 0, np.abs(y - edge), np.hypot(x, y - edge))

    horizontal = np.minimum(to_ray(theta), to_ray(-theta))
    vertical = np.where(np.abs(y) >= theta, np.abs(x), np.hypot(x, theta - np.abs(y)))
    return np.minimum(np.minimum(horizontal, vertical), 1.0)


def delta(xi: complex, S: SectorSpec) -> float:
    """δ(ξ, S) for ξ in S (for a ramified sector, ξ ∈ S^(k) is pushed to ξᵏ first)."""
    if not bool(S.contains(xi)):
        raise SpecValidationError(f"Point {xi} is not in the sector")
    point = np.asarray(xi, dtype=np.complex128)
    if S.level > 1:
        arg = S.level * (S.center + _angle_gap(np.angle(point), S.center))
        point = np.abs(point) ** S.level * np.exp(1j * arg)
    return float(_delta_base(point, S.d, S.theta, S.R))


def m0_integrand(s: float) -> float:
    """2(1+s²)/(s(4+s²))·(ln(1+s²) + s·arctan s)."""
    if s <= 0:
        return 0.0
    return 2 * (1 + s * s) / (s * (4 + s * s)) * (math.log1p(s * s) + s * math.atan(s))


@lru_cache(maxsize=1)
def m0_constant() -> float:
    """M₀ = sup_{s>0} of m0_integrand, by golden-section search."""
    result = optimize.minimize_scalar(lambda s: -m0_integrand(s), bracket=(0.5, 8.5, 100.0),
                                      method="golden", tol=1e-12)
    value = -float(result.fun)
    logger.debug(f"M0 = {value:.12f} at s = {float(result.x):.6f}")
    return value


@dataclass(frozen=True)
class SectorGrid:
    """Sample points of S(d, θ) (log-radial × angular) and of the joined disc."""
    points: np.ndarray
    radii: np.ndarray
    angles: np.ndarray
    r_max: float

    @classmethod
    def build(cls, S: SectorSpec, r_max: float, n_angles: int = GRID_ANGLES,
              r_min: float = math.exp(-8)) -> "SectorGrid":
        base = S.base
        j_lo = math.floor(GRID_DENSITY * math.log(r_min))
        j_hi = math.ceil(GRID_DENSITY * math.log(max(r_max, 1.0)))
        radii = np.exp(np.arange(j_lo, j_hi + 1) / GRID_DENSITY)
        angles = np.linspace(base.d - base.theta, base.d + base.theta, n_angles)
        sector = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
        parts = [sector]
        if base.R > 0:
            disc_radii = radii[radii < base.R]
            ring = np.exp(1j * np.linspace(-np.pi, np.pi, 2 * n_angles, endpoint=False))
            parts.append((disc_radii[:, None] * ring[None, :]).ravel())
        return cls(points=np.concatenate(parts), radii=radii, angles=angles, r_max=float(radii[-1]))


def _tail_radius(degree: float, decay: float) -> float:
    """Radius past which r^D(1+r²)e^{−decay·r} is decreasing, with margin."""
    return max(50.0, (4 * (degree + 2) + 40) / decay)


def _validate_params(p: NagumoParams, S: SectorSpec):
    if abs(float(_angle_gap(np.angle(p.mu), -S.d))) > 1e-12:
        raise SpecValidationError(f"μ = {p.mu} must satisfy arg μ = −d = {-S.d}")
    if S.kind == "ramified" and S.k != p.k:
        raise SpecValidationError(f"Ramified sector of level {S.k} used with level-{p.k} norm")


def _weighted(func: Callable, S: SectorSpec, mu: complex, n: float, level: int) -> Callable:
    base = S.base
    m0 = m0_constant()
    unramified = SectorSpec("ramified", base.d, base.theta, base.R, level) if level > 1 else base

    def weight(xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=np.complex128)
        values = func(unramified.pull_back(xi)) * np.exp(-mu * xi)
        factor = (1 + np.abs(xi) ** 2)
        if n:
            factor = factor * _delta_base(xi, base.d, base.theta, base.R) ** n
        return m0 * np.abs(values) * factor

    return weight


def _grid_sup(weight: Callable, grid: SectorGrid, polish: bool) -> float:
    values = weight(grid.points)
    values = np.where(np.isfinite(values), values, np.inf)
    best = float(np.max(values)) if values.size else 0.0
    if not polish or best == 0 or not math.isfinite(best):
        return best
    for idx in np.argsort(values)[-POLISH_CELLS:]:
        point = grid.points[idx]
        log_r, phi = math.log(abs(point)), float(np.angle(point))
        step = 1.0 / GRID_DENSITY
        result = optimize.minimize_scalar(
            lambda lr: -float(weight(np.exp(lr + 1j * phi))),
            bounds=(log_r - step, log_r + step), method="bounded")
        best = max(best, -float(result.fun))
    return best


def _sup_norm(f: Any, S: SectorSpec, mu: complex, n: float, level: int,
              tail_degree: Optional[float], grid: Optional[SectorGrid], polish: bool) -> float:
    base = S.base
    if isinstance(f, TruncatedSeries) and f.is_zero():
        return 0.0
    if base.theta >= math.pi / 2:
        logger.warning(f"Half-opening {base.theta:.4g} ≥ π/2: exponential weight does not decay, norm is +∞")
        return math.inf
    func = as_evaluable(f)
    if tail_degree is None:
        tail_degree = max(f.degree(), 0) if isinstance(f, TruncatedSeries) else 0
    decay = abs(mu) * math.cos(base.theta)
    grid = grid or SectorGrid.build(S, _tail_radius(tail_degree / level, decay))
    weight = _weighted(func, S, mu, n, level)
    value = _grid_sup(weight, grid, polish)
    if isinstance(f, TruncatedSeries):
        r = grid.r_max
        majorant = sum(abs(complex(c)) * r ** (j / level) for j, c in enumerate(f.coeffs) if c)
        value = max(value, m0_constant() * majorant * (1 + r * r) * math.exp(-decay * r))
    return value


def nagumo_norm(f: Any, S: SectorSpec, p: NagumoParams, tail_degree: Optional[float] = None,
                grid: Optional[SectorGrid] = None, polish: bool = True) -> float:
    """
    ‖f‖_{S,μ,n} (level k: ‖ρₖf‖ on the base sector).

    f may be a one-variable series, a scalar or a vectorized callable. The
    result is the grid supremum, raised to the analytic tail bound for series,
    and +∞ when θ ≥ π/2.
    """
    _validate_params(p, S)
    return _sup_norm(f, S, p.mu, p.n, p.k, tail_degree, grid, polish)


def modulus_norm(f: Any, S: SectorSpec, mu: float, grid: Optional[SectorGrid] = None,
                 polish: bool = True) -> float:
    """‖f‖_{S,μ} = M₀ sup |f(ξ)|(1+|ξ|²)e^{−μ|ξ|} for real μ > 0."""
    if mu <= 0:
        raise SpecValidationError(f"Modulus weight needs μ > 0, got {mu}")
    func = as_evaluable(f)
    if isinstance(f, TruncatedSeries) and f.is_zero():
        return 0.0
    degree = max(f.degree(), 0) if isinstance(f, TruncatedSeries) else 0
    grid = grid or SectorGrid.build(S, _tail_radius(degree, mu))
    m0 = m0_constant()

    def weight(xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=np.complex128)
        r = np.abs(xi)
        return m0 * np.abs(func(xi)) * (1 + r * r) * np.exp(-mu * r)

    return _grid_sup(weight, grid, polish)


# Inequality harness


@dataclass(frozen=True)
class _Sample:
    """p(ξ)·e^{−λξ} with p a polynomial; closed under ∂, products by polynomials and ∗ₖ."""
    poly: Polynomial
    lam: complex = 0j

    def __call__(self, xi):
        return self.poly(xi) * np.exp(-self.lam * xi)

    @property
    def degree(self) -> int:
        return self.poly.degree()

    def derivative(self) -> "_Sample":
        return _Sample(self.poly.deriv() - self.lam * self.poly, self.lam)

    def times(self, q: Polynomial) -> "_Sample":
        return _Sample(self.poly * q, self.lam)

    def euler(self) -> "_Sample":
        return self.derivative().times(Polynomial([0, 1]))

    def divided_by_xi(self) -> "_Sample":
        coeffs = self.poly.coef
        if abs(coeffs[0]) > 1e-14:
            raise MathPreconditionError("Sample does not vanish at 0")
        return _Sample(Polynomial(coeffs[1:] if len(coeffs) > 1 else [0j]), self.lam)

    def convolve(self, other: "_Sample", level: int = 1) -> "_Sample":
        if self.lam != other.lam:
            raise MathPreconditionError("Convolved samples must share the exponential factor")
        top = self.degree + other.degree + level
        left = TruncatedSeries.from_coefficients("xi", list(self.poly.coef), top, "float")
        right = TruncatedSeries.from_coefficients("xi", list(other.poly.coef), top, "float")
        product = convolve(left, right, "xi", level)
        return _Sample(Polynomial(np.asarray(product.coeffs)), self.lam)


@dataclass
class _Trial:
    """Shared state of one randomized trial."""
    rng: np.random.Generator
    S: SectorSpec
    params: Dict[str, Any]
    coefficient_pool: List[Tuple[float, complex, float]] = field(default_factory=list)

    def modulus(self) -> float:
        return float(self.params.get("mu", self.rng.uniform(0.5, 2.0)))

    def exponent(self, low: int = 0) -> int:
        return int(self.params.get("n", self.rng.integers(low, 4)))

    def sample(self, lam: complex = 0j, vanish_at_zero: bool = False) -> _Sample:
        degree = int(self.rng.integers(0, 9))
        radius = np.sqrt(self.rng.uniform(0, 1, degree + 1))
        coeffs = radius * np.exp(2j * np.pi * self.rng.uniform(0, 1, degree + 1))
        if vanish_at_zero:
            coeffs = np.concatenate([[0j], coeffs[:-1] if degree else coeffs])
        return _Sample(Polynomial(coeffs), lam)

    def exponential(self, modulus: float) -> complex:
        if self.rng.uniform() < 0.5:
            return 0j
        return self.rng.uniform(0, 0.5) * modulus * complex(np.exp(-1j * self.S.d))


def _norm(f: Any, S: SectorSpec, modulus: float, n: float, grid: SectorGrid) -> float:
    return nagumo_norm(f, S, NagumoParams.along(S, modulus, n), grid=grid, polish=False)


def _shared_grid(S: SectorSpec, modulus: float) -> SectorGrid:
    return SectorGrid.build(S, _tail_radius(20, modulus * math.cos(S.base.theta)))


def _admissible_coefficients(rng: np.random.Generator, S: SectorSpec) -> Tuple[float, complex]:
    """b real < 1 and c with every (n−b)/c and 1/c pointing away from the base sector."""
    base = S.base
    spread = 0.5 * (math.pi - base.theta)
    singular = base.d + math.pi + rng.uniform(-spread, spread)
    b = float(rng.uniform(-0.5, 0.5))
    c = float(rng.uniform(0.5, 2.0)) * complex(np.exp(-1j * singular))
    return b, c


def _pool_sigma(trial: _Trial, b: float, c: complex) -> float:
    from .borel_plane import sigma_bound
    base = trial.S.base
    return sigma_bound(b, c, 1, SectorSpec("pure", base.d, base.theta))


def _suite_convolution(trial: _Trial) -> Tuple[float, float]:
    S, modulus = trial.S, trial.modulus()
    lam = trial.exponential(modulus)
    f, g = trial.sample(lam), trial.sample(lam)
    n, n2 = trial.exponent(), trial.exponent()
    grid = _shared_grid(S, modulus)
    lhs = _norm(f.convolve(g), S, modulus, n + n2, grid)
    return lhs, _norm(f, S, modulus, n, grid) * _norm(g, S, modulus, n2, grid)


def _mixed_pair(trial: _Trial, level: int) -> Tuple[float, float]:
    S, modulus = trial.S, trial.modulus()
    wider = modulus * (1 + trial.rng.uniform(0.2, 2.0))
    lam = trial.exponential(modulus) if level == 1 else 0j
    f, g = trial.sample(lam), trial.sample(lam)
    n = trial.exponent()
    grid = _shared_grid(S, modulus)
    constant = 4 / (m0_constant() * math.cos(S.base.theta / 2) * (wider - modulus))
    lhs = _norm(f.convolve(g, level), S, wider, n, grid)
    return lhs, constant * _norm(f, S, modulus, 0, grid) * _norm(g, S, wider, n, grid)


def _suite_mixed_mu(trial: _Trial) -> Tuple[float, float]:
    return _mixed_pair(trial, 1)


def _key_pair(trial: _Trial, level: int) -> Tuple[float, float]:
    S, modulus = trial.S, trial.modulus()
    b, c, sigma = trial.coefficient_pool[int(trial.rng.integers(len(trial.coefficient_pool)))]
    lam = trial.exponential(modulus) if level == 1 else 0j
    f = trial.sample(lam)
    n = trial.exponent(low=1)
    grid = _shared_grid(S, modulus)
    multiplier = Polynomial([n - b] + [0] * (level - 1) + [-c])
    constant = level * (E3 + modulus) / sigma
    lhs = _norm(f.euler(), S, modulus, n, grid)
    return lhs, constant * _norm(f.times(multiplier), S, modulus, n - 1, grid)


def _suite_key_lemma(trial: _Trial) -> Tuple[float, float]:
    return _key_pair(trial, 1)


def _suite_key_corollary(trial: _Trial) -> Tuple[float, float]:
    S, modulus = trial.S, trial.modulus()
    f = trial.sample(trial.exponential(modulus))
    n = trial.exponent(low=1)
    grid = _shared_grid(S, modulus)
    lhs = _norm(f.euler(), S, modulus, n, grid)
    rhs = E3 * n * _norm(f, S, modulus, n - 1, grid)
    rhs += modulus * _norm(f.times(Polynomial([0, 1])), S, modulus, n, grid)
    return lhs, rhs


def _disc_modulus(trial: _Trial) -> float:
    return float(trial.params.get("mu", trial.rng.uniform(0.01, 0.1) / trial.S.R))


def _suite_disc_division(trial: _Trial) -> Tuple[float, float]:
    S = trial.S
    modulus = _disc_modulus(trial)
    f = trial.sample(vanish_at_zero=True)
    n = trial.exponent()
    grid = _shared_grid(S, modulus)
    lhs = _norm(f.divided_by_xi(), S, modulus, n, grid)
    return lhs, math.e / S.R * _norm(f, S, modulus, n, grid)


def _suite_disc_derivative(trial: _Trial) -> Tuple[float, float]:
    S = trial.S
    modulus = _disc_modulus(trial)
    f = trial.sample()
    n = trial.exponent(low=1)
    grid = _shared_grid(S, modulus)
    lhs = _norm(f.derivative(), S, modulus, n, grid)
    return lhs, (n * math.exp(4) / S.R + modulus) * _norm(f, S, modulus, n - 1, grid)


def _suite_disc_corollary(trial: _Trial) -> Tuple[float, float]:
    S = trial.S
    modulus = _disc_modulus(trial)
    b, c, _ = trial.coefficient_pool[int(trial.rng.integers(len(trial.coefficient_pool)))]
    c = c * min(1.0, abs(1 - b) / (1.5 * S.R * abs(c)))
    f = trial.sample()
    n = trial.exponent(low=1)
    grid = _shared_grid(S, modulus)
    xi = grid.points
    orders = np.arange(1, 31)[:, None]
    ratios = np.maximum(orders, np.abs(xi)[None, :]) / np.abs(orders - b - c * xi[None, :])
    bound = max(float(np.max(ratios)), 1.0, 1 / abs(c)) * (1 + 1e-3)
    e0 = (2 * E3 + modulus) * bound
    lhs = _norm(f.derivative(), S, modulus, n, grid)
    return lhs, math.e * e0 / S.R * _norm(f.times(Polynomial([n - b, -c])), S, modulus, n - 1, grid)


def _suite_level_k_convolution(trial: _Trial) -> Tuple[float, float]:
    S, modulus = trial.S, trial.modulus()
    f, g = trial.sample(), trial.sample()
    n, n2 = trial.exponent(), trial.exponent()
    grid = _shared_grid(S, modulus)
    lhs = _norm(f.convolve(g, S.level), S, modulus, n + n2, grid)
    return lhs, _norm(f, S, modulus, n, grid) * _norm(g, S, modulus, n2, grid)


def _suite_level_k_mixed(trial: _Trial) -> Tuple[float, float]:
    return _mixed_pair(trial, trial.S.level)


def _suite_level_k_key(trial: _Trial) -> Tuple[float, float]:
    return _key_pair(trial, trial.S.level)


def _suite_monotonicity(trial: _Trial) -> Tuple[float, float]:
    S, modulus = trial.S, trial.modulus()
    smaller = modulus * trial.rng.uniform(0.3, 1.0)
    f = trial.sample(trial.exponential(smaller))
    n = trial.exponent()
    n_small = float(trial.rng.uniform(0, n)) if n else 0.0
    grid = _shared_grid(S, smaller)
    return _norm(f, S, modulus, n, grid), _norm(f, S, smaller, n_small, grid)


def _suite_inclusion_chain(trial: _Trial) -> Tuple[float, float]:
    S, modulus = trial.S, trial.modulus()
    f = trial.sample(trial.exponential(modulus))
    n = trial.exponent()
    grid = _shared_grid(S, modulus)
    nagumo_n = _norm(f, S, modulus, n, grid)
    nagumo_0 = _norm(f, S, modulus, 0, grid)
    legacy = modulus_norm(f, S, modulus * math.cos(S.theta), grid=grid, polish=False)
    # report the tighter of the two links
    if nagumo_0 - nagumo_n < legacy - nagumo_0:
        return nagumo_n, nagumo_0
    return nagumo_0, legacy


_SUITE_FUNCTIONS: Dict[str, Callable[[_Trial], Tuple[float, float]]] = {
    "convolution": _suite_convolution,
    "mixed_mu": _suite_mixed_mu,
    "key_lemma": _suite_key_lemma,
    "key_corollary": _suite_key_corollary,
    "disc_division": _suite_disc_division,
    "disc_derivative": _suite_disc_derivative,
    "disc_corollary": _suite_disc_corollary,
    "level_k_convolution": _suite_level_k_convolution,
    "level_k_mixed": _suite_level_k_mixed,
    "level_k_key": _suite_level_k_key,
    "monotonicity": _suite_monotonicity,
    "inclusion_chain": _suite_inclusion_chain,
}


def _suite_sector(suite: str, S: Optional[SectorSpec], params: Dict[str, Any]) -> SectorSpec:
    S = S or SectorSpec()
    if S.base.theta >= math.pi / 2:
        raise SpecValidationError("Inequality suites need θ < π/2")
    if suite.startswith("disc_"):
        if S.kind != "disc_joined":
            S = SectorSpec("disc_joined", S.d, S.theta, float(params.get("R", 3.0)))
    elif suite.startswith("level_k_"):
        k = int(params.get("k", S.k if S.kind == "ramified" and S.k > 1 else 2))
        S = SectorSpec("ramified", S.d, S.theta, 0.0, k)
    elif S.kind != "pure":
        S = SectorSpec("pure", S.d, S.theta)
    return S


def verify_inequalities(suite: str, trials: int = 100, S: Optional[SectorSpec] = None,
                        params: Optional[Dict[str, Any]] = None, seed: int = 0,
                        config: Optional[SummaConfig] = None) -> Dict[str, Any]:
    """
    Randomized check of one norm inequality.

    Each trial draws test functions satisfying the hypotheses, evaluates both
    sides on a shared grid and records margin = RHS − LHS. Negative margins
    within tolerance·max(|LHS|, |RHS|) are inconclusive; larger ones are failures.
    """
    if suite not in _SUITE_FUNCTIONS:
        raise SpecValidationError(f"Unknown suite '{suite}'; choose from {', '.join(SUITES)}")
    if trials < 1:
        raise SpecValidationError(f"trials must be positive, got {trials}")
    config = config or SummaConfig.from_env()
    params = dict(params or {})
    sector = _suite_sector(suite, S, params)

    pool: List[Tuple[float, complex, float]] = []
    if suite in ("key_lemma", "level_k_key", "disc_corollary"):
        rng = np.random.default_rng([seed, 0])
        sample = _Trial(rng, sector, params)
        for _ in range(4):
            b, c = _admissible_coefficients(rng, sector)
            pool.append((b, c, _pool_sigma(sample, b, c) if suite != "disc_corollary" else 0.0))

    def run(index: int) -> Dict[str, Any]:
        trial = _Trial(np.random.default_rng([seed, index + 1]), sector, params, pool)
        lhs, rhs = _SUITE_FUNCTIONS[suite](trial)
        return {"trial": index, "lhs": lhs, "rhs": rhs, "margin": rhs - lhs}

    with ThreadPoolExecutor(max_workers=config.threads) as executor:
        outcomes = list(executor.map(run, range(trials)))

    failures, inconclusive = [], 0
    for outcome in outcomes:
        scale = max(abs(outcome["lhs"]), abs(outcome["rhs"]), 1e-300)
        if outcome["margin"] < -config.tolerance * scale:
            failures.append(outcome)
        elif outcome["margin"] < 0:
            inconclusive += 1
    min_margin = min(o["margin"] for o in outcomes)
    if failures:
        logger.warning(f"Suite {suite}: {len(failures)} of {trials} trials violate the inequality")
    else:
        logger.info(f"Suite {suite}: {trials} trials, minimum margin {min_margin:.6g}")
    return {
        "suite": suite,
        "trials": trials,
        "min_margin": min_margin,
        "failures": failures,
        "inconclusive": inconclusive,
    }
