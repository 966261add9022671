"""
Borel-Padé-Laplace Resummation

Turns Borel-plane data back into functions on sectors:
- Padé approximants as the continuation device for truncated Borel transforms
- Directional level-k Laplace integrals on Gauss-Legendre panels
- Gevrey-order estimation from coefficient ratios
- The full pipeline from an equation to summed values on a (t, x) grid,
  through the normal form or through the conical τ = t/x route
- PDE residuals of summed solutions by Richardson-extrapolated differences

Design Decision: Each t-slice is summed independently and recombined:
1. Slices are Laplace-summed once per distinct x and cached
2. The t-sum is a polynomial in t, so t-derivatives cost nothing extra
3. The remaining t-tail is bounded by the majorant series of the prepared equation,
   or estimated from the last two slices when no majorant can be built
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from numpy.polynomial import polynomial as P
from scipy import interpolate, linalg, special

from .borel_plane import Ray, RaySamples, borel_coefficients, sigma_bound, singular_scan, volterra_member
from .config import SummaConfig
from .equation_model import EquationSpec, prepare_normal_form
from .errors import (
    ContinuationError,
    NumericalError,
    QuadratureError,
    SingularDirectionError,
    SpecValidationError,
)
from .formal_solver import TransformRecord, apply_transform, majorant_series, solve_formal
from .nagumo_metrics import SectorSpec
from .series_core import ZERO, TruncatedSeries, as_evaluable, formal_borel_k

logger = logging.getLogger(__name__)

NORMALIZATIONS = ("gamma_1p", "gamma")
ROUTES = ("normal", "conical")
MAX_PANELS = 4000
POLE_CLEARANCE = 1e-3
DEFECT_RATIO = 1e-12
CROSS_CHECK_TOLERANCE = 1e-4
MAJORANT_TERMS = 16
GRID_COLUMNS = ["t_re", "t_im", "x_re", "x_im", "u_re", "u_im", "residual"]


def _angle_gap(angle, center):
    return (np.asarray(angle) - center + np.pi) % (2 * np.pi) - np.pi


# Padé continuation


@dataclass(frozen=True)
class PadeApproximant:
    """num(ξ)/den(ξ) with den(0) = 1; poles carry their residues."""
    L: int
    M: int
    num: np.ndarray
    den: np.ndarray
    poles: np.ndarray
    residues: np.ndarray

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=np.complex128)
        return P.polyval(xi, self.num) / P.polyval(xi, self.den)

    def nearest_pole(self) -> Optional[complex]:
        if len(self.poles) == 0:
            return None
        return complex(self.poles[np.argmin(np.abs(self.poles))])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "L": self.L,
            "M": self.M,
            "poles": [[float(p.real), float(p.imag)] for p in self.poles],
            "residues": [[float(r.real), float(r.imag)] for r in self.residues],
        }


def _coefficient_vector(f: Union[TruncatedSeries, Sequence[Any]]) -> np.ndarray:
    if isinstance(f, TruncatedSeries):
        if len(f.vars) != 1:
            raise SpecValidationError(f"Padé needs a one-variable series, got {f.vars}")
        return f.coeffs.astype(np.complex128)
    return np.asarray([complex(c) for c in f], dtype=np.complex128)


def pade_approximant(f: Union[TruncatedSeries, Sequence[Any]], L: int, M: int) -> PadeApproximant:
    """
    [L/M] approximant matching the Taylor coefficients of f through order L + M.

    A rank-deficient denominator system lowers M (and raises L by the same
    amount) until it is regular; each reduction is logged as a warning.
    """
    c = _coefficient_vector(f)
    if L < 0 or M < 0:
        raise SpecValidationError(f"Padé degrees must be nonnegative, got [{L}/{M}]")
    if L + M + 1 > len(c):
        raise SpecValidationError(f"[{L}/{M}] needs {L + M + 1} coefficients, only {len(c)} available")

    def coeff(i: int) -> complex:
        return c[i] if 0 <= i < len(c) else 0j

    if not np.any(c[: L + M + 1]):
        if M:
            logger.warning("Padé input is zero; returning the zero polynomial")
        return PadeApproximant(L, 0, np.zeros(1, np.complex128), np.ones(1, np.complex128),
                               np.zeros(0, np.complex128), np.zeros(0, np.complex128))

    q = np.zeros(0, dtype=np.complex128)
    while M > 0:
        matrix = linalg.toeplitz([coeff(L + i) for i in range(M)], [coeff(L - j) for j in range(M)])
        singular = linalg.svd(matrix, compute_uv=False)
        if singular[0] > 0 and singular[-1] > DEFECT_RATIO * singular[0]:
            rhs = -np.array([coeff(L + 1 + i) for i in range(M)])
            try:
                q = linalg.solve(matrix, rhs)
            except linalg.LinAlgError as e:
                logger.error(f"Padé denominator solve failed for [{L}/{M}]")
                raise ContinuationError(f"Padé [{L}/{M}] denominator system is singular") from e
            break
        logger.warning(f"Padé [{L}/{M}] denominator system is defective; reducing to [{L + 1}/{M - 1}]")
        L, M = L + 1, M - 1

    den = np.concatenate([[1.0 + 0j], q])
    num = np.array([sum(den[j] * coeff(i - j) for j in range(min(i, M) + 1)) for i in range(L + 1)],
                   dtype=np.complex128)
    poles = P.polyroots(den) if M else np.zeros(0, np.complex128)
    poles = np.asarray(poles, dtype=np.complex128)
    residues = P.polyval(poles, num) / P.polyval(poles, P.polyder(den)) if M else poles
    return PadeApproximant(L, M, num, den, poles, np.asarray(residues, dtype=np.complex128))


def default_degrees(order: int, M: Optional[int] = None) -> Tuple[int, int]:
    """Near-diagonal [L/M] using every coefficient through `order`."""
    M = order // 2 if M is None else min(M, order)
    return order - M, M


# Laplace integrals


def _distance_to_ray(point: complex, unit: complex) -> float:
    rotated = point * unit.conjugate()
    return abs(point) if rotated.real < 0 else abs(rotated.imag)


def _ray_function(phi: Any, d: float) -> Tuple[Callable, float]:
    """Vectorized φ on the ray and the largest admissible ray parameter."""
    if isinstance(phi, RaySamples):
        if abs(float(_angle_gap(phi.ray.direction, d))) > 1e-12:
            raise SpecValidationError(f"Samples lie on direction {phi.ray.direction}, not {d}")
        real = interpolate.CubicSpline(phi.s, phi.psi.real)
        imag = interpolate.CubicSpline(phi.s, phi.psi.imag)
        unit = complex(np.exp(1j * d))

        def sampled(xi):
            s = np.real(np.asarray(xi) * unit.conjugate())
            return real(s) + 1j * imag(s)

        return sampled, float(phi.s[-1])
    if isinstance(phi, PadeApproximant):
        unit = complex(np.exp(1j * d))
        scale = max(1.0, float(np.max(np.abs(phi.residues)))) if len(phi.residues) else 1.0
        for pole, residue in zip(phi.poles, phi.residues):
            if abs(residue) > 1e-12 * scale and _distance_to_ray(complex(pole), unit) < POLE_CLEARANCE:
                raise SingularDirectionError(
                    f"Padé pole {complex(pole):.6g} lies within {POLE_CLEARANCE} of the ray d = {d:.6g}")
    return as_evaluable(phi), math.inf


def laplace_sum(phi: Any, d: float, k: int, x_points: Sequence[complex],
                normalization: str = "gamma_1p", config: Optional[SummaConfig] = None) -> np.ndarray:
    """
    Directional level-k Laplace integral along ξ = s·e^{id}.

    gamma_1p: k x^{−k} ∫ φ(ξ) ξ^{2k−1} e^{−(ξ/x)^k} dξ, inverse of aₙ/Γ(1+n/k) ξ^{n−k}
    gamma:    k ∫ φ(ξ) ξ^{k−1} e^{−(ξ/x)^k} dξ,        inverse of aₙ/Γ(n/k) ξ^{n−k}

    Panels have length |x| in s; integration stops once two consecutive
    panels contribute below 10⁻¹⁶ of the running total.
    """
    if normalization not in NORMALIZATIONS:
        raise SpecValidationError(f"Unknown Laplace normalization '{normalization}'")
    if not isinstance(k, int) or k < 1:
        raise SpecValidationError(f"Laplace level must be a positive integer, got {k}")
    config = config or SummaConfig.from_env()
    x = np.atleast_1d(np.asarray(x_points, dtype=np.complex128))
    if np.any(x == 0):
        raise SpecValidationError("Laplace sums need x ≠ 0")
    rotation = np.cos(k * _angle_gap(d, np.angle(x)))
    if np.any(rotation <= 0):
        bad = x[rotation <= 0][0]
        raise SpecValidationError(f"x = {bad} is outside the level-{k} sector around d = {d:.6g}")

    func, s_limit = _ray_function(phi, d)
    nodes, weights = special.roots_legendre(config.quadrature_nodes)
    nodes, weights = (nodes + 1) / 2, weights / 2
    unit = complex(np.exp(1j * d))
    power = 2 * k - 1 if normalization == "gamma_1p" else k - 1

    def integrate(point: complex) -> complex:
        scale = abs(point)
        prefactor = k * point ** (-k) if normalization == "gamma_1p" else k
        total, quiet = 0j, 0
        for panel in range(MAX_PANELS):
            s = (panel + nodes) * scale
            if s[-1] > s_limit:
                raise QuadratureError(f"Ray samples end at s = {s_limit:.4g} before the Laplace integrand decays")
            xi = s * unit
            values = func(xi) * xi ** power * np.exp(-((xi / point) ** k))
            contribution = complex(np.dot(weights, values)) * scale * unit
            if not np.isfinite(contribution):
                raise QuadratureError(f"Laplace integrand overflows on panel {panel} for x = {point}")
            total += contribution
            quiet = quiet + 1 if abs(contribution) <= 1e-16 * abs(total) else 0
            if quiet >= 2:
                return prefactor * total
        raise QuadratureError(f"Laplace integrand does not decay for x = {point}; growth exceeds first order")

    return np.array([integrate(complex(point)) for point in x])


def split_head(f: TruncatedSeries, k: int) -> Tuple[np.ndarray, TruncatedSeries]:
    """Coefficients below xᵏ as a float vector, and f with them removed."""
    table = f.coeffs.copy()
    cut = min(k, len(table))
    head = table[:cut].astype(np.complex128)
    table[:cut] = ZERO if f.is_exact else 0j
    return head, f.with_coeffs(table)


def sum_series(f: TruncatedSeries, d: float, k: int, x_points: Sequence[complex],
               degrees: Optional[Tuple[int, int]] = None,
               config: Optional[SummaConfig] = None) -> np.ndarray:
    """Borel-Padé-Laplace sum of a one-variable x-series; the head below xᵏ stays a polynomial."""
    if f.vars != ("x",):
        raise SpecValidationError(f"sum_series needs a series in x, got {f.vars}")
    x = np.atleast_1d(np.asarray(x_points, dtype=np.complex128))
    head, body = split_head(f, k)
    values = P.polyval(x, head)
    if body.is_zero():
        return values
    phi = formal_borel_k(body, k, "x", "gamma_1p")
    L, M = degrees or default_degrees(phi.trunc[0])
    return values + laplace_sum(pade_approximant(phi, L, M), d, k, x, "gamma_1p", config)


# Gevrey order


@dataclass(frozen=True)
class GevreyFit:
    """Estimated 1/k and A in |aₙ| ≲ C Aⁿ Γ(1 + n/k)."""
    order_inverse: float
    A: float
    diagnostics: Dict[str, Any]

    def to_dict(self) -> Dict[str, Any]:
        return {"order_inverse": self.order_inverse, "A": self.A, **self.diagnostics}


def _magnitudes(coeffs: Any, var: Optional[str]) -> np.ndarray:
    if isinstance(coeffs, TruncatedSeries):
        table = np.abs(coeffs.coeffs.astype(np.complex128))
        if table.ndim == 2:
            if var is None:
                raise SpecValidationError("gevrey_fit on a two-variable series needs var")
            table = table.max(axis=1 - coeffs.axis(var))
        return table
    return np.abs(np.asarray([complex(c) for c in coeffs]))


def gevrey_fit(coeffs: Any, var: Optional[str] = None) -> GevreyFit:
    """
    Least-squares fit of log|a_{n+1}/aₙ| ≈ log A + (1/k) log n + c/n over the tail half.

    Zero coefficients are skipped: only ratios of consecutive nonzero
    coefficients enter the fit.
    """
    values = _magnitudes(coeffs, var)
    nonzero = np.nonzero(values > 0)[0]
    if len(nonzero) < 12:
        raise SpecValidationError(f"gevrey_fit needs at least 12 nonzero coefficients, got {len(nonzero)}")
    index, ratios = [], []
    for left, right in zip(nonzero[:-1], nonzero[1:]):
        if left == 0:
            continue
        gap = right - left
        index.append(float(left))
        ratios.append(math.log(values[right] / values[left]) / gap)
    index, ratios = np.array(index), np.array(ratios)
    tail = slice(len(index) // 2, None)
    n, r = index[tail], ratios[tail]
    design = np.column_stack([np.ones_like(n), np.log(n), 1 / n])
    solution, residual, _, _ = np.linalg.lstsq(design, r, rcond=None)
    log_a, slope, _ = solution
    fitted = design @ solution
    diagnostics = {
        "orders_used": [int(v) for v in n],
        "fit_residual": float(np.sqrt(np.mean((fitted - r) ** 2))),
        "convergent": bool(abs(slope) < 0.05 and np.max(np.abs(r)) < 10),
    }
    logger.debug(f"Gevrey fit: 1/k = {slope:.4f}, A = {math.exp(log_a):.4g}")
    return GevreyFit(order_inverse=float(slope), A=float(math.exp(log_a)), diagnostics=diagnostics)


# PDE residuals


def _richardson(func: Callable[[np.ndarray], np.ndarray], z: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order derivative from central differences at h and h/2."""
    def central(step: float) -> np.ndarray:
        return (func(z + step) - func(z - step)) / (2 * step)

    return (4 * central(h / 2) - central(h)) / 3


def pde_residual(eq: EquationSpec, u_eval: Callable[[np.ndarray, np.ndarray], np.ndarray],
                 grid: Sequence[Tuple[complex, complex]], h: float = 1e-3,
                 admissible: Optional[Callable[[complex, complex], bool]] = None) -> Tuple[float, pd.DataFrame]:
    """
    |t∂ₜu − F(t, x, u, ∂ₓu)| at every grid point.

    Returns the maximum and a table with columns
    t_re, t_im, x_re, x_im, u_re, u_im, residual.
    """
    points = np.asarray(grid, dtype=np.complex128).reshape(-1, 2)
    t, x = points[:, 0], points[:, 1]
    if admissible is not None:
        for t0, x0 in zip(t, x):
            stencil = [(t0 + s, x0) for s in (-h, h)] + [(t0, x0 + s) for s in (-h, h)]
            if not all(admissible(a, b) for a, b in stencil):
                raise SpecValidationError(f"Stencil around (t, x) = ({t0}, {x0}) leaves the summation sector")

    u = u_eval(t, x)
    u_t = _richardson(lambda z: u_eval(z, x), t, h)
    u_x = _richardson(lambda z: u_eval(t, z), x, h)
    slot = x * u_x if eq.euler_form else u_x
    rhs = eq.a.evaluate(x) * t + eq.b.evaluate(x) * u + x ** (eq.k + 1) * eq.c.evaluate(x) * u_x
    for (i, j, alpha), coeff in eq.nonlinear.items():
        rhs = rhs + coeff.evaluate(x) * t ** i * u ** j * slot ** alpha
    residual = np.abs(t * u_t - rhs)
    frame = pd.DataFrame({
        "t_re": t.real, "t_im": t.imag,
        "x_re": x.real, "x_im": x.imag,
        "u_re": u.real, "u_im": u.imag,
        "residual": residual,
    }, columns=GRID_COLUMNS)
    return float(residual.max()) if len(residual) else 0.0, frame


# Pipeline


@dataclass(frozen=True)
class SummationOptions:
    """Knobs of borel_sum_solution."""
    route: str = "normal"
    pade_m: Optional[int] = None
    R: float = 0.5
    epsilon: float = 0.05
    h: float = 1e-3
    cross_check: bool = True

    def __post_init__(self):
        if self.route not in ROUTES:
            raise SpecValidationError(f"Unknown summation route '{self.route}'")
        if self.R <= 0 or self.epsilon <= 0 or self.h <= 0:
            raise SpecValidationError("R, epsilon and h must be positive")


class SummedSolution:
    """
    u(t, x) = head(t, x) + x^e Σₙ tⁿ·(Laplace-summed slice n)(x) for a fixed direction.

    Conical solutions store w-slices of τ = t/x and divide tⁿ by xⁿ.
    """

    def __init__(self, slices: List[Callable[[np.ndarray], np.ndarray]], k: int, d: float,
                 head: Optional[TruncatedSeries] = None, x_factor: int = 0, conical: bool = False,
                 config: Optional[SummaConfig] = None, equation: Optional[EquationSpec] = None):
        self.logger = logging.getLogger(__name__)
        self.equation = equation
        self.slices = slices
        self.k = k
        self.d = d
        self.head = head
        self.x_factor = x_factor
        self.conical = conical
        self.config = config or SummaConfig.from_env()
        self._cache: Dict[complex, np.ndarray] = {}

    def slice_values(self, x: complex) -> np.ndarray:
        """Summed slices 1..N at one x, cached."""
        if x not in self._cache:
            self._cache[x] = np.array([complex(s(np.array([x]))[0]) for s in self.slices])
        return self._cache[x]

    def terms(self, t: np.ndarray, x: np.ndarray) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=np.complex128))
        x = np.atleast_1d(np.asarray(x, dtype=np.complex128))
        t, x = np.broadcast_arrays(t, x)
        missing = [complex(v) for v in np.unique(x) if complex(v) not in self._cache]
        if missing:
            with ThreadPoolExecutor(max_workers=self.config.threads) as executor:
                list(executor.map(self.slice_values, missing))
        values = np.array([self.slice_values(complex(v)) for v in x.ravel()]).reshape(x.shape + (-1,))
        orders = np.arange(1, values.shape[-1] + 1)
        base = t / x if self.conical else t
        return values * base[..., None] ** orders

    def __call__(self, t, x) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=np.complex128))
        x = np.atleast_1d(np.asarray(x, dtype=np.complex128))
        total = self.terms(t, x).sum(axis=-1) * np.broadcast_to(x, np.broadcast(t, x).shape) ** self.x_factor
        if self.head is not None:
            total = total + self.head.evaluate(t, x)
        return total

    def tail_estimate(self, t, x) -> np.ndarray:
        """Ratio extrapolation of the t-series tail from its last two terms."""
        terms = np.abs(self.terms(t, x))
        if terms.shape[-1] < 2:
            return np.zeros(terms.shape[:-1])
        last, previous = terms[..., -1], terms[..., -2]
        ratio = np.divide(last, previous, out=np.zeros_like(last), where=previous > 0)
        return np.where(ratio < 1, last * ratio / np.maximum(1 - ratio, 1e-300), np.inf)


# E = σ⁻¹(e³ + |μ|) at |μ| = 1
KEY_LEMMA_NUMERATOR = math.e ** 3 + 1


def majorant_tail(eq: EquationSpec, y1: float, order: int, t, d: float) -> Optional[np.ndarray]:
    """
    Σ_{n>order} Yₙ|t|ⁿ for the majorant Y of a normal-form equation summed along d.

    The weights W_{i,j,α} are ℓ¹ norms of the nonlinear coefficients and σ is
    taken on the sector around d of half-opening min(π/4, gap/2), gap being
    the distance to the nearest singular direction. Returns None when the
    majorant cannot be built.
    """
    t_abs = np.abs(np.atleast_1d(np.asarray(t, dtype=np.complex128)))
    scan = singular_scan(eq.b0, eq.c0, eq.k, max(order, 1))
    gaps = [abs(float(_angle_gap(d, direction))) for direction in list(scan.directions) + list(scan.accumulation)]
    half = min(math.pi / 4, min(gaps) / 2) if gaps else math.pi / 4
    weights = {key: float(np.sum(np.abs(series.coeffs.astype(np.complex128))))
               for key, series in eq.nonlinear.items()}
    try:
        sigma = sigma_bound(eq.b0, eq.c0, eq.k, SectorSpec("pure", d, half), max(order, 1))
        Y = majorant_series(float(y1), weights, sigma, KEY_LEMMA_NUMERATOR / sigma, order + MAJORANT_TERMS)
    except (SpecValidationError, SingularDirectionError, NumericalError) as e:
        logger.debug(f"No majorant for the t-tail: {e}")
        return None

    coeffs = np.abs(Y.coeffs.astype(np.complex128))
    n = np.arange(order + 1, len(coeffs))
    tail = (coeffs[order + 1:, None] * t_abs[None, :] ** n[:, None]).sum(axis=0)
    rates = [Y.meta.get("growth_rate") or 0.0]
    if coeffs[-2] > 0:
        rates.append(coeffs[-1] / coeffs[-2])
    edge = max(coeffs[-1], coeffs[-2])
    if edge == 0 or max(rates) == 0:
        return tail
    q = max(rates) * t_abs
    remainder = edge * t_abs ** n[-1] * q / np.maximum(1 - q, 1e-300)
    return np.where(q < 1, tail + remainder, np.inf)


@dataclass
class SummationReport:
    """Direction, sector, grid values, residual and diagnostics of one summation."""
    direction: float
    sector: Dict[str, float]
    route: str
    grid: pd.DataFrame
    pde_residual: float
    tail_estimate: float
    tail_method: str = "ratio"
    gevrey: Optional[Dict[str, Any]] = None
    poles: Dict[int, List[List[float]]] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def to_json(self) -> Dict[str, Any]:
        return {
            "direction": self.direction,
            "sector": dict(self.sector),
            "route": self.route,
            "pde_residual": self.pde_residual,
            "tail_estimate": self.tail_estimate,
            "tail_method": self.tail_method,
            "gevrey": self.gevrey,
            "poles": {str(n): p for n, p in sorted(self.poles.items())},
            "warnings": list(self.warnings),
            "grid": self.grid.to_dict(orient="list"),
        }


def _check_direction(eq: EquationSpec, d: float):
    scan = singular_scan(eq.b0, eq.c0, eq.k, max(eq.trunc[0], 1))
    for direction in list(scan.directions) + list(scan.accumulation):
        if abs(float(_angle_gap(d, direction))) < 1e-9:
            raise SingularDirectionError(f"direction d = {d:.6g} is singular (singular direction {direction:.6g})")


def _pade_of(member: TruncatedSeries, pade_m: Optional[int]) -> PadeApproximant:
    L, M = default_degrees(member.trunc[0], pade_m)
    return pade_approximant(member, L, M)


def _laplace_slice(approximant: PadeApproximant, d: float, k: int, normalization: str,
                   config: SummaConfig) -> Callable[[np.ndarray], np.ndarray]:
    def evaluate(x: np.ndarray) -> np.ndarray:
        return laplace_sum(approximant, d, k, x, normalization, config)
    return evaluate


def _normal_route(eq: EquationSpec, d: float, options: SummationOptions, config: SummaConfig,
                  warnings: List[str]) -> Tuple[SummedSolution, Dict[int, List[List[float]]], Any]:
    original = solve_formal(eq, config)
    normal = prepare_normal_form(eq, solution=original)
    target = normal.equation
    solution = solve_formal(target, config) if normal.applied else original
    family = borel_coefficients(solution, target)
    slices: List[Callable] = []
    poles: Dict[int, List[List[float]]] = {}
    first: Optional[PadeApproximant] = None
    for n, member in enumerate(family.members, start=1):
        approximant = _pade_of(member, options.pade_m)
        if n == 1:
            first = approximant
        if approximant.M:
            poles[n] = approximant.to_dict()["poles"]
        slices.append(_laplace_slice(approximant, d, eq.k, "gamma", config))

    if options.cross_check and family.k == 1 and first is not None and family.member(1).degree() >= 0:
        try:
            samples = volterra_member(family, Ray(d, 2.0 ** -8, 1.0))
            gap = float(np.max(np.abs(first(samples.xi) - samples.psi)))
            if gap > CROSS_CHECK_TOLERANCE:
                warnings.append(f"Padé and Volterra continuations of the first slice differ by {gap:.3g}")
        except (SingularDirectionError, NumericalError) as e:
            warnings.append(f"Volterra cross-check skipped: {e}")

    head = normal.head if normal.applied else None
    summed = SummedSolution(slices, eq.k, d, head=head, x_factor=1 if normal.applied else 0, config=config,
                            equation=target)
    return summed, poles, original


def _conical_route(eq: EquationSpec, d: float, options: SummationOptions, config: SummaConfig
                   ) -> Tuple[SummedSolution, Dict[int, List[List[float]]], Any]:
    solution = solve_formal(eq, config)
    n_t, n_x = solution.series.trunc
    u = solution.series
    known = TruncatedSeries.from_dict(
        ("t", "x"), (n_t, n_x),
        {(n, m): value for (n, m), value in u.nonzero_terms() if n + m <= n_x}, u.mode, polynomial=False)
    w = apply_transform(known, TransformRecord("singular_tau"))
    slices: List[Callable] = []
    poles: Dict[int, List[List[float]]] = {}
    for n in range(1, n_t + 1):
        w_n = w.slice("tau", n)
        k = eq.k
        head, body = split_head(w_n, k)
        approximant = None
        if not body.is_zero():
            phi = formal_borel_k(body, k, "x", "gamma_1p")
            approximant = _pade_of(phi, options.pade_m)
            if approximant.M:
                poles[n] = approximant.to_dict()["poles"]

        def evaluate(x: np.ndarray, head=head, approximant=approximant) -> np.ndarray:
            values = P.polyval(np.asarray(x, dtype=np.complex128), head)
            if approximant is not None:
                values = values + laplace_sum(approximant, d, k, x, "gamma_1p", config)
            return values

        slices.append(evaluate)
    return SummedSolution(slices, eq.k, d, conical=True, config=config), poles, solution


def _tail_bound(summed: SummedSolution, d: float, t: np.ndarray, x: np.ndarray,
                warnings: List[str]) -> Tuple[float, str]:
    """Majorant bound of the t-tail when available, ratio extrapolation otherwise."""
    if summed.equation is not None and summed.slices:
        y1 = max(abs(summed.slice_values(complex(v))[0]) for v in x)
        bound = majorant_tail(summed.equation, y1, len(summed.slices), t, d)
        if bound is not None:
            tail = float(np.max(bound * np.abs(x) ** summed.x_factor))
            logger.info(f"t-series tail bounded by the majorant: {tail:.3g}")
            return tail, "majorant"
    tail = float(np.max(summed.tail_estimate(t, x)))
    if tail > 0:
        warnings.append(f"t-series tail estimated by ratio extrapolation: {tail:.3g}")
        logger.warning(f"t-series tail estimated by ratio extrapolation: {tail:.3g}")
    return tail, "ratio"


def borel_sum_solution(eq: EquationSpec, d: float, grid: Sequence[Tuple[complex, complex]],
                       options: Optional[SummationOptions] = None,
                       config: Optional[SummaConfig] = None) -> SummationReport:
    """
    Sum the formal solution in direction d and evaluate it on a (t, x) grid.

    The normal route prepares the equation, Borel-transforms every t-slice,
    continues it by Padé and Laplace-sums it. The conical route rewrites the
    solution in τ = t/x, sums each w-slice in x and recombines on |t| < R|x|.
    """
    options = options or SummationOptions()
    config = config or SummaConfig.from_env()
    eq.validate()
    _check_direction(eq, d)
    half = math.pi / (2 * eq.k) - options.epsilon
    if half <= 0:
        raise SpecValidationError(f"epsilon {options.epsilon} leaves no sector at level {eq.k}")

    def admissible(t: complex, x: complex) -> bool:
        inside = x != 0 and abs(float(_angle_gap(np.angle(x), d))) < half
        if options.route == "conical":
            inside = inside and abs(t) < options.R * abs(x)
        return bool(inside)

    points = [(complex(t), complex(x)) for t, x in grid]
    for t, x in points:
        if not admissible(t, x):
            raise SpecValidationError(f"Grid point (t, x) = ({t}, {x}) is outside the summation domain")

    warnings: List[str] = []
    if options.route == "normal":
        summed, poles, solution = _normal_route(eq, d, options, config, warnings)
    else:
        summed, poles, solution = _conical_route(eq, d, options, config)

    residual, frame = pde_residual(eq, summed, points, options.h, admissible)
    t_arr = np.array([p[0] for p in points])
    x_arr = np.array([p[1] for p in points])
    tail, tail_method = _tail_bound(summed, d, t_arr, x_arr, warnings) if points else (0.0, "ratio")

    gevrey = None
    try:
        gevrey = gevrey_fit(solution.series.slice("t", 1)).to_dict()
    except SpecValidationError as e:
        warnings.append(f"Gevrey fit skipped: {e}")

    sector = {"d": d, "half_opening": half, "k": eq.k}
    if options.route == "conical":
        sector["R"] = options.R
    logger.info(f"Summed along d = {d:.6g} ({options.route} route): max PDE residual {residual:.3g}")
    return SummationReport(
        direction=d, sector=sector, route=options.route, grid=frame, pde_residual=residual,
        tail_estimate=tail, tail_method=tail_method, gevrey=gevrey, poles=poles, warnings=warnings)
