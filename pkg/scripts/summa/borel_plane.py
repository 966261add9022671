"""
Borel-Plane Analysis

Objects living in the Borel plane of a normal-form equation:
- The family ũₙ(ξ) of Borel-transformed t-slices and its convolution equations
- The Borel-plane equations of the anticipative w-system
- Singular points ξₙ = (n − b)/c and the singular directions they generate
- The lower bound σ of |n − b − cξᵏ|/(n + |ξᵏ|) on a sector
- A Volterra marching solver used as a continuation oracle along rays
- The first two terms of the log-pole expansion near a singular point

Design Decision: All Borel transforms use the Γ(n/k) normalization:
1. Products of series become ∗ₖ convolutions, so Fₙ is assembled mechanically
2. The x∂ₓ slot becomes Pₖf = ξf′ + kf, which is exact on the truncation box
3. Level 1 stays in exact Gaussian-rational arithmetic; level k ≥ 2 runs in float
"""

import logging
import math
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy import optimize

from .equation_model import EquationSpec, TermKey, is_normal_form
from .errors import (
    BorelPlaneError,
    ConditionError,
    DegenerateCoefficientError,
    QuadratureError,
    SingularDirectionError,
    SpecValidationError,
    TruncationOverflowError,
)
from .formal_solver import AnticipativeSolution, FormalSolution
from .nagumo_metrics import SectorSpec
from .series_core import (
    ZERO,
    Coeff,
    LogSeries,
    LogTerm,
    TruncatedSeries,
    arith,
    as_evaluable,
    convolve,
    divide_by_linear,
    euler_derive,
    formal_borel_k,
    pad,
    taylor_shift,
    valuation,
    x_power,
)

logger = logging.getLogger(__name__)

ANGLE_TOLERANCE = 1e-12
SIGMA_SAFETY = 1 - 1e-6

Evaluable = Union[None, numbers.Number, Coeff, TruncatedSeries, Callable[[np.ndarray], Any]]


@dataclass(frozen=True)
class BorelFamily:
    """
    Borel transforms ũₙ(ξ) of the t-slices of a normal-form solution.

    A = B̂(a), B = B̂(b − b₀), C = B̂(c − c₀); A_terms[(i, j, α)] is B̂(a_{ijα} − a_{ijα}(0))
    (B̂(a_{i00}) for pure forcing terms) and B_terms holds the constants a_{ijα}(0).
    A None entry marks a transform that does not exist at level k because the
    series has valuation below k.
    """
    k: int
    members: List[TruncatedSeries]
    b0: Any
    c0: Any
    A: TruncatedSeries
    B: Optional[TruncatedSeries]
    C: Optional[TruncatedSeries]
    A_terms: Dict[TermKey, Optional[TruncatedSeries]] = field(default_factory=dict)
    B_terms: Dict[TermKey, Any] = field(default_factory=dict)
    mode: str = "exact"
    certified_order: int = 0

    @property
    def order(self) -> int:
        return len(self.members)

    def member(self, n: int) -> TruncatedSeries:
        if n < 1 or n > len(self.members):
            raise BorelPlaneError(f"Family has members 1..{len(self.members)}, asked for {n}")
        return self.members[n - 1]

    def singular_points(self, n: int) -> List[complex]:
        """Roots of ξᵏ = (n − b)/(kc), where the order-n equation degenerates."""
        target = complex((n - self.b0) / (self.k * self.c0))
        if self.k == 1:
            return [target]
        radius = abs(target) ** (1 / self.k)
        angle = np.angle(target)
        return [radius * np.exp(1j * (angle + 2 * np.pi * nu) / self.k) for nu in range(self.k)]


@dataclass(frozen=True)
class AnticipativeFamily:
    """ṽ_m = B̂(Σ_{n≥2} w_{m,n}xⁿ) with the linear coefficients w_{m,1} kept aside."""
    members: List[TruncatedSeries]
    w1: List[Any]
    a_borel: TruncatedSeries
    mode: str
    certified_order: int


@dataclass(frozen=True)
class SingularData:
    """Singular points and directions of the Borel-plane equations."""
    xi_points: List[Any]
    directions: List[float]
    accumulation: List[float]
    k: int
    b0: Any
    c0: Any

    def sigma(self, sector: SectorSpec, n_max: int = 50,
              grid: Optional[Tuple[int, int]] = None) -> float:
        return sigma_bound(self.b0, self.c0, self.k, sector, n_max, grid)

    def to_json(self) -> Dict[str, Any]:
        return {
            "xi": [_point_json(z) for z in self.xi_points],
            "directions_rad": list(self.directions),
            "accumulation": list(self.accumulation),
        }


@dataclass(frozen=True)
class Ray:
    """Segment ξ = s·e^{id}, 0 ≤ s ≤ length, sampled with a uniform step."""
    direction: float
    step: float = 2.0 ** -10
    length: float = 2.0

    def __post_init__(self):
        if self.step <= 0 or self.length <= 0:
            raise SpecValidationError(f"Ray needs positive step and length, got {self.step}, {self.length}")
        if self.length / self.step > 2 ** 12:
            raise SpecValidationError(f"Ray has too many nodes ({self.length / self.step:.0f})")

    @property
    def unit(self) -> complex:
        return complex(np.exp(1j * self.direction))


@dataclass(frozen=True)
class RaySamples:
    """ψ sampled on a ray, with the step-halving error estimate."""
    ray: Ray
    s: np.ndarray
    psi: np.ndarray
    err_est: np.ndarray
    observed_order: float

    @property
    def xi(self) -> np.ndarray:
        return self.s * self.ray.unit

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "s": self.s,
            "psi_re": self.psi.real,
            "psi_im": self.psi.imag,
            "err_est": self.err_est,
        })


def _point_json(z: Any) -> Any:
    value = complex(z)
    if value.imag == 0:
        if isinstance(z, Coeff) and z.re.denominator == 1:
            return int(z.re)
        return value.real
    return [value.real, value.imag]


def _scalar(value: Any) -> Any:
    if isinstance(value, Coeff):
        return value
    if isinstance(value, (numbers.Rational, Fraction)):
        return Coeff.from_value(value)
    return complex(value)


# Borel family


def _on_box(series: TruncatedSeries, order: int, label: str) -> TruncatedSeries:
    if series.trunc[0] >= order:
        return series.truncate((order,))
    try:
        return series.resize((order,))
    except TruncationOverflowError:
        logger.error(f"Coefficient {label} is known through x^{series.trunc[0]} but x^{order} is needed")
        raise


def _borel_or_none(series: TruncatedSeries, k: int, label: str) -> Optional[TruncatedSeries]:
    """Level-k transform, or None when the series starts below xᵏ."""
    if series.is_zero():
        return formal_borel_k(TruncatedSeries.zeros(series.vars, series.trunc, series.mode), k, "x", "gamma")
    if valuation(series, "x") < k:
        logger.warning(f"{label} has valuation {valuation(series, 'x')} < {k}; no level-{k} transform")
        return None
    return formal_borel_k(series, k, "x", "gamma")


def borel_coefficients(sol: FormalSolution, eq: EquationSpec) -> BorelFamily:
    """
    Borel transforms of the solution slices and of the equation coefficients.

    The equation must be in normal form; its solution slices then start at xᵏ.
    """
    if not is_normal_form(eq):
        raise ConditionError("Borel family needs a normal-form equation; run prepare_normal_form first")
    if sol.series.vars != ("t", "x"):
        raise SpecValidationError(f"Borel family needs a solution in (t, x), got {sol.series.vars}")
    k = eq.k
    n_t, n_x = sol.valid_orders
    if n_x <= k:
        raise TruncationOverflowError(f"Need N_x > k = {k} for a Borel family", required_order=k + 1)
    mode = eq.mode if k == 1 else "float"
    if k > 1 and eq.mode == "exact":
        logger.warning(f"Level-{k} Borel family is computed in float mode")

    def transform(series: TruncatedSeries, label: str) -> Optional[TruncatedSeries]:
        return _borel_or_none(_on_box(series, n_x, label).to_mode(mode), k, label)

    members = []
    for n in range(1, n_t + 1):
        slice_n = sol.series.slice("t", n).to_mode(mode)
        try:
            members.append(formal_borel_k(slice_n, k, "x", "gamma"))
        except SpecValidationError as e:
            raise SpecValidationError(f"Slice u_{n}: nonzero low-order x-coefficients ({e})") from e

    b_shift = arith("sub", _on_box(eq.b, n_x, "b"), TruncatedSeries.constant(eq.b0, ("x",), (n_x,), eq.mode))
    c_shift = arith("sub", _on_box(eq.c, n_x, "c"), TruncatedSeries.constant(eq.c0, ("x",), (n_x,), eq.mode))

    A_terms: Dict[TermKey, Optional[TruncatedSeries]] = {}
    B_terms: Dict[TermKey, Any] = {}
    for key, series in sorted(eq.nonlinear.items()):
        if series.is_zero():
            continue
        i, j, alpha = key
        head = series.coefficient(0)
        B_terms[key] = head if mode == "exact" else complex(head)
        rest = arith("sub", _on_box(series, n_x, f"a{key}"),
                     TruncatedSeries.constant(head, ("x",), (n_x,), series.mode))
        A_terms[key] = transform(rest, f"a{key} − a{key}(0)")

    family = BorelFamily(
        k=k,
        members=members,
        b0=eq.b0 if mode == "exact" else complex(eq.b0),
        c0=eq.c0 if mode == "exact" else complex(eq.c0),
        A=transform(eq.a, "a"),
        B=transform(b_shift, "b − b(0)"),
        C=transform(c_shift, "c − c(0)"),
        A_terms=A_terms,
        B_terms=B_terms,
        mode=mode,
        certified_order=sol.residual_order[1] - k,
    )
    logger.info(f"Borel family assembled: {n_t} members at level {k}, certified through ξ^{family.certified_order}")
    return family


class ConvolutionAssembler:
    """
    Builds Fₙ and the order-n residual
    (n − b₀ − k c₀ξᵏ)ũₙ − B∗ₖũₙ − C∗ₖ(kξᵏũₙ) − Fₙ.
    """

    def __init__(self, family: BorelFamily):
        self.logger = logging.getLogger(__name__)
        self.family = family
        self.box = (family.members[0].trunc[0],) if family.members else (0,)
        self._products: Dict[Tuple[int, int, int], TruncatedSeries] = {}
        self._slots: Dict[int, TruncatedSeries] = {}

    def zero(self) -> TruncatedSeries:
        return TruncatedSeries.zeros(("xi",), self.box, self.family.mode)

    def slot(self, p: int) -> TruncatedSeries:
        """Pₖũ_p = ξũ_p′ + kũ_p, the transform of the x∂ₓu slot."""
        if p not in self._slots:
            member = self.family.member(p)
            self._slots[p] = euler_derive(member, "xi") + arith("scale", member, self.family.k)
        return self._slots[p]

    def product(self, j: int, alpha: int, q: int) -> TruncatedSeries:
        """Coefficient of t^q in ũ^{∗j} ∗ₖ (Pₖũ)^{∗α}, for j + α ≥ 1."""
        key = (j, alpha, q)
        if key in self._products:
            return self._products[key]
        if q < j + alpha or q > self.family.order:
            result = self.zero()
        elif j + alpha == 1:
            result = self.family.member(q) if j else self.slot(q)
        else:
            result = self.zero()
            for p in range(1, q):
                rest = self.product(j - 1, alpha, q - p) if j else self.product(0, alpha - 1, q - p)
                if rest.is_zero():
                    continue
                factor = self.family.member(p) if j else self.slot(p)
                result = result + convolve(factor, rest, "xi", self.family.k)
        self._products[key] = result
        return result

    def forcing(self, n: int) -> TruncatedSeries:
        family = self.family
        total = self.zero()
        if n == 1:
            total = total + family.A
        for key, transform in sorted(family.A_terms.items()):
            i, j, alpha = key
            if i > n:
                continue
            if j + alpha == 0:
                if i == n:
                    if transform is None:
                        raise BorelPlaneError(f"a{key} has no level-{family.k} transform")
                    total = total + transform
                continue
            prod = self.product(j, alpha, n - i)
            if prod.is_zero():
                continue
            head = family.B_terms.get(key, 0)
            if head:
                total = total + arith("scale", prod, head)
            if transform is None:
                raise BorelPlaneError(f"F_{n} needs the level-{family.k} transform of a{key} − a{key}(0)")
            if not transform.is_zero():
                total = total + convolve(transform, prod, "xi", family.k)
        return total

    def residual(self, n: int) -> TruncatedSeries:
        family = self.family
        k = family.k
        u = family.member(n)
        xi_u = x_power(u, "xi", k)
        lhs = arith("scale", u, n - family.b0) - arith("scale", xi_u, k * family.c0)
        rhs = self.forcing(n)
        for name, kernel, operand in (("B", family.B, u), ("C", family.C, arith("scale", xi_u, k))):
            if kernel is None:
                raise BorelPlaneError(f"{name} has no level-{k} transform; residual of order {n} is undefined")
            if not kernel.is_zero():
                rhs = rhs + convolve(kernel, operand, "xi", k)
        residual = (lhs - rhs).truncate((max(family.certified_order, 0),))
        self.logger.debug(f"Convolution residual of order {n} assembled")
        return residual


def anticipative_family(sol: AnticipativeSolution, a: TruncatedSeries) -> AnticipativeFamily:
    """Borel transforms of the w-slices with their constant and linear x-terms removed."""
    n_s, n_x = sol.w.valid_orders
    if n_x < 3:
        raise TruncationOverflowError("Anticipative Borel family needs x-order ≥ 3", required_order=3)
    mode = sol.w.series.mode
    members, w1 = [], []
    for m in range(n_s):
        row = sol.w.series.slice("s", m + 1)
        w1.append(row.coefficient(1))
        table = row.coeffs.copy()
        table[:2] = ZERO if mode == "exact" else 0j
        tail = TruncatedSeries(("x",), (n_x,), table, mode, {"polynomial": False})
        members.append(formal_borel_k(tail, 1, "x", "gamma"))
    a_cut = _on_box(a, n_x, "a").to_mode(mode)
    a_shift = arith("sub", a_cut, TruncatedSeries.constant(a_cut.coefficient(0), ("x",), (n_x,), mode))
    return AnticipativeFamily(
        members=members,
        w1=w1,
        a_borel=formal_borel_k(a_shift, 1, "x", "gamma"),
        mode=mode,
        certified_order=n_x - 2,
    )


def _second_slot(f: TruncatedSeries) -> TruncatedSeries:
    """P f = ∂²(ξ f), the transform of ∂ₓ acting on x^{≥2} series."""
    top = f.trunc[0]
    lifted = x_power(pad(f, (top + 1,)), "xi", 1)
    return arith("derive", arith("derive", lifted, "xi"), "xi")


def _anticipative_residual(family: AnticipativeFamily, m: int) -> TruncatedSeries:
    if m < 0 or m >= len(family.members):
        raise BorelPlaneError(f"Anticipative family has members 0..{len(family.members) - 1}, asked for {m}")
    box = (family.certified_order,)
    v = family.members[m]
    lhs = (arith("scale", v, 2 * m + 1) - x_power(v, "xi", 1)).truncate(box)
    w1 = family.w1[m]
    forcing = TruncatedSeries.from_dict(("xi",), box, {0: (-2 * m - 1) * w1, 1: w1}, family.mode)
    if m == 0:
        forcing = forcing + family.a_borel.truncate(box)
    slots = [_second_slot(family.members[ell]) for ell in range(m)]
    for ell in range(m):
        partner = slots[m - ell - 1]
        forcing = forcing + arith("scale", partner, 2 * family.w1[ell])
        forcing = forcing + convolve(slots[ell], partner, "xi", 1)
    return (lhs - forcing).truncate(box)


def convolution_residual(fam: Union[BorelFamily, AnticipativeFamily], n: int) -> TruncatedSeries:
    """
    LHS − RHS of the order-n Borel-plane equation through the certified order.

    For a BorelFamily, n ≥ 1 is the t-order; for an AnticipativeFamily, n ≥ 0
    is the s-index m of (2m+1−ξ)ṽ_m = α̃_m + 2Σ w_{ℓ,1}Pṽ_{m−ℓ−1} + Σ Pṽ_ℓ∗Pṽ_{m−ℓ−1}.
    """
    if isinstance(fam, AnticipativeFamily):
        return _anticipative_residual(fam, n)
    return ConvolutionAssembler(fam).residual(n)


# Singular points and directions


def _pattern_angle(z: Any) -> Optional[Fraction]:
    """arg z / π when z lies on an axis or a diagonal."""
    if isinstance(z, Coeff):
        re, im = z.re, z.im
    else:
        re, im = z.real, z.imag
    if im == 0:
        return Fraction(0) if re > 0 else Fraction(1)
    if re == 0:
        return Fraction(1, 2) if im > 0 else Fraction(3, 2)
    if abs(re) == abs(im):
        table = {(True, True): Fraction(1, 4), (False, True): Fraction(3, 4),
                 (False, False): Fraction(5, 4), (True, False): Fraction(7, 4)}
        return table[(re > 0, im > 0)]
    return None


def _directions_of(points: List[Any], k: int) -> List[float]:
    exact_seen: set = set()
    angles: List[float] = []
    for z in points:
        if complex(z) == 0:
            continue
        pattern = _pattern_angle(z)
        for nu in range(k):
            if pattern is not None:
                key = ((pattern + 2 * nu) / k) % 2
                if key in exact_seen:
                    continue
                exact_seen.add(key)
                angle = float(key) * math.pi
            else:
                angle = float((np.angle(complex(z)) + 2 * math.pi * nu) / k) % (2 * math.pi)
            if any(abs(angle - other) <= ANGLE_TOLERANCE for other in angles):
                continue
            angles.append(angle)
    return sorted(angles)


def singular_scan(b0: Any, c0: Any, k: int = 1, N: int = 10) -> SingularData:
    """ξₙ = (n − b)/c for n ≤ N and the directions SD_{b,c;k} they generate with 1/c."""
    b0, c0 = _scalar(b0), _scalar(c0)
    if c0 == 0:
        raise DegenerateCoefficientError("degenerate leading coefficient: c(0) = 0")
    if N < 1 or k < 1:
        raise SpecValidationError(f"singular_scan needs N ≥ 1 and k ≥ 1, got N={N}, k={k}")
    one = Coeff(1) if isinstance(c0, Coeff) else 1.0
    inverse = one / c0
    points = [(n - b0) / c0 for n in range(1, N + 1)]
    return SingularData(
        xi_points=points,
        directions=_directions_of([inverse] + points, k),
        accumulation=_directions_of([inverse], k),
        k=k,
        b0=b0,
        c0=c0,
    )


def _angle_gap(angle: float, center: float) -> float:
    return (angle - center + math.pi) % (2 * math.pi) - math.pi


def sigma_bound(b0: Any, c0: Any, k: int, S: SectorSpec, n_max: int = 50,
                grid: Optional[Tuple[int, int]] = None) -> float:
    """
    Lower bound σ̂ of |n − b − cξᵏ|/(n + |ξᵏ|) over n ≥ 1 and ξ ∈ S.

    The minimum over n ≤ n_max on a log-radial × angular grid is polished
    locally, combined with the limits r → 0, r → ∞ and n → ∞, and shrunk by
    a relative safety factor.
    """
    if n_max < 1:
        raise SpecValidationError(f"n_max must be positive, got {n_max}")
    n_radii, n_angles = grid or (241, 129)
    scan = singular_scan(b0, c0, k, n_max)
    center, half = S.center, S.half_opening
    for direction in scan.directions:
        if abs(_angle_gap(direction, center)) <= half + ANGLE_TOLERANCE:
            raise SingularDirectionError(
                f"sector S({center:.6g}, {half:.6g}) meets singular direction {direction:.6g}")
    if S.disc_radius > 0:
        for z in scan.xi_points:
            if complex(z) != 0 and abs(complex(z)) ** (1 / k) < S.disc_radius:
                raise SingularDirectionError(f"disc of radius {S.disc_radius} contains a singular point")
    b, c = complex(scan.b0), complex(scan.c0)

    def ratio(n: float, xi: np.ndarray) -> np.ndarray:
        power = xi ** k
        return np.abs(n - b - c * power) / (n + np.abs(power))

    def scaled_limit(w: np.ndarray) -> np.ndarray:
        return np.abs(1 - c * w) / (1 + np.abs(w))

    r_hi = (10 * (n_max + abs(b)) / abs(c)) ** (1 / k) + 1
    radii = np.geomspace(1e-3, r_hi, n_radii)
    phis = np.linspace(center - half, center + half, n_angles)
    if S.disc_radius > 0:
        small = np.geomspace(1e-3, S.disc_radius, max(n_radii // 4, 2))
        disc_mesh = small[:, None] * np.exp(1j * np.linspace(0, 2 * np.pi, n_angles, endpoint=False))[None, :]
    else:
        disc_mesh = None
    mesh = radii[:, None] * np.exp(1j * phis)[None, :]

    best = (math.inf, 1, 0.0, center)
    for n in range(1, n_max + 1):
        values = ratio(n, mesh)
        idx = np.unravel_index(np.argmin(values), values.shape)
        if values[idx] < best[0]:
            best = (float(values[idx]), n, math.log(radii[idx[0]]), float(phis[idx[1]]))
        if disc_mesh is not None:
            best = min(best, (float(ratio(n, disc_mesh).min()), n, 0.0, center))

    rho = np.geomspace(1e-4, 1e4, n_radii)
    w_mesh = rho[:, None] * np.exp(1j * k * phis)[None, :]
    tail_values = scaled_limit(w_mesh)
    t_idx = np.unravel_index(np.argmin(tail_values), tail_values.shape)

    lo, hi = center - half, center + half
    bounds = [(math.log(1e-3), math.log(r_hi)), (lo, hi)]
    _, n_best, log_r, phi = best
    polished = optimize.minimize(
        lambda p: float(ratio(n_best, np.exp(p[0] + 1j * p[1]))),
        x0=np.array([log_r, phi]), method="L-BFGS-B", bounds=bounds)
    tail = optimize.minimize(
        lambda p: float(scaled_limit(np.exp(p[0] + 1j * k * p[1]))),
        x0=np.array([math.log(rho[t_idx[0]]), float(phis[t_idx[1]])]), method="L-BFGS-B",
        bounds=[(math.log(1e-4), math.log(1e4)), (lo, hi)])

    candidates = [best[0], float(polished.fun), float(tail_values[t_idx]), float(tail.fun), min(1.0, abs(c))]
    candidates.append(min(abs(n - b) / n for n in range(1, n_max + 1)))
    sigma = min(candidates) * SIGMA_SAFETY
    if sigma <= ANGLE_TOLERANCE:
        raise SingularDirectionError("ratio infimum is 0 on the sector")
    logger.debug(f"sigma bound {sigma:.6g} (grid minimum at n={n_best})")
    return sigma


# Volterra continuation oracle


def _march(B, C, F, xi_n: complex, ray: Ray, step: float) -> np.ndarray:
    """Product-trapezoid marching for (ξ − ξₙ)ψ = B∗ψ + C∗(ξψ) + F."""
    count = int(round(ray.length / step))
    xi = np.arange(count + 1) * step * ray.unit
    b_vals, c_vals, f_vals = B(xi), C(xi), F(xi)
    weight = step * ray.unit
    psi = np.zeros(count + 1, dtype=np.complex128)
    moment = np.zeros(count + 1, dtype=np.complex128)
    psi[0] = f_vals[0] / (xi[0] - xi_n)
    for j in range(1, count + 1):
        history_b = 0.5 * b_vals[j] * psi[0] + np.dot(b_vals[j - 1:0:-1], psi[1:j])
        history_c = 0.5 * c_vals[j] * moment[0] + np.dot(c_vals[j - 1:0:-1], moment[1:j])
        denom = (xi[j] - xi_n) - 0.5 * weight * (b_vals[0] + c_vals[0] * xi[j])
        psi[j] = (f_vals[j] + weight * (history_b + history_c)) / denom
        moment[j] = xi[j] * psi[j]
    return psi


def volterra_solve(B: Evaluable, C: Evaluable, F: Evaluable, xi_n: Any, ray: Ray) -> RaySamples:
    """
    Solve (ξ − ξₙ)ψ(ξ) = B∗ψ(ξ) + C∗(ξψ)(ξ) + F(ξ) on ξ = s·e^{id}.

    Runs the marching scheme at steps h, h/2, h/4; the reported ψ comes from
    h/4 at the nodes of step h, with err_est = |ψ_{h/2} − ψ_{h/4}|/3.
    """
    xi_n = complex(xi_n)
    unit = ray.unit
    foot = min(max((xi_n * unit.conjugate()).real, 0.0), ray.length)
    distance = abs(xi_n - foot * unit)
    if distance < 10 * ray.step:
        raise SingularDirectionError(
            f"ray in direction {ray.direction:.6g} passes within {distance:.3g} of ξₙ = {xi_n}")
    kernels = (as_evaluable(B), as_evaluable(C), as_evaluable(F))
    coarse, middle, fine = (_march(*kernels, xi_n, ray, ray.step / 2 ** level) for level in range(3))
    middle, fine = middle[::2], fine[::4]

    first = float(np.max(np.abs(coarse - middle)))
    second = float(np.max(np.abs(middle - fine)))
    scale = max(1.0, float(np.max(np.abs(fine))))
    if second <= 1e-13 * scale:
        observed = math.inf
    else:
        observed = math.log2(first / second) if first > 0 else 0.0
        if observed < 1.0:
            raise QuadratureError(f"Step refinement does not converge (observed order {observed:.2f})")
    s = np.arange(len(fine)) * ray.step
    return RaySamples(ray=ray, s=s, psi=fine, err_est=np.abs(middle - fine) / 3, observed_order=observed)


def volterra_member(fam: BorelFamily, ray: Ray, n: int = 1) -> RaySamples:
    """
    Continue ũ₁ along a ray through its Volterra form.

    (1 − b₀ − c₀ξ)ũ₁ = B∗ũ₁ + C∗(ξũ₁) + A is divided by −c₀, giving
    (ξ − ξ₁)ũ₁ = B′∗ũ₁ + C′∗(ξũ₁) + F′ with ξ₁ = (1 − b₀)/c₀.
    """
    if fam.k != 1:
        raise SpecValidationError("The Volterra cross-check is implemented at level 1")
    if n != 1:
        raise SpecValidationError("Only the first member has a closed Volterra form")
    factor = -1 / fam.c0
    mapped = [None if s is None else arith("scale", s, factor) for s in (fam.B, fam.C, fam.A)]
    return volterra_solve(*mapped, (1 - fam.b0) / fam.c0, ray)


# Log-pole expansion


def _coefficients(series: TruncatedSeries, mode: str) -> List[Any]:
    series = series.to_mode(mode)
    return list(series.coeffs[: max(series.degree(), 0) + 1])


def _pole_convolution(K: List[Any], G: List[Any], xi_n: Any, mode: str) -> Tuple[List[Any], List[Any]]:
    """
    ∫₀^ξ K(ξ−τ) G(τ)/(τ−ξₙ) dτ = P(ξ) + R(ξ)·log(1 − ξ/ξₙ) for polynomials K, G.
    """
    zero = ZERO if mode == "exact" else 0j
    size = len(K) + len(G) + 1
    P = [zero] * size
    R = [zero] * size
    for m, k_m in enumerate(K):
        if not k_m:
            continue
        for ell in range(m + 1):
            weight = k_m * math.comb(m, ell) * (-1) ** (m - ell)
            tau_poly = [zero] * (m - ell) + [weight * g for g in G]
            quotient, remainder = divide_by_linear(
                TruncatedSeries.from_coefficients("tau", tau_poly, mode=mode), xi_n)
            R[ell] = R[ell] + remainder
            for j, q_j in enumerate(quotient.coeffs):
                if q_j:
                    P[ell + j + 1] = P[ell + j + 1] + q_j / (j + 1)
    return P, R


def perturbation_log_expansion(B: TruncatedSeries, C: TruncatedSeries, F: TruncatedSeries,
                               xi_n: Any, order: int = 1) -> List[LogSeries]:
    """
    ψ₀ = F/(ξ − ξₙ) and ψ₁ = (B∗ψ₀ + C∗(ξψ₀))/(ξ − ξₙ) as log-pole series around ξₙ.
    """
    if order not in (0, 1):
        raise SpecValidationError(f"Log expansion is available for orders 0 and 1, got {order}")
    xi_n = _scalar(xi_n)
    if complex(xi_n) == 0:
        raise SpecValidationError("Log expansion needs ξₙ ≠ 0")
    exact = all(s.is_exact for s in (B, C, F)) and isinstance(xi_n, Coeff)
    mode = "exact" if exact else "float"
    xi_n = xi_n if exact else complex(xi_n)

    f_coeffs = _coefficients(F, mode)
    shifted_f = taylor_shift(TruncatedSeries.from_coefficients("xi", f_coeffs, mode=mode), xi_n)
    expansions = [LogSeries(xi_n, (LogTerm(0, 1, shifted_f),))]
    if order == 0:
        return expansions

    zero = ZERO if mode == "exact" else 0j
    p_b, r_b = _pole_convolution(_coefficients(B, mode), f_coeffs, xi_n, mode)
    p_c, r_c = _pole_convolution(_coefficients(C, mode), [zero] + f_coeffs, xi_n, mode)
    size = max(len(p_b), len(p_c))
    p_b, p_c, r_b, r_c = ([*v, *([zero] * (size - len(v)))] for v in (p_b, p_c, r_b, r_c))
    regular = TruncatedSeries.from_coefficients("xi", [x + y for x, y in zip(p_b, p_c)], mode=mode)
    logarithmic = TruncatedSeries.from_coefficients("xi", [x + y for x, y in zip(r_b, r_c)], mode=mode)
    expansions.append(LogSeries(xi_n, (
        LogTerm(0, 1, taylor_shift(regular, xi_n)),
        LogTerm(1, 1, taylor_shift(logarithmic, xi_n)),
    )))
    return expansions
