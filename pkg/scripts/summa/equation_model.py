"""
Equation Model for Singular PDEs

Problem instances of

    t∂ₜu = a(x)t + b(x)u + x^(k+1)c(x)∂ₓu + Σ a_{i,j,α}(x) tⁱ uʲ (∂ₓu)^α,   u(0, x) = 0

together with the structural checks the summability theory needs:
- JSON spec parsing (coefficient lists or polynomial strings such as "x^2+3x")
- Conditions (F) and (F') and the resonance test b(0) ∈ N*
- The preparation transform u = v + x·w onto the normal form, where the
  nonlinear slot is x∂ₓw and val(ã) ≥ k
- Newton polygons of nonlinear ODEs along a formal solution

Design Decision: Coefficient functions are truncated x-series flagged as exact
polynomials when parsed from a document, so recursions may extend them with
zeros to whatever working order they need.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from tokenize import TokenError
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication_application,
    parse_expr,
    standard_transformations,
)

from .errors import (
    ConditionError,
    DegenerateCoefficientError,
    ResonanceError,
    SpecValidationError,
    TruncationOverflowError,
)
from .series_core import (
    Coeff,
    TruncatedSeries,
    arith,
    euler_derive,
    lift,
    pad,
    valuation,
    x_power,
)

logger = logging.getLogger(__name__)

TermKey = Tuple[int, int, int]

_TRANSFORMATIONS = standard_transformations + (implicit_multiplication_application, convert_xor)
_X = sympy.Symbol("x")


@dataclass(frozen=True)
class EquationSpec:
    """
    Data of one PDE instance.

    `euler_form` marks specs whose nonlinear slot is x∂ₓu instead of ∂ₓu
    (the output of prepare_normal_form).
    """
    a: TruncatedSeries
    b: TruncatedSeries
    c: TruncatedSeries
    k: int = 1
    nonlinear: Mapping[TermKey, TruncatedSeries] = field(default_factory=dict)
    trunc: Tuple[int, int] = (8, 8)
    mode: str = "exact"
    euler_form: bool = False
    allow_resonance: bool = False

    def __post_init__(self):
        object.__setattr__(self, "trunc", tuple(int(n) for n in self.trunc))
        object.__setattr__(self, "nonlinear", dict(self.nonlinear))
        self._validate_structure()

    def _validate_structure(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise SpecValidationError(f"Level k must be a positive integer, got {self.k}")
        if len(self.trunc) != 2 or min(self.trunc) < 1:
            raise SpecValidationError(f"Truncation orders must be positive, got {self.trunc}")
        if self.mode not in ("exact", "float"):
            raise SpecValidationError(f"Unknown mode '{self.mode}'")
        for name in ("a", "b", "c"):
            series = getattr(self, name)
            if series.vars != ("x",):
                raise SpecValidationError(f"Coefficient {name} must be a series in x, got {series.vars}")
        for key, series in self.nonlinear.items():
            if len(key) != 3 or min(key) < 0 or sum(key) < 2:
                raise SpecValidationError(f"Nonlinear index {key} must satisfy i+j+alpha >= 2")
            if series.vars != ("x",):
                raise SpecValidationError(f"Coefficient a{key} must be a series in x")

    @property
    def b0(self):
        return self.b.coefficient(0)

    @property
    def c0(self):
        return self.c.coefficient(0)

    @property
    def gamma(self) -> TruncatedSeries:
        """γ(x) = x^(k+1) c(x), on the box of c extended by k+1 when c is a polynomial."""
        c = self.c.resize((self.c.trunc[0] + self.k + 1,)) if self.c.is_polynomial else self.c
        return x_power(c, "x", self.k + 1)

    def derivative_terms(self) -> Dict[TermKey, TruncatedSeries]:
        return {key: s for key, s in self.nonlinear.items() if key[2] > 0 and not s.is_zero()}

    def validate(self):
        """Mathematical preconditions checked when a spec is loaded."""
        if self.c0 == 0:
            raise DegenerateCoefficientError("degenerate leading coefficient: c(0) = 0")
        n = resonant_order(self.b0)
        if n is not None and not self.allow_resonance:
            raise ResonanceError(f"resonance: b(0) = {n} ∈ N*", order=n)
        return self

    def to_json(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "a": self.a.to_json(),
            "b": self.b.to_json(),
            "c": self.c.to_json(),
            "nonlinear": [{"i": i, "j": j, "alpha": al, "coeff": s.to_json()}
                          for (i, j, al), s in sorted(self.nonlinear.items())],
            "trunc": list(self.trunc),
            "mode": self.mode,
            "euler_form": self.euler_form,
        }


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the (F)/(F') and resonance checks."""
    condition_F: bool
    condition_F_prime: bool
    resonance: bool
    q: Union[int, float]
    offending_terms: List[TermKey]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "condition_F": self.condition_F,
            "condition_F_prime": self.condition_F_prime,
            "resonance": self.resonance,
            "q": None if self.q == math.inf else self.q,
            "offending_terms": [list(t) for t in self.offending_terms],
        }


@dataclass(frozen=True)
class NormalForm:
    """Result of the preparation transform u = head + x·w (or u = w when not applied)."""
    equation: EquationSpec
    head: TruncatedSeries
    ell: int
    applied: bool


@dataclass(frozen=True)
class NewtonPolygon:
    """Lower convex boundary of the points (i, v_i)."""
    points: List[Tuple[int, int]]
    slopes: List[Fraction]
    fuchsian: bool
    order_limited: bool = False

    def gevrey_admissible(self, k: Union[int, Fraction]) -> bool:
        """True when no slope lies in the open interval (0, k)."""
        return not any(0 < s < k for s in self.slopes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "points": [list(p) for p in self.points],
            "slopes": [str(s) for s in self.slopes],
            "fuchsian": self.fuchsian,
            "order_limited": self.order_limited,
        }


def resonant_order(b0: Any) -> Optional[int]:
    """The positive integer equal to b0, if any."""
    if isinstance(b0, Coeff):
        if b0.im or b0.re.denominator != 1 or b0.re < 1:
            return None
        return int(b0.re)
    z = complex(b0)
    n = round(z.real)
    if abs(z.imag) > 1e-12 or abs(z.real - n) > 1e-12 or n < 1:
        return None
    return int(n)


# Parsing


def parse_series(value: Any, trunc: int, mode: str = "exact") -> TruncatedSeries:
    """Coefficient list or polynomial string to an exact polynomial x-series."""
    if isinstance(value, TruncatedSeries):
        return value
    if isinstance(value, Mapping):
        return TruncatedSeries.from_json(value)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if isinstance(value, str):
        coeffs = _parse_polynomial(value, mode)
    elif isinstance(value, Sequence):
        coeffs = [Coeff.from_value(v) for v in value] if mode == "exact" else [_complex_value(v) for v in value]
    else:
        raise SpecValidationError(f"Unsupported series description {value!r}")
    degree = max(len(coeffs) - 1, 0)
    return TruncatedSeries.from_coefficients("x", coeffs or [0], max(trunc, degree), mode, polynomial=True)


def _complex_value(v: Any) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(Fraction(str(v[0]))), float(Fraction(str(v[1]))))
    return complex(float(Fraction(str(v)))) if isinstance(v, str) else complex(v)


def _parse_polynomial(text: str, mode: str) -> List[Any]:
    try:
        expr = parse_expr(text, local_dict={"x": _X, "i": sympy.I, "I": sympy.I},
                          transformations=_TRANSFORMATIONS)
        expr = sympy.nsimplify(sympy.expand(expr), rational=True)
        poly = sympy.Poly(expr, _X)
    except (sympy.SympifyError, sympy.PolynomialError, SyntaxError, TypeError, ValueError, TokenError) as e:
        raise SpecValidationError(f"Cannot parse polynomial '{text}': {e}") from e
    degree = poly.degree() if not poly.is_zero else 0
    coeffs: List[Any] = [0] * (degree + 1)
    for (power,), coeff in poly.terms():
        re, im = sympy.re(coeff), sympy.im(coeff)
        if mode == "exact":
            if not (re.is_Rational and im.is_Rational):
                raise SpecValidationError(f"Irrational coefficient {coeff} in exact mode")
            coeffs[power] = Coeff(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))
        else:
            coeffs[power] = complex(float(re), float(im))
    return coeffs


def parse_spec(document: Union[str, Mapping[str, Any]], allow_resonance: bool = False,
               trunc: Optional[Sequence[int]] = None, mode: Optional[str] = None) -> EquationSpec:
    """Parse and validate an equation-spec JSON document."""
    try:
        payload = json.loads(document) if isinstance(document, str) else dict(document)
    except json.JSONDecodeError as e:
        logger.error(f"Spec document is not valid JSON: {e}")
        raise SpecValidationError(f"Spec document is not valid JSON: {e}") from e

    missing = [key for key in ("k", "a", "b", "c") if key not in payload]
    if missing:
        raise SpecValidationError(f"Spec is missing required fields: {missing}")
    unknown = set(payload) - {"k", "a", "b", "c", "nonlinear", "trunc", "mode", "euler_form", "name"}
    if unknown:
        raise SpecValidationError(f"Unknown spec fields: {sorted(unknown)}")

    mode = mode or payload.get("mode", "exact")
    n_t, n_x = tuple(trunc or payload.get("trunc", (8, 8)))
    k = payload["k"]
    if not isinstance(k, int) or isinstance(k, bool):
        raise SpecValidationError(f"k must be an integer, got {k!r}")

    nonlinear: Dict[TermKey, TruncatedSeries] = {}
    raw_terms = payload.get("nonlinear", [])
    if isinstance(raw_terms, Mapping):
        raw_terms = [] if not raw_terms else _terms_from_mapping(raw_terms)
    for term in raw_terms:
        try:
            key = (int(term["i"]), int(term["j"]), int(term["alpha"]))
            coeff = term["coeff"]
        except (KeyError, TypeError, ValueError) as e:
            raise SpecValidationError(f"Malformed nonlinear term {term!r}") from e
        if key in nonlinear:
            raise SpecValidationError(f"Duplicate nonlinear term {key}")
        nonlinear[key] = parse_series(coeff, n_x, mode)

    spec = EquationSpec(
        a=parse_series(payload["a"], n_x, mode),
        b=parse_series(payload["b"], n_x, mode),
        c=parse_series(payload["c"], n_x, mode),
        k=k,
        nonlinear=nonlinear,
        trunc=(n_t, n_x),
        mode=mode,
        euler_form=bool(payload.get("euler_form", False)),
        allow_resonance=allow_resonance,
    )
    return spec.validate()


def _terms_from_mapping(raw: Mapping[str, Any]) -> List[Dict[str, Any]]:
    terms = []
    for key, coeff in raw.items():
        i, j, alpha = (int(p) for p in str(key).strip("()[] ").split(","))
        terms.append({"i": i, "j": j, "alpha": alpha, "coeff": coeff})
    return terms


# Conditions


def check_conditions(eq: EquationSpec) -> ConditionReport:
    """Evaluate (F), (F') and resonance by direct valuation tests."""
    resonance = resonant_order(eq.b0) is not None
    q_values = [valuation(s, "x") for (i, j, al), s in eq.nonlinear.items()
                if j == 0 and al == 0 and i >= 2 and not s.is_zero()]
    q = min(q_values) if q_values else math.inf

    offending: List[TermKey] = []
    f_prime = True
    for key, series in sorted(eq.derivative_terms().items()):
        _, j, _ = key
        if series.coefficient(0) != 0:
            offending.append(key)
        weighted = 0 if j == 0 else j * q
        if valuation(series, "x") + weighted <= 0:
            f_prime = False

    condition_f = not resonance and not offending
    return ConditionReport(
        condition_F=condition_f,
        condition_F_prime=condition_f or (not resonance and f_prime),
        resonance=resonance,
        q=q,
        offending_terms=offending,
    )


def is_normal_form(eq: EquationSpec) -> bool:
    """val(a) ≥ k, val(a_{i,0,0}) ≥ k and no ∂ₓu slot left."""
    if valuation(eq.a, "x") < eq.k:
        return False
    for (i, j, al), series in eq.nonlinear.items():
        if j == 0 and al == 0 and valuation(series, "x") < eq.k:
            return False
    return eq.euler_form or not eq.derivative_terms()


# Preparation transform


def prepare_normal_form(eq: EquationSpec, ell: Optional[int] = None,
                        solution: Optional[Any] = None) -> NormalForm:
    """
    Substitute u = v + x·w with v the solution head up to x^ell.

    The returned equation in w has ã = x^ell·(...), b̃ = b + x^k c, c̃ = c and
    every nonlinear term written against W = x∂ₓw.
    """
    ell = eq.k if ell is None else ell
    if ell < eq.k:
        raise SpecValidationError(f"ell must be at least k = {eq.k}, got {ell}")
    report = check_conditions(eq)
    if report.resonance:
        raise ResonanceError(f"resonance: b(0) ∈ N* blocks the preparation transform")
    if not report.condition_F_prime:
        raise ConditionError(
            f"condition (F) is not satisfied and (F') fails for terms {report.offending_terms}")

    n_t, n_x = eq.trunc
    if n_x < ell:
        raise TruncationOverflowError(f"Need N_x ≥ ell = {ell} to build the solution head",
                                      required_order=ell)
    if solution is None:
        from .formal_solver import solve_formal
        solution = solve_formal(eq)
    u_hat = solution.series

    box = (n_t, n_x + 1)
    mode = eq.mode
    head = TruncatedSeries.from_dict(
        ("t", "x"), box,
        {(n, m): u_hat.coefficient(n, m) for n in range(n_t + 1) for m in range(ell + 1)}, mode)

    if is_normal_form(eq):
        logger.info("Spec already in normal form; preparation transform skipped")
        return NormalForm(eq, head.truncate((n_t, n_x)), ell, False)

    def lifted(series: TruncatedSeries) -> TruncatedSeries:
        return lift(series.resize((n_x + 1,)) if series.is_polynomial else series, ("t", "x"), box)

    x_series = TruncatedSeries.variable("x", ("t", "x"), box, mode)
    one = TruncatedSeries.constant(1, ("t", "x"), box, mode)
    head_dx = pad(arith("derive", head, "x"), box)
    # slot value of the head and the weight p of (w + W) in the derivative slot
    slot_head, slot_weight = (arith("mul", x_series, head_dx), x_series) if eq.euler_form else (head_dx, one)

    forcing = arith("mul", lifted(eq.a), TruncatedSeries.variable("t", ("t", "x"), box, mode))
    forcing = forcing + arith("mul", lifted(eq.b), head)
    forcing = forcing + arith("mul", x_power(lifted(eq.c), "x", eq.k + 1), head_dx)
    forcing = forcing - euler_derive(head, "t")

    monomials: Dict[Tuple[int, int], TruncatedSeries] = {}
    head_pow = _cached_powers(head, one)
    slot_pow = _cached_powers(slot_head, one)
    x_pow = _cached_powers(x_series, one)
    weight_pow = _cached_powers(slot_weight, one)
    for (i, j, alpha), coeff in sorted(eq.nonlinear.items()):
        base = x_power(lifted(coeff), "t", i)
        forcing = forcing + base * head_pow(j) * slot_pow(alpha)
        for p1 in range(j + 1):
            for q in range(alpha + 1):
                for r in range(alpha + 1 - q):
                    if p1 == q == r == 0:
                        continue
                    mult = math.comb(j, p1) * math.factorial(alpha) // (
                        math.factorial(q) * math.factorial(r) * math.factorial(alpha - q - r))
                    term = base * head_pow(j - p1) * slot_pow(alpha - q - r) * x_pow(p1) * weight_pow(q + r)
                    key = (p1 + q, r)
                    term = arith("scale", term, mult)
                    monomials[key] = monomials[key] + term if key in monomials else term

    forcing_w = _divide_by_x(forcing, "forcing")

    a_new = forcing_w.slice("t", 1)
    nonlinear: Dict[TermKey, TruncatedSeries] = {}
    for n in range(2, n_t + 1):
        slice_n = forcing_w.slice("t", n)
        if not slice_n.is_zero():
            nonlinear[(n, 0, 0)] = slice_n
    for (power, r), series in sorted(monomials.items()):
        series_w = _divide_by_x(series, f"slot monomial w^{power} W^{r}")
        for n in range(n_t + 1):
            slice_n = series_w.slice("t", n)
            if slice_n.is_zero():
                continue
            if n + power + r < 2:
                raise ConditionError(f"transformed term ({n},{power},{r}) is not of order ≥ 2")
            key = (n, power, r)
            nonlinear[key] = nonlinear[key] + slice_n if key in nonlinear else slice_n

    c_trunc = eq.c.resize((n_x,)) if eq.c.is_polynomial else eq.c.truncate((n_x,))
    b_trunc = eq.b.resize((n_x,)) if eq.b.is_polynomial else eq.b.truncate((n_x,))
    b_new = b_trunc + x_power(c_trunc, "x", eq.k)
    normal = EquationSpec(
        a=a_new, b=b_new, c=c_trunc, k=eq.k, nonlinear=nonlinear, trunc=eq.trunc,
        mode=mode, euler_form=True, allow_resonance=eq.allow_resonance)

    if valuation(normal.a, "x") < eq.k or any(
            valuation(s, "x") < eq.k for (i, j, al), s in normal.nonlinear.items() if j == 0 and al == 0):
        raise ConditionError("transformed forcing has valuation below k")
    logger.info(f"Prepared normal form with ell={ell}: {len(nonlinear)} nonlinear terms")
    return NormalForm(normal, head.truncate((n_t, n_x)), ell, True)


def _divide_by_x(series: TruncatedSeries, label: str) -> TruncatedSeries:
    column = series.coeffs[:, 0]
    if any(value != 0 for value in column):
        raise ConditionError(f"{label} is not divisible by x; condition (F') is not met")
    n_t, n_x = series.trunc
    table = series.coeffs[:, 1:].copy()
    return TruncatedSeries(series.vars, (n_t, n_x - 1), table, series.mode, {"polynomial": False})


def _cached_powers(base: TruncatedSeries, one: TruncatedSeries):
    powers = {0: one, 1: base}

    def power(n: int) -> TruncatedSeries:
        if n not in powers:
            powers[n] = power(n - 1) * base
        return powers[n]

    return power


# Newton polygon


def newton_polygon(F: Mapping[Tuple[int, ...], TruncatedSeries], phi: TruncatedSeries) -> NewtonPolygon:
    """
    Newton polygon of the linearization of F(x, y, δy, ..., δ^m y) along φ.

    F maps slot exponent tuples (e₀, ..., e_m) to coefficient series in the
    variable of φ; δ = x d/dx.
    """
    if not F:
        raise SpecValidationError("Empty operator")
    lengths = {len(key) for key in F}
    if len(lengths) != 1:
        raise SpecValidationError("All slot exponent tuples must have the same length")
    m = lengths.pop() - 1
    var = phi.vars[0]
    n = phi.trunc[0]
    for series in F.values():
        if series.vars != (var,):
            raise SpecValidationError(f"Coefficient variables {series.vars} differ from {(var,)}")
        n = min(n, series.trunc[0])

    slots = [phi.truncate((n,))]
    for _ in range(m):
        slots.append(euler_derive(slots[-1], var))
    one = TruncatedSeries.constant(1, (var,), (n,), phi.mode)
    slot_powers = [_cached_powers(s, one) for s in slots]

    valuations: Dict[int, Union[int, float]] = {}
    for i in range(m + 1):
        partial = TruncatedSeries.zeros((var,), (n,), phi.mode)
        for exps, coeff in F.items():
            if exps[i] == 0:
                continue
            term = coeff.truncate((n,))
            term = arith("scale", term, exps[i])
            for idx, e in enumerate(exps):
                power = e - 1 if idx == i else e
                if power:
                    term = term * slot_powers[idx](power)
            partial = partial + term
        valuations[i] = valuation(partial, var)

    finite = [(i, v) for i, v in valuations.items() if v != math.inf]
    if not finite:
        raise TruncationOverflowError(
            f"All partial derivatives vanish through order {n}; polygon undecidable", required_order=n + 1)
    order_limited = len(finite) < len(valuations)
    if order_limited:
        logger.warning(f"Newton polygon is order-limited: some valuations exceed order {n}")

    slopes = _lower_hull_slopes(finite)
    top = valuations[m]
    fuchsian = top != math.inf and all(top <= v for _, v in finite)
    return NewtonPolygon(points=finite, slopes=slopes, fuchsian=fuchsian, order_limited=order_limited)


def _lower_hull_slopes(points: List[Tuple[int, int]]) -> List[Fraction]:
    hull: List[Tuple[int, int]] = []
    for p in sorted(points):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    slopes = [Fraction(y2 - y1, x2 - x1) for (x1, y1), (x2, y2) in zip(hull, hull[1:])]
    return sorted(s for s in slopes if s > 0)
