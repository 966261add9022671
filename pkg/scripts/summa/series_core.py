"""
Truncated Power-Series Arithmetic

Dense truncated power series in one or two variables with either exact
Gaussian-rational coefficients or complex128 coefficients:
- Ring operations (add, sub, scale, Cauchy product, derive, integrate)
- Borel-plane convolution at level 1 and level k
- Formal k-Borel transform and ramification
- Substitution of series into polynomials in (u, ∂ₓu)

Design Decision: Coefficients are stored in dense rectangular numpy arrays
(object dtype for exact mode, complex128 for float mode):
1. Truncation orders stay small (≤ 64 per variable), so O(N²) products are cheap
2. numpy slicing gives shift-accumulate Cauchy products for both modes
3. Float mode switches to FFT convolution above degree 32

Binary operations truncate to the intersection of the operand boxes. Float-mode
chains of up to 10⁴ elementary operations stay within a relative error of 2⁻⁴⁰
for the coefficient magnitudes met in the recursions.
"""

import logging
import math
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import signal, special

from .errors import SpecValidationError, TruncationOverflowError

logger = logging.getLogger(__name__)

VARIABLE_TAGS = ("t", "x", "xi", "s", "tau", "z", "h")
MODES = ("exact", "float")
FFT_THRESHOLD = 32


class Coeff:
    """Exact complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: Any = 0, im: Any = 0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    @classmethod
    def from_value(cls, value: Any) -> "Coeff":
        """Coerce ints, Fractions, numeric strings or [re, im] pairs."""
        if isinstance(value, Coeff):
            return value
        if isinstance(value, bool):
            raise SpecValidationError(f"Not a coefficient: {value!r}")
        if isinstance(value, numbers.Integral):
            return cls(int(value))
        if isinstance(value, numbers.Rational):
            return cls(Fraction(value.numerator, value.denominator))
        if isinstance(value, (float, np.floating)):
            return cls(Fraction(float(value)))
        if isinstance(value, (complex, np.complexfloating)):
            return cls(Fraction(value.real), Fraction(value.imag))
        if isinstance(value, str):
            try:
                return cls(Fraction(value.strip()))
            except (ValueError, ZeroDivisionError) as e:
                raise SpecValidationError(f"Cannot parse coefficient '{value}'") from e
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return cls(cls.from_value(value[0]).re, cls.from_value(value[1]).re)
        raise SpecValidationError(f"Not a coefficient: {value!r}")

    @staticmethod
    def _coerce(other: Any) -> Optional["Coeff"]:
        if isinstance(other, Coeff):
            return other
        if isinstance(other, bool):
            return None
        if isinstance(other, numbers.Integral):
            return Coeff(int(other))
        if isinstance(other, Fraction):
            return Coeff(other)
        if isinstance(other, numbers.Rational):
            return Coeff(Fraction(int(other.numerator), int(other.denominator)))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) + other if isinstance(other, numbers.Complex) else NotImplemented
        if not self.im and not o.im:
            return Coeff(self.re + o.re)
        return Coeff(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) - other if isinstance(other, numbers.Complex) else NotImplemented
        return Coeff(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return other - complex(self) if isinstance(other, numbers.Complex) else NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) * other if isinstance(other, numbers.Complex) else NotImplemented
        if not self.im and not o.im:
            return Coeff(self.re * o.re)
        return Coeff(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) / other if isinstance(other, numbers.Complex) else NotImplemented
        if not o.im:
            if not o.re:
                raise ZeroDivisionError("Coeff division by zero")
            return Coeff(self.re / o.re, self.im / o.re)
        norm = o.re * o.re + o.im * o.im
        return Coeff((self.re * o.re + self.im * o.im) / norm,
                     (self.im * o.re - self.re * o.im) / norm)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return other / complex(self) if isinstance(other, numbers.Complex) else NotImplemented
        return o / self

    def __pow__(self, exponent: int):
        if not isinstance(exponent, numbers.Integral):
            return complex(self) ** exponent
        result, base, e = Coeff(1), self, abs(int(exponent))
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return Coeff(1) / result if exponent < 0 else result

    def __neg__(self):
        return Coeff(-self.re, -self.im)

    def __pos__(self):
        return self

    def __abs__(self) -> float:
        return abs(complex(self))

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, numbers.Complex):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self) -> "Coeff":
        return Coeff(self.re, -self.im)

    @property
    def real(self) -> Fraction:
        return self.re

    @property
    def imag(self) -> Fraction:
        return self.im

    def to_pair(self) -> List[str]:
        """Serialize as ["p/q", "r/s"]."""
        return [_fraction_str(self.re), _fraction_str(self.im)]

    def __repr__(self):
        if not self.im:
            return f"Coeff({_fraction_str(self.re)})"
        return f"Coeff({_fraction_str(self.re)}, {_fraction_str(self.im)})"


ZERO = Coeff(0)
ONE = Coeff(1)


def _fraction_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _zeros(shape: Tuple[int, ...], mode: str) -> np.ndarray:
    if mode == "exact":
        return np.full(shape, ZERO, dtype=object)
    return np.zeros(shape, dtype=np.complex128)


def _as_mode(value: Any, mode: str):
    if mode == "exact":
        return Coeff.from_value(value)
    return complex(value)


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """
    Truncated power series in one or two variables.

    `trunc` holds the inclusive maximal exponent per variable. `meta` carries
    bookkeeping flags: `polynomial` (exact polynomial, may be extended with
    zeros), `borel_level`, `normalization`, `demoted_to_float`.
    """
    vars: Tuple[str, ...]
    trunc: Tuple[int, ...]
    coeffs: np.ndarray
    mode: str = "exact"
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "trunc", tuple(int(n) for n in self.trunc))
        self._validate_series()
        self.coeffs.setflags(write=False)

    def _validate_series(self):
        if len(self.vars) not in (1, 2):
            raise SpecValidationError(f"Series need one or two variables, got {self.vars}")
        if len(set(self.vars)) != len(self.vars):
            raise SpecValidationError(f"Duplicate variable tags {self.vars}")
        for tag in self.vars:
            if tag not in VARIABLE_TAGS:
                raise SpecValidationError(f"Unknown variable tag '{tag}'")
        if len(self.trunc) != len(self.vars) or any(n < 0 for n in self.trunc):
            raise SpecValidationError(f"Bad truncation {self.trunc} for variables {self.vars}")
        if self.mode not in MODES:
            raise SpecValidationError(f"Unknown mode '{self.mode}'")
        expected = tuple(n + 1 for n in self.trunc)
        if self.coeffs.shape != expected:
            raise SpecValidationError(f"Coefficient table shape {self.coeffs.shape} != {expected}")
        if self.mode == "exact" and self.coeffs.dtype != object:
            raise SpecValidationError("Exact series need an object coefficient table")
        if self.mode == "float" and self.coeffs.dtype != np.complex128:
            raise SpecValidationError("Float series need a complex128 coefficient table")

    # Constructors

    @classmethod
    def zeros(cls, vars: Sequence[str], trunc: Sequence[int], mode: str = "exact",
              meta: Optional[Dict[str, Any]] = None) -> "TruncatedSeries":
        shape = tuple(int(n) + 1 for n in trunc)
        meta = {"polynomial": True} if meta is None else meta
        return cls(tuple(vars), tuple(trunc), _zeros(shape, mode), mode, meta)

    @classmethod
    def from_dict(cls, vars: Sequence[str], trunc: Sequence[int],
                  terms: Mapping[Any, Any], mode: str = "exact",
                  polynomial: bool = True) -> "TruncatedSeries":
        """Build from {exponent(s): value}; terms outside the box are dropped."""
        shape = tuple(int(n) + 1 for n in trunc)
        table = _zeros(shape, mode)
        for exps, value in terms.items():
            exps = (exps,) if isinstance(exps, numbers.Integral) else tuple(exps)
            if len(exps) != len(shape):
                raise SpecValidationError(f"Exponent {exps} does not match variables {tuple(vars)}")
            if any(e < 0 for e in exps):
                raise SpecValidationError(f"Negative exponent {exps}")
            if all(e < n for e, n in zip(exps, shape)):
                table[exps] = table[exps] + _as_mode(value, mode)
        return cls(tuple(vars), tuple(trunc), table, mode, {"polynomial": polynomial})

    @classmethod
    def from_coefficients(cls, var: str, values: Sequence[Any], trunc: Optional[int] = None,
                          mode: str = "exact", polynomial: bool = True) -> "TruncatedSeries":
        """One-variable series from a coefficient list, constant term first."""
        trunc = len(values) - 1 if trunc is None else trunc
        return cls.from_dict((var,), (max(trunc, 0),), {i: v for i, v in enumerate(values)},
                             mode, polynomial)

    @classmethod
    def monomial(cls, vars: Sequence[str], trunc: Sequence[int], exps: Sequence[int],
                 value: Any = 1, mode: str = "exact") -> "TruncatedSeries":
        return cls.from_dict(vars, trunc, {tuple(exps): value}, mode)

    @classmethod
    def constant(cls, value: Any, vars: Sequence[str], trunc: Sequence[int],
                 mode: str = "exact") -> "TruncatedSeries":
        return cls.monomial(vars, trunc, (0,) * len(tuple(vars)), value, mode)

    @classmethod
    def variable(cls, tag: str, vars: Sequence[str], trunc: Sequence[int],
                 mode: str = "exact") -> "TruncatedSeries":
        vars = tuple(vars)
        if tag not in vars:
            raise SpecValidationError(f"Variable '{tag}' not among {vars}")
        return cls.monomial(vars, trunc, tuple(1 if v == tag else 0 for v in vars), 1, mode)

    # Inspection

    @property
    def is_exact(self) -> bool:
        return self.mode == "exact"

    @property
    def is_polynomial(self) -> bool:
        return bool(self.meta.get("polynomial", False))

    def axis(self, var: str) -> int:
        if var not in self.vars:
            raise SpecValidationError(f"Variable '{var}' not in series variables {self.vars}")
        return self.vars.index(var)

    def coefficient(self, *exps: int):
        """Coefficient at an exponent tuple; zero outside the box."""
        if len(exps) != len(self.vars):
            raise SpecValidationError(f"Expected {len(self.vars)} exponents, got {exps}")
        if any(e < 0 or e > n for e, n in zip(exps, self.trunc)):
            return ZERO if self.is_exact else 0j
        return self.coeffs[tuple(exps)]

    def is_zero(self) -> bool:
        return not np.any(self.coeffs != 0)

    def nonzero_terms(self) -> Iterable[Tuple[Tuple[int, ...], Any]]:
        for idx in zip(*np.nonzero(self.coeffs != 0)):
            idx = tuple(int(i) for i in idx)
            yield idx, self.coeffs[idx]

    def degree(self, var: Optional[str] = None) -> int:
        """Largest exponent with a nonzero coefficient (-1 for zero)."""
        nz = np.nonzero(self.coeffs != 0)
        if len(nz[0]) == 0:
            return -1
        ax = 0 if var is None else self.axis(var)
        return int(nz[ax].max())

    # Shape changes

    def with_coeffs(self, coeffs: np.ndarray, trunc: Optional[Sequence[int]] = None,
                    mode: Optional[str] = None, vars: Optional[Sequence[str]] = None,
                    **meta_updates) -> "TruncatedSeries":
        meta = dict(self.meta)
        meta.update(meta_updates)
        return TruncatedSeries(tuple(vars or self.vars), tuple(trunc or self.trunc),
                               coeffs, mode or self.mode, meta)

    def truncate(self, trunc: Sequence[int]) -> "TruncatedSeries":
        trunc = tuple(int(n) for n in trunc)
        if any(n > m for n, m in zip(trunc, self.trunc)):
            return self.resize(trunc)
        idx = tuple(slice(0, n + 1) for n in trunc)
        return self.with_coeffs(np.array(self.coeffs[idx], copy=True), trunc)

    def resize(self, trunc: Sequence[int]) -> "TruncatedSeries":
        """Truncate or zero-extend; extension needs an exact polynomial."""
        trunc = tuple(int(n) for n in trunc)
        grow = [n > m for n, m in zip(trunc, self.trunc)]
        if any(grow) and not self.is_polynomial:
            required = max(trunc)
            raise TruncationOverflowError(
                f"Series truncated at {self.trunc} cannot be extended to {trunc}",
                required_order=required)
        table = _zeros(tuple(n + 1 for n in trunc), self.mode)
        common = tuple(slice(0, min(n, m) + 1) for n, m in zip(trunc, self.trunc))
        table[common] = self.coeffs[common]
        fits = all(self.degree(v) <= n for v, n in zip(self.vars, trunc))
        return self.with_coeffs(table, trunc, polynomial=self.is_polynomial and fits)

    def to_float(self) -> "TruncatedSeries":
        if not self.is_exact:
            return self
        return self.with_coeffs(self.coeffs.astype(np.complex128), mode="float")

    def to_mode(self, mode: str) -> "TruncatedSeries":
        if mode == self.mode:
            return self
        if mode == "float":
            return self.to_float()
        raise SpecValidationError("Float series cannot be promoted to exact mode")

    def slice(self, var: str, index: int) -> "TruncatedSeries":
        """One-variable series: coefficient of var**index."""
        if len(self.vars) != 2:
            raise SpecValidationError("slice needs a two-variable series")
        ax = self.axis(var)
        other = self.vars[1 - ax]
        n_other = self.trunc[1 - ax]
        if index < 0 or index > self.trunc[ax]:
            return TruncatedSeries.zeros((other,), (n_other,), self.mode)
        row = np.take(self.coeffs, index, axis=ax).copy()
        return TruncatedSeries((other,), (n_other,), row, self.mode,
                               {"polynomial": self.is_polynomial})

    def evaluate(self, *points):
        """Numeric value of the truncated polynomial; broadcasts over arrays."""
        table = self.coeffs.astype(np.complex128)
        if len(self.vars) == 1:
            if len(points) != 1:
                raise SpecValidationError("One point expected for a one-variable series")
            return np.polynomial.polynomial.polyval(np.asarray(points[0], dtype=np.complex128), table)
        if len(points) != 2:
            raise SpecValidationError("Two points expected for a two-variable series")
        p0 = np.asarray(points[0], dtype=np.complex128)
        p1 = np.asarray(points[1], dtype=np.complex128)
        return np.polynomial.polynomial.polyval2d(p0, p1, table)

    # Serialization

    def to_json(self) -> Dict[str, Any]:
        coeffs = []
        for exps, value in self.nonzero_terms():
            if self.is_exact:
                coeffs.append([list(exps), value.to_pair()])
            else:
                coeffs.append([list(exps), [float(value.real), float(value.imag)]])
        return {"vars": list(self.vars), "trunc": list(self.trunc),
                "mode": self.mode, "coeffs": coeffs}

    @classmethod
    def from_json(cls, payload: Mapping[str, Any]) -> "TruncatedSeries":
        try:
            vars, trunc, mode = payload["vars"], payload["trunc"], payload.get("mode", "exact")
            terms: Dict[Tuple[int, ...], Any] = {}
            for exps, pair in payload["coeffs"]:
                value = Coeff.from_value(pair) if mode == "exact" else complex(pair[0], pair[1])
                terms[tuple(exps)] = value
        except (KeyError, TypeError, ValueError) as e:
            raise SpecValidationError(f"Malformed series payload: {e}") from e
        return cls.from_dict(vars, trunc, terms, mode, polynomial=False)

    # Operator sugar

    def __add__(self, other):
        return arith("add", self, other)

    def __sub__(self, other):
        return arith("sub", self, other)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return arith("mul", self, other)
        return arith("scale", self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return arith("scale", self, -1)

    def __repr__(self):
        return (f"TruncatedSeries(vars={self.vars}, trunc={self.trunc}, mode={self.mode}, "
                f"terms={sum(1 for _ in self.nonzero_terms())})")


@dataclass(frozen=True)
class LogTerm:
    """One summand (log L)^m (ξ−ξₙ)^(−p) A(ξ−ξₙ)."""
    log_power: int
    pole_order: int
    series: TruncatedSeries


@dataclass(frozen=True)
class LogSeries:
    """
    Finite sum of log-pole terms around a base point ξₙ.

    The logarithm is L(ξ) = log(1 − ξ/ξₙ), the branch of log(ξ−ξₙ) that
    vanishes at ξ = 0. Each term's series is in the shifted variable h = ξ−ξₙ.
    """
    base_point: Any
    terms: Tuple[LogTerm, ...]

    def __post_init__(self):
        powers = [term.log_power for term in self.terms]
        if len(set(powers)) != len(powers):
            raise SpecValidationError("Log powers must be distinct")
        for term in self.terms:
            if term.pole_order not in (0, 1) or term.log_power < 0:
                raise SpecValidationError(f"Unsupported log term ({term.log_power}, {term.pole_order})")
        if any(term.log_power > 0 for term in self.terms) and complex(self.base_point) == 0:
            raise SpecValidationError("Logarithmic terms need a nonzero base point")

    def is_zero(self) -> bool:
        return all(term.series.is_zero() for term in self.terms)

    def evaluate(self, xi):
        xi = np.asarray(xi, dtype=np.complex128)
        base = complex(self.base_point)
        h = xi - base
        total = np.zeros_like(xi)
        for term in self.terms:
            value = term.series.evaluate(h)
            if term.log_power:
                value = value * np.log(1 - xi / base) ** term.log_power
            if term.pole_order:
                value = value / h
            total = total + value
        return total


# Ring operations


def _align(f: TruncatedSeries, g: TruncatedSeries) -> Tuple[np.ndarray, np.ndarray, Tuple[int, ...], str]:
    if f.vars != g.vars:
        raise SpecValidationError(f"Variable mismatch: {f.vars} vs {g.vars}")
    mode = "exact" if f.is_exact and g.is_exact else "float"
    trunc = tuple(min(a, b) for a, b in zip(f.trunc, g.trunc))
    idx = tuple(slice(0, n + 1) for n in trunc)
    a = f.to_mode(mode).coeffs[idx] if f.mode != mode else f.coeffs[idx]
    b = g.to_mode(mode).coeffs[idx] if g.mode != mode else g.coeffs[idx]
    return a, b, trunc, mode


def _result(f: TruncatedSeries, coeffs: np.ndarray, trunc, mode, polynomial: bool) -> TruncatedSeries:
    meta = {k: v for k, v in f.meta.items() if k != "polynomial"}
    meta["polynomial"] = polynomial
    return TruncatedSeries(f.vars, tuple(trunc), coeffs, mode, meta)


def cauchy_product(a: np.ndarray, b: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Truncated Cauchy product of two coefficient tables of equal dtype."""
    if a.dtype != object:
        method = "fft" if max(shape) - 1 > FFT_THRESHOLD else "direct"
        full = signal.convolve(a, b, method=method)
        return np.ascontiguousarray(full[tuple(slice(0, n) for n in shape)])
    out = np.full(shape, ZERO, dtype=object)
    if a.ndim == 1:
        n = shape[0]
        for i in range(n):
            ai = a[i]
            if ai:
                out[i:] += ai * b[: n - i]
        return out
    nt, nx = shape
    for i in range(nt):
        for j in range(nx):
            aij = a[i, j]
            if aij:
                out[i:, j:] += aij * b[: nt - i, : nx - j]
    return out


def arith(kind: str, f: TruncatedSeries, g: Any = None) -> TruncatedSeries:
    """
    Ring operations on truncated series.

    kind is one of add, sub, scale, mul, derive, integrate. For derive and
    integrate, g names the variable; integrate also accepts ("x", -1) for
    the weighted antiderivative ∫₀ f(s)/s ds, rejected when a pole results.
    """
    if kind in ("add", "sub"):
        if not isinstance(g, TruncatedSeries):
            g = TruncatedSeries.constant(g, f.vars, f.trunc, f.mode if isinstance(g, (int, Fraction, Coeff)) else "float")
        a, b, trunc, mode = _align(f, g)
        coeffs = a + b if kind == "add" else a - b
        return _result(f, coeffs, trunc, mode, f.is_polynomial and g.is_polynomial)
    if kind == "scale":
        if isinstance(g, TruncatedSeries):
            raise SpecValidationError("scale expects a scalar, use mul for series")
        if f.is_exact and Coeff._coerce(g) is not None:
            coeffs = f.coeffs * Coeff._coerce(g)
            return _result(f, coeffs, f.trunc, "exact", f.is_polynomial)
        if f.is_exact and not isinstance(g, (float, complex, np.floating, np.complexfloating)):
            raise SpecValidationError(f"Cannot scale by {g!r}")
        base = f.to_float()
        return _result(f, base.coeffs * complex(g), f.trunc, "float", f.is_polynomial)
    if kind == "mul":
        if not isinstance(g, TruncatedSeries):
            return arith("scale", f, g)
        a, b, trunc, mode = _align(f, g)
        coeffs = cauchy_product(a, b, tuple(n + 1 for n in trunc))
        return _result(f, coeffs, trunc, mode, False)
    if kind == "derive":
        return _derive(f, g)
    if kind == "integrate":
        var, weight = (g, 0) if isinstance(g, str) else tuple(g)
        return _integrate(f, var, weight)
    raise SpecValidationError(f"Unknown arithmetic kind '{kind}'")


def _index_weights(n: int, axis: int, ndim: int, exact: bool, start: int) -> np.ndarray:
    weights = np.arange(start, start + n)
    weights = weights.astype(object) if exact else weights.astype(np.complex128)
    shape = [1] * ndim
    shape[axis] = n
    return weights.reshape(shape)


def _derive(f: TruncatedSeries, var: str) -> TruncatedSeries:
    ax = f.axis(var)
    n = f.trunc[ax]
    trunc = list(f.trunc)
    if n == 0:
        return TruncatedSeries.zeros(f.vars, f.trunc, f.mode)
    trunc[ax] = n - 1
    body = np.take(f.coeffs, range(1, n + 1), axis=ax)
    coeffs = body * _index_weights(n, ax, f.coeffs.ndim, f.is_exact, 1)
    return _result(f, np.ascontiguousarray(coeffs), trunc, f.mode, f.is_polynomial)


def _integrate(f: TruncatedSeries, var: str, weight: int) -> TruncatedSeries:
    ax = f.axis(var)
    n = f.trunc[ax]
    if weight == 0:
        trunc = list(f.trunc)
        trunc[ax] = n + 1
        body = f.coeffs / _index_weights(n + 1, ax, f.coeffs.ndim, f.is_exact, 1)
        zero_row = _zeros(tuple(1 if i == ax else m + 1 for i, m in enumerate(f.trunc)), f.mode)
        coeffs = np.concatenate([zero_row, body], axis=ax)
        return _result(f, coeffs, trunc, f.mode, f.is_polynomial)
    if weight == -1:
        constant = np.take(f.coeffs, [0], axis=ax)
        if np.any(constant != 0):
            raise SpecValidationError(f"Integrating f/{var} with nonzero constant term creates a pole")
        if n == 0:
            return TruncatedSeries.zeros(f.vars, f.trunc, f.mode)
        body = np.take(f.coeffs, range(1, n + 1), axis=ax)
        body = body / _index_weights(n, ax, f.coeffs.ndim, f.is_exact, 1)
        coeffs = np.concatenate([constant, body], axis=ax)
        return _result(f, coeffs, f.trunc, f.mode, f.is_polynomial)
    raise SpecValidationError(f"Unsupported integration weight {weight}")


def euler_derive(f: TruncatedSeries, var: str) -> TruncatedSeries:
    """var·∂_var f on the same box (exact up to the truncation)."""
    ax = f.axis(var)
    weights = _index_weights(f.trunc[ax] + 1, ax, f.coeffs.ndim, f.is_exact, 0)
    return _result(f, f.coeffs * weights, f.trunc, f.mode, f.is_polynomial)


def pad(f: TruncatedSeries, trunc: Sequence[int]) -> TruncatedSeries:
    """Zero-extend to a larger box; the new orders are not certified."""
    trunc = tuple(max(int(n), m) for n, m in zip(trunc, f.trunc))
    table = _zeros(tuple(n + 1 for n in trunc), f.mode)
    table[tuple(slice(0, m + 1) for m in f.trunc)] = f.coeffs
    return _result(f, table, trunc, f.mode, f.is_polynomial)


def valuation(f: TruncatedSeries, var: str) -> Union[int, float]:
    """Smallest exponent of var with a nonzero coefficient; math.inf for zero."""
    ax = f.axis(var)
    nz = np.nonzero(f.coeffs != 0)
    if len(nz[0]) == 0:
        return math.inf
    return int(nz[ax].min())


def x_power(f: TruncatedSeries, var: str, power: int) -> TruncatedSeries:
    """Multiply by var**power, keeping the truncation box."""
    ax = f.axis(var)
    n = f.trunc[ax]
    table = _zeros(f.coeffs.shape, f.mode)
    if power < n + 1:
        dst = [slice(None)] * f.coeffs.ndim
        src = [slice(None)] * f.coeffs.ndim
        dst[ax] = slice(power, n + 1)
        src[ax] = slice(0, n + 1 - power)
        table[tuple(dst)] = f.coeffs[tuple(src)]
    return _result(f, table, f.trunc, f.mode, f.is_polynomial and f.degree(var) + power <= n)


def lift(f: TruncatedSeries, vars: Sequence[str], trunc: Sequence[int]) -> TruncatedSeries:
    """Embed a one-variable series into a two-variable box (constant in the other)."""
    vars = tuple(vars)
    if len(f.vars) != 1 or f.vars[0] not in vars:
        raise SpecValidationError(f"Cannot lift {f.vars} into {vars}")
    table = _zeros(tuple(n + 1 for n in trunc), f.mode)
    ax = vars.index(f.vars[0])
    m = min(f.trunc[0], trunc[ax]) + 1
    if ax == 0:
        table[:m, 0] = f.coeffs[:m]
    else:
        table[0, :m] = f.coeffs[:m]
    if f.trunc[0] < trunc[ax] and not f.is_polynomial:
        raise TruncationOverflowError(
            f"Coefficient series truncated at {f.trunc[0]} but order {trunc[ax]} is needed",
            required_order=trunc[ax])
    return TruncatedSeries(vars, tuple(trunc), table, f.mode, {"polynomial": f.is_polynomial})


# Borel plane


def convolve(f: TruncatedSeries, g: TruncatedSeries, var: str = "xi", level: int = 1) -> TruncatedSeries:
    """
    Borel-plane convolution (f ∗ g)(ξ) = ∫₀^ξ f(τ) g(ξ−τ) dτ.

    Level 1 uses ξ^a ∗ ξ^b = a! b!/(a+b+1)! ξ^(a+b+1); level k uses
    ξ^a ∗ₖ ξ^b = Γ(a/k+1)Γ(b/k+1)/Γ((a+b)/k+2) ξ^(a+b+k). A second variable is
    a formal parameter and multiplies by Cauchy product.
    """
    if level < 1:
        raise SpecValidationError(f"Convolution level must be positive, got {level}")
    if f.vars != g.vars:
        raise SpecValidationError(f"Variable mismatch: {f.vars} vs {g.vars}")
    ax = f.axis(var)
    if level > 1 and (f.is_exact or g.is_exact):
        f, g = f.to_float(), g.to_float()
    a, b, trunc, mode = _align(f, g)
    n = trunc[ax]
    exact = mode == "exact"
    if exact:
        weights = [math.factorial(i) for i in range(n + 1)]
        out_weights = [math.factorial(i + 1) for i in range(n + 1)]
    else:
        weights = list(special.gamma(np.arange(n + 1) / level + 1))
        out_weights = list(special.gamma(np.arange(n + 1) / level + 2))
    w = _weights_along(weights, ax, a.ndim, exact)
    product = cauchy_product(a * w, b * w, a.shape)
    product = product / _weights_along(out_weights, ax, a.ndim, exact)
    out = _zeros(a.shape, mode)
    dst = [slice(None)] * a.ndim
    src = [slice(None)] * a.ndim
    dst[ax] = slice(level, n + 1)
    src[ax] = slice(0, max(n + 1 - level, 0))
    if n + 1 > level:
        out[tuple(dst)] = product[tuple(src)]
    return _result(f, out, trunc, mode, False)


def _weights_along(values: Sequence[Any], axis: int, ndim: int, exact: bool) -> np.ndarray:
    arr = np.array(list(values), dtype=object if exact else np.complex128)
    shape = [1] * ndim
    shape[axis] = len(values)
    return arr.reshape(shape)


def formal_borel_k(f: TruncatedSeries, k: int, var: str = "x",
                   normalization: str = "gamma_1p") -> TruncatedSeries:
    """
    Formal k-Borel transform in var, written into the variable ξ.

    gamma_1p: aₙxⁿ ↦ aₙ/Γ(1+n/k) ξ^(n−k)
    gamma:    aₙxⁿ ↦ aₙ/Γ(n/k) ξ^(n−k)   (products become ∗ₖ convolutions)
    """
    if not isinstance(k, numbers.Integral) or k <= 0:
        raise SpecValidationError(f"Borel level must be a positive integer, got {k}")
    if normalization not in ("gamma_1p", "gamma"):
        raise SpecValidationError(f"Unknown Borel normalization '{normalization}'")
    ax = f.axis(var)
    n = f.trunc[ax]
    if n < k:
        raise TruncationOverflowError(f"Need {var}-order ≥ {k} for a level-{k} Borel transform",
                                      required_order=k)
    head = np.take(f.coeffs, range(k), axis=ax)
    if np.any(head != 0):
        raise SpecValidationError(
            f"Borel transform needs zero coefficients below {var}^{k}; strip the polynomial head first")
    body = np.take(f.coeffs, range(k, n + 1), axis=ax)
    exponents = np.arange(k, n + 1)
    exact = f.is_exact
    if exact and k > 1:
        support = np.nonzero(np.any(body != 0, axis=1 - ax) if body.ndim == 2 else body != 0)[0]
        if any((k + int(i)) % k for i in support):
            logger.warning(f"Level-{k} Borel transform has non-integral Γ values; demoting to float")
            exact = False
    offset = 1 if normalization == "gamma_1p" else 0
    if exact:
        gammas = [math.factorial(int(m) // k + offset - 1) if int(m) % k == 0 else 1 for m in exponents]
        coeffs = body / _weights_along(gammas, ax, body.ndim, True)
        mode = "exact"
    else:
        gammas = special.gamma(exponents / k + offset)
        coeffs = body.astype(np.complex128) / _weights_along(gammas, ax, body.ndim, False)
        mode = "float"
    vars = tuple("xi" if v == var else v for v in f.vars)
    trunc = tuple(n - k if i == ax else m for i, m in enumerate(f.trunc))
    meta = {"polynomial": f.is_polynomial, "borel_level": k, "normalization": normalization,
            "demoted_to_float": f.is_exact and mode == "float"}
    return TruncatedSeries(vars, trunc, np.ascontiguousarray(coeffs), mode, meta)


def ramify(f: TruncatedSeries, k: int, direction: str, var: Optional[str] = None) -> TruncatedSeries:
    """Exponent reindexing ξ^(kj) ↔ ξ^j; coefficients are untouched."""
    if k < 1:
        raise SpecValidationError(f"Ramification index must be positive, got {k}")
    var = var or f.vars[0]
    ax = f.axis(var)
    if k == 1:
        return f
    n = f.trunc[ax]
    if direction == "forward":
        support = np.nonzero(f.coeffs != 0)[ax]
        if any(int(e) % k for e in support):
            raise SpecValidationError(f"Forward ramification needs exponents in {k}Z")
        coeffs = np.take(f.coeffs, range(0, n + 1, k), axis=ax).copy()
        trunc = tuple(n // k if i == ax else m for i, m in enumerate(f.trunc))
        return f.with_coeffs(coeffs, trunc, unramified_trunc=n, ramified_by=k)
    if direction == "inverse":
        target = f.meta.get("unramified_trunc") if f.meta.get("ramified_by") == k else None
        target = n * k if target is None else target
        trunc = tuple(target if i == ax else m for i, m in enumerate(f.trunc))
        table = _zeros(tuple(m + 1 for m in trunc), f.mode)
        dst = [slice(None)] * f.coeffs.ndim
        dst[ax] = slice(0, n * k + 1, k)
        src = [slice(None)] * f.coeffs.ndim
        src[ax] = slice(0, target // k + 1)
        table[tuple(dst)] = f.coeffs[tuple(src)]
        meta = {key: v for key, v in f.meta.items() if key not in ("unramified_trunc", "ramified_by")}
        return TruncatedSeries(f.vars, trunc, table, f.mode, meta)
    raise SpecValidationError(f"Unknown ramification direction '{direction}'")


# Substitution


def compose(F: Mapping[Tuple[int, int], TruncatedSeries], u: TruncatedSeries,
            v: TruncatedSeries) -> TruncatedSeries:
    """
    Evaluate Σ F[(j, α)] u^j v^α on the common truncation box.

    F maps slot exponents (j, α) to coefficient series in the same
    variables as u and v (t-powers folded into the coefficient).
    """
    if u.vars != v.vars:
        raise SpecValidationError(f"Variable mismatch: {u.vars} vs {v.vars}")
    origin = (0,) * len(u.vars)
    if u.coefficient(*origin) != 0 or v.coefficient(*origin) != 0:
        raise SpecValidationError("Substituted series must have zero constant term")
    trunc = tuple(min(a, b) for a, b in zip(u.trunc, v.trunc))
    mode = "exact" if u.is_exact and v.is_exact else "float"
    for coeff in F.values():
        if coeff.vars != u.vars:
            raise SpecValidationError(f"Coefficient variables {coeff.vars} differ from {u.vars}")
        trunc = tuple(min(a, b) for a, b in zip(trunc, coeff.trunc))
        if not coeff.is_exact:
            mode = "float"
    u, v = u.truncate(trunc).to_mode(mode), v.truncate(trunc).to_mode(mode)
    total = TruncatedSeries.zeros(u.vars, trunc, mode)
    u_powers = _power_cache(u)
    v_powers = _power_cache(v)
    for (j, alpha), coeff in sorted(F.items()):
        coeff = coeff.truncate(trunc).to_mode(mode)
        if coeff.is_zero():
            continue
        term = coeff
        if j:
            term = arith("mul", term, u_powers(j))
        if alpha:
            term = arith("mul", term, v_powers(alpha))
        total = arith("add", total, term)
    return total


def _power_cache(base: TruncatedSeries):
    powers: Dict[int, TruncatedSeries] = {1: base}

    def power(n: int) -> TruncatedSeries:
        if n not in powers:
            powers[n] = arith("mul", power(n - 1), base)
        return powers[n]

    return power


# Polynomial helpers for Borel-plane closed forms


def taylor_shift(f: TruncatedSeries, point: Any, var: str = "h") -> TruncatedSeries:
    """Re-expand a one-variable polynomial at `point`: g(h) = f(point + h)."""
    if len(f.vars) != 1:
        raise SpecValidationError("taylor_shift needs a one-variable series")
    coeffs = list(f.coeffs)
    n = len(coeffs) - 1
    point = _as_mode(point, f.mode)
    out = []
    for j in range(n + 1):
        acc = ZERO if f.is_exact else 0j
        for i in range(j, n + 1):
            if coeffs[i]:
                acc = acc + math.comb(i, j) * coeffs[i] * point ** (i - j)
        out.append(acc)
    return TruncatedSeries.from_coefficients(var, out, n, f.mode)


def divide_by_linear(f: TruncatedSeries, root: Any) -> Tuple[TruncatedSeries, Any]:
    """Synthetic division f(ξ) = q(ξ)(ξ − root) + r."""
    if len(f.vars) != 1:
        raise SpecValidationError("divide_by_linear needs a one-variable series")
    coeffs = list(f.coeffs)
    n = len(coeffs) - 1
    root = _as_mode(root, f.mode)
    if n == 0:
        return TruncatedSeries.zeros(f.vars, (0,), f.mode), coeffs[0]
    quotient = [None] * n
    carry = coeffs[n]
    for i in range(n - 1, -1, -1):
        quotient[i] = carry
        carry = coeffs[i] + carry * root
    return TruncatedSeries.from_coefficients(f.vars[0], quotient, n - 1, f.mode), carry


def as_evaluable(obj: Any, var: str = "xi"):
    """Vectorized callable for None (zero), scalars, one-variable series and callables."""
    if obj is None:
        return lambda z: np.zeros_like(np.asarray(z, dtype=np.complex128))
    if isinstance(obj, TruncatedSeries):
        if obj.vars != (var,):
            raise SpecValidationError(f"Expected a series in {var}, got {obj.vars}")
        return lambda z: np.asarray(obj.evaluate(z), dtype=np.complex128)
    if isinstance(obj, (numbers.Number, Coeff)):
        value = complex(obj)
        return lambda z: np.full_like(np.asarray(z, dtype=np.complex128), value)
    if callable(obj):
        def evaluate(z):
            z = np.asarray(z, dtype=np.complex128)
            return np.broadcast_to(np.asarray(obj(z), dtype=np.complex128), z.shape).copy()
        return evaluate
    raise SpecValidationError(f"Cannot evaluate {type(obj).__name__}")
