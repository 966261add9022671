"""
Formal Solution Recursions

Truncated formal power-series solutions û(t, x) = Σ uₙ(x)tⁿ of the singular
PDE family, plus the auxiliary recursions the summability analysis uses:
- Order-by-order t-recursion with an exact x-coefficient recursion per slice
- Anticipative x-expansion of t∂ₜu = a(x)t + x²∂ₓu + t(∂ₓu)² through w = tu, s = t²
- Fuchsian ODEs k·t y′ = G(t, y, ty′) (and the majorant form y = G)
- Changes of variables (z = x + f(t), τ = t/x, s = t², u = v + x·w)
- Majorant series for the Borel-plane norm estimates

Design Decision: Each t-slice uₙ(x) is computed on its own x-budget:
1. ∂ₓu terms with a nonvanishing coefficient at x = 0 need one extra x-order per t-order
2. The working order N_x + (N_t − 1) is derived up front and checked against the config cap
3. Nonlinear products are memoized t-slices of uʲ(∂ₓu)^α, built from lower slices only
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from .config import SummaConfig
from .equation_model import EquationSpec, NormalForm, TermKey, prepare_normal_form
from .errors import (
    ResonanceError,
    SpecValidationError,
    TruncationOverflowError,
)
from .series_core import (
    ZERO,
    TruncatedSeries,
    arith,
    compose,
    euler_derive,
    lift,
    pad,
    valuation,
    x_power,
)

logger = logging.getLogger(__name__)

TRANSFORM_KINDS = ("shift_x", "singular_tau", "square_s", "prepare")


@dataclass(frozen=True)
class FormalSolution:
    """Truncated solution with the orders it is certified on."""
    series: TruncatedSeries
    valid_orders: Tuple[int, int]
    provenance: str
    residual_order: Tuple[int, int]
    working_x_order: int = 0

    def to_json(self) -> Dict[str, Any]:
        payload = self.series.to_json()
        payload.update({
            "valid_orders": list(self.valid_orders),
            "provenance": self.provenance,
            "residual_order": list(self.residual_order),
            "working_x_order": self.working_x_order,
        })
        return payload


@dataclass(frozen=True)
class AnticipativeSolution:
    """w(s, x) = t·u(t, x) with s = t², the recovered u and the seeds ∂ₛwₙ(0)."""
    w: FormalSolution
    u: FormalSolution
    seeds: List[Any]
    required_x_order: int


@dataclass(frozen=True)
class TransformRecord:
    """
    A change of variables and the data it needs.

    shift_x carries f(t) with f(0) = 0; prepare carries the NormalForm of the
    equation; singular_tau and square_s need no data.
    """
    kind: str
    data: Any = None
    inverse: bool = False
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self._validate_record()

    def _validate_record(self):
        if self.kind not in TRANSFORM_KINDS:
            raise SpecValidationError(f"Unknown transform kind '{self.kind}'")
        if self.kind == "shift_x":
            if not isinstance(self.data, TruncatedSeries) or self.data.vars != ("t",):
                raise SpecValidationError("shift_x needs f(t) as a series in t")
            if self.data.coefficient(0) != 0:
                raise SpecValidationError("shift_x needs f(0) = 0")
        if self.kind == "prepare" and self.data is not None and not isinstance(self.data, NormalForm):
            raise SpecValidationError("prepare records carry a NormalForm")

    def inverted(self) -> "TransformRecord":
        return replace(self, inverse=not self.inverse)


def _at_order(series: TruncatedSeries, order: int, label: str) -> TruncatedSeries:
    """One-variable series cut or zero-extended to the given order."""
    if series.trunc[0] >= order:
        return series.truncate((order,))
    try:
        return series.resize((order,))
    except TruncationOverflowError:
        logger.error(f"Coefficient {label} is known through order {series.trunc[0]} but {order} is needed")
        raise


def derivative_reach(eq: EquationSpec) -> int:
    """Extra x-orders each t-order consumes: 1 when some ∂ₓu term has a(0) ≠ 0."""
    if eq.euler_form:
        return 0
    return int(any(valuation(s, "x") == 0 for s in eq.derivative_terms().values()))


class SliceRecursion:
    """
    Order-by-order solver for the t-slices uₙ(x).

    For each n the x-coefficients follow from
    (n − b₀)u_{n,m} = rhs_{n,m} + Σ_{p≥1} b_p u_{n,m−p} + Σ_s c_{m−k−s}·s·u_{n,s}.
    """

    def __init__(self, eq: EquationSpec, budget: int, reach: int):
        self.logger = logging.getLogger(__name__)
        self.eq = eq
        self.budget = budget
        self.reach = reach
        self.mode = eq.mode
        self.a = _at_order(eq.a, budget, "a")
        self.b = _at_order(eq.b, budget, "b")
        self.c = _at_order(eq.c, budget, "c")
        self.terms = {key: _at_order(s, budget, f"a{key}")
                      for key, s in sorted(eq.nonlinear.items()) if not s.is_zero()}
        self.slices: Dict[int, TruncatedSeries] = {}
        self.slots: Dict[int, TruncatedSeries] = {}
        self._products: Dict[Tuple[int, int, int], TruncatedSeries] = {}

    def order_budget(self, n: int) -> int:
        return self.budget - self.reach * (n - 1)

    def power_slice(self, j: int, alpha: int, q: int) -> TruncatedSeries:
        """Coefficient of t^q in uʲ·V^α, V the derivative slot."""
        key = (j, alpha, q)
        if key in self._products:
            return self._products[key]
        if j == 0 and alpha == 0:
            result = TruncatedSeries.constant(1 if q == 0 else 0, ("x",), (self.budget,), self.mode)
        else:
            result = TruncatedSeries.zeros(("x",), (self.budget,), self.mode)
            for p in range(1, q + 1):
                rest = self.power_slice(j - 1, alpha, q - p) if j else self.power_slice(0, alpha - 1, q - p)
                if rest.is_zero():
                    continue
                factor = self.slices[p] if j else self.slots[p]
                result = result + factor * rest
        self._products[key] = result
        return result

    def forcing(self, n: int) -> TruncatedSeries:
        total = TruncatedSeries.zeros(("x",), (self.order_budget(n),), self.mode)
        if n == 1:
            total = total + self.a
        for (i, j, alpha), coeff in self.terms.items():
            if i > n:
                continue
            product = self.power_slice(j, alpha, n - i)
            if not product.is_zero():
                total = total + coeff * product
        return total

    def solve_slice(self, n: int) -> TruncatedSeries:
        order = self.order_budget(n)
        divisor = n - self.eq.b0
        if divisor == 0:
            raise ResonanceError(f"resonance: b(0) ∈ N* at order n = {n}", order=n)
        rhs = self.forcing(n).coeffs
        b, c, k = self.b.coeffs, self.c.coeffs, self.eq.k
        values: List[Any] = [ZERO if self.mode == "exact" else 0j] * (order + 1)
        for m in range(order + 1):
            acc = rhs[m]
            for p in range(1, m + 1):
                if b[p] and values[m - p]:
                    acc = acc + b[p] * values[m - p]
            for s in range(1, m - k + 1):
                if c[m - k - s] and values[s]:
                    acc = acc + c[m - k - s] * s * values[s]
            values[m] = acc / divisor
        slice_n = TruncatedSeries.from_coefficients("x", values, order, self.mode, polynomial=False)
        self.slices[n] = slice_n
        self.logger.debug(f"Slice u_{n} solved through x^{order}")
        if self.eq.euler_form:
            self.slots[n] = euler_derive(slice_n, "x")
        else:
            self.slots[n] = pad(arith("derive", slice_n, "x"), (order,))
        return slice_n


def solve_formal(eq: EquationSpec, config: Optional[SummaConfig] = None) -> FormalSolution:
    """Unique truncated formal solution with û(0, x) = 0."""
    config = config or SummaConfig.from_env()
    n_t, n_x = eq.trunc
    reach = derivative_reach(eq)
    budget = n_x + reach * (n_t - 1)
    if budget > config.max_x_order:
        raise TruncationOverflowError(
            f"Nonlinear ∂ₓu terms need x-order {budget}, above the cap {config.max_x_order}",
            required_order=budget)

    recursion = SliceRecursion(eq, budget, reach)
    table = TruncatedSeries.zeros(("t", "x"), (n_t, n_x), eq.mode).coeffs.copy()
    for n in range(1, n_t + 1):
        slice_n = recursion.solve_slice(n)
        table[n, :] = slice_n.coeffs[: n_x + 1]

    series = TruncatedSeries(("t", "x"), (n_t, n_x), table, eq.mode, {"polynomial": False})
    logger.info(f"Solved formal series to order ({n_t}, {n_x}) with working x-order {budget}")
    return FormalSolution(
        series=series,
        valid_orders=(n_t, n_x),
        provenance="t-recursion",
        residual_order=(n_t, n_x - reach),
        working_x_order=budget,
    )


def formal_residual(eq: EquationSpec, solution: FormalSolution) -> TruncatedSeries:
    """t∂ₜu − F(t, x, u, ∂ₓu) on the certified box of the solution."""
    u = solution.series
    if u.vars != ("t", "x"):
        raise SpecValidationError(f"Residual needs a series in (t, x), got {u.vars}")
    box = u.trunc
    n_x = box[1]
    mode = u.mode

    def lifted(series: TruncatedSeries, label: str) -> TruncatedSeries:
        return lift(_at_order(series, n_x, label), ("t", "x"), box)

    du = pad(arith("derive", u, "x"), box)
    slot = euler_derive(u, "x") if eq.euler_form else du
    t_var = TruncatedSeries.variable("t", ("t", "x"), box, mode)

    rhs = lifted(eq.a, "a") * t_var + lifted(eq.b, "b") * u
    rhs = rhs + x_power(lifted(eq.c, "c"), "x", eq.k + 1) * du
    if eq.nonlinear:
        F: Dict[Tuple[int, int], TruncatedSeries] = {}
        for (i, j, alpha), coeff in eq.nonlinear.items():
            term = x_power(lifted(coeff, f"a{(i, j, alpha)}"), "t", i)
            F[(j, alpha)] = F[(j, alpha)] + term if (j, alpha) in F else term
        rhs = rhs + compose(F, u, slot)
    residual = euler_derive(u, "t") - rhs
    return residual.truncate(solution.residual_order)


# Anticipative system


def _anticipative_data(target: Union[EquationSpec, TruncatedSeries]) -> Tuple[TruncatedSeries, Optional[Tuple[int, int]]]:
    if isinstance(target, TruncatedSeries):
        return target, None
    eq = target
    terms = {key: s for key, s in eq.nonlinear.items() if not s.is_zero()}
    shape_ok = (
        eq.k == 1 and not eq.euler_form and eq.b.is_zero()
        and set(terms) == {(1, 0, 2)} and terms[(1, 0, 2)].degree("x") == 0
        and terms[(1, 0, 2)].coefficient(0) == 1
        and eq.c.degree("x") == 0 and eq.c.coefficient(0) == 1
    )
    if not shape_ok:
        raise SpecValidationError("Anticipative solver expects t∂ₜu = a(x)t + x²∂ₓu + t(∂ₓu)²")
    return eq.a, eq.trunc


def solve_anticipative(target: Union[EquationSpec, TruncatedSeries], n_s: Optional[int] = None,
                       n_x: Optional[int] = None, config: Optional[SummaConfig] = None) -> AnticipativeSolution:
    """
    Solve 2s∂ₛw = a(x)s + w + x²∂ₓw + (∂ₓw)² for w = Σ w_{m,n} s^(m+1) xⁿ.

    Coefficients satisfy
    (2m+1)w_{m,n} = aₙ[m=0] + (n−1)w_{m,n−1} + Σ (n₁+1)(n₂+1) w_{m₁,n₁+1} w_{m₂,n₂+1},
    the sum over m₁+m₂ = m−1 and n₁+n₂ = n, so order m needs x-order n+1 at m−1.
    """
    config = config or SummaConfig.from_env()
    a, trunc = _anticipative_data(target)
    if trunc is not None:
        n_s = (trunc[0] + 1) // 2 if n_s is None else n_s
        n_x = trunc[1] if n_x is None else n_x
    if n_s is None or n_x is None or n_s < 1 or n_x < 1:
        raise SpecValidationError(f"Anticipative orders must be positive, got ({n_s}, {n_x})")

    required = n_x + n_s - 1
    if required > config.max_x_order:
        raise TruncationOverflowError(
            f"Anticipative coupling needs x-order {required} for s-order {n_s}", required_order=required)
    a = _at_order(a, required, "a")
    mode = a.mode
    a_values = a.coeffs

    w: List[List[Any]] = []
    for m in range(n_s):
        top = required - m
        row: List[Any] = []
        for n in range(top + 1):
            acc = a_values[n] if m == 0 else (ZERO if mode == "exact" else 0j)
            if n >= 1 and row[n - 1]:
                acc = acc + (n - 1) * row[n - 1]
            for m1 in range(m):
                left, right = w[m1], w[m - 1 - m1]
                for n1 in range(n + 1):
                    n2 = n - n1
                    if left[n1 + 1] and right[n2 + 1]:
                        acc = acc + (n1 + 1) * (n2 + 1) * left[n1 + 1] * right[n2 + 1]
            row.append(acc / (2 * m + 1))
        w.append(row)

    w_table = TruncatedSeries.zeros(("s", "x"), (n_s, n_x), mode).coeffs.copy()
    u_table = TruncatedSeries.zeros(("t", "x"), (2 * n_s - 1, n_x), mode).coeffs.copy()
    for m, row in enumerate(w):
        w_table[m + 1, :] = row[: n_x + 1]
        u_table[2 * m + 1, :] = row[: n_x + 1]

    w_series = TruncatedSeries(("s", "x"), (n_s, n_x), w_table, mode, {"polynomial": False})
    u_series = TruncatedSeries(("t", "x"), (2 * n_s - 1, n_x), u_table, mode, {"polynomial": False})
    logger.info(f"Anticipative system solved to s-order {n_s}, x-order {n_x} (working x-order {required})")
    return AnticipativeSolution(
        w=FormalSolution(w_series, (n_s, n_x), "anticipative", (n_s, n_x - 1), required),
        u=FormalSolution(u_series, (2 * n_s - 1, n_x), "anticipative", (2 * n_s - 1, n_x - 1), required),
        seeds=list(w[0][: n_x + 1]),
        required_x_order=required,
    )


# Fuchsian ODEs


def fuchsian_ode_solve(G: Mapping[Tuple[int, int], TruncatedSeries], k: int, N: int) -> TruncatedSeries:
    """
    Solve k·t y′ = Σ G_{p,q}(t) yᵖ (t y′)^q for k ≥ 1, or y = Σ G_{p,q}(t) yᵖ (t y′)^q for k = 0,
    with y(0) = 0.
    """
    if k < 0 or N < 1:
        raise SpecValidationError(f"Need k ≥ 0 and N ≥ 1, got k={k}, N={N}")
    if not G:
        return TruncatedSeries.zeros(("t",), (N,), "exact")
    mode = "exact" if all(s.is_exact for s in G.values()) else "float"
    terms: Dict[Tuple[int, int], TruncatedSeries] = {}
    for key, series in G.items():
        if len(key) != 2 or min(key) < 0:
            raise SpecValidationError(f"Slot exponents must be (p, q) with p, q ≥ 0, got {key}")
        if series.vars != ("t",):
            raise SpecValidationError(f"Coefficient G{key} must be a series in t")
        terms[key] = _at_order(series, N, f"G{key}").to_mode(mode)

    if (0, 0) in terms and terms[(0, 0)].coefficient(0) != 0:
        raise SpecValidationError("non-triangular equation: G(0, 0, 0) ≠ 0 contradicts y(0) = 0")
    lin_y = terms[(1, 0)].coefficient(0) if (1, 0) in terms else 0
    lin_d = terms[(0, 1)].coefficient(0) if (0, 1) in terms else 0

    zero = ZERO if mode == "exact" else 0j
    values: List[Any] = [zero] * (N + 1)
    for n in range(1, N + 1):
        factor = (k * n if k else 1) - lin_y - n * lin_d
        if factor == 0:
            raise ResonanceError(f"resonance: Fuchsian factor vanishes at order {n}", order=n)
        current = TruncatedSeries.from_coefficients("t", values, N, mode, polynomial=False)
        rhs = _slot_sum(terms, current, euler_derive(current, "t"))
        values[n] = rhs.coefficient(n) / factor

    solution = TruncatedSeries.from_coefficients("t", values, N, mode, polynomial=False)
    return solution.with_coeffs(solution.coeffs, **_growth_fit(values))


def _slot_sum(terms: Mapping[Tuple[int, int], TruncatedSeries], y: TruncatedSeries,
              ty: TruncatedSeries) -> TruncatedSeries:
    total = TruncatedSeries.zeros(y.vars, y.trunc, y.mode)
    y_pow, d_pow = {0: None, 1: y}, {0: None, 1: ty}

    def power(cache, base, n):
        if n not in cache:
            cache[n] = power(cache, base, n - 1) * base
        return cache[n]

    for (p, q), coeff in sorted(terms.items()):
        term = coeff
        if p:
            term = term * power(y_pow, y, p)
        if q:
            term = term * power(d_pow, ty, q)
        total = total + term
    return total


def _growth_fit(values: List[Any]) -> Dict[str, Any]:
    """Geometric-growth fit log|yₙ| ≈ α + n log A over nonzero coefficients."""
    points = [(n, math.log(abs(complex(v)))) for n, v in enumerate(values) if n >= 1 and v]
    if len(points) < 4:
        return {"growth_rate": None, "growth_fit_residual": None}
    n, logs = np.array(points).T
    slope, intercept = np.polyfit(n, logs, 1)
    residual = float(np.max(np.abs(logs - (slope * n + intercept))))
    return {"growth_rate": float(math.exp(slope)), "growth_fit_residual": residual}


def shift_ode_rhs(a2: TruncatedSeries, a3: TruncatedSeries, k: int) -> Dict[Tuple[int, int], TruncatedSeries]:
    """G for t y′ = a₂(t, −y)y^(k+1) + a₃(t, −y)t, the characteristic ODE of the shift z = x + f(t)."""
    if k < 1:
        raise SpecValidationError(f"Level k must be positive, got {k}")
    G: Dict[Tuple[int, int], TruncatedSeries] = {}
    for series, offset, t_shift in ((a2, k + 1, 0), (a3, 0, 1)):
        if len(series.vars) == 1:
            series = lift(series, ("t", "x"), (series.trunc[0], 0))
        if set(series.vars) != {"t", "x"}:
            raise SpecValidationError(f"Shift coefficients must be series in (t, x), got {series.vars}")
        n_t = series.trunc[series.axis("t")]
        for j in range(series.trunc[series.axis("x")] + 1):
            column = series.slice("x", j)
            if column.is_zero():
                continue
            if t_shift:
                column = x_power(pad(column, (n_t + 1,)), "t", 1)
            column = arith("scale", column, (-1) ** j)
            key = (j + offset, 0)
            G[key] = G[key] + column if key in G else column
    return G


# Changes of variables


def apply_transform(target: Any, record: TransformRecord) -> Any:
    """Apply a change of variables (or its inverse) to a spec, solution or series."""
    if isinstance(target, EquationSpec):
        if record.kind != "prepare" or record.inverse:
            raise SpecValidationError(f"Equations only support the forward prepare transform, got {record.kind}")
        return prepare_normal_form(target, ell=record.meta.get("ell"))
    if isinstance(target, FormalSolution):
        series = apply_transform(target.series, record)
        suffix = "^-1" if record.inverse else ""
        return replace(
            target,
            series=series,
            valid_orders=tuple(series.trunc),
            residual_order=tuple(min(a, b) for a, b in zip(target.residual_order, series.trunc)),
            provenance=f"{target.provenance}+{record.kind}{suffix}",
        )
    if not isinstance(target, TruncatedSeries) or len(target.vars) != 2:
        raise SpecValidationError("Transforms act on two-variable series, solutions or equations")
    handlers = {
        "shift_x": _shift_x,
        "singular_tau": _singular_tau,
        "square_s": _square_s,
        "prepare": _prepare_series,
    }
    return handlers[record.kind](target, record)


def _shift_x(u: TruncatedSeries, record: TransformRecord) -> TruncatedSeries:
    src, dst, sign = ("z", "x", 1) if record.inverse else ("x", "z", -1)
    if u.vars != ("t", src):
        raise SpecValidationError(f"shift_x expects variables ('t', '{src}'), got {u.vars}")
    box = u.trunc
    vars = ("t", dst)
    f = lift(_at_order(record.data, box[0], "f"), vars, box)
    shifted = TruncatedSeries.variable(dst, vars, box, u.mode) + arith("scale", f, sign)
    result = TruncatedSeries.zeros(vars, box, u.mode)
    power = TruncatedSeries.constant(1, vars, box, u.mode)
    for m in range(box[1] + 1):
        column = u.slice(src, m)
        if not column.is_zero():
            result = result + lift(column, vars, box) * power
        power = power * shifted
    return result


def _singular_tau(u: TruncatedSeries, record: TransformRecord) -> TruncatedSeries:
    n_t, n_x = u.trunc
    if not record.inverse:
        if u.vars != ("t", "x"):
            raise SpecValidationError(f"singular_tau expects ('t', 'x'), got {u.vars}")
        table = TruncatedSeries.zeros(("tau", "x"), (n_t, n_x), u.mode).coeffs.copy()
        for (n, m), value in u.nonzero_terms():
            if n + m > n_x:
                raise TruncationOverflowError(
                    f"τ-rewrite of t^{n}x^{m} needs x-order {n + m}", required_order=n + m)
            table[n, n + m] = value
        return TruncatedSeries(("tau", "x"), (n_t, n_x), table, u.mode, {"polynomial": u.is_polynomial})
    if u.vars != ("tau", "x"):
        raise SpecValidationError(f"inverse singular_tau expects ('tau', 'x'), got {u.vars}")
    table = TruncatedSeries.zeros(("t", "x"), (n_t, n_x), u.mode).coeffs.copy()
    for (n, m), value in u.nonzero_terms():
        if m < n:
            raise SpecValidationError(f"τ^{n}x^{m} has no preimage: negative x-power")
        table[n, m - n] = value
    return TruncatedSeries(("t", "x"), (n_t, n_x), table, u.mode, {"polynomial": u.is_polynomial})


def _square_s(u: TruncatedSeries, record: TransformRecord) -> TruncatedSeries:
    if not record.inverse:
        if u.vars != ("t", "x"):
            raise SpecValidationError(f"square_s expects ('t', 'x'), got {u.vars}")
        n_t, n_x = u.trunc
        if any(exps[0] % 2 == 0 for exps, _ in u.nonzero_terms()):
            raise SpecValidationError("square_s needs a series odd in t")
        n_s = (n_t + 1) // 2
        table = TruncatedSeries.zeros(("s", "x"), (n_s, n_x), u.mode).coeffs.copy()
        for (n, m), value in u.nonzero_terms():
            table[(n + 1) // 2, m] = value
        return TruncatedSeries(("s", "x"), (n_s, n_x), table, u.mode,
                               {"polynomial": u.is_polynomial, "t_trunc": n_t})
    if u.vars != ("s", "x"):
        raise SpecValidationError(f"inverse square_s expects ('s', 'x'), got {u.vars}")
    n_s, n_x = u.trunc
    n_t = u.meta.get("t_trunc", 2 * n_s - 1)
    table = TruncatedSeries.zeros(("t", "x"), (n_t, n_x), u.mode).coeffs.copy()
    for (m, n), value in u.nonzero_terms():
        if m == 0:
            raise SpecValidationError("w(0, x) must vanish for w = t·u")
        if 2 * m - 1 <= n_t:
            table[2 * m - 1, n] = value
    return TruncatedSeries(("t", "x"), (n_t, n_x), table, u.mode, {"polynomial": u.is_polynomial})


def _prepare_series(u: TruncatedSeries, record: TransformRecord) -> TruncatedSeries:
    normal: NormalForm = record.data
    if normal is None:
        raise SpecValidationError("prepare transform on a series needs the NormalForm record data")
    if not normal.applied:
        return u
    n_t, n_x = u.trunc
    if record.inverse:
        xw = x_power(pad(u, (n_t, n_x + 1)), "x", 1)
        return arith("add", xw, normal.head)
    shifted = arith("sub", u, normal.head)
    if any(value != 0 for value in shifted.coeffs[:, 0]):
        raise SpecValidationError("u − v is not divisible by x")
    table = np.ascontiguousarray(shifted.coeffs[:, 1:])
    return TruncatedSeries(u.vars, (shifted.trunc[0], shifted.trunc[1] - 1), table, shifted.mode,
                           {"polynomial": False})


# Majorants


def majorant_series(y1: float, weights: Mapping[TermKey, float], sigma: float, E: float,
                    order: int = 12) -> TruncatedSeries:
    """
    Solve Y = Y₁t + (2/σ) Σ W_{i,j,α} tⁱ (2σ⁻¹Y)ʲ (2(E+σ⁻¹)Y)^α for Y(0) = 0.

    Coefficients are nonnegative reals stored in float mode.
    """
    if sigma <= 0:
        raise SpecValidationError(f"σ must be positive, got {sigma}")
    if y1 < 0 or any(w < 0 for w in weights.values()):
        raise SpecValidationError("Majorant data must be nonnegative")
    forcing_terms = [key for key, w in weights.items() if key[1] == 0 and key[2] == 0 and w]
    if forcing_terms:
        raise SpecValidationError(f"W_(i,0,0) must vanish for i ≥ 2, got {forcing_terms}")

    G: Dict[Tuple[int, int], TruncatedSeries] = {
        (0, 0): TruncatedSeries.from_coefficients("t", [0, y1], order, "float"),
    }
    for (i, j, alpha), w in sorted(weights.items()):
        if not w:
            continue
        if i + j + alpha < 2:
            raise SpecValidationError(f"Majorant index {(i, j, alpha)} must satisfy i+j+alpha >= 2")
        value = (2 / sigma) * w * (2 / sigma) ** j * (2 * (E + 1 / sigma)) ** alpha
        term = TruncatedSeries.monomial(("t",), (order,), (i,), value, "float")
        key = (j + alpha, 0)
        G[key] = G[key] + term if key in G else term
    return fuchsian_ode_solve(G, 0, order)
