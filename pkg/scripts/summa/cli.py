"""
Summa Command Line

Batch entry point over the engine:
- solve: truncated formal solution of an equation spec
- directions: singular points and directions for given b(0), c(0), k
- borel: Borel-plane family of the normal form with its residual self-test
- sum: Borel-Padé-Laplace summation on a (t, x) grid
- norms: exponential-Nagumo norm of a polynomial on a sector
- verify: randomized norm-inequality suites
- newton: Newton polygon of a nonlinear ODE along a series

Design Decision: One exit code per error family:
1. 2 for validation errors, 3 for mathematical preconditions, 4 for numerical failures
2. Reports are written once, with sorted keys and %.17g floats, so reruns are byte-identical

Usage (from scripts/):
    python -m summa.cli solve euler.json --trunc 6,8
    python -m summa.cli directions --b 0 --c 1 --k 1
"""

import argparse
import json
import logging
import math
import numbers
import sys
from fractions import Fraction
from pathlib import Path
from tokenize import TokenError
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import sympy
from sympy.parsing.sympy_parser import parse_expr

from .borel_plane import borel_coefficients, convolution_residual, singular_scan
from .config import SummaConfig
from .equation_model import newton_polygon, parse_series, parse_spec, prepare_normal_form
from .errors import SpecValidationError, SummaError
from .formal_solver import solve_formal
from .nagumo_metrics import SUITES, NagumoParams, SectorSpec, delta, m0_constant, nagumo_norm, verify_inequalities
from .resummation import SummationOptions, borel_sum_solution
from .series_core import Coeff, TruncatedSeries

logger = logging.getLogger(__name__)

VERBS = ("solve", "directions", "borel", "sum", "norms", "verify", "newton")


# Output


def _plain(value: Any) -> Any:
    """JSON-ready view of reports, series coefficients and numpy scalars."""
    if hasattr(value, "to_json"):
        return _plain(value.to_json())
    if hasattr(value, "to_dict") and not isinstance(value, pd.DataFrame):
        return _plain(value.to_dict())
    if isinstance(value, pd.DataFrame):
        return _plain(value.to_dict(orient="list"))
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(item) for item in value]
    if isinstance(value, Coeff):
        return value.to_pair()
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, numbers.Real):
        return float(value)
    if isinstance(value, numbers.Complex):
        return [float(value.real), float(value.imag)]
    return value


def _encode(value: Any) -> str:
    if isinstance(value, dict):
        items = [f"{json.dumps(key)}: {_encode(value[key])}" for key in sorted(value)]
        return "{" + ", ".join(items) + "}"
    if isinstance(value, list):
        return "[" + ", ".join(_encode(item) for item in value) + "]"
    if isinstance(value, float):
        if math.isnan(value):
            return "NaN"
        if math.isinf(value):
            return "Infinity" if value > 0 else "-Infinity"
        return "%.17g" % value
    return json.dumps(value)


def _frame_of(report: Any) -> pd.DataFrame:
    if isinstance(report, pd.DataFrame):
        return report
    if hasattr(report, "to_frame"):
        return report.to_frame()
    if isinstance(getattr(report, "grid", None), pd.DataFrame):
        return report.grid
    if isinstance(report, list) and all(isinstance(item, dict) for item in report):
        return pd.DataFrame(report)
    raise SpecValidationError(f"{type(report).__name__} has no tabular form; use --format json")


def emit_report(report: Any, fmt: str = "json", path: Optional[str] = None) -> str:
    """Serialize a report deterministically to path (or return the text for stdout)."""
    if fmt == "json":
        text = _encode(_plain(report)) + "\n"
    elif fmt == "csv":
        text = _frame_of(report).to_csv(index=False, float_format="%.17g")
    else:
        raise SpecValidationError(f"Unknown output format '{fmt}'")
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as e:
            logger.error(f"Cannot write report to {path}: {e}")
            raise SpecValidationError(f"Cannot write report to {path}: {e}") from e
        logger.info(f"Report written to {path}")
    return text


# Argument parsing


def _parse_scalar(text: str) -> Any:
    """Exact Coeff for Gaussian rationals such as '1/2' or '2+i', complex otherwise."""
    try:
        expr = parse_expr(text, local_dict={"i": sympy.I, "I": sympy.I, "pi": sympy.pi})
        re, im = (sympy.nsimplify(part) for part in expr.as_real_imag())
    except (sympy.SympifyError, SyntaxError, TypeError, ValueError, TokenError) as e:
        raise SpecValidationError(f"Cannot parse number '{text}': {e}") from e
    if re.is_Rational and im.is_Rational:
        return Coeff(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))
    return complex(float(re), float(im))


def _parse_trunc(text: Optional[str]) -> Optional[Tuple[int, int]]:
    if text is None:
        return None
    try:
        n_t, n_x = (int(part) for part in text.split(","))
    except ValueError as e:
        raise SpecValidationError(f"--trunc expects 'Nt,Nx', got '{text}'") from e
    return n_t, n_x


def _parse_point(text: str) -> Tuple[complex, complex]:
    try:
        t, x = (complex(_parse_scalar(part)) for part in text.split(","))
    except ValueError as e:
        raise SpecValidationError(f"--point expects 't,x', got '{text}'") from e
    return t, x


def _read_document(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        logger.error(f"Cannot read {path}: {e}")
        raise SpecValidationError(f"Cannot read {path}: {e}") from e


def _load_spec(args: argparse.Namespace):
    return parse_spec(_read_document(args.spec), allow_resonance=args.allow_resonance,
                      trunc=_parse_trunc(args.trunc), mode=args.mode)


def _read_grid(args: argparse.Namespace) -> List[Tuple[complex, complex]]:
    points = [_parse_point(p) for p in (args.point or [])]
    if args.grid_file:
        try:
            frame = pd.read_csv(args.grid_file)
            points += [(complex(r.t_re, r.t_im), complex(r.x_re, r.x_im)) for r in frame.itertuples()]
        except (OSError, AttributeError, pd.errors.ParserError) as e:
            raise SpecValidationError(f"Cannot read grid file {args.grid_file}: {e}") from e
    if not points:
        raise SpecValidationError("sum needs at least one --point or a --grid-file")
    return points


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="summa", description="Formal series, Borel plane and resummation engine")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    verbosity.add_argument("--quiet", action="store_true", help="Log warnings and errors only")
    parser.add_argument("--format", choices=("json", "csv"), default="json", help="Report format")
    parser.add_argument("--output", help="Report path (stdout when omitted)")
    subparsers = parser.add_subparsers(dest="verb", help="Operation")

    def spec_parser(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("spec", help="Equation spec JSON file")
        sub.add_argument("--trunc", help="Truncation orders 'Nt,Nx'")
        sub.add_argument("--mode", choices=("exact", "float"), help="Coefficient arithmetic")
        sub.add_argument("--allow-resonance", action="store_true", help="Solve up to the resonant order")
        return sub

    spec_parser("solve", "Truncated formal solution")
    spec_parser("borel", "Borel-plane family and residuals")
    summation = spec_parser("sum", "Borel-Padé-Laplace summation on a grid")
    summation.add_argument("--d", type=float, required=True, help="Summation direction (radians)")
    summation.add_argument("--point", action="append", help="Grid point 't,x' (repeatable)")
    summation.add_argument("--grid-file", help="CSV with t_re,t_im,x_re,x_im columns")
    summation.add_argument("--route", choices=("normal", "conical"), default="normal")
    summation.add_argument("--R", type=float, default=0.5, help="Cone ratio |t| < R|x| (conical route)")
    summation.add_argument("--pade-m", type=int, help="Padé denominator degree")

    directions = subparsers.add_parser("directions", help="Singular points and directions")
    directions.add_argument("--b", required=True, help="b(0), e.g. 0, 1/2, 2+i")
    directions.add_argument("--c", required=True, help="c(0), nonzero")
    directions.add_argument("--k", type=int, default=1)
    directions.add_argument("--n", type=int, default=10, help="Number of singular points")

    norms = subparsers.add_parser("norms", help="Nagumo norm of a polynomial in ξ")
    norms.add_argument("--f", required=True, help="Polynomial in xi, e.g. '1+xi^2'")
    norms.add_argument("--kind", choices=("pure", "disc_joined", "ramified"), default="pure")
    norms.add_argument("--d", type=float, default=0.0)
    norms.add_argument("--theta", type=float, default=math.pi / 4)
    norms.add_argument("--R", type=float, default=0.0)
    norms.add_argument("--k", type=int, default=1)
    norms.add_argument("--mu", type=float, default=1.0, help="|μ|; its argument is −d")
    norms.add_argument("--n", type=float, default=0.0, help="Nagumo exponent")

    verify = subparsers.add_parser("verify", help="Randomized norm-inequality suites")
    verify.add_argument("--suite", choices=SUITES + ("all",), default="all")
    verify.add_argument("--trials", type=int, default=100)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--d", type=float, default=0.0)
    verify.add_argument("--theta", type=float, default=math.pi / 4)

    newton = subparsers.add_parser("newton", help="Newton polygon of F(x, y, δy, ...) along φ")
    newton.add_argument("document", help="JSON with 'phi', 'terms' [{'slots': [...], 'coeff': ...}] and 'trunc'")
    return parser


# Dispatch


def _solve(args, config):
    eq = _load_spec(args)
    return solve_formal(eq, config)


def _directions(args, config):
    return singular_scan(_parse_scalar(args.b), _parse_scalar(args.c), args.k, args.n)


def _borel(args, config):
    eq = _load_spec(args)
    normal = prepare_normal_form(eq)
    solution = solve_formal(normal.equation, config)
    family = borel_coefficients(solution, normal.equation)
    residuals = [convolution_residual(family, n) for n in range(1, family.order + 1)]
    return {
        "k": family.k,
        "mode": family.mode,
        "certified_order": family.certified_order,
        "members": [member.to_json() for member in family.members],
        "residual_zero": [r.is_zero() for r in residuals],
        "residual_max": [float(np.max(np.abs(r.to_float().coeffs), initial=0.0)) for r in residuals],
        "singular_points": {str(n): family.singular_points(n) for n in range(1, family.order + 1)},
    }


def _sum(args, config):
    eq = _load_spec(args)
    options = SummationOptions(route=args.route, pade_m=args.pade_m, R=args.R)
    return borel_sum_solution(eq, args.d, _read_grid(args), options, config)


def _polynomial_in_xi(text: str) -> TruncatedSeries:
    series = parse_series(text.replace("xi", "x"), 0, "float")
    return series.with_coeffs(series.coeffs.copy(), vars=("xi",))


def _norms(args, config):
    sector = SectorSpec(args.kind, args.d, args.theta, args.R, args.k)
    params = NagumoParams.along(sector, args.mu, args.n)
    f = _polynomial_in_xi(args.f)
    bisector = complex(np.exp(1j * sector.center))
    return {
        "m0": m0_constant(),
        "nagumo_norm": nagumo_norm(f, sector, params),
        "delta_on_bisector": delta(bisector, sector),
        "sector": {"kind": sector.kind, "d": sector.d, "theta": sector.theta, "R": sector.R, "k": sector.k},
    }


def _verify(args, config):
    sector = SectorSpec("pure", args.d, args.theta)
    suites = SUITES if args.suite == "all" else (args.suite,)
    return [verify_inequalities(name, args.trials, sector, seed=args.seed, config=config) for name in suites]


def _newton(args, config):
    try:
        payload = json.loads(_read_document(args.document))
        trunc = int(payload.get("trunc", 12))
        phi = parse_series(payload["phi"], trunc)
        F: Dict[Tuple[int, ...], TruncatedSeries] = {}
        for term in payload["terms"]:
            key = tuple(int(e) for e in term["slots"])
            coeff = parse_series(term["coeff"], trunc)
            F[key] = F[key] + coeff if key in F else coeff
    except json.JSONDecodeError as e:
        logger.error(f"Newton document is not valid JSON: {e}")
        raise SpecValidationError(f"Newton document is not valid JSON: {e}") from e
    except (KeyError, TypeError, ValueError) as e:
        raise SpecValidationError(f"Malformed Newton document: {e}") from e
    return newton_polygon(F, phi)


_HANDLERS = {
    "solve": _solve,
    "directions": _directions,
    "borel": _borel,
    "sum": _sum,
    "norms": _norms,
    "verify": _verify,
    "newton": _newton,
}


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, run one verb and write its report; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.verb is None:
        parser.print_help()
        return SpecValidationError.exit_code

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    try:
        try:
            config = SummaConfig.from_env()
        except ValueError as e:
            raise SpecValidationError(f"Invalid SUMMA_* environment setting: {e}") from e
        report = _HANDLERS[args.verb](args, config)
        text = emit_report(report, args.format, args.output)
    except SummaError as e:
        logger.error(f"{args.verb} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code

    if args.output is None:
        sys.stdout.write(text)
    else:
        print("=" * 50)
        print(f"SUMMA {args.verb.upper()} COMPLETED")
        print("=" * 50)
        print(f"Report: {args.output} ({args.format})")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Console entry point."""
    return run_command(argv)


if __name__ == "__main__":
    sys.exit(main())
