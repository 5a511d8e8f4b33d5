#!/usr/bin/env python3
"""
tvs-kit command-line front-end.

Every verb reads its inputs (a file path, inline JSON or catalog:<name>),
calls one engine operation and prints a deterministic TSV or JSON report.
Exit codes: 0 success, 2 bad input or usage, 3 numerical failure.
"""

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Dict, Final, List, Optional, Tuple

import numpy as np
from dotenv import load_dotenv
from fuzzywuzzy import process

import convex_gauge
import function_spaces
import hilbert_space
import operator_algebra
import sequence_spaces
import series_algebras
from catalog.catalog_manager import CatalogManager
from errors import InvalidInputError, NumericalError, UsageError, WorkbenchError
from reports import DEFAULT_PRECISION, JSON, TSV, Report, render
from sequence_spaces import Exponent, FinSeq, Scalar

logger = logging.getLogger(__name__)

LOG_FORMAT: Final = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
VERBS: Final = (
    "norms", "holder", "gauge", "hull", "gelfand", "neumann",
    "wiener", "series", "project", "convolve", "seminorm",
)
SUGGESTION_SCORE: Final = 60
CATALOG_PREFIX: Final = "catalog:"

# options whose value is an input document
INPUT_OPTIONS: Final = (
    "seq", "matrix", "kernel", "weights", "points", "point", "perturb",
    "series", "vector", "subspace", "f", "g", "probe", "at",
)


@dataclass
class Settings:
    precision: int = DEFAULT_PRECISION
    debug: bool = False


def load_settings() -> Settings:
    """Read TVS_KIT_PRECISION and TVS_KIT_DEBUG from the environment (and .env)."""
    load_dotenv()
    settings = Settings(debug=os.getenv("TVS_KIT_DEBUG", "false").lower() == "true")
    raw = os.getenv("TVS_KIT_PRECISION")
    if raw:
        try:
            precision = int(raw)
        except ValueError:
            precision = 0
        if precision > 0:
            settings.precision = precision
        else:
            logger.warning(f"Ignoring TVS_KIT_PRECISION={raw!r}; expected a positive integer")
    return settings


@dataclass
class Command:
    verb: str
    options: Dict[str, Any] = field(default_factory=dict)
    inputs: List[str] = field(default_factory=list)


def track_performance(func):
    """Decorator to log how long each verb takes and which verbs fail."""
    @wraps(func)
    def wrapper(cmd: Command, *args, **kwargs):
        start_time = time.perf_counter()
        try:
            return func(cmd, *args, **kwargs)
        except Exception as e:
            logger.debug(f"{cmd.verb} raised {type(e).__name__}")
            raise
        finally:
            duration_ms = int((time.perf_counter() - start_time) * 1000)
            logger.debug(f"{cmd.verb} finished in {duration_ms} ms")

    return wrapper


class CommandParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _exponent_list(text: str) -> List[Exponent]:
    try:
        return [Exponent.parse(part) for part in text.split(",") if part.strip()]
    except InvalidInputError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _exponent_pairs(text: str) -> List[Tuple[Exponent, Exponent]]:
    pairs = []
    for part in text.split(","):
        if ":" not in part:
            raise argparse.ArgumentTypeError(f"expected p_in:p_out, got {part!r}")
        p_in, p_out = part.split(":", 1)
        pairs.append((_exponent_list(p_in)[0], _exponent_list(p_out)[0]))
    return pairs


def build_parser() -> CommandParser:
    common = CommandParser(add_help=False)
    common.add_argument("--format", choices=[TSV, JSON], default=TSV, help="output format")
    common.add_argument("--seed", type=int, default=0, help="seed for every sampled check")

    parser = CommandParser(prog="tvs-kit", description="Desk-scale functional analysis workbench")
    verbs = parser.add_subparsers(dest="verb", metavar="verb", parser_class=CommandParser)

    norms = verbs.add_parser("norms", parents=[common], help="l^p norms of a sequence or operator norms of a matrix")
    source = norms.add_mutually_exclusive_group(required=True)
    source.add_argument("--seq", help="sequence input")
    source.add_argument("--matrix", help="matrix input")
    source.add_argument("--kernel", help="integral kernel input on a uniform grid of [0, 1]")
    norms.add_argument("--p", type=_exponent_list, default=_exponent_list("1,2,inf"), help="exponents, e.g. 1,2,inf")
    norms.add_argument("--pairs", type=_exponent_pairs, default=_exponent_pairs("1:1,2:2,inf:inf"),
                       help="operator norm exponent pairs, e.g. 1:1,2:inf")
    norms.add_argument("--rank", type=int, help="report the block-averaged rank-r approximation error of a kernel")

    holder = verbs.add_parser("holder", parents=[common], help="Hoelder bounds of a dual pairing")
    holder.add_argument("--seq", required=True)
    holder.add_argument("--weights", required=True)
    holder.add_argument("--p", type=_exponent_list, default=_exponent_list("1,2,inf"))

    gauge = verbs.add_parser("gauge", parents=[common], help="Minkowski gauge and shape checks of a body")
    gauge.add_argument("--body", required=True, help="'lp-ball p m', 'cube m', 'simplex m' or 'shifted-ball c r'")
    gauge.add_argument("--point", help="point to evaluate the gauge at")
    gauge.add_argument("--tol", type=float, default=1e-12)
    gauge.add_argument("--check", choices=["none", "shape", "seminorm"], default="none")
    gauge.add_argument("--samples", type=int, default=1000)

    hull = verbs.add_parser("hull", parents=[common], help="convex hull membership with a certificate")
    hull.add_argument("--points", required=True)
    hull.add_argument("--point", required=True)

    gelfand = verbs.add_parser("gelfand", parents=[common], help="spectral radius sequence or resolvent probe")
    gelfand.add_argument("--matrix", required=True)
    gelfand.add_argument("--nmax", type=int, default=64)
    gelfand.add_argument("--probe", help="scalar lambda to test for the resolvent set")

    neumann = verbs.add_parser("neumann", parents=[common], help="(I - a)^-1 by Neumann series")
    neumann.add_argument("--matrix", required=True)
    neumann.add_argument("--tol", type=float, default=1e-12)
    neumann.add_argument("--perturb", help="invert matrix - perturb instead")

    wiener = verbs.add_parser("wiener", parents=[common], help="Wiener algebra norm, inverse or spectral radius")
    wiener.add_argument("--seq", required=True)
    mode = wiener.add_mutually_exclusive_group()
    mode.add_argument("--invert", action="store_true")
    mode.add_argument("--gelfand", action="store_true")
    wiener.add_argument("--tol", type=float, default=1e-12)
    wiener.add_argument("--nmax", type=int, default=128)
    wiener.add_argument("--max-bandwidth", type=int, default=series_algebras.MAX_BANDWIDTH)

    series = verbs.add_parser("series", parents=[common], help="power series radius, seminorms and evaluation")
    series.add_argument("--series", required=True)
    series.add_argument("--radius", type=float, help="r for the coefficient seminorm sup |a_n| r^n")
    series.add_argument("--circle", type=float, help="s for the circle seminorm sup_{|z|=s} |f(z)|")
    series.add_argument("--samples", type=int, default=series_algebras.DEFAULT_CIRCLE_SAMPLES)
    series.add_argument("--at", help="point z to evaluate at")
    series.add_argument("--derivative", action="store_true")

    project = verbs.add_parser("project", parents=[common], help="orthogonal projection onto a subspace")
    project.add_argument("--subspace", required=True)
    project.add_argument("--vector")
    project.add_argument("--mode", choices=[hilbert_space.GRAM, hilbert_space.MINIMIZING_SEQUENCE], default=hilbert_space.GRAM)
    project.add_argument("--steps", type=int, default=hilbert_space.DEFAULT_STEPS)
    project.add_argument("--tight", action="store_true")
    project.add_argument("--complement", action="store_true", help="print a basis of the orthogonal complement")

    convolve = verbs.add_parser("convolve", parents=[common], help="Riemann-sum convolution of sampled functions")
    convolve.add_argument("--f", required=True)
    convolve.add_argument("--g", required=True)

    seminorm = verbs.add_parser("seminorm", parents=[common], help="N_j or M_j seminorm of a sampled function")
    seminorm.add_argument("--f", required=True)
    seminorm.add_argument("--j", type=float, required=True)
    seminorm.add_argument("--family", choices=[function_spaces.WINDOW_FAMILY, function_spaces.WEIGHT_FAMILY],
                          default=function_spaces.WINDOW_FAMILY)
    seminorm.add_argument("--growth", action="store_true", help="report the polynomial growth constant instead")
    return parser


def suggest_verb(word: str) -> Optional[str]:
    match = process.extractOne(word, VERBS)
    if match and match[1] >= SUGGESTION_SCORE:
        return match[0]
    return None


def parse_command(argv: List[str]) -> Command:
    """Validate argv into a Command; every failure is a UsageError."""
    argv = list(argv)
    if argv and not argv[0].startswith("-") and argv[0] not in VERBS:
        suggestion = suggest_verb(argv[0])
        hint = f"; did you mean '{suggestion}'?" if suggestion else ""
        raise UsageError(f"Unknown verb '{argv[0]}'{hint}")
    namespace = build_parser().parse_args(argv)
    if namespace.verb is None:
        raise UsageError(f"No verb given; choose one of {', '.join(VERBS)}")
    options = vars(namespace)
    verb = options.pop("verb")
    inputs = [options[name] for name in INPUT_OPTIONS if options.get(name)]
    return Command(verb, options, inputs)


class InputLoader:
    """Resolves input specs: catalog:<name>, inline JSON, or a path to a JSON file."""

    def __init__(self, catalog: Optional[CatalogManager] = None):
        self._catalog = catalog

    @property
    def catalog(self) -> CatalogManager:
        if self._catalog is None:
            self._catalog = CatalogManager()
        return self._catalog

    def load(self, ref: str, kind: Optional[str] = None) -> Any:
        if ref.startswith(CATALOG_PREFIX):
            return self.catalog.get_entry(ref[len(CATALOG_PREFIX):], kind)["data"]
        text, source = ref, "inline JSON"
        if not self._looks_inline(ref):
            try:
                text = Path(ref).read_text(encoding="utf-8")
            except OSError as e:
                raise UsageError(f"Cannot read input file '{ref}': {e.strerror}") from e
            source = ref
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise UsageError(f"Malformed JSON in {source} at line {e.lineno}, column {e.colno}: {e.msg}") from e

    @staticmethod
    def _looks_inline(ref: str) -> bool:
        text = ref.strip()
        if text.startswith(("[", "{", '"')):
            return True
        try:
            float(text)
        except ValueError:
            return False
        return True

    def sequence(self, ref: str) -> FinSeq:
        data = self.load(ref, "sequence")
        if isinstance(data, list):
            return FinSeq.from_dense([Scalar.of(v) for v in data])
        return FinSeq.from_json(data)

    def matrix(self, ref: str) -> np.ndarray:
        data = self.load(ref, "matrix")
        if isinstance(data, list):
            data = {"rows": data}
        if not isinstance(data, dict):
            raise InvalidInputError("A matrix must be a list of rows or a {'rows': ...} object")
        return operator_algebra.operator_from_json(data)

    def kernel(self, ref: str) -> np.ndarray:
        data = self.load(ref, "kernel")
        if isinstance(data, list):
            return operator_algebra.as_operator(data)
        return operator_algebra.kernel_from_json(data)

    def laurent(self, ref: str) -> series_algebras.LaurentSeq:
        data = self.load(ref, "laurent")
        if isinstance(data, list):
            data = {"offset": 0, "coeffs": data}
        return series_algebras.LaurentSeq.from_json(data)

    def power_series(self, ref: str) -> series_algebras.PowerSeries:
        data = self.load(ref, "power_series")
        if isinstance(data, list):
            data = {"coeffs": data, "polynomial": True}
        return series_algebras.PowerSeries.from_json(data)

    def function(self, ref: str) -> function_spaces.SampledFunction:
        data = self.load(ref, "function")
        if not isinstance(data, dict):
            raise InvalidInputError("A sampled function must be an object with 'h' and 'values'")
        return function_spaces.SampledFunction.from_json(data)

    def scalar(self, ref: str) -> complex:
        return complex(Scalar.of(self.load(ref)))

    def vector(self, ref: str) -> np.ndarray:
        data = self.load(ref)
        if not isinstance(data, list):
            raise InvalidInputError("A vector must be a list of numbers or [re, im] pairs")
        if data and isinstance(data[0], list):
            return np.array([complex(Scalar.of(v)) for v in data])
        return np.asarray(data, dtype=float)

    def subspace(self, ref: str) -> hilbert_space.Subspace:
        data = self.load(ref, "matrix")
        ambient_dim = None
        if isinstance(data, dict):
            ambient_dim = data.get("ambient_dim")
            data = operator_algebra.operator_from_json(data) if data.get("rows") else []
        return hilbert_space.Subspace.span(list(data), ambient_dim)


def _provenance(cmd: Command) -> Dict[str, Any]:
    options = {k: v for k, v in cmd.options.items() if k != "format" and v is not None and v is not False}
    return {"verb": cmd.verb, "options": options}


def _run_norms(cmd: Command, loader: InputLoader) -> Report:
    opts = cmd.options
    if opts["seq"]:
        x = loader.sequence(opts["seq"])
        rows = [[p, sequence_spaces.lp_norm(x, p)] for p in opts["p"]]
        return Report.table(["p", "norm"], rows, _provenance(cmd))

    if opts["kernel"]:
        values = loader.kernel(opts["kernel"])
        if opts["rank"] is not None:
            approximation = operator_algebra.finite_rank_truncate(values, opts["rank"])
            return Report.verdict(
                "truncated",
                [["rank_budget", approximation.rank_budget], ["error_inf_inf", approximation.error]],
                _provenance(cmd),
            )
        a = operator_algebra.discretize_integral_kernel(values)
    else:
        a = loader.matrix(opts["matrix"])
    rows = []
    for p_in, p_out in opts["pairs"]:
        estimate = operator_algebra.operator_norm(a, p_in, p_out, seed=opts["seed"])
        rows.append([p_in, p_out, estimate.value, estimate.quality])
    return Report.table(["p_in", "p_out", "norm", "quality"], rows, _provenance(cmd))


def _run_holder(cmd: Command, loader: InputLoader) -> Report:
    x = loader.sequence(cmd.options["seq"])
    w = loader.sequence(cmd.options["weights"])
    rows = [[r.p, r.q, r.pairing, r.bound, r.holds] for r in sequence_spaces.holder_report(x, w, cmd.options["p"])]
    return Report.table(["p", "q", "pairing", "bound", "holds"], rows, _provenance(cmd))


def _run_gauge(cmd: Command, loader: InputLoader) -> Report:
    opts = cmd.options
    body = convex_gauge.parse_body(opts["body"])
    if opts["check"] == "shape":
        report = convex_gauge.shape_classify(body, opts["samples"], opts["seed"])
        rows = [[name, v.label, v.witness] for name, v in report.verdicts.items()]
        return Report.table(["property", "verdict", "witness"], rows, _provenance(cmd))
    if opts["check"] == "seminorm":
        check = convex_gauge.gauge_seminorm_check(body, opts["samples"], seed=opts["seed"])
        details = [
            ["convex_declared", check.convex_declared],
            ["homogeneity_violation", check.homogeneity_violation],
            ["triangle_violation", check.triangle_violation],
        ]
        if check.triangle_witness is not None:
            details += [["witness_v", check.triangle_witness[0]], ["witness_w", check.triangle_witness[1]]]
        return Report.verdict("seminorm" if check.is_seminorm else "not-seminorm", details, _provenance(cmd))
    if not opts["point"]:
        raise UsageError("gauge: --point is required unless --check is given")
    value = convex_gauge.minkowski_gauge(body, loader.vector(opts["point"]), opts["tol"])
    return Report.scalar(value, _provenance(cmd))


def _run_hull(cmd: Command, loader: InputLoader) -> Report:
    points = loader.load(cmd.options["points"])
    decision = convex_gauge.hull_membership(points, loader.vector(cmd.options["point"]))
    if decision.inside:
        certificate = decision.certificate
        details = [
            ["vertices", list(certificate.indices)],
            ["weights", certificate.weights],
            ["exact", certificate.exact],
        ]
        return Report.verdict("inside", details, _provenance(cmd))
    return Report.verdict("outside", [["normal", decision.normal], ["offset", decision.offset]], _provenance(cmd))


def _run_gelfand(cmd: Command, loader: InputLoader) -> Report:
    a = loader.matrix(cmd.options["matrix"])
    if cmd.options["probe"]:
        decision = operator_algebra.resolvent_probe(a, loader.scalar(cmd.options["probe"]), cmd.options["nmax"])
        details = [
            ["resolvent_norm", decision.resolvent_norm],
            ["criterion_n", decision.criterion_n],
            ["relative_gap", decision.relative_gap],
        ]
        return Report.verdict(decision.verdict, details, _provenance(cmd))
    trace = operator_algebra.gelfand_trace(a, cmd.options["nmax"])
    return Report.table(["n", "rho_n", "running_inf"], trace.rows(), _provenance(cmd))


def _matrix_rows(prefix: str, matrix: np.ndarray) -> List[List[Any]]:
    return [[f"{prefix}[{i}]", row] for i, row in enumerate(matrix)]


def _run_neumann(cmd: Command, loader: InputLoader) -> Report:
    a = loader.matrix(cmd.options["matrix"])
    tol = cmd.options["tol"]
    if cmd.options["perturb"]:
        result = operator_algebra.perturbed_inverse(a, loader.matrix(cmd.options["perturb"]), tol)
        details = [["bound", result.bound], ["x_inverse_norm", result.x_inverse_norm]]
        return Report.verdict("invertible", details + _matrix_rows("inverse", result.inverse), _provenance(cmd))
    result = operator_algebra.neumann_inverse(a, tol)
    details = [
        ["terms", result.terms],
        ["residual", result.residual],
        ["error_bound", result.error_bound],
        ["norm_bound", result.norm_bound],
    ]
    return Report.verdict("converged", details + _matrix_rows("inverse", result.inverse), _provenance(cmd))


def _run_wiener(cmd: Command, loader: InputLoader) -> Report:
    opts = cmd.options
    g = loader.laurent(opts["seq"])
    if opts["invert"]:
        result = series_algebras.wiener_invert(g, opts["tol"], max_bandwidth=opts["max_bandwidth"])
        details = [
            ["norm1", series_algebras.wiener_norm(result.inverse)],
            ["residual", result.residual],
            ["bandwidth", result.bandwidth],
            ["offset", result.inverse.offset],
            ["coeffs", result.inverse.coeffs],
        ]
        return Report.verdict("invertible", details, _provenance(cmd))
    if opts["gelfand"]:
        result = series_algebras.wiener_gelfand(g, opts["nmax"])
        rows = [[n, rho, low, result.circle_max] for n, rho, low in result.trace.rows()]
        return Report.table(["n", "rho_n", "running_inf", "circle_max"], rows, _provenance(cmd))
    circle_max = float(np.max(np.abs(series_algebras.circle_values(g, series_algebras.WIENER_GRID))))
    return Report.table(
        ["quantity", "value"], [["norm1", series_algebras.wiener_norm(g)], ["circle_max", circle_max]], _provenance(cmd)
    )


def _run_series(cmd: Command, loader: InputLoader) -> Report:
    opts = cmd.options
    f = loader.power_series(opts["series"])
    rows: List[List[Any]] = [["radius", series_algebras.radius_estimate(f)]]
    if opts["radius"] is not None:
        rows.append(["coeff_seminorm", series_algebras.coeff_seminorm(f, opts["radius"])])
    if opts["circle"] is not None:
        sup = series_algebras.circle_sup_seminorm(f, opts["circle"], opts["samples"])
        rows += [["circle_sup", sup.value], ["circle_tail_bound", sup.tail_bound]]
    if opts["at"]:
        evaluation = series_algebras.evaluate(f, loader.scalar(opts["at"]))
        rows += [["value", evaluation.value], ["value_tail_bound", evaluation.tail_bound]]
    if opts["derivative"]:
        derived = series_algebras.derivative(f)
        rows += [["derivative_radius", series_algebras.radius_estimate(derived)], ["derivative_coeffs", derived.coeffs]]
    return Report.table(["quantity", "value"], rows, _provenance(cmd))


def _run_project(cmd: Command, loader: InputLoader) -> Report:
    opts = cmd.options
    subspace = loader.subspace(opts["subspace"])
    if opts["complement"]:
        complement = hilbert_space.orthogonal_complement(subspace)
        rows = [[i, e] for i, e in enumerate(complement.basis)]
        return Report.table(["index", "basis_vector"], rows, _provenance(cmd))
    if not opts["vector"]:
        raise UsageError("project: --vector is required unless --complement is given")
    projection = hilbert_space.project(loader.vector(opts["vector"]), subspace, opts["mode"], opts["steps"], opts["tight"])
    d = projection.diagnostics
    rows = [
        ["projection", projection.vector],
        ["distance", d.distance],
        ["orthogonality_residual", d.orthogonality_residual],
    ]
    if d.mode == hilbert_space.MINIMIZING_SEQUENCE:
        rows += [
            ["steps", d.steps],
            ["bound_violations", d.bound_violations],
            ["worst_slack", d.worst_slack],
            ["gram_gap", d.gram_gap],
            ["converged", d.converged],
        ]
    return Report.table(["quantity", "value"], rows, _provenance(cmd))


def _run_convolve(cmd: Command, loader: InputLoader) -> Report:
    result = function_spaces.convolve(loader.function(cmd.options["f"]), loader.function(cmd.options["g"]))
    return Report.table(["x", "value"], [list(pair) for pair in zip(result.grid, result.values)], _provenance(cmd))


def _run_seminorm(cmd: Command, loader: InputLoader) -> Report:
    f = loader.function(cmd.options["f"])
    if cmd.options["growth"]:
        return Report.scalar(function_spaces.poly_growth_fit(f, cmd.options["j"]), _provenance(cmd))
    return Report.scalar(function_spaces.seminorm(f, cmd.options["j"], cmd.options["family"]), _provenance(cmd))


HANDLERS: Final[Dict[str, Callable[[Command, InputLoader], Report]]] = {
    "norms": _run_norms,
    "holder": _run_holder,
    "gauge": _run_gauge,
    "hull": _run_hull,
    "gelfand": _run_gelfand,
    "neumann": _run_neumann,
    "wiener": _run_wiener,
    "series": _run_series,
    "project": _run_project,
    "convolve": _run_convolve,
    "seminorm": _run_seminorm,
}


@track_performance
def execute(cmd: Command, loader: Optional[InputLoader] = None) -> Report:
    """Run one validated command and return its report."""
    logger.info(f"Running {cmd.verb} on {len(cmd.inputs)} input(s)")
    return HANDLERS[cmd.verb](cmd, loader or InputLoader())


def main(argv: Optional[List[str]] = None) -> int:
    settings = load_settings()
    logging.basicConfig(format=LOG_FORMAT, level=logging.DEBUG if settings.debug else logging.INFO)
    argv = sys.argv[1:] if argv is None else list(argv)
    verb = argv[0] if argv else "tvs-kit"

    try:
        cmd = parse_command(argv)
        report = execute(cmd)
        sys.stdout.write(render(report, cmd.options["format"], settings.precision))
        return 0
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    except InvalidInputError as e:
        logger.error(f"{verb}: {e}")
        return e.exit_code
    except NumericalError as e:
        logger.error(f"{verb}: {e}", exc_info=True)
        return e.exit_code
    except WorkbenchError as e:
        logger.error(f"{verb}: {e}", exc_info=True)
        return e.exit_code
    except Exception as e:
        logger.error(f"{verb}: unexpected failure: {e}", exc_info=True)
        return WorkbenchError.exit_code


if __name__ == "__main__":
    sys.exit(main())
