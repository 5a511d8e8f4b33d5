"""
Deterministic rendering of command results as TSV or canonical JSON.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from numbers import Integral, Real
from typing import Any, Dict, Final, List, Sequence

import numpy as np

from errors import InvalidInputError
from sequence_spaces import Exponent, Scalar

logger = logging.getLogger(__name__)

TABLE: Final = "table"
SCALAR: Final = "scalar"
VERDICT: Final = "verdict"

TSV: Final = "tsv"
JSON: Final = "json"

DEFAULT_PRECISION: Final = 12


@dataclass
class Report:
    """
    A command result. Tables carry a header and rows of equal length, a scalar
    report is a one-cell table and a verdict is a list of (key, value) rows.
    """

    kind: str
    columns: List[str] = field(default_factory=list)
    rows: List[List[Any]] = field(default_factory=list)
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in (TABLE, SCALAR, VERDICT):
            raise InvalidInputError(f"Unknown report kind {self.kind!r}")
        width = 2 if self.kind == VERDICT else len(self.columns)
        for row in self.rows:
            if len(row) != width:
                raise InvalidInputError(f"Report row {row!r} has {len(row)} cells, expected {width}")

    @classmethod
    def scalar(cls, value: Any, provenance: Dict[str, Any] = None) -> "Report":
        return cls(SCALAR, ["value"], [[value]], provenance or {})

    @classmethod
    def table(cls, columns: Sequence[str], rows: Sequence[Sequence[Any]], provenance: Dict[str, Any] = None) -> "Report":
        return cls(TABLE, list(columns), [list(r) for r in rows], provenance or {})

    @classmethod
    def verdict(cls, verdict: str, details: Sequence[Sequence[Any]] = (), provenance: Dict[str, Any] = None) -> "Report":
        rows = [["verdict", verdict]] + [list(d) for d in details]
        return cls(VERDICT, ["key", "value"], rows, provenance or {})


def format_number(value: Any, precision: int = DEFAULT_PRECISION) -> str:
    """Render one cell: floats with `precision` significant digits, integers as is."""
    if value is None:
        return "-"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, Exponent):
        return str(value)
    if isinstance(value, Scalar):
        value = complex(value) if value.mode == "complex" else value.re
    if isinstance(value, Integral):
        return str(int(value))
    if isinstance(value, (complex, np.complexfloating)):
        z = complex(value)
        if z.imag == 0.0:
            return format_number(z.real, precision)
        sign = "-" if z.imag < 0 else "+"
        return f"{format_number(z.real, precision)}{sign}{format_number(abs(z.imag), precision)}i"
    if isinstance(value, Real):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if x == 0.0:
            x = 0.0
        return f"{x:#.{precision}g}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return ",".join(format_number(v, precision) for v in value)
    return str(value)


def _json_value(value: Any, precision: int) -> Any:
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, Exponent):
        return value.to_json()
    if isinstance(value, Scalar):
        return value.to_json()
    if isinstance(value, Integral):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        z = complex(value)
        return [_json_value(z.real, precision), _json_value(z.imag, precision)]
    if isinstance(value, Real):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.{precision}g}") + 0.0
    if isinstance(value, np.ndarray):
        return [_json_value(v, precision) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_json_value(v, precision) for v in value]
    if isinstance(value, dict):
        return {str(k): _json_value(v, precision) for k, v in value.items()}
    return str(value)


def render(report: Report, fmt: str = TSV, precision: int = DEFAULT_PRECISION) -> str:
    """Render a report; the output is byte-identical for identical reports."""
    logger.debug(f"Rendering {report.kind} report with {len(report.rows)} rows as {fmt}")
    if fmt == TSV:
        if report.kind == VERDICT:
            lines = [f"{key}\t{format_number(value, precision)}" for key, value in report.rows]
        else:
            lines = ["\t".join(report.columns)]
            lines.extend("\t".join(format_number(v, precision) for v in row) for row in report.rows)
        return "\n".join(lines) + "\n"
    if fmt == JSON:
        payload = {
            "kind": report.kind,
            "columns": report.columns,
            "rows": _json_value(report.rows, precision),
            "provenance": _json_value(report.provenance, precision),
        }
        return json.dumps(payload, sort_keys=True, ensure_ascii=False) + "\n"
    raise InvalidInputError(f"Unknown output format {fmt!r}; use 'tsv' or 'json'")
