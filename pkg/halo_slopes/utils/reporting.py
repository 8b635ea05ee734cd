"""Report writers: '#' header lines, then a CSV table or a JSON body."""

import csv
import io
import json
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from .. import __version__


def format_fraction(x: Optional[Fraction]) -> str:
    if x is None:
        return ""
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


class Report:
    """One command's result as a table (csv) and as a structured body (text)."""

    def __init__(
        self,
        kind: str,
        columns: Sequence[str],
        rows: List[Dict[str, Any]],
        body: Optional[Dict[str, Any]] = None,
        approx_source: Optional[str] = None,
    ):
        self.kind = kind
        self.columns = list(columns)
        self.rows = rows
        self.body = body if body is not None else {"rows": rows}
        self.approx_source = approx_source

    def with_approx(self, column: str, source: str) -> "Report":
        """Add a decimal rendering of ``source`` under ``column``; never authoritative."""
        rows = []
        for row in self.rows:
            value = row.get(source)
            row = dict(row)
            row[column] = "" if value is None or value == "" else f"{float(Fraction(value)):.6f}"
            rows.append(row)
        return Report(self.kind, self.columns + [column], rows, self.body)

    def header_lines(self, config: Dict[str, Any], digest: str) -> List[str]:
        return [
            f"# halo-slopes {__version__} {self.kind}",
            f"# config {json.dumps(_jsonable(config), sort_keys=True)}",
            f"# dataset sha256 {digest}",
        ]

    def render(self, fmt: str, config: Dict[str, Any], digest: str = "none") -> str:
        lines = self.header_lines(config, digest)
        if fmt == "csv":
            buf = io.StringIO()
            writer = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\n", extrasaction="ignore")
            writer.writeheader()
            for row in self.rows:
                writer.writerow({key: _cell(row.get(key)) for key in self.columns})
            return "\n".join(lines) + "\n" + buf.getvalue()
        if fmt == "text":
            return "\n".join(lines) + "\n" + json.dumps(_jsonable(self.body), sort_keys=True, indent=2) + "\n"
        raise ValueError(f"unknown output format {fmt!r}")


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return format_fraction(value)
    return str(value)


def write_report(report: Report, fmt: str, config: Dict[str, Any], digest: str = "none", output: Optional[str] = None) -> str:
    """Render and, when ``output`` is given, write the report there (LF line endings)."""
    text = report.render(fmt, config, digest)
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    return text
