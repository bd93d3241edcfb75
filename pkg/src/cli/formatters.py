"""
Report assembly and rendering (json, csv, human).
"""

import csv
import io
import json
import math
from typing import Any, Dict, List, Optional, Sequence

from ..reports.report_store import json_ready

SCHEMA_VERSION = 1
SIGNIFICANT_DIGITS = 10


def build_report(params: Optional[Dict[str, Any]], inputs: Dict[str, Any], results: List[Dict[str, Any]],
                 diagnostics: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Report with the stable top-level schema shared by every subcommand."""
    return {
        "schema_version": SCHEMA_VERSION,
        "params": params or {},
        "inputs": inputs,
        "results": results,
        "diagnostics": diagnostics or {},
    }


def format_number(value: Any) -> str:
    """Floats with 10 significant digits; other values unchanged."""
    if isinstance(value, bool) or value is None:
        return str(value)
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return str(value)
        return f"{value:.{SIGNIFICANT_DIGITS}g}"
    if isinstance(value, (list, tuple)) and all(isinstance(v, (int, float)) for v in value):
        return "[" + ", ".join(format_number(float(v)) for v in value) + "]"
    return str(value)


def render_json(report: Dict[str, Any]) -> str:
    return json.dumps(json_ready(report), indent=2, ensure_ascii=False)


def render_csv(rows: Sequence[Dict[str, Any]], blocks: Optional[Sequence[Dict[str, Any]]] = None) -> str:
    """
    CSV of flat rows. With blocks, each block is {"label": str, "rows": [...]}
    and is preceded by a '# label' line; all blocks share one header.
    """
    buffer = io.StringIO()
    if blocks is not None:
        first = next((b["rows"] for b in blocks if b["rows"]), [])
        if not first:
            return ""
        writer = csv.DictWriter(buffer, fieldnames=list(first[0]), extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for block in blocks:
            buffer.write(f"# {block['label']}\n")
            writer.writerows(json_ready(block["rows"]))
        return buffer.getvalue()

    if not rows:
        return ""
    fieldnames: List[str] = []
    for row in rows:
        fieldnames.extend(k for k in row if k not in fieldnames)
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (json.dumps(json_ready(v)) if isinstance(v, (dict, list)) else v)
                         for k, v in json_ready(row).items()})
    return buffer.getvalue()


def _scalar_items(data: Dict[str, Any]) -> List[str]:
    parts = []
    for key, value in data.items():
        if isinstance(value, dict):
            continue
        if isinstance(value, list) and not all(isinstance(v, (int, float)) for v in value):
            continue
        parts.append(f"{key}={format_number(value)}")
    return parts


def render_human(report: Dict[str, Any], title: str = "") -> str:
    """
    Readable summary: parameters, one line per result (scalar fields only,
    floats to 10 significant digits) and scalar diagnostics.
    """
    lines = []
    if title:
        lines.append(title)
        lines.append("=" * 60)
    params = report.get("params") or {}
    if params:
        lines.append("params: " + " ".join(_scalar_items(params)))
    inputs = report.get("inputs") or {}
    if inputs:
        lines.append("inputs: " + " ".join(_scalar_items(inputs)))
    for result in report.get("results", []):
        marker = {True: "✓", False: "✗"}.get(result.get("passed", result.get("converged")), "•")
        lines.append(f"  {marker} " + "  ".join(_scalar_items(result)))
    diagnostics = {k: v for k, v in (report.get("diagnostics") or {}).items() if not isinstance(v, (dict, list))}
    if diagnostics:
        lines.append("diagnostics: " + " ".join(_scalar_items(diagnostics)))
    return "\n".join(lines) + "\n"


def render(report: Dict[str, Any], fmt: str, csv_rows: Optional[Sequence[Dict[str, Any]]] = None,
           csv_blocks: Optional[Sequence[Dict[str, Any]]] = None, title: str = "") -> str:
    """
    Render a report in the chosen format.

    Args:
        report: Report from build_report
        fmt: "json", "csv" or "human"
        csv_rows: Flat rows for csv output (results are used when absent)
        csv_blocks: Labelled row blocks for csv output (takes precedence)
        title: Heading for human output

    Returns:
        Text to print
    """
    if fmt == "json":
        return render_json(report) + "\n"
    if fmt == "csv":
        if csv_blocks is not None:
            return render_csv([], blocks=csv_blocks)
        return render_csv(csv_rows if csv_rows is not None else report.get("results", []))
    return render_human(report, title)
