"""
Report rendering for the CLI.

Exact values arrive already serialized as "p/q" strings; decimal columns are
12-significant-digit mpmath renderings and only ever accompany an exact
column. Reports carry no timestamps or host details, so identical runs
produce identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any

import click

from ..core.constants import EXIT_CLAIM_FAILED, EXIT_INCONCLUSIVE, EXIT_OK
from ..services.exactmath import Verdict
from ..services.verifier import SuiteResult
from .schemas import Report, RunConfig

DECIMAL_NOTE = "decimal columns are non-authoritative 12-significant-digit renderings"


def exit_code(verdict: Verdict) -> int:
    if verdict is Verdict.PROVEN_FALSE:
        return EXIT_CLAIM_FAILED
    if verdict is Verdict.INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def build_report(result: SuiteResult, config: RunConfig) -> Report:
    results = dict(result.results)
    if result.rows:
        results["rows"] = result.rows
    if any("decimal" in key for row in result.rows for key in row):
        results["note"] = DECIMAL_NOTE
    return Report(command=result.command, config=config.report_fields(), results=results, verdict=result.verdict.value)


def _csv_cell(value: Any) -> Any:
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True)
    if value is None:
        return ""
    return value


def render_csv(result: SuiteResult) -> str:
    rows = result.rows or [{k: v for k, v in result.results.items() if not isinstance(v, (list, dict))}]
    header: list[str] = []
    for row in rows:
        header.extend(key for key in row if key not in header)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _csv_cell(row.get(key)) for key in header})
    return buffer.getvalue()


def render_json(report: Report) -> str:
    return json.dumps(report.model_dump(mode="json"), indent=2) + "\n"


def _text_lines(value: Any, indent: int = 0) -> list[str]:
    pad = "  " * indent
    if isinstance(value, dict):
        lines = []
        for key, item in value.items():
            if isinstance(item, (dict, list)) and item:
                lines.append(f"{pad}{key}:")
                lines.extend(_text_lines(item, indent + 1))
            else:
                lines.append(f"{pad}{key}: {item}")
        return lines
    if isinstance(value, list):
        if all(isinstance(item, dict) for item in value):
            return [pad + ", ".join(f"{k}={v}" for k, v in item.items()) for item in value]
        return [pad + ", ".join(str(item) for item in value)]
    return [f"{pad}{value}"]


def render_text(report: Report) -> str:
    lines = [f"command: {report.command}", f"verdict: {report.verdict}"]
    lines.extend(_text_lines(report.results))
    return "\n".join(lines) + "\n"


def render(result: SuiteResult, config: RunConfig) -> str:
    if config.format == "csv":
        return render_csv(result)
    report = build_report(result, config)
    return render_json(report) if config.format == "json" else render_text(report)


def write_report(text: str, out: str | None) -> None:
    if out is None:
        click.echo(text, nl=False)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
