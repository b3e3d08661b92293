"""Structured verification reports.

The machine form is JSON written by a small local emitter so float
formatting is pinned to 17 significant digits and key order is insertion
order: identical configs must produce byte-identical reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class CheckRecord:
    check: str
    metric: str
    samples: int
    max_residual: float
    tolerance: float
    passed: bool
    worst_x: list[float] | None = None
    worst_y: list[float] | None = None
    detail: dict = field(default_factory=dict)


@dataclass
class Report:
    metric: str
    dimension: int
    seed: int
    count: int
    records: list[CheckRecord] = field(default_factory=list)

    @property
    def overall_pass(self) -> bool:
        return all(r.passed for r in self.records)


def _emit(value, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        out.append(f'"{escaped}"')
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value in report: {value}")
        out.append(format(value, ".17g"))
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    elif isinstance(value, dict):
        out.append("{")
        for i, (k, v) in enumerate(value.items()):
            if i:
                out.append(",")
            _emit(str(k), out)
            out.append(":")
            _emit(v, out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__} in report")


def _record_payload(r: CheckRecord) -> dict:
    return {
        "check": r.check,
        "metric": r.metric,
        "samples": r.samples,
        "max_residual": r.max_residual,
        "tolerance": r.tolerance,
        "worst_x": r.worst_x,
        "worst_y": r.worst_y,
        "pass": r.passed,
        "detail": r.detail,
    }


def to_json(report: Report) -> str:
    payload = {
        "metric": report.metric,
        "dimension": report.dimension,
        "seed": report.seed,
        "count": report.count,
        "overall_pass": report.overall_pass,
        "records": [_record_payload(r) for r in report.records],
    }
    out: list[str] = []
    _emit(payload, out)
    return "".join(out) + "\n"


def to_text(report: Report) -> str:
    lines = [
        f"metric: {report.metric}   n={report.dimension}   "
        f"samples={report.count}   seed={report.seed}",
        "",
    ]
    name_w = max([len(r.check) for r in report.records] + [5])
    header = f"{'check':<{name_w}}  {'max residual':>13}  {'tolerance':>10}  result"
    lines.append(header)
    lines.append("-" * len(header))
    for r in report.records:
        status = "pass" if r.passed else "FAIL"
        lines.append(
            f"{r.check:<{name_w}}  {r.max_residual:>13.3e}  {r.tolerance:>10.1e}  {status}"
        )
        for key, value in r.detail.items():
            if isinstance(value, float):
                lines.append(f"{'':<{name_w}}    {key} = {value:.6g}")
            elif isinstance(value, str):
                lines.append(f"{'':<{name_w}}    {key} = {value}")
        if not r.passed and r.worst_x is not None:
            pt = ", ".join(f"{c:.6g}" for c in r.worst_x)
            dr = ", ".join(f"{c:.6g}" for c in r.worst_y)
            lines.append(f"{'':<{name_w}}    worst at x = ({pt}), y = ({dr})")
    lines.append("-" * len(header))
    lines.append("overall: " + ("pass" if report.overall_pass else "FAIL"))
    return "\n".join(lines) + "\n"
