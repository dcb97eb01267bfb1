"""Report emission: one JSON summary plus one CSV per table, written deterministically."""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .scenarios import Result, ScenarioSpec, resolved_parameters
from .serialize import clean_float, dumps, table_csv


def plain(obj):
    """JSON-ready copy with rounded floats and string keys."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return clean_float(obj)
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    return obj


def report_dict(spec: ScenarioSpec, result: Result) -> dict:
    return {
        "name": spec.name,
        "kind": spec.kind,
        "seed": int(spec.seed),
        "parameters": plain(resolved_parameters(spec)),
        "summary": plain(result.summary),
        "checks": [
            {"name": c.name, "passed": bool(c.passed), "residual": float(f"{c.residual:.6e}"), "detail": c.detail}
            for c in result.checks
        ],
        "tables": [{"name": t.name, "columns": list(t.columns), "rows": plain(t.rows)} for t in result.tables],
    }


def emit_report(spec: ScenarioSpec, result: Result, out_dir: str | os.PathLike) -> list[Path]:
    """Write ``report.json``, ``<table>.csv`` and ``artifact.json`` as requested; returns the paths.

    Raises ``OSError`` when the directory cannot be created or written.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in spec.formats:
        p = out / "report.json"
        p.write_text(dumps(report_dict(spec, result)), encoding="utf-8")
        written.append(p)
        if result.artifact is not None:
            p = out / "artifact.json"
            p.write_text(dumps(result.artifact), encoding="utf-8")
            written.append(p)
    if "csv" in spec.formats:
        for t in result.tables:
            p = out / f"{t.name}.csv"
            p.write_text(table_csv(t.columns, t.rows), encoding="utf-8")
            written.append(p)
    return written


def residual_table(checks) -> str:
    width = max((len(c.name) for c in checks), default=4)
    lines = [f"{'check':<{width}}  verdict  residual      detail"]
    for c in checks:
        lines.append(f"{c.name:<{width}}  {'PASS' if c.passed else 'FAIL':<7}  {c.residual:.6e}  {c.detail}")
    return "\n".join(lines)
