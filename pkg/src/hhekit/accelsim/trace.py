"""Trace export: per-task CSV plus a key=value cycle summary."""
from __future__ import annotations

import csv
import io
from pathlib import Path

from .scheduler import CycleReport

COLUMNS = ("task_id", "unit", "opcode", "start", "finish", "read_set", "write_set")


def trace_rows(report: CycleReport) -> list[dict]:
    return [
        {
            "task_id": t.id, "unit": t.unit, "opcode": t.opcode, "start": t.start, "finish": t.finish,
            "read_set": ";".join(map(str, t.read_set)), "write_set": ";".join(map(str, t.write_set)),
        }
        for t in report.tasks
    ]


def trace_csv(report: CycleReport) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(trace_rows(report))
    return buf.getvalue()


def summary_text(report: CycleReport) -> str:
    return "".join(f"{k}={v}\n" for k, v in report.summary().items())


def export_trace(report: CycleReport, path: str | Path) -> tuple[Path, Path]:
    path = Path(path)
    path.write_text(trace_csv(report))
    summary = path.with_suffix(".summary.txt")
    summary.write_text(summary_text(report))
    return path, summary


def read_trace(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for k in ("task_id", "start", "finish"):
            r[k] = int(r[k])
    return rows
