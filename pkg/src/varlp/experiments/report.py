"""CSV and JSON report writers.

Rows are written with repr-exact floats and a fixed column order, so two runs
with identical configs produce byte-identical CSVs.  The JSON summary embeds
the resolved config, the bands, and the pass/fail flags; neither file carries
timestamps.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .runners import RunResult


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (bool,)):
        return "true" if value else "false"
    return str(value)


def write_csv(path: Path, fieldnames: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(row.get(name, "")) for name in fieldnames])


def write_summary(path: Path, summary: dict, passes: dict) -> None:
    doc = {"summary": summary, "passes": passes, "ok": all(passes.values())}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=repr) + "\n")


def write_result(result: RunResult, out_dir: str, plots: bool = True) -> dict[str, str]:
    """Write <name>.csv, <name>_summary.json, and (optionally) <name>.png
    into out_dir; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    csv_path = out / f"{result.name}.csv"
    write_csv(csv_path, result.fieldnames, result.rows)
    paths["csv"] = str(csv_path)
    summary_path = out / f"{result.name}_summary.json"
    write_summary(summary_path, result.summary, result.passes)
    paths["summary"] = str(summary_path)
    if plots:
        from .plots import render

        png = render(result, out / f"{result.name}.png")
        if png is not None:
            paths["plot"] = str(png)
    return paths
