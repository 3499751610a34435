"""Benchmark-grid reporting from per-worker JSON-lines logs.

Renders a per-benchmark x per-vector grid of runtimes with markers for
unknown/timeout cells, as aligned text, CSV and a matplotlib heatmap
figure written next to the CSV.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional

from .errors import MissingLogs

UNKNOWN_MARK = "unk"
TIMEOUT_MARK = "t/o"
CANCELLED_MARK = "canc"


def load_logs(log_dir) -> dict:
    """{benchmark: {vector: outcome record}} from a --log-dir tree."""
    root = Path(log_dir)
    if not root.is_dir():
        raise MissingLogs(f"{root} is not a directory")
    grid: dict = {}
    for bench_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        row: dict = {}
        for log in sorted(bench_dir.glob("*.jsonl")):
            outcome = None
            with open(log) as f:
                for line in f:
                    rec = json.loads(line)
                    if rec.get("event") == "outcome":
                        outcome = rec
            if outcome is not None:
                row[log.stem] = outcome
        if row:
            grid[bench_dir.name] = row
    if not grid:
        raise MissingLogs(f"no worker logs found under {root}")
    return grid


def _cell(rec: Optional[dict]) -> str:
    if rec is None:
        return ""
    status = rec.get("status")
    if status in ("optimal", "infeasible"):
        return f"{rec.get('wall_time', 0.0):.2f}"
    if rec.get("cancelled"):
        return CANCELLED_MARK
    if "timeout" in (rec.get("reason") or ""):
        return TIMEOUT_MARK
    return UNKNOWN_MARK


def format_table(grid: dict) -> str:
    vectors = sorted({v for row in grid.values() for v in row})
    headers = ["benchmark"] + vectors
    rows = [[bench] + [_cell(grid[bench].get(v)) for v in vectors]
            for bench in grid]
    widths = [max(len(str(r[i])) for r in [headers] + rows)
              for i in range(len(headers))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(str(c).ljust(w) for c, w in zip(r, widths)))
    return "\n".join(lines)


def write_csv(grid: dict, path) -> None:
    vectors = sorted({v for row in grid.values() for v in row})
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["benchmark"] + vectors)
        for bench in grid:
            w.writerow([bench] + [_cell(grid[bench].get(v)) for v in vectors])


def write_figure(grid: dict, path) -> None:
    """Heatmap of runtimes: solved cells colored by time, unknown cells
    black, timeouts white (the published table's visual scheme)."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    vectors = sorted({v for row in grid.values() for v in row})
    benches = list(grid)
    data = np.full((len(benches), len(vectors)), np.nan)
    unknown = np.zeros_like(data, dtype=bool)
    for i, b in enumerate(benches):
        for j, v in enumerate(vectors):
            rec = grid[b].get(v)
            if rec is None:
                continue
            if rec.get("status") in ("optimal", "infeasible"):
                data[i, j] = rec.get("wall_time", 0.0)
            elif not rec.get("cancelled") \
                    and "timeout" not in (rec.get("reason") or ""):
                unknown[i, j] = True

    fig, ax = plt.subplots(
        figsize=(1.2 + 0.85 * len(vectors), 1.0 + 0.45 * len(benches)))
    masked = np.ma.masked_invalid(data)
    cmap = plt.get_cmap("viridis").copy()
    cmap.set_bad("white")
    im = ax.imshow(masked, aspect="auto", cmap=cmap)
    for i in range(len(benches)):
        for j in range(len(vectors)):
            if unknown[i, j]:
                ax.add_patch(plt.Rectangle(
                    (j - 0.5, i - 0.5), 1, 1, color="black"))
            elif not np.isnan(data[i, j]):
                ax.text(j, i, f"{data[i, j]:.2f}", ha="center", va="center",
                        fontsize=7, color="white")
    ax.set_xticks(range(len(vectors)), vectors, rotation=45, ha="right",
                  fontsize=8)
    ax.set_yticks(range(len(benches)), benches, fontsize=8)
    fig.colorbar(im, ax=ax, label="seconds")
    ax.set_title("runtime per benchmark and feature vector\n"
                 "(white = timeout, black = unknown)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def report_table(log_dir, out_dir=None) -> str:
    """Aggregate the logs under log_dir; write CSV + PNG into out_dir
    (default: log_dir) and return the aligned text table."""
    grid = load_logs(log_dir)
    out = Path(out_dir) if out_dir is not None else Path(log_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(grid, out / "report.csv")
    write_figure(grid, out / "report.png")
    return format_table(grid)
