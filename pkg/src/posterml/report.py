"""Benchmark table rows, CSV output, and summary figures.

Column order is fixed: id, val, ali, rea, clip, text, image, layout,
color. Skipped metrics stay empty in the CSV and are ignored by the
mean row. Figures are rendered to files next to the delimited output.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .model import MetricReport

BENCH_COLUMNS = ("id", "val", "ali", "rea", "clip", "text", "image", "layout", "color")
MEAN_ROW_ID = "mean"


@dataclass(frozen=True)
class BenchRow:
    id: str
    val: Optional[float] = None
    ali: Optional[float] = None
    rea: Optional[float] = None
    clip: Optional[float] = None
    text: Optional[float] = None
    image: Optional[float] = None
    layout: Optional[float] = None
    color: Optional[float] = None

    def values(self) -> tuple[Optional[float], ...]:
        return (self.val, self.ali, self.rea, self.clip,
                self.text, self.image, self.layout, self.color)

    @classmethod
    def from_report(cls, design_id: str, report: MetricReport) -> "BenchRow":
        subjective = report.subjective or {}
        return cls(
            id=design_id,
            val=report.validity.score,
            ali=report.alignment,
            rea=report.readability,
            clip=report.similarity,
            text=subjective.get("text"),
            image=subjective.get("image"),
            layout=subjective.get("layout"),
            color=subjective.get("color"),
        )


def mean_row(rows: Sequence[BenchRow]) -> BenchRow:
    """Arithmetic mean per column, ignoring missing values."""
    sums = [0.0] * 8
    counts = [0] * 8
    for row in rows:
        for i, value in enumerate(row.values()):
            if value is not None:
                sums[i] += value
                counts[i] += 1
    means = [sums[i] / counts[i] if counts[i] else None for i in range(8)]
    return BenchRow(MEAN_ROW_ID, *means)


def _format_cell(value: Optional[float]) -> str:
    if value is None:
        return ""
    # '.' decimal separator, locale independent
    return format(value, ".6f")


def write_bench_csv(rows: Sequence[BenchRow], out_path: str | Path) -> None:
    """One row per design (input order) plus a trailing mean row."""
    path = Path(out_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(BENCH_COLUMNS)
        for row in list(rows) + [mean_row(rows)]:
            writer.writerow([row.id] + [_format_cell(v) for v in row.values()])


def render_bench_figures(rows: Sequence[BenchRow], out_dir: str | Path) -> list[Path]:
    """Bar charts of objective and subjective columns across designs."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    ids = [r.id for r in rows]
    x = range(len(ids))

    objective = [("val", 1), ("ali", 2), ("rea", 3), ("clip", 4)]
    fig, axes = plt.subplots(2, 2, figsize=(10, 7))
    for ax, (name, col) in zip(axes.flat, objective):
        values = [row.values()[col - 1] for row in rows]
        heights = [v if v is not None else 0.0 for v in values]
        ax.bar(x, heights, color="#4878a8")
        present = [v for v in values if v is not None]
        if present:
            ax.axhline(sum(present) / len(present), color="#c44e52", lw=1,
                       ls="--", label="mean")
            ax.legend(fontsize=8)
        ax.set_title(name)
        ax.set_xticks(list(x))
        ax.set_xticklabels(ids, rotation=45, ha="right", fontsize=7)
    fig.suptitle("objective metrics")
    fig.tight_layout()
    objective_path = out / "objective_metrics.png"
    fig.savefig(objective_path, dpi=110)
    plt.close(fig)
    written.append(objective_path)

    if any(any(v is not None for v in row.values()[4:]) for row in rows):
        fig, axes = plt.subplots(2, 2, figsize=(10, 7))
        for ax, (name, col) in zip(axes.flat, [("text", 5), ("image", 6), ("layout", 7), ("color", 8)]):
            values = [row.values()[col - 1] for row in rows]
            ax.bar(x, [v if v is not None else 0.0 for v in values], color="#6a9f58")
            ax.set_ylim(0, 100)
            ax.set_title(name)
            ax.set_xticks(list(x))
            ax.set_xticklabels(ids, rotation=45, ha="right", fontsize=7)
        fig.suptitle("subjective metrics")
        fig.tight_layout()
        subjective_path = out / "subjective_metrics.png"
        fig.savefig(subjective_path, dpi=110)
        plt.close(fig)
        written.append(subjective_path)
    return written
