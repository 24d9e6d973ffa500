"""Per-epoch metric traces, delay embeddings, and plot-ready CSV export."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .exceptions import InvalidInputError

CURVES_HEADER = "epoch,model,mae,dme"
TAKENS_HEADER = "model,t,x,y"


@dataclass(frozen=True)
class EpochTrace:
    """MAE and Matthew-effect curves for one model run, one value per epoch.

    Entries are floats; NaN is the explicit missing-value marker (used when
    a model was trained without an evaluation split).
    """

    model_tag: str
    epochs: int
    mae_curve: tuple[float, ...]
    dme_curve: tuple[float, ...]

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidInputError("epochs must be >= 1")
        if len(self.mae_curve) != self.epochs or len(self.dme_curve) != self.epochs:
            raise InvalidInputError(
                f"curves for {self.model_tag!r} must have exactly {self.epochs} entries"
            )


def takens_embed(series: Sequence[float], delay: int = 1) -> list[tuple[float, float]]:
    """Delay-coordinate embedding: points (series[t], series[t + delay]).

    Output length is ``len(series) - delay``; the series must be longer
    than the delay.
    """
    if delay < 1:
        raise InvalidInputError(f"delay must be >= 1, got {delay}")
    n = len(series)
    if n <= delay:
        raise InvalidInputError(f"series of length {n} is too short for delay {delay}")
    return [(float(series[t]), float(series[t + delay])) for t in range(n - delay)]


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".9g")


@dataclass(frozen=True)
class ExportSummary:
    """Paths and data-row counts of one curve export."""

    curves_path: Path
    takens_paths: dict[str, Path]
    curves_rows: int
    takens_rows: dict[str, int]


def export_curves(
    traces: Sequence[EpochTrace],
    destination: str | Path,
    delay: int = 1,
) -> ExportSummary:
    """Write the per-epoch curves and their delay embeddings as CSV files.

    ``destination`` is a directory (created if missing) receiving
    ``curves.csv`` (header ``epoch,model,mae,dme``, epochs 1-based, traces
    in input order) plus one ``<metric>_takens.csv`` per metric (header
    ``model,t,x,y``). Floats are printed with 9 significant digits, NaN as
    ``nan``; identical inputs produce byte-identical files. Curves shorter
    than the delay yield header-only embedding files.
    """
    if not traces:
        raise InvalidInputError("no traces to export")
    epochs = traces[0].epochs
    for t in traces:
        if t.epochs != epochs:
            raise InvalidInputError(
                f"all traces must share one epoch count; {t.model_tag!r} has "
                f"{t.epochs}, expected {epochs}"
            )
    dest = Path(destination)
    dest.mkdir(parents=True, exist_ok=True)

    curves_path = dest / "curves.csv"
    lines = [CURVES_HEADER]
    for trace in traces:
        for e in range(epochs):
            lines.append(
                f"{e + 1},{trace.model_tag},{_fmt(trace.mae_curve[e])},{_fmt(trace.dme_curve[e])}"
            )
    curves_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    curves_rows = len(lines) - 1

    takens_paths, takens_rows = export_takens(traces, dest, delay)
    return ExportSummary(
        curves_path=curves_path,
        takens_paths=takens_paths,
        curves_rows=curves_rows,
        takens_rows=takens_rows,
    )


def export_takens(
    traces: Sequence[EpochTrace],
    destination: str | Path,
    delay: int = 1,
) -> tuple[dict[str, Path], dict[str, int]]:
    """Write ``<metric>_takens.csv`` files for the given traces.

    Returns per-metric paths and data-row counts. Curves no longer than
    the delay produce header-only files.
    """
    if not traces:
        raise InvalidInputError("no traces to export")
    dest = Path(destination)
    dest.mkdir(parents=True, exist_ok=True)
    epochs = traces[0].epochs
    takens_paths: dict[str, Path] = {}
    takens_rows: dict[str, int] = {}
    for metric in ("mae", "dme"):
        path = dest / f"{metric}_takens.csv"
        rows = [TAKENS_HEADER]
        if epochs > delay:
            for trace in traces:
                curve = getattr(trace, f"{metric}_curve")
                for t, (x, y) in enumerate(takens_embed(curve, delay)):
                    rows.append(f"{trace.model_tag},{t},{_fmt(x)},{_fmt(y)}")
        path.write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")
        takens_paths[metric] = path
        takens_rows[metric] = len(rows) - 1
    return takens_paths, takens_rows


def read_curves_csv(path: str | Path) -> list[EpochTrace]:
    """Parse a file written by :func:`export_curves` back into traces."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or lines[0] != CURVES_HEADER:
        raise InvalidInputError(f"{path}: not a curves CSV (expected header {CURVES_HEADER!r})")
    order: list[str] = []
    maes: dict[str, list[float]] = {}
    dmes: dict[str, list[float]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 4:
            raise InvalidInputError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
        _, model, mae_s, dme_s = parts
        if model not in maes:
            order.append(model)
            maes[model] = []
            dmes[model] = []
        try:
            maes[model].append(float(mae_s))
            dmes[model].append(float(dme_s))
        except ValueError as err:
            raise InvalidInputError(f"{path}:{lineno}: {err}") from err
    if not order:
        raise InvalidInputError(f"{path}: no data rows")
    epochs = len(maes[order[0]])
    return [
        EpochTrace(model, epochs, tuple(maes[model]), tuple(dmes[model]))
        for model in order
    ]
