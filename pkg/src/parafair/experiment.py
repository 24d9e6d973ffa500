"""Config-driven experiment runs: ingest, split, train, evaluate, export.

A run is fully determined by its config (every random choice derives from
the experiment seed), so re-running the same config produces byte-identical
summary and CSV artifacts.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import time
from pathlib import Path

from .analysis import EpochTrace, export_curves
from .config import ExperimentConfig, config_echo_lines
from .data import Dataset, SplitSpec, child_seed, train_test_split
from .evaluation import epoch_evaluator, final_report, make_eval_context
from .exceptions import ExperimentError, ParafairError
from .ingest import generate_zipf_dataset, parse_ratings_file
from .metrics import MetricReport
from .models import FIT_FUNCTIONS

logger = logging.getLogger(__name__)

SUMMARY_NAME = "summary.txt"


def load_dataset(config: ExperimentConfig) -> Dataset:
    """The configured dataset: parsed from disk or synthesized."""
    if config.dataset_path is not None:
        return parse_ratings_file(
            config.dataset_path,
            config.source_format,
            r_min=config.r_min_override,
            r_max=config.r_max_override,
        )
    spec = config.synthetic
    dataset = generate_zipf_dataset(
        spec.n_users,
        spec.n_items,
        spec.n_ratings,
        list(spec.levels),
        seed=child_seed(config.seed, "synthetic"),
    )
    if config.r_min_override is not None or config.r_max_override is not None:
        dataset = dataclasses.replace(
            dataset,
            r_min=config.r_min_override if config.r_min_override is not None else dataset.r_min,
            r_max=config.r_max_override if config.r_max_override is not None else dataset.r_max,
        )
    return dataset


def _stage(name: str):
    class _StageGuard:
        def __enter__(self):
            logger.info("stage %s ...", name)
            self.t0 = time.perf_counter()
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is None:
                logger.info("stage %s done in %.2fs", name, time.perf_counter() - self.t0)
                return False
            if isinstance(exc, ExperimentError):
                return False
            raise ExperimentError(name, exc) from exc

    return _StageGuard()


def _fmt6(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.6f}"


def format_table(reports: list[MetricReport]) -> str:
    """Aligned report table, one row per model (callers pre-sort)."""
    headers = ("model", "mae", "dme", "mae_rank", "dme_rank")
    rows = [
        (r.model, _fmt6(r.mae), _fmt6(r.dme), str(r.mae_rank), str(r.dme_rank))
        for r in reports
    ]
    widths = [
        max(len(headers[c]), *(len(row[c]) for row in rows)) if rows else len(headers[c])
        for c in range(len(headers))
    ]
    lines = []
    for row in [headers] + rows:
        cells = [row[0].ljust(widths[0])] + [
            row[c].rjust(widths[c]) for c in range(1, len(headers))
        ]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)


def _competition_ranks(values: list[float]) -> list[int]:
    return [1 + sum(1 for other in values if other < v) for v in values]


def summary_lines(config: ExperimentConfig, reports: list[MetricReport]) -> list[str]:
    lines = config_echo_lines(config)
    for r in reports:
        prefix = f"metric.{r.model}"
        lines.append(f"{prefix}.mae = {repr(r.mae)}")
        lines.append(f"{prefix}.dme = {repr(r.dme)}")
        lines.append(f"{prefix}.slope_rec = {repr(r.slope_rec)}")
        lines.append(f"{prefix}.slope_hist = {repr(r.slope_hist)}")
        lines.append(f"{prefix}.top_n = {r.top_n}")
        lines.append(f"{prefix}.mae_rank = {r.mae_rank}")
        lines.append(f"{prefix}.dme_rank = {r.dme_rank}")
        if r.notes:
            lines.append(f"{prefix}.notes = {'; '.join(r.notes)}")
    return lines


def run_experiment(config: ExperimentConfig) -> list[MetricReport]:
    """Train every configured model and emit the report table and artifacts.

    Writes ``curves.csv``, the two Takens CSVs, ``summary.txt`` and (unless
    disabled) the rendered figures into the output directory; prints the
    final table, sorted fairest first, to stdout. Partially written
    artifacts are removed if a stage fails.
    """
    with _stage("ingest"):
        dataset = load_dataset(config)
        logger.info(
            "dataset: %d interactions, %d users, %d items, scale [%g, %g]",
            len(dataset), dataset.n_users, dataset.n_items, dataset.r_min, dataset.r_max,
        )
    with _stage("split"):
        split = SplitSpec(config.test_fraction, seed=child_seed(config.seed, "split"))
        train, test = train_test_split(dataset, split)
        ctx = make_eval_context(
            train, test,
            top_n=config.top_n,
            user_cap=config.eval_user_cap,
            seed=child_seed(config.seed, "eval"),
        )
        logger.info("split: %d train / %d test rows, %d eval users",
                    len(train), len(test), len(ctx.users))

    traces: list[EpochTrace] = []
    reports: list[MetricReport] = []
    evaluator = epoch_evaluator(ctx)
    for tag in config.models:
        with _stage(f"train:{tag}"):
            model = FIT_FUNCTIONS[tag](train, config.train_configs[tag], epoch_eval=evaluator)
            traces.append(model.trace)
        with _stage(f"evaluate:{tag}"):
            report = final_report(model, ctx)
            reports.append(report)
            logger.info("%s: mae=%.6f dme=%s", tag, report.mae, _fmt6(report.dme))

    mae_ranks = _competition_ranks([r.mae for r in reports])
    dme_ranks = _competition_ranks([r.dme for r in reports])
    reports = [
        dataclasses.replace(r, mae_rank=mr, dme_rank=dr)
        for r, mr, dr in zip(reports, mae_ranks, dme_ranks)
    ]
    reports.sort(key=lambda r: r.dme)

    written: list[Path] = []
    try:
        with _stage("write-artifacts"):
            out = config.output
            out.mkdir(parents=True, exist_ok=True)
            exported = export_curves(traces, out, delay=config.takens_delay)
            written.append(exported.curves_path)
            written.extend(exported.takens_paths.values())
            if config.figures:
                from . import plotting

                written.extend(plotting.save_curve_figures(traces, out))
                written.extend(plotting.save_takens_figures(traces, out, config.takens_delay))
            summary_path = out / SUMMARY_NAME
            summary_path.write_text(
                "\n".join(summary_lines(config, reports)) + "\n",
                encoding="utf-8", newline="\n",
            )
            written.append(summary_path)
    except ParafairError:
        for path in written:
            path.unlink(missing_ok=True)
        raise

    print(format_table(reports))
    return reports
