"""Glue between models and metrics: test-split evaluation, per epoch and final."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, child_seed, seeded_rng
from .exceptions import InvalidInputError
from .metrics import (
    FrequencyTable,
    MetricReport,
    UserItemIndex,
    degree_of_matthew_effect,
    fit_powerlaw_slope,
    mae,
    recommendation_frequencies,
)
from .models import EpochEval, TrainedModel, predict_pairs


@dataclass(frozen=True)
class EvalContext:
    """Everything needed to score a model against a held-out split."""

    train: Dataset
    test: Dataset
    top_n: int
    users: np.ndarray
    hist: FrequencyTable
    exclusions: UserItemIndex


def make_eval_context(
    train: Dataset,
    test: Dataset,
    top_n: int = 10,
    user_cap: int = 0,
    seed: int = 42,
) -> EvalContext:
    """Build the evaluation context for a split.

    Recommendation lists are drawn for the distinct test users (optionally
    a seeded subsample of ``user_cap`` of them); historical frequencies are
    the training split's item counts.
    """
    if len(test) == 0:
        raise InvalidInputError("test split is empty")
    users = np.unique(test.user_ids)
    if user_cap and len(users) > user_cap:
        rng = seeded_rng(child_seed(seed, "eval-users"))
        users = np.sort(rng.choice(users, size=user_cap, replace=False))
    return EvalContext(
        train=train,
        test=test,
        top_n=top_n,
        users=users,
        hist=FrequencyTable.from_dataset(train),
        exclusions=UserItemIndex(train),
    )


def test_mae(model: TrainedModel, ctx: EvalContext) -> float:
    preds = predict_pairs(model, ctx.test.user_ids, ctx.test.item_ids)
    return mae(preds, ctx.test.ratings)


def test_dme(model: TrainedModel, ctx: EvalContext) -> tuple[float, FrequencyTable]:
    rec = recommendation_frequencies(
        model, ctx.train, ctx.users, ctx.top_n, exclusions=ctx.exclusions
    )
    return degree_of_matthew_effect(rec, ctx.hist), rec


def epoch_evaluator(ctx: EvalContext) -> EpochEval:
    """Per-epoch callback computing (test MAE, DME) for an in-training model."""

    def _eval(model: TrainedModel) -> tuple[float, float]:
        dme, _ = test_dme(model, ctx)
        return test_mae(model, ctx), dme

    return _eval


def final_report(model: TrainedModel, ctx: EvalContext) -> MetricReport:
    """Final metrics for a trained model, including the fitted slopes."""
    model_mae = test_mae(model, ctx)
    rec = recommendation_frequencies(
        model, ctx.train, ctx.users, ctx.top_n, exclusions=ctx.exclusions
    )
    notes = list(rec.notes)
    slope_hist = fit_powerlaw_slope(ctx.hist)
    rec_positive = sum(1 for c in rec.counts.values() if c > 0)
    if rec_positive == 1:
        slope_rec = math.nan
        dme = math.inf
        notes.append("recommendations concentrated on a single item")
    else:
        slope_rec = fit_powerlaw_slope(rec)
        dme = slope_hist - slope_rec
    return MetricReport(
        model=model.kind,
        mae=model_mae,
        dme=dme,
        slope_rec=slope_rec,
        slope_hist=slope_hist,
        top_n=ctx.top_n,
        notes=tuple(notes),
    )
