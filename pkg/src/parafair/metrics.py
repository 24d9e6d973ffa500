"""Accuracy and fairness metrics: MAE, rank/frequency slope fits, and the
degree-of-Matthew-effect comparison between recommended and historical
item frequencies."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import Dataset
from .exceptions import DegenerateDistributionError, InvalidInputError
from .models import TrainedModel, score_matrix


@dataclass(frozen=True)
class FrequencyTable:
    """Item-index -> count mapping with its total.

    Counting constructors produce integer counts; :func:`fit_powerlaw_slope`
    also accepts positive real-valued counts, which synthetic fixtures use.
    """

    counts: Mapping[int, float]
    total: float
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        for item, c in self.counts.items():
            if c < 0 or not math.isfinite(c):
                raise InvalidInputError(f"count for item {item} must be finite and >= 0")
        expect = float(sum(self.counts.values()))
        if not math.isclose(expect, self.total, rel_tol=1e-12, abs_tol=1e-9):
            raise InvalidInputError(f"total {self.total} != sum of counts {expect}")

    @classmethod
    def from_counts(cls, counts: Mapping[int, float], notes: tuple[str, ...] = ()) -> "FrequencyTable":
        counts = dict(counts)
        return cls(counts=counts, total=float(sum(counts.values())), notes=notes)

    @classmethod
    def from_dataset(cls, dataset: Dataset) -> "FrequencyTable":
        """Historical item frequencies: interaction counts per item index."""
        bc = np.bincount(dataset.item_ids, minlength=dataset.n_items)
        return cls.from_counts({int(i): int(c) for i, c in enumerate(bc) if c > 0})


@dataclass(frozen=True)
class MetricReport:
    """Final per-model evaluation: accuracy, fairness, and the fitted slopes."""

    model: str
    mae: float
    dme: float
    slope_rec: float
    slope_hist: float
    top_n: int
    notes: tuple[str, ...] = ()
    mae_rank: int | None = None
    dme_rank: int | None = None


def mae(predictions: Sequence[float], actuals: Sequence[float]) -> float:
    """Mean absolute error on the raw rating scale."""
    p = np.asarray(predictions, dtype=np.float64)
    a = np.asarray(actuals, dtype=np.float64)
    if p.ndim != 1 or p.shape != a.shape:
        raise InvalidInputError("predictions and actuals must be 1-d and the same length")
    if p.size == 0:
        raise InvalidInputError("mae of empty sequences is undefined")
    if not (np.isfinite(p).all() and np.isfinite(a).all()):
        raise InvalidInputError("mae requires finite inputs")
    return float(np.mean(np.abs(p - a)))


def fit_powerlaw_slope(freq: FrequencyTable | Mapping[int, float]) -> float:
    """Least-squares slope of ln(count) against ln(rank), ranks 1-based.

    Positive counts are sorted descending; ties keep ascending item index.
    Needs at least two positive counts (all-equal counts fit slope 0).
    """
    counts = freq.counts if isinstance(freq, FrequencyTable) else freq
    positive = [(item, float(c)) for item, c in counts.items() if c > 0]
    if len(positive) < 2:
        raise DegenerateDistributionError(
            f"need >= 2 positive counts to fit a slope, got {len(positive)}"
        )
    positive.sort(key=lambda pair: (-pair[1], pair[0]))
    y = np.log(np.array([c for _, c in positive]))
    x = np.log(np.arange(1, len(positive) + 1, dtype=np.float64))
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


def degree_of_matthew_effect(rec_freq: FrequencyTable, hist_freq: FrequencyTable) -> float:
    """Historical slope minus recommendation slope.

    Positive values mean the recommendation frequencies decay more steeply
    than historical consumption (more rich-get-richer concentration);
    0 is parity and lower is fairer. A recommendation table with a single
    positive count is infinitely concentrated: returns +inf.
    """
    rec_positive = sum(1 for c in rec_freq.counts.values() if c > 0)
    if rec_positive == 1:
        return math.inf
    return fit_powerlaw_slope(hist_freq) - fit_powerlaw_slope(rec_freq)


class UserItemIndex:
    """Per-user item lists of a dataset, precomputed for repeated exclusion."""

    def __init__(self, dataset: Dataset):
        order = np.argsort(dataset.user_ids, kind="stable")
        self._items = dataset.item_ids[order]
        self._starts = np.searchsorted(
            dataset.user_ids[order], np.arange(dataset.n_users + 1)
        )

    def items_for(self, user: int) -> np.ndarray:
        return self._items[self._starts[user]:self._starts[user + 1]]


def recommendation_frequencies(
    model: TrainedModel,
    dataset: Dataset,
    users: Sequence[int],
    top_n: int,
    *,
    exclusions: UserItemIndex | None = None,
    chunk: int = 1024,
) -> FrequencyTable:
    """How often each item lands in a user's top-N recommendations.

    For every user, all items are scored, the user's items in ``dataset``
    (the training split) are excluded, and the ``top_n`` highest-scored
    items are counted, ties broken by ascending item index. Ranking uses
    unclamped scores: clamping would collapse the top of the scale into
    exact ties and the ranking would degenerate to index order. A user
    with fewer than ``top_n`` scoreable items contributes all of them and
    is flagged in the notes.
    """
    if top_n < 1:
        raise InvalidInputError("top_n must be >= 1")
    users = np.asarray(users, dtype=np.int64)
    if users.size == 0:
        raise InvalidInputError("users must be non-empty")
    if exclusions is None:
        exclusions = UserItemIndex(dataset)
    n_items = model.n_items
    counts = np.zeros(n_items, dtype=np.int64)
    short_users = 0
    empty_users = 0
    for lo in range(0, len(users), chunk):
        batch = users[lo:lo + chunk]
        scores = score_matrix(model, batch, clamp=False)
        allowed = np.full(len(batch), n_items, dtype=np.int64)
        for row, u in enumerate(batch):
            excl = exclusions.items_for(int(u))
            if excl.size:
                scores[row, excl] = -np.inf
                allowed[row] -= excl.size
        kth = None
        if n_items > top_n:
            kth = np.partition(scores, n_items - top_n, axis=1)[:, n_items - top_n]
        for row in range(len(batch)):
            n_ok = int(allowed[row])
            if n_ok <= top_n:
                if n_ok == 0:
                    empty_users += 1
                    continue
                if n_ok < top_n:
                    short_users += 1
                sel = np.flatnonzero(np.isfinite(scores[row]))
            else:
                cand = np.flatnonzero(scores[row] >= kth[row])
                if len(cand) > top_n:
                    by_score = np.argsort(-scores[row][cand], kind="stable")
                    sel = cand[by_score[:top_n]]
                else:
                    sel = cand
            counts[sel] += 1
    notes = []
    if short_users:
        notes.append(f"{short_users} user(s) had fewer than top_n={top_n} scoreable items")
    if empty_users:
        notes.append(f"{empty_users} user(s) had no scoreable items")
    return FrequencyTable.from_counts(
        {int(i): int(c) for i, c in enumerate(counts) if c > 0},
        notes=tuple(notes),
    )
