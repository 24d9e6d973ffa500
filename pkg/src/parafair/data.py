"""Core data model: rating datasets, splits, training configuration, seeded RNG.

Every random decision in the package flows through :func:`seeded_rng` /
:func:`child_seed`, so identical seeds reproduce bit-identical results
across runs and machines.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Iterator, NamedTuple

import numpy as np

from .exceptions import InvalidInputError, InvalidSplitError

if TYPE_CHECKING:  # pragma: no cover
    from .ingest import ParseStats


class Interaction(NamedTuple):
    """One observed rating: dense user index, dense item index, raw rating."""

    user_id: int
    item_id: int
    rating: float


@dataclass(frozen=True)
class IdMaps:
    """Original user/item identifiers mapped to dense 0-based indices."""

    users: dict
    items: dict


def _as_readonly(a: np.ndarray, dtype) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=dtype)
    if out is a:
        out = out.copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Dataset:
    """A sparse set of (user, item, rating) triplets plus the rating scale.

    Interactions are stored column-wise as read-only numpy arrays, so
    instances are immutable after construction and safe for concurrent
    reads. The ``interactions`` property materializes them as
    :class:`Interaction` tuples when convenient (small datasets, tests).
    """

    user_ids: np.ndarray
    item_ids: np.ndarray
    ratings: np.ndarray
    n_users: int
    n_items: int
    r_min: float
    r_max: float
    id_maps: IdMaps
    source_stats: "ParseStats | None" = None

    def __post_init__(self):
        object.__setattr__(self, "user_ids", _as_readonly(self.user_ids, np.int64))
        object.__setattr__(self, "item_ids", _as_readonly(self.item_ids, np.int64))
        object.__setattr__(self, "ratings", _as_readonly(self.ratings, np.float64))
        n = len(self.user_ids)
        if len(self.item_ids) != n or len(self.ratings) != n:
            raise InvalidInputError("user_ids, item_ids and ratings must have equal length")
        if not (math.isfinite(self.r_min) and math.isfinite(self.r_max)):
            raise InvalidInputError("rating bounds must be finite")
        if not (self.r_max > 0 and self.r_max >= self.r_min >= 0):
            raise InvalidInputError(
                f"rating bounds must satisfy r_max > 0 and r_max >= r_min >= 0, "
                f"got [{self.r_min}, {self.r_max}]"
            )
        if n:
            if self.user_ids.min() < 0 or self.user_ids.max() >= self.n_users:
                raise InvalidInputError("user index out of range")
            if self.item_ids.min() < 0 or self.item_ids.max() >= self.n_items:
                raise InvalidInputError("item index out of range")
            if not np.isfinite(self.ratings).all():
                raise InvalidInputError("ratings must be finite")
            if self.ratings.min() < self.r_min or self.ratings.max() > self.r_max:
                raise InvalidInputError("ratings fall outside [r_min, r_max]")
            keys = self.user_ids * np.int64(self.n_items) + self.item_ids
            if len(np.unique(keys)) != n:
                raise InvalidInputError("duplicate (user, item) pairs in dataset")

    def __len__(self) -> int:
        return len(self.ratings)

    def __iter__(self) -> Iterator[Interaction]:
        for u, i, r in zip(self.user_ids, self.item_ids, self.ratings):
            yield Interaction(int(u), int(i), float(r))

    @property
    def interactions(self) -> list[Interaction]:
        return list(self)

    @classmethod
    def from_records(
        cls,
        records: Iterable[tuple[object, object, float]],
        r_min: float | None = None,
        r_max: float | None = None,
        source_stats: "ParseStats | None" = None,
    ) -> "Dataset":
        """Build a dataset from (original user id, original item id, rating) records.

        Original ids are re-indexed densely in order of first appearance.
        A repeated (user, item) pair keeps its first position in the
        interaction order but takes the rating of the last occurrence;
        the duplicate count is recorded on ``source_stats`` when given.
        Rating bounds default to the observed min/max.
        """
        user_map: dict = {}
        item_map: dict = {}
        by_pair: dict[tuple[int, int], float] = {}
        duplicates = 0
        for orig_u, orig_i, rating in records:
            u = user_map.setdefault(orig_u, len(user_map))
            i = item_map.setdefault(orig_i, len(item_map))
            if (u, i) in by_pair:
                duplicates += 1
            by_pair[(u, i)] = float(rating)
        if not by_pair:
            raise InvalidInputError("no records supplied")
        if source_stats is not None and duplicates:
            source_stats.duplicates += duplicates
        users = np.fromiter((u for u, _ in by_pair), dtype=np.int64, count=len(by_pair))
        items = np.fromiter((i for _, i in by_pair), dtype=np.int64, count=len(by_pair))
        ratings = np.fromiter(by_pair.values(), dtype=np.float64, count=len(by_pair))
        if r_min is None:
            r_min = float(ratings.min())
        if r_max is None:
            r_max = float(ratings.max())
        return cls(
            user_ids=users,
            item_ids=items,
            ratings=ratings,
            n_users=len(user_map),
            n_items=len(item_map),
            r_min=float(r_min),
            r_max=float(r_max),
            id_maps=IdMaps(users=user_map, items=item_map),
            source_stats=source_stats,
        )

    def _subset(self, mask: np.ndarray) -> "Dataset":
        """A dataset with the masked interactions, sharing all scale metadata."""
        return Dataset(
            user_ids=self.user_ids[mask],
            item_ids=self.item_ids[mask],
            ratings=self.ratings[mask],
            n_users=self.n_users,
            n_items=self.n_items,
            r_min=self.r_min,
            r_max=self.r_max,
            id_maps=self.id_maps,
        )


@dataclass(frozen=True)
class SplitSpec:
    """Deterministic train/test split parameters."""

    test_fraction: float
    seed: int = 42

    def __post_init__(self):
        if not (0.0 < self.test_fraction < 1.0):
            raise InvalidInputError(
                f"test_fraction must be in (0, 1), got {self.test_fraction}"
            )
        if int(self.seed) < 0:
            raise InvalidInputError("seed must be a non-negative integer")


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters shared by every trainable model.

    ``regularization`` is an L2 weight-decay extension; the default 0
    reproduces the plain squared-error objectives. ``grad_guard_eps``
    floors every norm/denominator so cosine and surface gradients stay
    finite at degenerate points.
    """

    latent_dim: int = 10
    learning_rate: float = 0.01
    epochs: int = 30
    seed: int = 42
    init_scale: float = 0.1
    grad_guard_eps: float = 1e-12
    clamp_predictions: bool = True
    regularization: float = 0.0

    def __post_init__(self):
        if self.latent_dim < 1:
            raise InvalidInputError("latent_dim must be >= 1")
        if not (math.isfinite(self.learning_rate) and self.learning_rate > 0):
            raise InvalidInputError("learning_rate must be a positive finite number")
        if self.epochs < 1:
            raise InvalidInputError("epochs must be >= 1")
        if int(self.seed) < 0:
            raise InvalidInputError("seed must be a non-negative integer")
        if not (math.isfinite(self.init_scale) and self.init_scale > 0):
            raise InvalidInputError("init_scale must be a positive finite number")
        if not (math.isfinite(self.grad_guard_eps) and self.grad_guard_eps > 0):
            raise InvalidInputError("grad_guard_eps must be a positive finite number")
        if not (math.isfinite(self.regularization) and self.regularization >= 0):
            raise InvalidInputError("regularization must be a non-negative finite number")


def normalize_rating(r: float, dataset: Dataset) -> float:
    """Raw rating divided by the dataset's maximum; in [0, 1] for in-range ratings."""
    if not math.isfinite(r):
        raise InvalidInputError(f"rating must be finite, got {r}")
    if dataset.r_max <= 0:
        raise InvalidInputError(f"r_max must be positive, got {dataset.r_max}")
    return float(r) / dataset.r_max


def train_test_split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Disjoint train/test partition, uniform over interactions.

    The test half receives round(test_fraction * n) interactions (banker's
    rounding); both halves keep the parent's user/item universe and rating
    bounds, and the original interaction order within each half.
    """
    n = len(dataset)
    if n == 0:
        raise InvalidInputError("cannot split an empty dataset")
    n_test = round(spec.test_fraction * n)
    if n_test == 0 or n_test == n:
        raise InvalidSplitError(
            f"split of {n} interactions at test_fraction={spec.test_fraction} "
            f"leaves an empty half ({n_test} test rows)"
        )
    rng = seeded_rng(spec.seed)
    perm = rng.permutation(n)
    test_mask = np.zeros(n, dtype=bool)
    test_mask[perm[:n_test]] = True
    return dataset._subset(~test_mask), dataset._subset(test_mask)


def seeded_rng(seed: int) -> np.random.Generator:
    """A PCG64 generator; identical seeds give identical streams on any platform."""
    if int(seed) < 0:
        raise InvalidInputError("seed must be a non-negative integer")
    return np.random.Generator(np.random.PCG64(int(seed)))


_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    z = (x + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def child_seed(seed: int, *tags: int | str) -> int:
    """Derive an independent child seed from a parent seed and a tag path.

    Uses a splitmix64 chain; string tags are hashed with blake2b so the
    derivation is stable across platforms and Python processes. Parallel
    work must draw child seeds rather than share one generator.
    """
    s = _splitmix64(int(seed) & _MASK64)
    for tag in tags:
        if isinstance(tag, str):
            t = int.from_bytes(hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest(), "big")
        else:
            t = int(tag) & _MASK64
        s = _splitmix64(s ^ t)
    return s
