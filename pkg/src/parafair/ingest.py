"""Rating-file parsers and the synthetic rank-frequency dataset generator."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import Dataset, IdMaps, seeded_rng
from .exceptions import EmptyDatasetError, InvalidInputError

logger = logging.getLogger(__name__)

FORMAT_TAGS = ("movielens-1m", "comoda-csv", "generic-csv")

_WARN_LIMIT = 5  # log at most this many malformed lines per file


@dataclass(frozen=True)
class SourceFormat:
    """Declared layout of a ratings file.

    ``field_positions`` are the 0-based column indices of (user, item,
    rating) after splitting on ``separator``. Header lines are declared,
    never sniffed, so parsing the same file is always bit-reproducible.
    """

    tag: str
    separator: str
    field_positions: tuple[int, int, int] = (0, 1, 2)
    header_lines: int = 0

    def __post_init__(self):
        if self.tag not in FORMAT_TAGS:
            raise InvalidInputError(f"unknown format tag {self.tag!r}; expected one of {FORMAT_TAGS}")
        if not self.separator:
            raise InvalidInputError("separator must be non-empty")
        if len(set(self.field_positions)) != 3 or min(self.field_positions) < 0:
            raise InvalidInputError("field_positions must be three distinct non-negative indices")
        if self.header_lines < 0:
            raise InvalidInputError("header_lines must be >= 0")

    @classmethod
    def movielens_1m(cls) -> "SourceFormat":
        """MovieLens-1M ratings.dat: ``user::item::rating::timestamp``, no header."""
        return cls(tag="movielens-1m", separator="::", field_positions=(0, 1, 2), header_lines=0)

    @classmethod
    def comoda_csv(cls) -> "SourceFormat":
        """CoMoDa export: comma-separated, one header row, user/item/rating first.

        Context columns beyond the first three are ignored.
        """
        return cls(tag="comoda-csv", separator=",", field_positions=(0, 1, 2), header_lines=1)

    @classmethod
    def generic_csv(
        cls,
        separator: str = ",",
        field_positions: tuple[int, int, int] = (0, 1, 2),
        header_lines: int = 0,
    ) -> "SourceFormat":
        return cls(
            tag="generic-csv",
            separator=separator,
            field_positions=field_positions,
            header_lines=header_lines,
        )


@dataclass
class ParseStats:
    """Line accounting for one parsed ratings file: valid + malformed = data lines."""

    path: str = ""
    lines: int = 0
    valid: int = 0
    malformed: int = 0
    duplicates: int = 0
    header_lines: int = 0


def parse_ratings_file(
    path: str | Path,
    fmt: SourceFormat,
    r_min: float | None = None,
    r_max: float | None = None,
) -> Dataset:
    """Parse a ratings file into a :class:`Dataset`.

    Malformed lines are counted on the returned dataset's ``source_stats``
    and logged (first few), never silently dropped. Duplicate (user, item)
    pairs keep the last rating seen. Original ids are kept as their raw
    string tokens in ``id_maps``.
    """
    path = Path(path)
    stats = ParseStats(path=str(path), header_lines=fmt.header_lines)
    need = max(fmt.field_positions) + 1
    u_pos, i_pos, r_pos = fmt.field_positions
    records: list[tuple[str, str, float]] = []
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            if lineno <= fmt.header_lines:
                continue
            stats.lines += 1
            parts = line.rstrip("\r\n").split(fmt.separator)
            if len(parts) < need:
                stats.malformed += 1
                if stats.malformed <= _WARN_LIMIT:
                    logger.warning("%s:%d: expected >= %d fields, got %d", path, lineno, need, len(parts))
                continue
            user_tok = parts[u_pos].strip()
            item_tok = parts[i_pos].strip()
            try:
                rating = float(parts[r_pos])
            except ValueError:
                rating = float("nan")
            if not user_tok or not item_tok or not np.isfinite(rating):
                stats.malformed += 1
                if stats.malformed <= _WARN_LIMIT:
                    logger.warning("%s:%d: unparseable record %r", path, lineno, line.rstrip("\n"))
                continue
            records.append((user_tok, item_tok, rating))
            stats.valid += 1
    if not records:
        raise EmptyDatasetError(f"{path}: no valid rating records")
    dataset = Dataset.from_records(records, r_min=r_min, r_max=r_max, source_stats=stats)
    if stats.malformed:
        logger.warning("%s: %d malformed line(s) skipped", path, stats.malformed)
    if stats.duplicates:
        logger.warning("%s: %d duplicate (user, item) pair(s), kept last rating", path, stats.duplicates)
    return dataset


def generate_zipf_dataset(
    n_users: int,
    n_items: int,
    n_ratings: int,
    rating_levels: list[float],
    seed: int,
) -> Dataset:
    """Synthesize ratings whose level frequencies are proportional to the levels.

    Level ``l`` is drawn with probability ``l / sum(levels)`` (the shared
    r_max cancels out of the proportionality), cells are drawn uniformly
    without replacement, and the rating scale is [min(levels), max(levels)].
    Dense ids equal the original ids.
    """
    levels = np.asarray(sorted(float(v) for v in rating_levels), dtype=np.float64)
    if levels.size == 0:
        raise InvalidInputError("rating_levels must be non-empty")
    if levels.min() <= 0 or not np.isfinite(levels).all():
        raise InvalidInputError("rating_levels must be positive finite numbers")
    if len(np.unique(levels)) != levels.size:
        raise InvalidInputError("rating_levels must be distinct")
    if n_users < 1 or n_items < 1 or n_ratings < 1:
        raise InvalidInputError("n_users, n_items and n_ratings must be >= 1")
    n_cells = n_users * n_items
    if n_ratings > n_cells:
        raise InvalidInputError(
            f"cannot place {n_ratings} ratings in a {n_users}x{n_items} grid"
        )
    rng = seeded_rng(seed)
    cells = _sample_cells(rng, n_cells, n_ratings)
    weights = levels / levels.sum()
    ratings = rng.choice(levels, size=n_ratings, p=weights)
    users = cells // n_items
    items = cells % n_items
    id_maps = IdMaps(
        users={i: i for i in range(n_users)},
        items={i: i for i in range(n_items)},
    )
    return Dataset(
        user_ids=users,
        item_ids=items,
        ratings=ratings,
        n_users=n_users,
        n_items=n_items,
        r_min=float(levels.min()),
        r_max=float(levels.max()),
        id_maps=id_maps,
    )


def _sample_cells(rng: np.random.Generator, n_cells: int, n_ratings: int) -> np.ndarray:
    """Uniform sample of distinct cell indices, O(n_ratings) memory when sparse."""
    if n_ratings * 2 >= n_cells:
        return rng.permutation(n_cells)[:n_ratings].astype(np.int64)
    seen: set[int] = set()
    out: list[int] = []
    while len(out) < n_ratings:
        draw = rng.integers(0, n_cells, size=int(1.2 * (n_ratings - len(out))) + 16)
        for c in draw:
            c = int(c)
            if c not in seen:
                seen.add(c)
                out.append(c)
                if len(out) == n_ratings:
                    break
    return np.asarray(out, dtype=np.int64)
