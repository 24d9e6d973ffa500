import numpy as np
import pytest

from parafair.data import Dataset


@pytest.fixture
def tiny_dataset() -> Dataset:
    """10 interactions over 4 users x 5 items on a [1, 5] scale."""
    records = [
        (0, 0, 5.0), (0, 1, 3.0), (0, 2, 4.0),
        (1, 0, 4.0), (1, 3, 2.0),
        (2, 1, 5.0), (2, 2, 1.0), (2, 4, 4.0),
        (3, 3, 5.0), (3, 4, 3.0),
    ]
    return Dataset.from_records(records, r_min=1.0, r_max=5.0)


def single_cell_dataset(rating: float, r_min: float | None = None, r_max: float | None = None) -> Dataset:
    return Dataset.from_records([(0, 0, rating)], r_min=r_min, r_max=r_max)


def dataset_equal(a: Dataset, b: Dataset) -> bool:
    return (
        np.array_equal(a.user_ids, b.user_ids)
        and np.array_equal(a.item_ids, b.item_ids)
        and np.array_equal(a.ratings, b.ratings)
        and a.n_users == b.n_users
        and a.n_items == b.n_items
        and a.id_maps == b.id_maps
    )
