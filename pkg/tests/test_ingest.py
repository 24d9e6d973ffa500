import numpy as np
import pytest
from scipy import stats

from parafair.exceptions import EmptyDatasetError, InvalidInputError
from parafair.ingest import SourceFormat, generate_zipf_dataset, parse_ratings_file

from conftest import dataset_equal


class TestSourceFormat:
    def test_presets(self):
        ml = SourceFormat.movielens_1m()
        assert ml.separator == "::" and ml.header_lines == 0
        co = SourceFormat.comoda_csv()
        assert co.separator == "," and co.header_lines == 1

    def test_bad_formats_rejected(self):
        with pytest.raises(InvalidInputError):
            SourceFormat(tag="generic-csv", separator="")
        with pytest.raises(InvalidInputError):
            SourceFormat(tag="generic-csv", separator=",", field_positions=(0, 0, 1))
        with pytest.raises(InvalidInputError):
            SourceFormat(tag="whatever", separator=",")


class TestParseRatingsFile:
    def test_movielens_line(self, tmp_path):
        path = tmp_path / "ratings.dat"
        path.write_text("1::1193::5::978300760\n")
        ds = parse_ratings_file(path, SourceFormat.movielens_1m())
        assert len(ds) == 1
        assert ds.interactions[0].rating == 5.0
        assert ds.id_maps.users == {"1": 0}
        assert ds.id_maps.items == {"1193": 0}

    def test_generic_csv_line(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("7,3,4.0\n")
        ds = parse_ratings_file(path, SourceFormat.generic_csv())
        assert ds.interactions[0] == (0, 0, 4.0)
        assert ds.id_maps.users == {"7": 0}
        assert ds.id_maps.items == {"3": 0}

    def test_malformed_lines_counted(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("1,1,5\n2,1\nbroken\n2,2,4\n3,1,nan\n1,2,3\n")
        ds = parse_ratings_file(path, SourceFormat.generic_csv())
        assert len(ds) == 3
        assert ds.source_stats.malformed == 3
        assert ds.source_stats.valid == 3
        # lossless accounting: valid + malformed = data lines
        assert ds.source_stats.valid + ds.source_stats.malformed == ds.source_stats.lines

    def test_duplicates_keep_last(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("1,1,5\n1,1,2\n2,1,4\n")
        ds = parse_ratings_file(path, SourceFormat.generic_csv())
        assert len(ds) == 2
        assert ds.interactions[0].rating == 2.0
        assert ds.source_stats.duplicates == 1

    def test_declared_header_skipped(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("userID,itemID,rating,context\n1,1,4,home\n2,1,5,car\n")
        ds = parse_ratings_file(path, SourceFormat.comoda_csv())
        assert len(ds) == 2
        assert ds.source_stats.lines == 2
        assert ds.source_stats.header_lines == 1

    def test_reparse_identical(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("5,9,4\n5,2,3\n8,9,1\n")
        a = parse_ratings_file(path, SourceFormat.generic_csv())
        b = parse_ratings_file(path, SourceFormat.generic_csv())
        assert dataset_equal(a, b)

    def test_column_positions(self, tmp_path):
        path = tmp_path / "r.tsv"
        path.write_text("4.5\t7\t3\n")
        fmt = SourceFormat.generic_csv(separator="\t", field_positions=(1, 2, 0))
        ds = parse_ratings_file(path, fmt)
        assert ds.interactions[0].rating == 4.5
        assert ds.id_maps.users == {"7": 0}

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("not,a::rating\n")
        with pytest.raises(EmptyDatasetError):
            parse_ratings_file(path, SourceFormat.movielens_1m())

    def test_missing_file_raises_io_error(self, tmp_path):
        with pytest.raises(OSError):
            parse_ratings_file(tmp_path / "absent.dat", SourceFormat.movielens_1m())

    def test_rating_bound_overrides(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("1,1,3\n2,1,4\n")
        ds = parse_ratings_file(path, SourceFormat.generic_csv(), r_min=1.0, r_max=5.0)
        assert ds.r_min == 1.0 and ds.r_max == 5.0


class TestGenerateZipfDataset:
    def test_single_level(self):
        ds = generate_zipf_dataset(5, 5, 10, [5.0], seed=1)
        assert np.all(ds.ratings == 5.0)
        assert ds.r_min == 5.0 and ds.r_max == 5.0

    def test_level_probability_monte_carlo(self):
        # exact weights are level/sum(levels): P(5) = 5/15 = 1/3
        ds = generate_zipf_dataset(400, 400, 100_000, [1, 2, 3, 4, 5], seed=42)
        freq5 = np.mean(ds.ratings == 5.0)
        assert abs(freq5 - 1.0 / 3.0) < 0.01

    def test_level_frequencies_chi_squared(self):
        levels = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        ds = generate_zipf_dataset(400, 400, 100_000, list(levels), seed=42)
        observed = np.array([(ds.ratings == lv).sum() for lv in levels])
        expected = levels / levels.sum() * len(ds)
        _, p = stats.chisquare(observed, expected)
        assert p > 0.01

    def test_cells_unique_and_in_range(self):
        ds = generate_zipf_dataset(20, 30, 550, [1, 2, 3], seed=3)
        keys = ds.user_ids * 30 + ds.item_ids
        assert len(np.unique(keys)) == len(ds)
        assert ds.user_ids.max() < 20 and ds.item_ids.max() < 30

    def test_full_grid_feasible(self):
        ds = generate_zipf_dataset(4, 5, 20, [1, 2], seed=9)
        assert len(ds) == 20

    def test_infeasible_rejected(self):
        with pytest.raises(InvalidInputError):
            generate_zipf_dataset(2, 2, 5, [1, 2], seed=0)

    def test_bad_levels_rejected(self):
        with pytest.raises(InvalidInputError):
            generate_zipf_dataset(2, 2, 2, [], seed=0)
        with pytest.raises(InvalidInputError):
            generate_zipf_dataset(2, 2, 2, [0.0, 1.0], seed=0)
        with pytest.raises(InvalidInputError):
            generate_zipf_dataset(2, 2, 2, [2.0, 2.0], seed=0)

    def test_deterministic(self):
        a = generate_zipf_dataset(30, 30, 200, [1, 2, 3, 4, 5], seed=11)
        b = generate_zipf_dataset(30, 30, 200, [1, 2, 3, 4, 5], seed=11)
        assert dataset_equal(a, b)
        c = generate_zipf_dataset(30, 30, 200, [1, 2, 3, 4, 5], seed=12)
        assert not np.array_equal(a.ratings, c.ratings)
