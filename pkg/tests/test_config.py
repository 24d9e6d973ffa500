import pytest

from parafair.config import validate_config, read_config_file
from parafair.data import child_seed
from parafair.exceptions import ConfigError


@pytest.fixture
def ratings_file(tmp_path):
    path = tmp_path / "ratings.dat"
    path.write_text("".join(f"{u}::{i}::{1 + (u * i) % 5}::0\n" for u in range(1, 6) for i in range(1, 9)))
    return path


class TestMinimalConfig:
    def test_defaults_filled(self, ratings_file):
        text = f"dataset = {ratings_file}\n\n[cosine-mf]\n"
        config = validate_config(text)
        assert config.models == ("cosine-mf",)
        assert config.seed == 42
        assert config.test_fraction == 0.2
        assert config.top_n == 10
        cfg = config.train_configs["cosine-mf"]
        assert cfg.latent_dim == 10
        assert cfg.learning_rate == 0.01
        assert cfg.epochs == 30
        assert cfg.seed == child_seed(42, "cosine-mf")
        assert config.source_format.tag == "movielens-1m"

    def test_comments_and_blank_lines_ignored(self, ratings_file):
        text = f"# a comment\n\ndataset = {ratings_file}\n# another\n[random]\n"
        config = validate_config(text)
        assert config.models == ("random",)


class TestErrors:
    def test_misspelled_key_suggests_correction(self, ratings_file):
        text = f"dataset = {ratings_file}\n[cosine-mf]\nlearning_rte = 0.1\n"
        with pytest.raises(ConfigError) as err:
            validate_config(text)
        assert "line 3" in str(err.value)
        assert "learning_rate" in str(err.value)

    def test_empty_file_means_no_models(self):
        with pytest.raises(ConfigError) as err:
            validate_config("")
        assert "no models" in str(err.value)

    def test_unknown_model_section(self, ratings_file):
        text = f"dataset = {ratings_file}\n[cosine]\n"
        with pytest.raises(ConfigError) as err:
            validate_config(text)
        assert "cosine-mf" in str(err.value)

    def test_duplicate_model_section(self, ratings_file):
        text = f"dataset = {ratings_file}\n[random]\n[random]\n"
        with pytest.raises(ConfigError) as err:
            validate_config(text)
        assert "twice" in str(err.value)

    def test_duplicate_key(self, ratings_file):
        text = f"dataset = {ratings_file}\nseed = 1\nseed = 2\n[random]\n"
        with pytest.raises(ConfigError) as err:
            validate_config(text)
        assert "duplicate" in str(err.value)
        assert "line 3" in str(err.value)

    def test_syntax_error_names_line(self, ratings_file):
        text = f"dataset = {ratings_file}\nwhat is this\n[random]\n"
        with pytest.raises(ConfigError) as err:
            validate_config(text)
        assert "line 2" in str(err.value)

    def test_missing_dataset_file_fails_validation(self, tmp_path):
        text = f"dataset = {tmp_path / 'nope.dat'}\n[random]\n"
        with pytest.raises(ConfigError) as err:
            validate_config(text)
        assert "not found" in str(err.value)

    def test_no_dataset_at_all(self):
        with pytest.raises(ConfigError) as err:
            validate_config("[random]\n")
        assert "no dataset" in str(err.value)

    def test_dataset_and_synthetic_conflict(self, ratings_file):
        text = f"dataset = {ratings_file}\nsynthetic_users = 5\n[random]\n"
        with pytest.raises(ConfigError):
            validate_config(text)

    def test_model_key_in_global_scope_rejected(self, ratings_file):
        text = f"dataset = {ratings_file}\ntop_k = 5\n[random]\n"
        with pytest.raises(ConfigError) as err:
            validate_config(text)
        assert "top_n" in str(err.value)

    def test_global_key_inside_section_rejected(self, ratings_file):
        text = f"dataset = {ratings_file}\n[random]\ntest_fraction = 0.5\n"
        with pytest.raises(ConfigError):
            validate_config(text)

    def test_bad_value_types(self, ratings_file):
        text = f"dataset = {ratings_file}\nseed = lots\n[random]\n"
        with pytest.raises(ConfigError) as err:
            validate_config(text)
        assert "integer" in str(err.value)

    def test_bad_hyperparameters_rejected(self, ratings_file):
        text = f"dataset = {ratings_file}\n[cosine-mf]\nepochs = 0\n"
        with pytest.raises(ConfigError):
            validate_config(text)

    def test_linfac_needs_two_dims(self, ratings_file):
        text = f"dataset = {ratings_file}\n[linfac]\nlatent_dim = 1\n"
        with pytest.raises(ConfigError) as err:
            validate_config(text)
        assert "latent_dim" in str(err.value)

    def test_layout_keys_only_for_generic(self, ratings_file):
        text = f"dataset = {ratings_file}\nseparator = ;\n[random]\n"
        with pytest.raises(ConfigError) as err:
            validate_config(text)
        assert "generic-csv" in str(err.value)

    def test_unknown_format(self, ratings_file):
        text = f"dataset = {ratings_file}\nformat = parquet\n[random]\n"
        with pytest.raises(ConfigError):
            validate_config(text)


class TestSyntheticAndOverrides:
    def test_synthetic_spec(self):
        text = (
            "synthetic_users = 30\nsynthetic_items = 40\nsynthetic_ratings = 200\n"
            "synthetic_levels = 1,2,3\n[random]\n"
        )
        config = validate_config(text)
        assert config.synthetic.n_users == 30
        assert config.synthetic.levels == (1.0, 2.0, 3.0)
        assert config.dataset_path is None

    def test_synthetic_levels_default(self):
        text = "synthetic_users = 30\nsynthetic_items = 40\nsynthetic_ratings = 200\n[random]\n"
        config = validate_config(text)
        assert config.synthetic.levels == (1.0, 2.0, 3.0, 4.0, 5.0)

    def test_partial_synthetic_rejected(self):
        with pytest.raises(ConfigError) as err:
            validate_config("synthetic_users = 30\n[random]\n")
        assert "synthetic" in str(err.value)

    def test_per_model_overrides(self, ratings_file):
        text = (
            f"dataset = {ratings_file}\nlearning_rate = 0.02\n"
            "[cosine-mf]\nepochs = 7\n\n[classic-mf]\nlearning_rate = 0.005\nseed = 99\n"
        )
        config = validate_config(text)
        cos = config.train_configs["cosine-mf"]
        cla = config.train_configs["classic-mf"]
        assert cos.epochs == 7 and cos.learning_rate == 0.02
        assert cla.epochs == 30 and cla.learning_rate == 0.005
        assert cla.seed == 99
        assert cos.seed == child_seed(42, "cosine-mf")

    def test_seed_override_rederives_model_seeds(self, ratings_file):
        text = f"dataset = {ratings_file}\n[cosine-mf]\n"
        config = validate_config(text, seed_override=7)
        assert config.seed == 7
        assert config.train_configs["cosine-mf"].seed == child_seed(7, "cosine-mf")

    def test_output_override(self, ratings_file, tmp_path):
        text = f"dataset = {ratings_file}\noutput = somewhere\n[random]\n"
        config = validate_config(text, output_override=tmp_path / "elsewhere")
        assert config.output == tmp_path / "elsewhere"

    def test_generic_layout(self, tmp_path):
        data = tmp_path / "r.psv"
        data.write_text("h|h|h\n1|2|3\n4|5|4\n")
        text = (
            f"dataset = {data}\nformat = generic-csv\nseparator = |\n"
            "header_lines = 1\n[random]\n"
        )
        config = validate_config(text)
        assert config.source_format.separator == "|"
        assert config.source_format.header_lines == 1

    def test_rating_bound_overrides(self, ratings_file):
        text = f"dataset = {ratings_file}\nr_min = 1\nr_max = 5\n[random]\n"
        config = validate_config(text)
        assert config.r_min_override == 1.0
        assert config.r_max_override == 5.0

    def test_relative_path_resolves_against_base_dir(self, ratings_file):
        text = "dataset = ratings.dat\n[random]\n"
        config = validate_config(text, base_dir=ratings_file.parent)
        assert config.dataset_path == ratings_file.parent / "ratings.dat"

    def test_read_config_file(self, ratings_file):
        cfg_path = ratings_file.parent / "exp.cfg"
        cfg_path.write_text("dataset = ratings.dat\n[random]\n")
        config = read_config_file(cfg_path)
        assert config.dataset_path.is_file()
