from parafair.cli import main
from parafair.config import validate_config
from parafair.data import child_seed
from parafair.experiment import run_experiment

ARTIFACTS = ("curves.csv", "mae_takens.csv", "dme_takens.csv", "summary.txt")
FIGURES = ("mae_curves.png", "dme_curves.png", "mae_takens.png", "dme_takens.png")


def synthetic_config(tmp_path, body="[random]\n", epochs=3, figures=True):
    path = tmp_path / "exp.cfg"
    path.write_text(
        "synthetic_users = 20\n"
        "synthetic_items = 25\n"
        "synthetic_ratings = 100\n"
        f"epochs = {epochs}\n"
        "top_n = 3\n"
        f"figures = {'true' if figures else 'false'}\n"
        f"output = {tmp_path / 'out'}\n"
        + body
    )
    return path


class TestRunCommand:
    def test_single_model_run(self, tmp_path, capsys):
        cfg = synthetic_config(tmp_path)
        assert main(["run", str(cfg)]) == 0
        table = capsys.readouterr().out.strip().splitlines()
        assert table[0].split() == ["model", "mae", "dme", "mae_rank", "dme_rank"]
        assert len(table) == 2
        row = table[1].split()
        assert row[0] == "random"
        assert row[3] == "1" and row[4] == "1"
        out = tmp_path / "out"
        for name in ARTIFACTS + FIGURES:
            assert (out / name).is_file(), name

    def test_deterministic_artifacts(self, tmp_path, capsys):
        cfg = synthetic_config(tmp_path, body="[random]\n\n[zipf-placement]\n")
        assert main(["run", str(cfg)]) == 0
        first = {n: (tmp_path / "out" / n).read_bytes() for n in ARTIFACTS}
        first_out = capsys.readouterr().out
        assert main(["run", str(cfg)]) == 0
        second_out = capsys.readouterr().out
        assert first_out == second_out
        for name in ARTIFACTS:
            assert (tmp_path / "out" / name).read_bytes() == first[name], name

    def test_missing_dataset_fails_before_training(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(f"dataset = {tmp_path / 'absent.dat'}\n[random]\n")
        assert main(["run", str(cfg)]) == 1
        assert not (tmp_path / "parafair-out").exists()
        assert "not found" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "absent.cfg")]) == 1

    def test_out_and_seed_overrides(self, tmp_path, capsys):
        cfg = synthetic_config(tmp_path)
        alt = tmp_path / "alt"
        assert main(["run", str(cfg), "--out", str(alt), "--seed", "7"]) == 0
        summary = (alt / "summary.txt").read_text()
        assert "config.seed = 7" in summary
        assert f"model.random.seed = {child_seed(7, 'random')}" in summary

    def test_divergence_exit_code(self, tmp_path, capsys):
        cfg = synthetic_config(tmp_path, body="[paramat]\nlearning_rate = 10000\n")
        assert main(["run", str(cfg)]) == 2
        err = capsys.readouterr().err
        assert "train:paramat" in err
        # partial outputs removed: nothing written
        assert not (tmp_path / "out").exists() or not any((tmp_path / "out").iterdir())


class TestValidateCommand:
    def test_ok(self, tmp_path, capsys):
        cfg = synthetic_config(tmp_path)
        assert main(["validate", str(cfg)]) == 0
        assert "random" in capsys.readouterr().out

    def test_invalid(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("nonsense == 3\n")
        assert main(["validate", str(cfg)]) == 1


class TestEmbedCommand:
    def test_embed_roundtrip(self, tmp_path, capsys):
        cfg = synthetic_config(tmp_path, epochs=5)
        assert main(["run", str(cfg)]) == 0
        curves = tmp_path / "out" / "curves.csv"
        dest = tmp_path / "embedded"
        assert main(["embed", str(curves), "--delay", "2", "--out", str(dest)]) == 0
        lines = (dest / "mae_takens.csv").read_text().splitlines()
        assert lines[0] == "model,t,x,y"
        assert len(lines) == 1 + (5 - 2)
        assert (dest / "mae_takens.png").is_file()

    def test_embed_missing_file(self, tmp_path):
        assert main(["embed", str(tmp_path / "nope.csv")]) == 1

    def test_embed_no_figures(self, tmp_path):
        cfg = synthetic_config(tmp_path, epochs=4, figures=False)
        assert main(["run", str(cfg)]) == 0
        dest = tmp_path / "emb"
        assert main(["embed", str(tmp_path / "out" / "curves.csv"), "--out", str(dest), "--no-figures"]) == 0
        assert (dest / "dme_takens.csv").is_file()
        assert not (dest / "dme_takens.png").exists()


class TestSummaryRoundTrip:
    def test_summary_echoes_parsed_config(self, tmp_path, capsys):
        cfg_path = synthetic_config(tmp_path, body="[cosine-mf]\nepochs = 2\nlatent_dim = 3\n", epochs=4)
        assert main(["run", str(cfg_path)]) == 0
        config = validate_config(cfg_path.read_text(), base_dir=tmp_path)
        summary = {}
        for line in (tmp_path / "out" / "summary.txt").read_text().splitlines():
            key, _, value = line.partition(" = ")
            summary[key] = value
        assert int(summary["config.seed"]) == config.seed
        assert float(summary["config.test_fraction"]) == config.test_fraction
        assert int(summary["config.top_n"]) == config.top_n
        assert summary["config.models"] == ",".join(config.models)
        assert int(summary["config.synthetic_users"]) == config.synthetic.n_users
        mc = config.train_configs["cosine-mf"]
        assert int(summary["model.cosine-mf.epochs"]) == mc.epochs == 2
        assert int(summary["model.cosine-mf.latent_dim"]) == mc.latent_dim == 3
        assert float(summary["model.cosine-mf.learning_rate"]) == mc.learning_rate
        assert float(summary["metric.cosine-mf.mae"]) >= 0.0

    def test_reports_sorted_fairest_first(self, tmp_path):
        cfg_path = synthetic_config(tmp_path, body="[random]\n\n[zipf-placement]\n")
        config = validate_config(cfg_path.read_text(), base_dir=tmp_path)
        reports = run_experiment(config)
        dmes = [r.dme for r in reports]
        assert dmes == sorted(dmes)
        for r in reports:
            assert r.mae_rank in (1, 2) and r.dme_rank in (1, 2)
