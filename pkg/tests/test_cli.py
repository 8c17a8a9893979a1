import json

import pytest

from gazeaffect.cli import main
from gazeaffect.config import ConfigError, load_config

SCENARIO = """\
[scenario]
n_images = 9, 9, 9
n_observers = 4
spatial_mode = scanpath
seed = 3

[unpleasant]
length_mean = 60
[neutral]
length_mean = 150
[pleasant]
length_mean = 300
"""

FAST = ["--set", "protocol.repetitions=3", "--set", "protocol.n_folds=3"]


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    scen = root / "scen.ini"
    scen.write_text(SCENARIO)
    assert main(["synth", str(scen), "--out", str(root / "data")]) == 0
    return root


def _run(dataset, *args):
    return main([*args, "--data-dir", str(dataset / "data"), "--out", str(dataset / "out"), *FAST])


def test_synth_writes_dataset(dataset):
    names = {p.name for p in (dataset / "data").iterdir()}
    assert {"metadata.csv", "fixations.csv", "observers.csv", "ledger.json"} <= names


def test_ingest_validate_reports_counts(dataset, capsys):
    assert _run(dataset, "ingest-validate") == 0
    summary = json.loads(capsys.readouterr().out)
    ledger = json.loads((dataset / "data" / "ledger.json").read_text())
    assert summary["n_images"] == 27
    assert summary["total_fixations"] == ledger["totals"]["fixations"]


def test_features_then_eval_by_file(dataset):
    assert _run(dataset, "features", "--kinds", "fdm,sac_length_hist") == 0
    feat = dataset / "out" / "features" / "sac_length_hist.csv"
    assert feat.read_text().startswith("# gazeaffect 0.1.0 seed=0 config=")
    assert _run(dataset, "eval", "--channels", str(feat)) == 0
    report = json.loads((dataset / "out" / "reports" / "sac_length_hist.json").read_text())
    assert report["meta"]["header"]["seed"] == 0
    assert 0.0 <= report["mean_accuracy"] <= 100.0


def test_eval_is_byte_deterministic(dataset):
    paths = [dataset / "out" / "reports" / f"fdm.{ext}" for ext in ("json", "txt")]
    assert _run(dataset, "eval", "--channels", "fdm") == 0
    first = [p.read_bytes() for p in paths]
    assert _run(dataset, "eval", "--channels", "fdm") == 0
    assert [p.read_bytes() for p in paths] == first


def test_self_fusion_matches_single_channel(dataset):
    assert _run(dataset, "eval", "--channels", "sac_length_hist") == 0
    assert _run(dataset, "eval", "--channels", "sac_length_hist,sac_length_hist", "--fuse") == 0
    reports = dataset / "out" / "reports"
    single = json.loads((reports / "sac_length_hist.json").read_text())
    fused = json.loads((reports / "fused_sac_length_hist+sac_length_hist.json").read_text())
    assert fused["mean_accuracy"] == pytest.approx(single["mean_accuracy"], abs=1e-12)


def test_stats_outputs(dataset):
    assert _run(dataset, "stats") == 0
    d = dataset / "out" / "stats"
    for name in ("summary.csv", "boxplot.csv", "anova.csv", "tukey.csv"):
        assert (d / name).read_text().startswith("# gazeaffect")


def test_missing_inputs_exit_code(tmp_path, capsys):
    code = main(["eval", "--channels", "fdm", "--data-dir", str(tmp_path / "nowhere"), "--out", str(tmp_path)])
    assert code == 1
    assert capsys.readouterr().err.startswith("error: ConfigError: ")


def test_unknown_channel_kind(dataset, capsys):
    assert _run(dataset, "features", "--kinds", "pupil") == 1
    assert capsys.readouterr().err.startswith("error: CLIError: unknown channel kinds")


def test_nothing_to_evaluate(dataset, capsys):
    assert _run(dataset, "eval") == 1
    assert "nothing to evaluate" in capsys.readouterr().err


def test_config_overrides(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[run]\nseed = 7\n[protocol]\nrepetitions = 5\n")
    cfg = load_config(ini, ["protocol.n_folds=4", "features.kernel_sigma_fraction=0.05"])
    assert (cfg.seed, cfg.protocol.repetitions, cfg.protocol.n_folds) == (7, 5, 4)
    assert cfg.features.kernel_sigma_fraction == 0.05
    assert cfg.config_hash != load_config(ini).config_hash
    assert cfg.config_hash == load_config(ini, ["protocol.n_folds=4", "features.kernel_sigma_fraction=0.05"]).config_hash
    with pytest.raises(ConfigError):
        load_config(ini, ["protocol.folds=4"])
    with pytest.raises(ConfigError):
        load_config(ini, ["nodot"])
