import csv
import json

import pytest

from mwlindex.cli import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, main
from mwlindex.config import ConfigError, PipelineConfig, apply_override, config_from_dict, load_config

SMALL = ["--set", "demo.n_subjects=12", "--set", "demo.rating_mode=subject", "--set", "demo.n_samples=5120",
         "--set", "synth.n_subjects=20", "--set", "select.search_iterations=2", "--iterations", "2"]

REPORT_FILES = ("performance.csv", "learner_comparison.csv", "ratio_vs_constituent.csv", "ratio_vs_ratio.csv",
                "density.csv", "quality_report.json")


@pytest.fixture(scope="module")
def demo_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert main(["run-all", "--demo", "--out", str(out), *SMALL]) == EXIT_OK
    return out


def test_default_config_is_valid_and_roundtrips(tmp_path):
    cfg = PipelineConfig()
    cfg.validate()
    (tmp_path / "c.json").write_text(json.dumps(cfg.to_json()))
    assert load_config(tmp_path / "c.json").to_json() == cfg.to_json()


def test_validation_lists_every_bad_field():
    cfg = config_from_dict({"seed": -1, "montecarlo": {"iterations": 0, "train_fraction": 1.5},
                            "select": {"search_learner": "KNN"}})
    with pytest.raises(ConfigError) as e:
        cfg.validate()
    fields = " ".join(e.value.errors)
    for name in ("seed", "montecarlo.iterations", "montecarlo.train_fraction", "select.search_learner"):
        assert name in fields
    with pytest.raises(ConfigError, match="preprocess.bogus"):
        config_from_dict({"preprocess": {"bogus": 1}})


def test_override_parses_json_values():
    cfg = apply_override(PipelineConfig(), "bandindex.indexes=[\"ta-1\", \"c-alpha\"]")
    assert cfg.bandindex.indexes == ["ta-1", "c-alpha"]
    assert apply_override(cfg, "select.k=13").select.k == 13
    with pytest.raises(ConfigError):
        apply_override(cfg, "nosuch.field=1")


def test_run_all_writes_every_report(demo_run):
    for name in REPORT_FILES:
        assert (demo_run / "report" / name).is_file(), name
    assert (demo_run / "config.resolved.json").is_file() and (demo_run / "stage.log").is_file()
    with (demo_run / "report" / "performance.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 10 * 4
    assert {r["index"] for r in rows} == {"c1-theta", "c2-theta", "c3-theta", "c-alpha", "at-1", "at-2", "at-3",
                                          "ta-1", "ta-2", "ta-3"}
    assert "L-R_combined_mean" in rows[0]
    resolved = json.loads((demo_run / "config.resolved.json").read_text())
    assert resolved["montecarlo"]["iterations"] == 2 and resolved["manifest"].endswith("manifest.json")


def test_report_stage_is_idempotent(demo_run):
    before = {n: (demo_run / "report" / n).read_bytes() for n in REPORT_FILES}
    assert main(["report", "--config", str(demo_run / "config.resolved.json")]) == EXIT_OK
    assert all((demo_run / "report" / n).read_bytes() == b for n, b in before.items())


def test_missing_input_is_named(tmp_path, capsys):
    assert main(["features", "--out", str(tmp_path)]) == EXIT_VALIDATION
    assert "indexes.csv" in capsys.readouterr().err
    assert main(["denoise", "--out", str(tmp_path), "--manifest", str(tmp_path / "nope.json")]) == EXIT_VALIDATION


def test_invalid_config_exits_1(tmp_path, capsys):
    assert main(["report", "--out", str(tmp_path), "--set", "montecarlo.iterations=0"]) == EXIT_VALIDATION
    assert "montecarlo.iterations" in capsys.readouterr().err
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["report", "--config", str(tmp_path / "bad.json")]) == EXIT_VALIDATION


def test_runtime_failure_exits_2(demo_run, tmp_path):
    # too few synthetic-capable rows: a copula needs at least 10 per condition
    cfg = json.loads((demo_run / "config.resolved.json").read_text())
    cfg["out"] = str(tmp_path)
    (tmp_path / "selected").mkdir()
    src = (demo_run / "selected" / "ta-1.csv").read_text().splitlines()
    (tmp_path / "selected" / "ta-1.csv").write_text("\n".join(src[:6]) + "\n")
    cfg["bandindex"]["indexes"] = ["ta-1"]
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    assert main(["synth", "--config", str(tmp_path / "c.json")]) == EXIT_RUNTIME
    assert "runtime failure" in (tmp_path / "stage.log").read_text()
