"""Command line client, exercised end to end through CliRunner."""

import json

import pytest
from click.testing import CliRunner

from guirepair.cli import main
from guirepair.layout import parse_hierarchy

RUNNER = CliRunner()


def run(*args):
    return RUNNER.invoke(main, list(args), catch_exceptions=False)


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """synth -> train -> calibrate once; the commands under test share it."""
    d = tmp_path_factory.mktemp("cliwork")
    corpus = d / "corpus"
    r = run("--seed", "3", "synth", "--out", str(corpus), "--count", "5")
    assert r.exit_code == 0, r.output
    r = run(
        "train", "--corpus", str(corpus), "--out", str(d / "model.txt"),
        "--epochs", "50", "--dim", "16",
    )
    assert r.exit_code == 0, r.output
    r = run("calibrate", "--preset", "--out", str(d / "cal.txt"))
    assert r.exit_code == 0, r.output
    return d


def test_synth_output_mentions_counts(tmp_path):
    r = run("--format", "json", "synth", "--out", str(tmp_path / "c"), "--count", "2")
    assert r.exit_code == 0
    data = json.loads(r.output)
    assert data["screens"] == 2
    assert sum(data["issues"].values()) >= 2
    assert (tmp_path / "c" / "manifest.json").exists()


def test_detect_table_and_json(workdir):
    target = next((workdir / "corpus" / "broken").glob("*.json"))
    r = run("detect", str(target))
    assert r.exit_code == 0
    assert "issue(s) in" in r.output

    r = run("--format", "json", "detect", str(target))
    assert r.exit_code == 0
    data = json.loads(r.output)
    assert data["issues"]
    assert {"component_id", "kind", "measured", "threshold", "peer_id"} <= set(
        data["issues"][0]
    )


def test_detect_missing_file_is_usage_error(workdir):
    r = run("detect", str(workdir / "nope.json"))
    assert r.exit_code == 2
    assert "cannot read" in r.output


def test_detect_unparseable_is_data_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    r = run("detect", str(bad))
    assert r.exit_code == 1
    assert "cannot parse" in r.output


def test_train_reports_loss(workdir):
    model_file = workdir / "model.txt"
    text = model_file.read_text()
    assert text.startswith("guirepair-model v1")
    assert text.endswith("end\n")


def test_calibrate_preset_table(workdir):
    r = run("calibrate", "--preset", "--out", str(workdir / "cal2.txt"))
    assert r.exit_code == 0
    assert "preset" in r.output
    assert (workdir / "cal2.txt").read_text().startswith("guirepair-calibration v1")


def test_calibrate_fitted(workdir, tmp_path):
    out = tmp_path / "fitted.txt"
    r = run(
        "--format", "json", "calibrate",
        "--corpus", str(workdir / "corpus"),
        "--model", str(workdir / "model.txt"),
        "--out", str(out), "--k", "2",
    )
    assert r.exit_code == 0, r.output
    data = json.loads(r.output)
    assert data["provenance"] == "fitted"
    assert set(data["curves"]) == {"size", "interval", "contrast"}
    assert all(c["n"] > 0 for c in data["curves"].values())


def test_calibrate_needs_inputs(tmp_path):
    r = run("calibrate", "--out", str(tmp_path / "cal.txt"))
    assert r.exit_code == 2
    assert "corpus" in r.output


def test_fix_writes_patch_and_document(workdir, tmp_path):
    target = sorted((workdir / "corpus" / "broken").glob("*.json"))[0]
    out = tmp_path / "fixed.json"
    patch = tmp_path / "patch.json"
    r = run(
        "--format", "json", "fix", str(target),
        "--model", str(workdir / "model.txt"),
        "--calibration", str(workdir / "cal.txt"),
        "--out", str(out), "--patch", str(patch),
    )
    assert r.exit_code == 0, r.output
    data = json.loads(r.output)
    assert data["patch"]["changes"] or data["patch"]["unfixable"]
    assert data["report"]["counts"]["Fixed"] >= 0
    # the written document parses back
    parse_hierarchy(out.read_text(), "json-dump")
    assert json.loads(patch.read_text())["seed"] == 0


def test_fix_table_output(workdir, tmp_path):
    target = sorted((workdir / "corpus" / "broken").glob("*.json"))[0]
    r = run(
        "fix", str(target),
        "--model", str(workdir / "model.txt"),
        "--calibration", str(workdir / "cal.txt"),
    )
    assert r.exit_code == 0, r.output
    assert "verdicts:" in r.output


def test_eval_text_and_json(workdir):
    args = (
        "--corpus", str(workdir / "corpus"),
        "--model", str(workdir / "model.txt"),
        "--calibration", str(workdir / "cal.txt"),
    )
    r = run("eval", *args)
    assert r.exit_code == 0, r.output
    assert "screens evaluated  5" in r.output
    assert "reduction" in r.output

    r = run("--format", "json", "eval", *args)
    assert r.exit_code == 0
    data = json.loads(r.output)
    assert data["report"]["screens"] == 5
    assert 0.0 <= data["report"]["reduction"] <= 1.0


def test_config_file_flows_through(workdir, tmp_path):
    ini = tmp_path / "app.ini"
    ini.write_text("[thresholds]\nmin_touch_dp = 200\n")
    target = sorted((workdir / "corpus" / "clean").glob("*.json"))[0]
    r = run("--config", str(ini), "--format", "json", "detect", str(target))
    assert r.exit_code == 0
    data = json.loads(r.output)
    # a clean screen fails wholesale against an absurd touch floor
    assert any(s["kind"] == "SmallSize" for s in data["issues"])


def test_bad_config_is_usage_error(workdir, tmp_path):
    ini = tmp_path / "app.ini"
    ini.write_text("[nope]\nx = 1\n")
    target = sorted((workdir / "corpus" / "clean").glob("*.json"))[0]
    r = run("--config", str(ini), "detect", str(target))
    assert r.exit_code == 2
    assert "unknown config section" in r.output


def test_unknown_option_is_usage_error():
    r = RUNNER.invoke(main, ["detect", "--bogus"])
    assert r.exit_code == 2


def test_missing_subcommand_shows_help():
    r = RUNNER.invoke(main, [])
    assert "Usage" in r.output
