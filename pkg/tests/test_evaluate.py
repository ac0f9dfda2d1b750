"""Corpus-level repair scoring."""

import json

import pytest

from guirepair.calibrate import preset_calibration
from guirepair.detect import ISSUE_KINDS, Thresholds
from guirepair.evaluate import (
    EvalError,
    EvalReport,
    KindStats,
    evaluate_corpus,
    evaluate_screen,
    render_text,
)
from guirepair.synth import write_corpus

CAL = preset_calibration()


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory, tiny_screens):
    d = tmp_path_factory.mktemp("corpus")
    write_corpus(tiny_screens, d)
    return d


@pytest.fixture(scope="module")
def scored(corpus_dir, tiny_model):
    return evaluate_corpus(corpus_dir, tiny_model, CAL)


def test_evaluate_corpus_counts(scored):
    report, evals = scored
    assert report.screens == len(evals) == 6
    assert report.pre_total >= report.screens  # at least one injected issue each
    assert report.post_total <= report.pre_total
    assert sum(st.total for st in report.per_kind.values()) == report.pre_total
    assert set(report.per_kind) <= set(ISSUE_KINDS)
    for ev in evals:
        # every manifest issue was found by the detector
        detected = {(s.component_id, s.kind, s.peer_id) for s in ev.run.issues}
        assert ev.manifest_keys <= detected


def test_report_dict_round_trips_through_json(scored):
    report, _ = scored
    d = json.loads(json.dumps(report.to_dict()))
    assert d["screens"] == report.screens
    assert d["reduction"] == pytest.approx(report.reduction)
    for kind, st in report.per_kind.items():
        assert d["per_kind"][kind]["total"] == st.total


def test_reduction_none_when_no_issues():
    assert EvalReport().reduction is None
    assert "n/a" in render_text(EvalReport())


def test_render_text_shape(scored):
    report, _ = scored
    text = render_text(report)
    assert text.endswith("\n")
    lines = text.splitlines()
    assert lines[0].startswith("screens evaluated")
    for kind in ISSUE_KINDS:
        assert any(line.startswith(kind) for line in lines)
    assert "reduction" in text


def test_kind_stats_rate():
    st = KindStats(total=4, fixed=3)
    assert st.rate == 0.75
    assert KindStats().rate is None


def test_manifest_mismatch_raises(corpus_dir, tiny_model):
    rec = {
        "broken": "broken/gui_000.json",
        "issues": [{"component_id": "ghost", "kind": "SmallSize", "peer_id": None}],
    }
    with pytest.raises(EvalError, match="ghost"):
        evaluate_screen("gui_000", rec, corpus_dir, tiny_model, CAL, Thresholds())


def test_deterministic(corpus_dir, tiny_model):
    r1, _ = evaluate_corpus(corpus_dir, tiny_model, CAL, seed=2)
    r2, _ = evaluate_corpus(corpus_dir, tiny_model, CAL, seed=2)
    assert r1.to_dict() == r2.to_dict()
