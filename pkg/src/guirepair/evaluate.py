"""Scoring repair runs against a corpus manifest.

The manifest lists the violations each broken screen is known to contain.
Evaluation re-runs the full loop on every broken screen, checks that the
detector found at least the manifest issues (anything less means the corpus
and detector disagree, which voids the measurement), and tallies per-kind
repair outcomes plus the overall before/after reduction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .calibrate import Calibration
from .detect import ISSUE_KINDS, Thresholds
from .fix import (
    FixRun,
    MODE_LUMINANCE,
    VERDICT_FIXED,
    VERDICT_HALF_BAKED,
    VERDICT_UNFIXED,
    run_fix,
)
from .layout import parse_hierarchy
from .rgcn import TrainedModel
from .spectral import SignalConfig
from .synth import read_manifest


class EvalError(RuntimeError):
    pass


@dataclass
class KindStats:
    total: int = 0
    fixed: int = 0
    half_baked: int = 0
    unfixed: int = 0

    @property
    def rate(self) -> float | None:
        return self.fixed / self.total if self.total else None


@dataclass
class ScreenEval:
    name: str
    run: FixRun
    manifest_keys: set


@dataclass
class EvalReport:
    screens: int = 0
    pre_total: int = 0
    post_total: int = 0
    extra_total: int = 0
    partial_screens: int = 0
    per_kind: dict[str, KindStats] = field(default_factory=dict)

    @property
    def reduction(self) -> float | None:
        if not self.pre_total:
            return None
        return (self.pre_total - self.post_total) / self.pre_total

    def to_dict(self) -> dict:
        return {
            "screens": self.screens,
            "pre_total": self.pre_total,
            "post_total": self.post_total,
            "extra_total": self.extra_total,
            "partial_screens": self.partial_screens,
            "reduction": self.reduction,
            "per_kind": {
                kind: {
                    "total": st.total,
                    "fixed": st.fixed,
                    "half_baked": st.half_baked,
                    "unfixed": st.unfixed,
                    "rate": st.rate,
                }
                for kind, st in sorted(self.per_kind.items())
            },
        }


def _pct(value: float | None) -> str:
    return "n/a" if value is None else f"{100 * value:.1f}%"


def render_text(report: EvalReport) -> str:
    lines = [
        f"screens evaluated  {report.screens}",
        f"issues before      {report.pre_total}",
        f"issues after       {report.post_total}",
        f"reduction          {_pct(report.reduction)}",
        f"extra introduced   {report.extra_total}",
        f"partial patches    {report.partial_screens}",
    ]
    for kind in ISSUE_KINDS:
        st = report.per_kind.get(kind, KindStats())
        lines.append(
            f"{kind:<15} fixed {st.fixed}/{st.total} ({_pct(st.rate)})"
            f"  half-baked {st.half_baked}  unfixed {st.unfixed}"
        )
    return "\n".join(lines) + "\n"


def evaluate_screen(
    name: str,
    rec: dict,
    corpus_dir: Path,
    model: TrainedModel,
    cal: Calibration,
    th: Thresholds,
    *,
    seed: int = 0,
    signal_cfg: SignalConfig = SignalConfig(),
    max_iterations: int = 500,
    recolor_mode: str = MODE_LUMINANCE,
) -> ScreenEval:
    raw = (corpus_dir / rec["broken"]).read_text()
    tree, meta = parse_hierarchy(raw, "json-dump")
    run = run_fix(
        tree,
        meta,
        model,
        cal,
        th,
        seed=seed,
        signal_cfg=signal_cfg,
        max_iterations=max_iterations,
        recolor_mode=recolor_mode,
    )
    manifest_keys = {
        (i["component_id"], i["kind"], i.get("peer_id")) for i in rec["issues"]
    }
    detected = {(s.component_id, s.kind, s.peer_id) for s in run.issues}
    if not manifest_keys <= detected:
        missing = sorted(manifest_keys - detected)
        raise EvalError(f"manifest mismatch for {name}: undetected {missing}")
    return ScreenEval(name, run, manifest_keys)


def evaluate_corpus(
    corpus_dir,
    model: TrainedModel,
    cal: Calibration,
    th: Thresholds = Thresholds(),
    *,
    seed: int = 0,
    signal_cfg: SignalConfig = SignalConfig(),
    max_iterations: int = 500,
    recolor_mode: str = MODE_LUMINANCE,
) -> tuple[EvalReport, list[ScreenEval]]:
    corpus_dir = Path(corpus_dir)
    manifest = read_manifest(corpus_dir / "manifest.json")
    report = EvalReport(per_kind={kind: KindStats() for kind in ISSUE_KINDS})
    evals: list[ScreenEval] = []
    for name, rec in sorted(manifest["screens"].items()):
        ev = evaluate_screen(
            name,
            rec,
            corpus_dir,
            model,
            cal,
            th,
            seed=seed,
            signal_cfg=signal_cfg,
            max_iterations=max_iterations,
            recolor_mode=recolor_mode,
        )
        evals.append(ev)
        report.screens += 1
        report.pre_total += len(ev.run.issues)
        report.post_total += len(ev.run.post_issues)
        report.extra_total += len(ev.run.report.extra)
        if ev.run.report.partial:
            report.partial_screens += 1
        verdict_by_key = {v.issue.key: v.verdict for v in ev.run.report.verdicts}
        for key in sorted(ev.manifest_keys):
            kind = key[1]
            st = report.per_kind.setdefault(kind, KindStats())
            st.total += 1
            verdict = verdict_by_key.get(key)
            if verdict == VERDICT_FIXED:
                st.fixed += 1
            elif verdict == VERDICT_HALF_BAKED:
                st.half_baked += 1
            elif verdict == VERDICT_UNFIXED:
                st.unfixed += 1
    return report, evals
