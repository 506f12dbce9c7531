"""Metrics against human-annotated gold files: precision/recall/F1 for key
frames and mean relative accuracy for chapter boundaries.

MRA here means: match gold and predicted boundaries one-to-one by nearest
time, then average, over the accuracy thresholds 0.50, 0.55, ..., 0.95, the
fraction of boundaries (out of max(|gold|, |pred|)) whose relative temporal
error |t_pred - t_gold| / duration stays below 1 - threshold. This exact
definition is declared in every report header.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .scheme import KEYFRAME_KINDS, NoteScheme
from .serialize import dumps_canonical

MRA_DEFINITION = ("mean over thresholds 0.50..0.95 step 0.05 of matched-boundary "
                  "fraction, matching one-to-one nearest with relative error "
                  "|dt|/duration < 1-threshold, normalized by max(|gold|,|pred|)")

DEFAULT_TOLERANCE = 2.0


@dataclass(frozen=True)
class KeyframeMark:
    timestamp: float
    kind: str


@dataclass
class AnnotationSet:
    video_id: str
    duration: float
    keyframes: list[KeyframeMark] = field(default_factory=list)
    boundaries: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        for mark in self.keyframes:
            if not 0 <= mark.timestamp <= self.duration:
                raise ValueError(f"keyframe at {mark.timestamp} outside [0, duration]")
        if self.boundaries != sorted(self.boundaries) or \
                len(set(self.boundaries)) != len(self.boundaries):
            raise ValueError("boundaries must be strictly increasing")


@dataclass(frozen=True)
class Prf:
    precision: float
    recall: float
    f1: float


@dataclass
class MetricReport:
    video_id: str
    per_kind: dict[str, Prf]
    aggregate: Prf
    mra: float

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "mra_definition": MRA_DEFINITION,
            "per_kind": {k: {"precision": v.precision, "recall": v.recall, "f1": v.f1}
                         for k, v in self.per_kind.items()},
            "precision": self.aggregate.precision,
            "recall": self.aggregate.recall,
            "f1": self.aggregate.f1,
            "mra": self.mra,
        }


def parse_annotation_file(path: str | Path, video_id: str | None = None) -> AnnotationSet:
    """Line-oriented gold format: DURATION, KEYFRAME, and BOUNDARY records."""
    path = Path(path)
    duration = None
    keyframes: list[KeyframeMark] = []
    boundaries: list[float] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        record = fields[0]
        if record == "DURATION" and len(fields) == 2:
            duration = float(fields[1])
        elif record == "KEYFRAME" and len(fields) == 3:
            keyframes.append(KeyframeMark(timestamp=float(fields[2]), kind=fields[1]))
        elif record == "BOUNDARY" and len(fields) == 2:
            boundaries.append(float(fields[1]))
        else:
            raise ValueError(f"{path}:{lineno}: unrecognized record {record!r}")
    if duration is None:
        raise ValueError(f"{path}: missing DURATION header")
    return AnnotationSet(video_id=video_id or path.stem, duration=duration,
                         keyframes=keyframes, boundaries=sorted(boundaries))


def match_keyframes(pred: list[KeyframeMark], gold: list[KeyframeMark],
                    tolerance: float = DEFAULT_TOLERANCE):
    """Greedy one-to-one matching in ascending gold time: each gold mark takes
    the nearest unmatched same-kind prediction within the tolerance."""
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    matched: list[tuple[KeyframeMark, KeyframeMark]] = []
    used: set[int] = set()
    for g in sorted(gold, key=lambda m: m.timestamp):
        best_i, best_d = None, None
        for i, p in enumerate(pred):
            if i in used or p.kind != g.kind:
                continue
            d = abs(p.timestamp - g.timestamp)
            if d > tolerance:
                continue
            if best_d is None or d < best_d or (d == best_d and
                                                p.timestamp < pred[best_i].timestamp):
                best_i, best_d = i, d
        if best_i is not None:
            used.add(best_i)
            matched.append((g, pred[best_i]))
    unmatched_gold = [g for g in gold if not any(m[0] is g for m in matched)]
    unmatched_pred = [p for i, p in enumerate(pred) if i not in used]
    return matched, unmatched_gold, unmatched_pred


def compute_prf(matches: int, pred_count: int, gold_count: int) -> Prf:
    if matches > pred_count or matches > gold_count:
        raise ValueError("matches cannot exceed either count")
    precision = 1.0 if pred_count == 0 and gold_count == 0 else \
        (matches / pred_count if pred_count else 0.0)
    recall = 1.0 if gold_count == 0 and pred_count == 0 else \
        (matches / gold_count if gold_count else 0.0)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return Prf(precision=precision, recall=recall, f1=f1)


def _match_boundaries(pred: list[float], gold: list[float]) -> list[float]:
    """One-to-one nearest pairing (ascending gold); returns |dt| per pair."""
    used: set[int] = set()
    deltas: list[float] = []
    for g in sorted(gold):
        best_i, best_d = None, None
        for i, p in enumerate(pred):
            if i in used:
                continue
            d = abs(p - g)
            if best_d is None or d < best_d:
                best_i, best_d = i, d
        if best_i is not None:
            used.add(best_i)
            deltas.append(best_d)
    return deltas


def compute_mra(pred: list[float], gold: list[float], duration: float) -> float:
    if duration <= 0:
        raise ValueError("duration must be > 0")
    if not pred and not gold:
        return 1.0
    denominator = max(len(gold), len(pred))
    relative_errors = [d / duration for d in _match_boundaries(pred, gold)]
    total = 0.0
    for i in range(10):
        limit = (50 - 5 * i) / 100.0  # 1 - theta for theta = 0.50 .. 0.95
        total += sum(1 for e in relative_errors if e < limit) / denominator
    return total / 10.0


def evaluate(pred: AnnotationSet, gold: AnnotationSet,
             tolerance: float = DEFAULT_TOLERANCE) -> MetricReport:
    per_kind: dict[str, Prf] = {}
    total_matches = 0
    for kind in KEYFRAME_KINDS:
        pk = [m for m in pred.keyframes if m.kind == kind]
        gk = [m for m in gold.keyframes if m.kind == kind]
        matched, _, _ = match_keyframes(pk, gk, tolerance)
        total_matches += len(matched)
        per_kind[kind] = compute_prf(len(matched), len(pk), len(gk))
    aggregate = compute_prf(total_matches, len(pred.keyframes), len(gold.keyframes))
    mra = compute_mra(pred.boundaries, gold.boundaries, gold.duration)
    return MetricReport(video_id=gold.video_id, per_kind=per_kind,
                        aggregate=aggregate, mra=mra)


def macro_report(reports: list[MetricReport]) -> MetricReport:
    """Arithmetic mean of per-video metrics (the Avg. rows of a results table)."""
    if not reports:
        raise ValueError("no reports to aggregate")
    n = len(reports)

    def mean_prf(values: list[Prf]) -> Prf:
        return Prf(precision=sum(v.precision for v in values) / n,
                   recall=sum(v.recall for v in values) / n,
                   f1=sum(v.f1 for v in values) / n)

    vacuous = Prf(1.0, 1.0, 1.0)  # a video with no marks of a kind on either side
    kinds = [k for k in KEYFRAME_KINDS if any(k in r.per_kind for r in reports)]
    per_kind = {kind: mean_prf([r.per_kind.get(kind, vacuous) for r in reports])
                for kind in kinds}
    return MetricReport(
        video_id=f"macro({n} videos)",
        per_kind=per_kind,
        aggregate=mean_prf([r.aggregate for r in reports]),
        mra=sum(r.mra for r in reports) / n,
    )


def render_report(report: MetricReport) -> str:
    formats = {"precision": ".4f", "recall": ".4f", "f1": ".4f", "mra": ".4f"}
    return dumps_canonical(report.to_dict(), field_formats=formats)


def predictions_from_scheme(scheme: NoteScheme) -> AnnotationSet:
    """Convert a finished scheme into the prediction record format."""
    keyframes = [KeyframeMark(timestamp=k.timestamp, kind=k.kind)
                 for step in scheme.all_steps() for k in step.keyframes]
    boundaries = [c.t_s for c in scheme.chapters[1:]]
    return AnnotationSet(video_id=scheme.title, duration=scheme.duration,
                         keyframes=sorted(keyframes, key=lambda m: m.timestamp),
                         boundaries=boundaries)


def write_annotation_file(annotations: AnnotationSet, path: str | Path) -> None:
    lines = [f"DURATION\t{annotations.duration}"]
    lines += [f"KEYFRAME\t{m.kind}\t{m.timestamp}" for m in annotations.keyframes]
    lines += [f"BOUNDARY\t{b}" for b in annotations.boundaries]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
