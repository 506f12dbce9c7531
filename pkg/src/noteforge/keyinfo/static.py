"""Static key-frame extraction: a planner refines fixed detection subtasks,
an executor runs them per frame in order."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..errors import ProviderFailure, SchemaViolation
from ..ingest import FrameRecord, TranscriptSegment, transcript_window
from ..providers.base import StructuredPrompt
from ..providers.templates import STATIC_SUBTASK_ORDER, SUBTASK_TEMPLATE_IDS


@dataclass(frozen=True)
class StaticAnnotation:
    frame_index: int
    kind: str  # TEXT_OVERLAY | DIAGRAM | SPECIAL_MARK
    ocr_text: str = ""
    explanation: str = ""


@dataclass
class Subtask:
    kind: str
    template_id: str
    instructions: str = ""


@dataclass
class SubtaskPlan:
    """The three detection subtasks in fixed order, optionally refined."""

    subtasks: list[Subtask] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)


DEFAULT_QUERY = ("Determine whether the image contains text overlays, graphic and "
                 "diagram annotations, or special marks, and output the "
                 "content-related results.")


def shipped_plan() -> SubtaskPlan:
    return SubtaskPlan(subtasks=[
        Subtask(kind=k, template_id=SUBTASK_TEMPLATE_IDS[k]) for k in STATIC_SUBTASK_ORDER
    ])


def plan_static_subtasks(query: str, vlm, warnings: list[str] | None = None) -> SubtaskPlan:
    """Merge planner-proposed refinements into the shipped subtask templates.

    The plan shape is fixed: exactly the three known subtasks in order.
    Planner additions beyond those are dropped; planner failure falls back to
    the shipped templates unchanged.
    """
    if not query.strip():
        raise ValueError("query must be nonempty")
    plan = shipped_plan()
    prompt = StructuredPrompt("static_plan", {"query": query}, "subtask_plan")
    try:
        response = vlm.complete_structured(prompt)
    except (ProviderFailure, SchemaViolation) as exc:
        plan.flags.append("FALLBACK")
        if warnings is not None:
            warnings.append(f"planner unavailable, shipped subtasks used: {exc}")
        return plan

    by_kind = {s.kind: s for s in plan.subtasks}
    for proposed in response["subtasks"]:
        kind = proposed.get("kind", "").upper()
        if kind in by_kind:
            by_kind[kind].instructions = proposed.get("instructions", "")
        elif warnings is not None:
            warnings.append(f"planner proposed unknown subtask {kind!r}; dropped")
    return plan


def run_static_extraction(keyframe_indices, frames: list[FrameRecord],
                          segments: list[TranscriptSegment], plan: SubtaskPlan, vlm,
                          window: float = 10.0, parallelism: int = 4,
                          warnings: list[str] | None = None) -> list[StaticAnnotation]:
    """Execute the subtasks per keyframe; subtasks within a frame run in
    order because the mark subtask deduplicates against earlier hits."""
    indices = list(keyframe_indices)

    def detect_frame(idx: int) -> list[StaticAnnotation]:
        frame = frames[idx]
        context = transcript_window(segments, frame.timestamp, window)
        hits: list[StaticAnnotation] = []
        for subtask in plan.subtasks:
            prior = "; ".join(f"{h.kind}: {h.ocr_text or h.explanation}" for h in hits)
            try:
                result = vlm.detect_annotations(frame, subtask.kind, context, prior=prior)
            except (ProviderFailure, SchemaViolation) as exc:
                if warnings is not None:
                    warnings.append(f"detection failed on frame {idx}, skipped: {exc}")
                return []
            if not result.positive:
                continue
            annotation = StaticAnnotation(frame_index=idx, kind=subtask.kind,
                                          ocr_text=result.ocr_text,
                                          explanation=result.explanation)
            if subtask.kind == "TEXT_OVERLAY" and not annotation.ocr_text:
                if warnings is not None:
                    warnings.append(f"text overlay on frame {idx} lacks OCR text; ignored")
                continue
            if subtask.kind == "DIAGRAM" and not annotation.explanation:
                if warnings is not None:
                    warnings.append(f"diagram on frame {idx} lacks explanation; ignored")
                continue
            if subtask.kind == "SPECIAL_MARK" and any(
                    h.ocr_text == annotation.ocr_text and h.explanation == annotation.explanation
                    for h in hits):
                continue
            hits.append(annotation)
        return hits

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        per_frame = list(pool.map(detect_frame, indices))
    return [h for hits in per_frame for h in hits]
