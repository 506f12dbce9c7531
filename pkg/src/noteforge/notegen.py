"""Note content production: summaries with highlights, thumbnails, GIFs,
and final scheme assembly."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .assets import AssetStore
from .dedup import cosine_similarity
from .errors import DanglingReference, EmptyContent, ProviderFailure, SchemaViolation
from .graph import StructureGraph
from .ingest import FrameRecord
from .keyinfo.dynamic import DynamicKeyframe
from .keyinfo.static import StaticAnnotation
from .providers.base import StructuredPrompt
from .providers.mock import first_sentences
from .scheme import (
    ChapterNote,
    Highlight,
    KeyFrameAnnotation,
    NoteScheme,
    StepNote,
    StepSummary,
    Thumbnail,
    validate_scheme,
)
from .structure import Chapter, HierarchicalTranscript, Step

_TERMINAL_RE = re.compile(r"[.!?]")


@dataclass(frozen=True)
class GifSpec:
    chapter_id: object  # chapter id, or step id for per-step animations
    frame_indices: tuple[int, ...]
    fps: float
    asset_name: str


def summarize_chapter(chapter: Chapter, vlm,
                      warnings: list[str] | None = None) -> tuple[str, bool]:
    """One-sentence chapter summary; returns (text, degraded)."""
    content = chapter.content_text()
    if not content:
        raise EmptyContent(f"chapter {chapter.chapter_id} has no content")
    prompt = StructuredPrompt(
        "chapter_summary",
        {"content": content, "chapter_id": str(chapter.chapter_id)},
        "chapter_summary")
    try:
        summary = vlm.complete_structured(prompt)["summary"].strip()
    except (ProviderFailure, SchemaViolation) as exc:
        if warnings is not None:
            warnings.append(f"chapter {chapter.chapter_id} summary fallback: {exc}")
        fallback = chapter.segments[0].text if chapter.segments else chapter.captions[0].text
        return first_sentences(fallback) or fallback, True
    if len(_TERMINAL_RE.findall(summary)) > 1:
        summary = first_sentences(summary)
    return summary, False


def _map_spans(spans: list[dict], concise: str, verbose: str,
               warnings: list[str] | None) -> list[Highlight]:
    highlights = []
    for span in spans:
        target = concise if span["target"] == "CONCISE" else verbose
        start = target.find(span["text"])
        if start < 0:
            if warnings is not None:
                warnings.append(f"highlight text {span['text']!r} not found in "
                                f"{span['target'].lower()} summary; dropped")
            continue
        highlights.append(Highlight(target=span["target"], start=start,
                                    end=start + len(span["text"]), kind=span["kind"]))
    return highlights


def summarize_step(step: Step, annotations: list[StaticAnnotation], vlm,
                   warnings: list[str] | None = None) -> StepSummary:
    """Both verbosity levels in one structured call, with OCR and diagram
    findings fed in and provider-marked key spans mapped to offsets."""
    transcript = " ".join(s.text for s in step.segments)
    caption_text = " ".join(c.text for c in step.captions if c.text)
    if not transcript and not caption_text:
        raise EmptyContent(f"step {step.step_id} has no content")
    ocr = "; ".join(a.ocr_text for a in annotations if a.ocr_text)
    diagrams = "; ".join(a.explanation for a in annotations
                         if a.kind == "DIAGRAM" and a.explanation)
    prompt = StructuredPrompt(
        "step_summary",
        {"step_id": step.step_id, "transcript": transcript or caption_text,
         "ocr_text": ocr, "diagrams": diagrams},
        "step_summary",
    )
    try:
        response = vlm.complete_structured(prompt)
    except (ProviderFailure, SchemaViolation) as exc:
        if warnings is not None:
            warnings.append(f"step {step.step_id} summary fallback: {exc}")
        concise = first_sentences(transcript or caption_text) or "Perform this step."
        return StepSummary(concise=concise, verbose=concise, flags=["DEGRADED"])

    concise = response["concise"].strip()
    verbose = first_sentences(response["verbose"].strip(), 3)
    emoji = response.get("emoji") or None
    highlights = _map_spans(response.get("key_spans", []), concise, verbose, warnings)
    return StepSummary(concise=concise, verbose=verbose, emoji=emoji,
                       highlights=highlights)


def retrieve_thumbnail(step: Step, candidates: list[FrameRecord], summary: StepSummary,
                       embed, frames: list[FrameRecord], store: AssetStore,
                       warnings: list[str] | None = None) -> Thumbnail:
    """Pick the candidate frame closest to the concise summary in the joint
    text-image space; ties go to the earliest timestamp."""
    in_span = [f for f in candidates if step.t_s <= f.timestamp <= step.t_e]
    if not in_span:
        fallback = min((f for f in frames if step.t_s <= f.timestamp <= step.t_e),
                       key=lambda f: abs(f.timestamp - step.t_s),
                       default=min(frames, key=lambda f: abs(f.timestamp - step.t_s)))
        if warnings is not None:
            warnings.append(f"step {step.step_id}: no candidate keyframe, "
                            f"using frame nearest start")
        return Thumbnail(frame_index=fallback.index, timestamp=fallback.timestamp,
                         similarity=0.0, asset=store.put_png(fallback.image),
                         flags=["FALLBACK"])
    try:
        text_vec = embed.joint_embed_text(summary.concise)
        scored = [(cosine_similarity(text_vec, embed.joint_embed_image(f)), f)
                  for f in in_span]
    except ProviderFailure as exc:
        if warnings is not None:
            warnings.append(f"step {step.step_id}: thumbnail scoring failed ({exc}), "
                            f"using frame nearest start")
        nearest = min(in_span, key=lambda f: abs(f.timestamp - step.t_s))
        return Thumbnail(frame_index=nearest.index, timestamp=nearest.timestamp,
                         similarity=0.0, asset=store.put_png(nearest.image),
                         flags=["FALLBACK"])
    best_sim = max(sim for sim, _ in scored)
    best = min((f for sim, f in scored if sim == best_sim), key=lambda f: f.timestamp)
    return Thumbnail(frame_index=best.index, timestamp=best.timestamp,
                     similarity=best_sim, asset=store.put_png(best.image))


def assemble_gif(owner_id, span: tuple[float, float], frames: list[FrameRecord],
                 store: AssetStore, max_frames: int = 40, fps: float = 2.0) -> GifSpec | None:
    """Uniformly subsample the span's frames into a capped animation."""
    if not 0.0 < fps <= 4.0:
        raise ValueError("gif fps must be in (0, 4]")
    if max_frames < 1:
        raise ValueError("gif frame cap must be >= 1")
    t_s, t_e = span
    members = [f for f in frames if t_s <= f.timestamp <= t_e]
    if not members:
        return None
    stride = max(1, math.ceil(len(members) / max_frames))
    picked = members[::stride][:max_frames]
    name = store.put_gif([f.image for f in picked], fps)
    return GifSpec(chapter_id=owner_id, frame_indices=tuple(f.index for f in picked),
                   fps=fps, asset_name=name)


def _attach_index(steps: list[StepNote], duration: float):
    """Map a timestamp to its containing step; boundary ties go to the later
    step, the video end to the last step."""
    def find(t: float) -> StepNote | None:
        owner = None
        for step in steps:
            if step.t_s <= t < step.t_e:
                owner = step
            if t == step.t_s:  # later step wins the shared boundary
                owner = step
        if owner is None and steps and t >= steps[-1].t_e:
            owner = steps[-1]
        if owner is None and steps and t <= steps[0].t_s:
            owner = steps[0]
        return owner

    return find


def assemble_scheme(hierarchy: HierarchicalTranscript,
                    chapter_summaries: dict[int, str],
                    step_summaries: dict[str, StepSummary],
                    thumbnails: dict[str, Thumbnail],
                    static_annotations: list[StaticAnnotation],
                    dynamic_keyframes: list[DynamicKeyframe],
                    chapter_gifs: dict[int, GifSpec],
                    step_gifs: dict[str, GifSpec],
                    frames: list[FrameRecord],
                    store: AssetStore,
                    title: str, duration: float, source_uri: str) -> NoteScheme:
    """Integrate every extracted artifact into one scheme and gate it on the
    full invariant check."""
    chapters: list[ChapterNote] = []
    for chapter in hierarchy.chapters:
        steps = []
        for step in chapter.steps:
            steps.append(StepNote(
                step_id=step.step_id, t_s=step.t_s, t_e=step.t_e,
                summary=step_summaries[step.step_id],
                thumbnail=thumbnails.get(step.step_id),
                gif=step_gifs[step.step_id].asset_name if step.step_id in step_gifs else None,
                successors=sorted(
                    hierarchy.step_graphs[chapter.chapter_id].successors(step.step_id)),
            ))
        gif = chapter_gifs.get(chapter.chapter_id)
        chapters.append(ChapterNote(
            chapter_id=chapter.chapter_id, title=chapter.title,
            summary=chapter_summaries[chapter.chapter_id],
            t_s=chapter.t_s, t_e=chapter.t_e,
            gif=gif.asset_name if gif else None,
            steps=steps,
            successors=sorted(hierarchy.chapter_graph.successors(chapter.chapter_id)),
            flags=list(chapter.flags),
        ))

    scheme = NoteScheme(title=title, duration=duration, source_uri=source_uri,
                        chapters=chapters)
    all_steps = scheme.all_steps()
    find_step = _attach_index(all_steps, duration)

    for ann in static_annotations:
        frame = frames[ann.frame_index]
        owner = find_step(frame.timestamp)
        if owner is None:
            raise DanglingReference(f"no step contains static keyframe at "
                                    f"{frame.timestamp:.3f}s")
        owner.keyframes.append(KeyFrameAnnotation(
            kind=ann.kind, frame_index=ann.frame_index, timestamp=frame.timestamp,
            ocr_text=ann.ocr_text, explanation=ann.explanation,
            asset=store.put_png(frame.image)))

    for dyn in dynamic_keyframes:
        frame = frames[dyn.post_frame_index]
        owner = find_step(frame.timestamp)
        if owner is None:
            raise DanglingReference(f"no step contains dynamic keyframe at "
                                    f"{frame.timestamp:.3f}s")
        explanation = "Perspective change onto the same subject."
        if dyn.low_confidence:
            explanation += " (depth unverified)"
        owner.keyframes.append(KeyFrameAnnotation(
            kind="PERSPECTIVE", frame_index=dyn.post_frame_index,
            timestamp=frame.timestamp, explanation=explanation,
            asset=store.put_png(frame.image)))

    for step in all_steps:
        step.keyframes.sort(key=lambda k: (k.timestamp, k.kind))

    problems = validate_scheme(scheme, assets=store.names())
    if problems:
        raise DanglingReference("; ".join(problems[:5]))
    return scheme


def edges_match(scheme: NoteScheme, chapter_graph: StructureGraph,
                step_graphs: dict[int, StructureGraph]) -> bool:
    """True when successors lists and structure graphs induce identical edges."""
    if set(scheme.chapter_graph().edges) != set(chapter_graph.edges):
        return False
    for chapter in scheme.chapters:
        got = set(scheme.step_graph(chapter).edges)
        want = set(step_graphs[chapter.chapter_id].edges)
        if got != want:
            return False
    return True
