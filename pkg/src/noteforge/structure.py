"""Hierarchical transcript extraction: chapters, steps, and relation graphs."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .config import PipelineConfig
from .dedup import KeyframeSet
from .errors import CycleDetected, EmptyContent, ProviderFailure, SchemaViolation
from .graph import StructureGraph, topological_layers, validate_dag  # noqa: F401  (re-export)
from .ingest import FrameRecord, TranscriptSegment, transcript_window
from .providers.base import StructuredPrompt


@dataclass(frozen=True)
class DifferentialCaption:
    frame_index: int
    timestamp: float
    kind: str  # CHANGE | CONTINUOUS
    text: str


@dataclass
class Chapter:
    chapter_id: int
    t_s: float
    t_e: float
    title: str = ""
    captions: list[DifferentialCaption] = field(default_factory=list)
    segments: list[TranscriptSegment] = field(default_factory=list)
    steps: list["Step"] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    @property
    def member_frames(self) -> list[int]:
        return [c.frame_index for c in self.captions]

    def content_text(self) -> str:
        lines = [f"[{c.frame_index} @ {c.timestamp:.1f}s] {c.text}"
                 for c in self.captions if c.text]
        lines += [f"[{s.t_s:.1f}-{s.t_e:.1f}] {s.text}" for s in self.segments]
        return "\n".join(lines)


@dataclass
class Step:
    step_id: str  # "<chapter>.<ordinal>"
    chapter_id: int
    t_s: float
    t_e: float
    captions: list[DifferentialCaption] = field(default_factory=list)
    segments: list[TranscriptSegment] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def content_text(self) -> str:
        lines = [f"[{c.frame_index} @ {c.timestamp:.1f}s] {c.text}"
                 for c in self.captions if c.text]
        lines += [f"[{s.t_s:.1f}-{s.t_e:.1f}] {s.text}" for s in self.segments]
        return "\n".join(lines)


@dataclass(frozen=True)
class Relation:
    """SEQUENTIAL carries from/to (to=None marks a singleton chain);
    PARALLEL carries the member group."""

    kind: str
    from_id: object = None
    to_id: object = None
    members: tuple = ()


@dataclass
class HierarchicalTranscript:
    chapters: list[Chapter]
    chapter_graph: StructureGraph
    step_graphs: dict[int, StructureGraph]


def cap_text(text: str, limit: int) -> str:
    """Bound prompt context, dropping the oldest lines first."""
    if len(text) <= limit:
        return text
    kept = text[len(text) - limit:]
    cut = kept.find("\n")
    if 0 <= cut < len(kept) - 1:
        kept = kept[cut + 1:]
    return kept


# ---------------------------------------------------------------------------
# Differential captioning
# ---------------------------------------------------------------------------

def caption_keyframes(keyframes: KeyframeSet, frames: list[FrameRecord], vlm,
                      segments: list[TranscriptSegment] | None = None,
                      parallelism: int = 4, context_radius: float = 10.0,
                      warnings: list[str] | None = None) -> list[DifferentialCaption]:
    """One caption per keyframe, each compared against the previous keyframe."""
    if not keyframes.indices:
        raise ValueError("keyframes must be nonempty")
    segments = segments or []
    ordered = list(keyframes.indices)

    def one(pos: int) -> DifferentialCaption:
        idx = ordered[pos]
        cur = frames[idx]
        prev = frames[ordered[pos - 1]] if pos > 0 else None
        context = transcript_window(segments, cur.timestamp, context_radius)
        try:
            result = vlm.caption_pair(prev, cur, context)
            kind, text = result.kind, result.text
        except SchemaViolation as exc:
            if warnings is not None:
                warnings.append(f"caption for frame {idx} invalid, downgraded: {exc}")
            kind, text = "CONTINUOUS", ""
        if pos == 0 and kind != "CHANGE":
            if warnings is not None:
                warnings.append("first keyframe caption coerced to CHANGE")
            kind = "CHANGE"
            text = text or f"Opening view at {cur.timestamp:.1f}s."
        return DifferentialCaption(frame_index=idx, timestamp=cur.timestamp,
                                   kind=kind, text=text)

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        return list(pool.map(one, range(len(ordered))))


# ---------------------------------------------------------------------------
# Span normalization shared by chapters and steps
# ---------------------------------------------------------------------------

def snap_boundary(t: float, segments: list[TranscriptSegment], window: float) -> float:
    """Snap a time to the nearest transcript segment edge within the window."""
    best, best_d = t, window
    for seg in segments:
        for edge in (seg.t_s, seg.t_e):
            d = abs(edge - t)
            if d < best_d:
                best, best_d = edge, d
    return best


def normalize_spans(raw: list[tuple[float, float]], lo: float, hi: float,
                    segments: list[TranscriptSegment], snap_window: float,
                    warnings: list[str] | None = None,
                    label: str = "span") -> list[tuple[float, float, int]]:
    """Clip provider spans into [lo, hi], snap, order, and tile without gaps.

    Each returned span carries the index of the raw span it came from (-1 for
    the whole-range fallback) so callers can keep provider metadata aligned
    when degenerate spans get dropped.
    """
    snapped = []
    for i, (t_s, t_e) in enumerate(sorted(raw)):
        t_s = snap_boundary(t_s, segments, snap_window)
        t_e = snap_boundary(t_e, segments, snap_window)
        t_s, t_e = max(lo, min(t_s, hi)), max(lo, min(t_e, hi))
        if t_e > t_s:
            snapped.append((t_s, t_e, i))
        elif warnings is not None:
            warnings.append(f"{label} [{t_s:.3f},{t_e:.3f}) collapsed; dropped")
    snapped.sort()
    tiled: list[tuple[float, float, int]] = []
    for t_s, t_e, i in snapped:
        if tiled:
            prev_s, prev_e, prev_i = tiled[-1]
            if t_s < prev_e:
                if warnings is not None:
                    warnings.append(f"{label} start {t_s:.3f} overlaps; clipped to {prev_e:.3f}")
                t_s = prev_e
            elif t_s > prev_e:
                tiled[-1] = (prev_s, t_s, prev_i)  # assign the gap to the preceding span
            if t_s >= t_e:
                continue
        tiled.append((t_s, t_e, i))
    if not tiled:
        return [(lo, hi, -1)]
    first_s, first_e, first_i = tiled[0]
    tiled[0] = (lo, first_e, first_i)
    last_s, last_e, last_i = tiled[-1]
    tiled[-1] = (last_s, hi, last_i)
    return [(s, e, i) for s, e, i in tiled if e > s]


def _slice_content(t_s: float, t_e: float, closed: bool,
                   captions: list[DifferentialCaption],
                   segments: list[TranscriptSegment]):
    def inside(t: float) -> bool:
        return t_s <= t < t_e or (closed and t == t_e)

    return ([c for c in captions if inside(c.timestamp)],
            [s for s in segments if inside(s.t_s)])


# ---------------------------------------------------------------------------
# Chapters and steps
# ---------------------------------------------------------------------------

def cluster_chapters(captions: list[DifferentialCaption],
                     segments: list[TranscriptSegment],
                     duration: float, vlm, config: PipelineConfig | None = None,
                     warnings: list[str] | None = None) -> list[Chapter]:
    """Group the captioned timeline into chapters tiling [0, duration]."""
    if not captions and not segments:
        raise EmptyContent("need at least one caption or transcript segment")
    config = config or PipelineConfig()
    caption_text = cap_text("\n".join(
        f"[{c.frame_index} @ {c.timestamp:.1f}s] {c.kind}: {c.text}" for c in captions),
        config.caption_context_chars)
    transcript_text = cap_text("\n".join(
        f"[{s.t_s:.1f}-{s.t_e:.1f}] {s.text}" for s in segments),
        config.caption_context_chars)
    prompt = StructuredPrompt(
        "chapter_cluster",
        {"captions": caption_text, "transcript": transcript_text, "duration": str(duration)},
        "chapter_list",
    )
    degraded = False
    try:
        response = vlm.complete_structured(prompt)
        raw = [(float(c["t_s"]), float(c["t_e"])) for c in response["chapters"]]
        titles = [c.get("title", "") for c in response["chapters"]]
    except (SchemaViolation, ProviderFailure) as exc:
        if warnings is not None:
            warnings.append(f"chapter clustering failed, single-chapter fallback: {exc}")
        raw, titles, degraded = [(0.0, duration)], [""], True

    order = sorted(range(len(raw)), key=lambda i: raw[i])
    titles = [titles[i] for i in order]
    spans = normalize_spans(raw, 0.0, duration, segments,
                            config.snap_window, warnings, "chapter")
    chapters = []
    for i, (t_s, t_e, raw_index) in enumerate(spans):
        closed = i == len(spans) - 1
        caps, segs = _slice_content(t_s, t_e, closed, captions, segments)
        chapter = Chapter(chapter_id=i + 1, t_s=t_s, t_e=t_e,
                          title=titles[raw_index] if 0 <= raw_index < len(titles) else "",
                          captions=caps, segments=segs)
        if degraded:
            chapter.flags.append("DEGRADED")
        if not caps:
            chapter.flags.append("CAPTION_SPARSE")
        chapters.append(chapter)
    return chapters


def extract_steps(chapter: Chapter, vlm, config: PipelineConfig | None = None,
                  warnings: list[str] | None = None) -> list[Step]:
    """Split one chapter into at least one step, clipped and tiled to its span."""
    if not chapter.captions and not chapter.segments:
        raise EmptyContent(f"chapter {chapter.chapter_id} has no content")
    config = config or PipelineConfig()
    prompt = StructuredPrompt(
        "step_extract",
        {"chapter_id": str(chapter.chapter_id),
         "content": cap_text(chapter.content_text(), config.caption_context_chars),
         "t_s": str(chapter.t_s), "t_e": str(chapter.t_e)},
        "step_list",
    )
    degraded = False
    try:
        response = vlm.complete_structured(prompt)
        raw = [(float(s["t_s"]), float(s["t_e"])) for s in response["steps"]]
    except (SchemaViolation, ProviderFailure) as exc:
        if warnings is not None:
            warnings.append(f"step extraction failed for chapter {chapter.chapter_id}, "
                            f"single-step fallback: {exc}")
        raw, degraded = [(chapter.t_s, chapter.t_e)], True

    spans = normalize_spans(raw, chapter.t_s, chapter.t_e, chapter.segments,
                            config.snap_window, warnings,
                            f"chapter {chapter.chapter_id} step")
    steps = []
    for j, (t_s, t_e, _) in enumerate(spans):
        closed = j == len(spans) - 1
        caps, segs = _slice_content(t_s, t_e, closed, chapter.captions, chapter.segments)
        step = Step(step_id=f"{chapter.chapter_id}.{j + 1}", chapter_id=chapter.chapter_id,
                    t_s=t_s, t_e=t_e, captions=caps, segments=segs)
        if degraded:
            step.flags.append("DEGRADED")
        steps.append(step)
    return steps


# ---------------------------------------------------------------------------
# Relations and graph construction
# ---------------------------------------------------------------------------

def classify_relations(elements: list[tuple[object, float]], content: str, level: str,
                       vlm, warnings: list[str] | None = None) -> list[Relation]:
    """Ask the provider for sequential/parallel relations and validate ids.

    Relations naming unknown ids are dropped; elements left uncovered are
    chained to their temporal neighbor so every element appears somewhere.
    """
    if not elements:
        raise EmptyContent("no elements to relate")
    ids = [e[0] for e in elements]
    id_set = set(ids)
    prompt = StructuredPrompt(
        "relation_classify",
        {"level": level,
         "elements": json.dumps([{"id": i, "t_s": t} for i, t in elements]),
         "content": cap_text(content, 8000)},
        "relation_list",
    )
    raw: list[dict]
    try:
        raw = vlm.complete_structured(prompt)["relations"]
    except (SchemaViolation, ProviderFailure) as exc:
        if warnings is not None:
            warnings.append(f"relation classification failed for {level}s, "
                            f"sequential fallback: {exc}")
        raw = [{"kind": "SEQUENTIAL", "from": a, "to": b} for a, b in zip(ids, ids[1:])]

    relations: list[Relation] = []
    covered: set = set()
    for item in raw:
        if item["kind"] == "SEQUENTIAL":
            a, b = item["from"], item["to"]
            if a not in id_set or b not in id_set:
                if warnings is not None:
                    warnings.append(f"relation names unknown id ({a!r}->{b!r}); dropped")
                continue
            relations.append(Relation(kind="SEQUENTIAL", from_id=a, to_id=b))
            covered.update((a, b))
        else:
            members = [m for m in item["members"] if m in id_set]
            dropped = [m for m in item["members"] if m not in id_set]
            if dropped and warnings is not None:
                warnings.append(f"parallel group names unknown ids {dropped}; dropped")
            if len(members) < 2:
                continue
            relations.append(Relation(kind="PARALLEL", members=tuple(members)))
            covered.update(members)

    for pos, node in enumerate(ids):
        if node in covered:
            continue
        if pos > 0:
            relations.append(Relation(kind="SEQUENTIAL", from_id=ids[pos - 1], to_id=node))
        elif len(ids) > 1:
            relations.append(Relation(kind="SEQUENTIAL", from_id=node, to_id=ids[1]))
        else:
            relations.append(Relation(kind="SEQUENTIAL", from_id=node, to_id=None))
        covered.add(node)
    return relations


def build_dag(elements: list[tuple[object, float]], relations: list[Relation],
              warnings: list[str] | None = None) -> StructureGraph:
    """Encode relations as predecessor-to-successor edges, dropping any edge
    whose addition would close a cycle."""
    graph = StructureGraph(nodes=[e[0] for e in elements])
    start_time = dict(elements)

    def add(a, b):
        if a == b or (a, b) in set(graph.edges):
            return
        if not graph.try_add_edge(a, b):
            if warnings is not None:
                warnings.append(f"edge {a!r}->{b!r} would close a cycle; dropped")

    for rel in relations:
        if rel.kind == "SEQUENTIAL":
            if rel.to_id is not None:
                add(rel.from_id, rel.to_id)
            continue
        members = set(rel.members)
        times = [start_time[m] for m in rel.members]
        lo, hi = min(times), max(times)
        before = [e for e in elements if e[0] not in members and e[1] < lo]
        after = [e for e in elements if e[0] not in members and e[1] > hi]
        predecessor = max(before, key=lambda e: e[1])[0] if before else None
        successor = min(after, key=lambda e: e[1])[0] if after else None
        for m in rel.members:
            if predecessor is not None:
                add(predecessor, m)
            if successor is not None:
                add(m, successor)

    violations = validate_dag(graph)
    cycles = [v for v in violations if v.kind == "CYCLE"]
    if cycles:
        raise CycleDetected(f"repair failed: {cycles}")
    return graph


def build_hierarchy(captions: list[DifferentialCaption],
                    segments: list[TranscriptSegment], duration: float, vlm,
                    config: PipelineConfig | None = None,
                    warnings: list[str] | None = None) -> HierarchicalTranscript:
    """Full structuring pass: chapters, steps, and both graph levels."""
    config = config or PipelineConfig()
    chapters = cluster_chapters(captions, segments, duration, vlm, config, warnings)
    for chapter in chapters:
        if chapter.captions or chapter.segments:
            chapter.steps = extract_steps(chapter, vlm, config, warnings)
        else:
            chapter.steps = [Step(step_id=f"{chapter.chapter_id}.1",
                                  chapter_id=chapter.chapter_id,
                                  t_s=chapter.t_s, t_e=chapter.t_e,
                                  flags=["CAPTION_SPARSE"])]

    chapter_elements = [(c.chapter_id, c.t_s) for c in chapters]
    chapter_content = "\n".join(
        f"Chapter {c.chapter_id} [{c.t_s:.1f}-{c.t_e:.1f}] {c.title}\n{c.content_text()}"
        for c in chapters)
    chapter_relations = classify_relations(chapter_elements, chapter_content,
                                           "chapter", vlm, warnings)
    chapter_graph = build_dag(chapter_elements, chapter_relations, warnings)

    step_graphs: dict[int, StructureGraph] = {}
    for chapter in chapters:
        elements = [(s.step_id, s.t_s) for s in chapter.steps]
        if len(elements) == 1:
            step_graphs[chapter.chapter_id] = StructureGraph(nodes=[elements[0][0]])
            continue
        content = "\n".join(f"Step {s.step_id} [{s.t_s:.1f}-{s.t_e:.1f}]\n{s.content_text()}"
                            for s in chapter.steps)
        relations = classify_relations(elements, content, "step", vlm, warnings)
        step_graphs[chapter.chapter_id] = build_dag(elements, relations, warnings)

    return HierarchicalTranscript(chapters=chapters, chapter_graph=chapter_graph,
                                  step_graphs=step_graphs)
