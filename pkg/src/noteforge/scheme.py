"""The note scheme: the complete intermediate note document every
presentation renders from, plus its invariant validation."""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import StructureGraph, validate_dag

SCHEMA_VERSION = "1"

KEYFRAME_KINDS = ("TEXT_OVERLAY", "DIAGRAM", "SPECIAL_MARK", "PERSPECTIVE")
HIGHLIGHT_KINDS = ("TIP", "WARNING", "QUANTITY")


@dataclass
class Highlight:
    target: str  # CONCISE | VERBOSE
    start: int
    end: int
    kind: str  # TIP | WARNING | QUANTITY

    def to_dict(self) -> dict:
        return {"target": self.target, "start": self.start, "end": self.end, "kind": self.kind}


@dataclass
class StepSummary:
    concise: str
    verbose: str
    emoji: str | None = None
    highlights: list[Highlight] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "concise": self.concise,
            "verbose": self.verbose,
            "emoji": self.emoji,
            "highlights": [h.to_dict() for h in self.highlights],
            "flags": list(self.flags),
        }


@dataclass
class Thumbnail:
    frame_index: int
    timestamp: float
    similarity: float
    asset: str
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"frame_index": self.frame_index, "timestamp": self.timestamp,
                "similarity": self.similarity, "asset": self.asset, "flags": list(self.flags)}


@dataclass
class KeyFrameAnnotation:
    kind: str
    frame_index: int
    timestamp: float
    ocr_text: str = ""
    explanation: str = ""
    asset: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind, "frame_index": self.frame_index,
                "timestamp": self.timestamp, "ocr_text": self.ocr_text,
                "explanation": self.explanation, "asset": self.asset}


@dataclass
class StepNote:
    step_id: str
    t_s: float
    t_e: float
    summary: StepSummary
    thumbnail: Thumbnail | None = None
    gif: str | None = None
    keyframes: list[KeyFrameAnnotation] = field(default_factory=list)
    successors: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "id": self.step_id,
            "t_s": self.t_s,
            "t_e": self.t_e,
            "summary": self.summary.to_dict(),
            "thumbnail": self.thumbnail.to_dict() if self.thumbnail else None,
            "gif": self.gif,
            "keyframes": [k.to_dict() for k in self.keyframes],
            "successors": list(self.successors),
        }


@dataclass
class ChapterNote:
    chapter_id: int
    title: str
    summary: str
    t_s: float
    t_e: float
    gif: str | None = None
    steps: list[StepNote] = field(default_factory=list)
    successors: list[int] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "id": self.chapter_id,
            "title": self.title,
            "summary": self.summary,
            "t_s": self.t_s,
            "t_e": self.t_e,
            "gif": self.gif,
            "steps": [s.to_dict() for s in self.steps],
            "successors": list(self.successors),
            "flags": list(self.flags),
        }


@dataclass
class NoteScheme:
    title: str
    duration: float
    source_uri: str
    chapters: list[ChapterNote] = field(default_factory=list)
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "title": self.title,
            "duration": self.duration,
            "source_uri": self.source_uri,
            "chapters": [c.to_dict() for c in self.chapters],
        }

    def all_steps(self) -> list[StepNote]:
        return [s for c in self.chapters for s in c.steps]

    def step_graph(self, chapter: ChapterNote) -> StructureGraph:
        nodes = [s.step_id for s in chapter.steps]
        edges = [(s.step_id, t) for s in chapter.steps for t in s.successors]
        return StructureGraph(nodes=nodes, edges=edges)

    def chapter_graph(self) -> StructureGraph:
        nodes = [c.chapter_id for c in self.chapters]
        edges = [(c.chapter_id, t) for c in self.chapters for t in c.successors]
        return StructureGraph(nodes=nodes, edges=edges)


def scheme_from_dict(data: dict) -> NoteScheme:
    chapters = []
    for c in data["chapters"]:
        steps = []
        for s in c["steps"]:
            summary = StepSummary(
                concise=s["summary"]["concise"],
                verbose=s["summary"]["verbose"],
                emoji=s["summary"].get("emoji"),
                highlights=[Highlight(**h) for h in s["summary"].get("highlights", [])],
                flags=list(s["summary"].get("flags", [])),
            )
            thumb = s.get("thumbnail")
            steps.append(StepNote(
                step_id=s["id"], t_s=s["t_s"], t_e=s["t_e"], summary=summary,
                thumbnail=Thumbnail(**thumb) if thumb else None,
                gif=s.get("gif"),
                keyframes=[KeyFrameAnnotation(**k) for k in s.get("keyframes", [])],
                successors=list(s.get("successors", [])),
            ))
        chapters.append(ChapterNote(
            chapter_id=c["id"], title=c.get("title", ""), summary=c["summary"],
            t_s=c["t_s"], t_e=c["t_e"], gif=c.get("gif"), steps=steps,
            successors=list(c.get("successors", [])), flags=list(c.get("flags", [])),
        ))
    return NoteScheme(
        title=data["title"], duration=data["duration"], source_uri=data["source_uri"],
        chapters=chapters, schema_version=data["schema_version"],
    )


def validate_scheme(scheme: NoteScheme, assets: set[str] | None = None) -> list[str]:
    """Return invariant violations as field paths; empty list means valid.

    ``assets`` is the set of asset names known to exist; when None the
    existence checks are skipped (structural validation only).
    """
    problems: list[str] = []

    def check_asset(name: str | None, path: str):
        if name and assets is not None and name not in assets:
            problems.append(f"{path}: missing asset {name}")

    if scheme.duration <= 0:
        problems.append("duration: must be > 0")
    chapter_ids = [c.chapter_id for c in scheme.chapters]
    if len(set(chapter_ids)) != len(chapter_ids):
        problems.append("chapters: duplicate ids")

    prev_end = None
    for ci, chapter in enumerate(scheme.chapters):
        path = f"chapters[{ci}]"
        if not chapter.t_s < chapter.t_e:
            problems.append(f"{path}: t_s must be < t_e")
        if prev_end is not None and chapter.t_s < prev_end:
            problems.append(f"{path}: overlaps previous chapter")
        prev_end = chapter.t_e
        check_asset(chapter.gif, f"{path}.gif")
        for succ in chapter.successors:
            if succ not in chapter_ids:
                problems.append(f"{path}.successors: unknown chapter {succ}")

        step_ids = [s.step_id for s in chapter.steps]
        if len(set(step_ids)) != len(step_ids):
            problems.append(f"{path}.steps: duplicate ids")
        prev_step_end = None
        for si, step in enumerate(chapter.steps):
            spath = f"{path}.steps[{si}]"
            if not step.t_s < step.t_e:
                problems.append(f"{spath}: t_s must be < t_e")
            if step.t_s < chapter.t_s or step.t_e > chapter.t_e:
                problems.append(f"{spath}: outside chapter span")
            if prev_step_end is not None and step.t_s < prev_step_end:
                problems.append(f"{spath}: overlaps previous step")
            prev_step_end = step.t_e
            check_asset(step.gif, f"{spath}.gif")
            for succ in step.successors:
                if succ not in step_ids:
                    problems.append(f"{spath}.successors: unknown step {succ}")
            if not step.summary.concise:
                problems.append(f"{spath}.summary.concise: empty")
            if not step.summary.verbose:
                problems.append(f"{spath}.summary.verbose: empty")
            for hi, h in enumerate(step.summary.highlights):
                target = step.summary.concise if h.target == "CONCISE" else step.summary.verbose
                if not (0 <= h.start < h.end <= len(target)):
                    problems.append(f"{spath}.summary.highlights[{hi}]: span out of range")
                if h.kind not in HIGHLIGHT_KINDS:
                    problems.append(f"{spath}.summary.highlights[{hi}]: bad kind {h.kind}")
            if step.thumbnail is not None:
                if not step.t_s <= step.thumbnail.timestamp <= step.t_e:
                    problems.append(f"{spath}.thumbnail: frame outside step span")
                check_asset(step.thumbnail.asset, f"{spath}.thumbnail.asset")
            for ki, kf in enumerate(step.keyframes):
                if kf.kind not in KEYFRAME_KINDS:
                    problems.append(f"{spath}.keyframes[{ki}]: bad kind {kf.kind}")
                if not step.t_s <= kf.timestamp <= step.t_e:
                    problems.append(f"{spath}.keyframes[{ki}]: outside step span")
                check_asset(kf.asset, f"{spath}.keyframes[{ki}].asset")

        if validate_dag(scheme.step_graph(chapter)):
            problems.append(f"{path}: step successor graph is not a DAG")

    if validate_dag(scheme.chapter_graph()):
        problems.append("chapters: successor graph is not a DAG")
    return problems
