"""Deterministic providers driven by fixture tables.

Every output is a pure function of the inputs plus the run seed; fixture
tables (JSON files in the mock directory) override specific digests so tests
can force exact similarities, captions, structures, and detections.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ProviderFailure
from ..ingest import TranscriptSegment
from ..rasters import luminance
from .base import (
    CaptionResult,
    DetectionResult,
    EmbeddingVector,
    StructuredPrompt,
    validated_completion,
)
from .templates import STATIC_SUBTASK_ORDER


@dataclass
class MockTables:
    embeddings: dict = field(default_factory=dict)
    captions: dict = field(default_factory=dict)
    completions: list = field(default_factory=list)
    detections: dict = field(default_factory=dict)


def load_mock_tables(directory: str | Path | None) -> MockTables:
    tables = MockTables()
    if not directory:
        return tables
    directory = Path(directory)
    for name in ("embeddings", "captions", "completions", "detections"):
        path = directory / f"{name}.json"
        if path.exists():
            setattr(tables, name, json.loads(path.read_text(encoding="utf-8")))
    if isinstance(tables.completions, dict):
        tables.completions = tables.completions.get("entries", [])
    return tables


def _seed_int(*parts: str) -> int:
    h = hashlib.sha256(":".join(parts).encode("utf-8")).digest()
    return int.from_bytes(h[:8], "big")


class MockEmbeddingProvider:
    """Unit vectors seeded by content digest, with exact-cosine overrides.

    An override entry assigns a digest (or text) to a label with a target
    cosine. Entries sharing a label get cosine(a, b) = cos_a * cos_b exactly;
    entries with different labels are exactly orthogonal. An entry with
    cos = 1.0 is the label's anchor, so pairing it with another entry forces
    that entry's exact cosine value.
    """

    def __init__(self, seed: int = 0, dim: int = 32, overrides: dict | None = None):
        self.seed = seed
        self.dim = int((overrides or {}).get("dim", dim))
        if self.dim < 8:
            raise ValueError("embedding dim must be >= 8")
        self._overrides: dict[tuple[str, str], np.ndarray] = {}
        self._build_overrides((overrides or {}).get("entries", []))

    def _build_overrides(self, entries: list[dict]) -> None:
        # labels are shared across modalities: that is what lets a joint_text
        # anchor force exact cosines against joint_image entries
        labels: dict[str, int] = {}
        for m, entry in enumerate(entries):
            modality = entry["modality"]
            key = entry.get("digest") or entry.get("text")
            if key is None:
                raise ValueError("override entry needs a digest or text key")
            if entry["label"] not in labels:
                labels[entry["label"]] = len(labels)
            label_axis = 2 * labels[entry["label"]]
            entry_axis = 2 * m + 1
            if max(label_axis, entry_axis) >= self.dim:
                raise ValueError("override table too large for embedding dim")
            cos = float(entry["cos"])
            vec = np.zeros(self.dim)
            vec[label_axis] = cos
            vec[entry_axis] = np.sqrt(max(0.0, 1.0 - cos * cos))
            self._overrides[(modality, key)] = vec

    def _vector(self, modality: str, key: str) -> EmbeddingVector:
        override = self._overrides.get((modality, key))
        if override is not None:
            return EmbeddingVector(values=override.copy(), modality=modality, dim=self.dim)
        rng = np.random.default_rng(_seed_int(str(self.seed), modality, key))
        raw = rng.standard_normal(self.dim)
        raw /= np.linalg.norm(raw)
        return EmbeddingVector(values=raw, modality=modality, dim=self.dim)

    def semantic_embed(self, frame) -> EmbeddingVector:
        return self._vector("semantic_image", frame.content_digest)

    def visual_embed(self, frame) -> EmbeddingVector:
        return self._vector("visual_image", frame.content_digest)

    def joint_embed_text(self, text: str) -> EmbeddingVector:
        return self._vector("joint_text", text)

    def joint_embed_image(self, frame) -> EmbeddingVector:
        return self._vector("joint_image", frame.content_digest)


_SENTENCE_RE = re.compile(r"[^.!?]*[.!?]")


def first_sentences(text: str, count: int = 1) -> str:
    found = _SENTENCE_RE.findall(text)
    if not found:
        return text.strip()
    return " ".join(s.strip() for s in found[:count])


class MockVisionLanguageProvider:
    """Captioning, structured completion, and detection from fixture tables.

    Lookups key on frame digests (captions, detections) or on template id
    plus matching ``when`` slot values (completions). Unmatched inputs fall
    back to schema-valid synthesized defaults so arbitrary videos still run.
    """

    def __init__(self, tables: MockTables | None = None, seed: int = 0):
        self.tables = tables or MockTables()
        self.seed = seed
        self._sequence_counts: dict[int, int] = {}

    # -- captions ----------------------------------------------------------

    def caption_pair(self, prev, cur, context: str = "") -> CaptionResult:
        scripted = self.tables.captions.get("by_digest", {}).get(cur.content_digest)
        if prev is not None and prev.content_digest == cur.content_digest:
            return CaptionResult(kind="CONTINUOUS", text="")
        text = scripted if scripted is not None else f"View changes to pattern {cur.content_digest[:8]}."
        return CaptionResult(kind="CHANGE", text=text)

    # -- structured completion ----------------------------------------------

    def complete_structured(self, prompt: StructuredPrompt) -> dict:
        prompt.render()  # enforce the filled-slots contract like a real call
        return validated_completion(self._fetch, prompt)

    def _fetch(self, prompt: StructuredPrompt, repair_hint: str | None) -> dict:
        for idx, entry in enumerate(self.tables.completions):
            if entry.get("template_id") != prompt.template_id:
                continue
            when = entry.get("when", {})
            if all(str(prompt.slots.get(k)) == str(v) for k, v in when.items()):
                if entry.get("fail"):
                    raise ProviderFailure(f"scripted failure for {prompt.template_id}")
                if "responses" in entry:
                    n = self._sequence_counts.get(idx, 0)
                    self._sequence_counts[idx] = n + 1
                    seq = entry["responses"]
                    return seq[min(n, len(seq) - 1)]
                return entry["response"]
        return self._default(prompt)

    def _default(self, prompt: StructuredPrompt) -> dict:
        slots = prompt.slots
        if prompt.template_id == "chapter_cluster":
            return {"chapters": [{"t_s": 0.0, "t_e": float(slots["duration"]), "title": ""}]}
        if prompt.template_id == "step_extract":
            return {"steps": [{"t_s": float(slots["t_s"]), "t_e": float(slots["t_e"])}]}
        if prompt.template_id == "relation_classify":
            ids = [e["id"] for e in json.loads(slots["elements"])]
            relations = [{"kind": "SEQUENTIAL", "from": a, "to": b} for a, b in zip(ids, ids[1:])]
            return {"relations": relations}
        if prompt.template_id == "chapter_summary":
            return {"summary": first_sentences(slots["content"]) or "Chapter overview."}
        if prompt.template_id == "step_summary":
            concise = first_sentences(slots["transcript"]) or "Perform this step."
            verbose = first_sentences(slots["transcript"], 2) or concise
            if slots.get("ocr_text"):
                verbose = f"{verbose} On-screen text: {slots['ocr_text']}."
            return {"concise": concise, "verbose": verbose, "key_spans": []}
        if prompt.template_id == "static_plan":
            return {"subtasks": [{"kind": k, "instructions": ""} for k in STATIC_SUBTASK_ORDER]}
        raise ProviderFailure(f"no mock behavior for template {prompt.template_id}")

    # -- detection -----------------------------------------------------------

    def detect_annotations(self, frame, subtask: str, transcript_window: str,
                           prior: str = "") -> DetectionResult:
        per_frame = self.tables.detections.get(frame.content_digest, {})
        entry = per_frame.get(subtask)
        if entry is None:
            return DetectionResult(positive=False)
        if entry.get("fail"):
            raise ProviderFailure(f"scripted detection failure for {subtask}")
        return DetectionResult(
            positive=bool(entry.get("positive", False)),
            ocr_text=entry.get("ocr_text", ""),
            explanation=entry.get("explanation", ""),
        )


class MockTranscriptionProvider:
    """Reads the scripted transcript sidecar next to the source video."""

    def transcribe(self, audio) -> list[TranscriptSegment]:
        sidecar = Path(audio.source_path).with_suffix(".transcript.tsv")
        if not sidecar.exists():
            return []
        segments: list[TranscriptSegment] = []
        for i, line in enumerate(sidecar.read_text(encoding="utf-8").splitlines()):
            if not line.strip():
                continue
            t_s, t_e, text = line.split("\t", 2)
            segments.append(TranscriptSegment(seg_id=i, text=text, t_s=float(t_s), t_e=float(t_e)))
        return segments


class MockDepthProvider:
    """Relative depth equal to frame luminance scaled into [0, 1]."""

    def __init__(self, fail_digests: set[str] | None = None):
        self.fail_digests = fail_digests or set()

    def estimate_depth(self, frame) -> np.ndarray:
        if frame.content_digest in self.fail_digests:
            raise ProviderFailure("scripted depth failure")
        return luminance(frame.image) / 255.0


def build_mock_providers(config) -> "ProviderBundle":
    from .base import ProviderBundle

    tables = load_mock_tables(config.mock_dir or None)
    overrides = tables.embeddings or None
    return ProviderBundle(
        embed=MockEmbeddingProvider(seed=config.seed, dim=config.embed_dim, overrides=overrides),
        vlm=MockVisionLanguageProvider(tables=tables, seed=config.seed),
        asr=MockTranscriptionProvider(),
        depth=MockDepthProvider(),
        parallelism=config.vlm.parallelism,
    )
