"""Provider contracts, value types, and structured-output validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np
from jsonschema import Draft202012Validator

from ..errors import SchemaViolation
from .templates import RESPONSE_SCHEMAS, TEMPLATES


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    modality: str  # semantic_image | visual_image | joint_text | joint_image
    dim: int

    def __post_init__(self):
        if len(self.values) != self.dim:
            raise ValueError(f"|values|={len(self.values)} != dim={self.dim}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("embedding contains non-finite values")


@dataclass(frozen=True)
class StructuredPrompt:
    """A filled template whose response must validate against a named schema."""

    template_id: str
    slots: dict[str, str]
    response_schema_id: str

    def render(self) -> str:
        template = TEMPLATES[self.template_id]
        missing = template.slot_names() - self.slots.keys()
        if missing:
            raise ValueError(f"unfilled slots for {self.template_id}: {sorted(missing)}")
        return template.text.format(**self.slots)


@dataclass(frozen=True)
class CaptionResult:
    """Differential caption payload: a change description or a continuity claim."""

    kind: str  # CHANGE | CONTINUOUS
    text: str


@dataclass(frozen=True)
class DetectionResult:
    positive: bool
    ocr_text: str = ""
    explanation: str = ""


class EmbeddingProvider(Protocol):
    def semantic_embed(self, frame) -> EmbeddingVector: ...
    def visual_embed(self, frame) -> EmbeddingVector: ...
    def joint_embed_text(self, text: str) -> EmbeddingVector: ...
    def joint_embed_image(self, frame) -> EmbeddingVector: ...


class VisionLanguageProvider(Protocol):
    def caption_pair(self, prev, cur, context: str = "") -> CaptionResult: ...
    def complete_structured(self, prompt: StructuredPrompt) -> dict: ...
    def detect_annotations(self, frame, subtask: str, transcript_window: str,
                           prior: str = "") -> DetectionResult: ...


class TranscriptionProvider(Protocol):
    def transcribe(self, audio) -> list: ...


class DepthProvider(Protocol):
    def estimate_depth(self, frame) -> np.ndarray: ...


@dataclass
class ProviderBundle:
    embed: EmbeddingProvider
    vlm: VisionLanguageProvider
    asr: TranscriptionProvider
    depth: DepthProvider
    parallelism: int = 4
    warnings: list[str] = field(default_factory=list)


_validators: dict[str, Draft202012Validator] = {}


def schema_errors(schema_id: str, payload) -> list[str]:
    if schema_id not in RESPONSE_SCHEMAS:
        raise KeyError(f"unknown response schema: {schema_id}")
    if schema_id not in _validators:
        _validators[schema_id] = Draft202012Validator(RESPONSE_SCHEMAS[schema_id])
    return [e.message for e in _validators[schema_id].iter_errors(payload)]


def validated_completion(fetch: Callable[[StructuredPrompt, str | None], dict],
                         prompt: StructuredPrompt) -> dict:
    """Run one completion with a single schema-repair re-ask.

    ``fetch`` performs the actual model call; on a schema violation it is
    called once more with a repair hint, after which the violation surfaces.
    """
    raw = fetch(prompt, None)
    errors = schema_errors(prompt.response_schema_id, raw)
    if not errors:
        return raw
    hint = "The previous response was invalid: " + "; ".join(errors[:3])
    raw = fetch(prompt, hint)
    errors = schema_errors(prompt.response_schema_id, raw)
    if errors:
        raise SchemaViolation(f"{prompt.template_id}: {errors[0]}")
    return raw
