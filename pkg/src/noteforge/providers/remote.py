"""HTTP adapters for remote model providers.

One small adapter per capability; transport errors never leak upward, every
failure surfaces as ProviderFailure carrying the retry count.
"""

from __future__ import annotations

import base64
import io

import httpx
import numpy as np
from PIL import Image

from ..config import PipelineConfig, ProviderSettings
from ..errors import DimensionMismatch, ProviderFailure
from ..ingest import TranscriptSegment
from .base import (
    CaptionResult,
    DetectionResult,
    EmbeddingVector,
    StructuredPrompt,
    validated_completion,
)
from .templates import SUBTASK_TEMPLATE_IDS


def _frame_b64(frame) -> str:
    buf = io.BytesIO()
    Image.fromarray(frame.image).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


class _HttpAdapter:
    def __init__(self, settings: ProviderSettings, client: httpx.Client | None = None):
        self.settings = settings
        self._client = client or httpx.Client(timeout=settings.timeout)

    def post(self, path: str, payload: dict) -> dict:
        url = self.settings.endpoint.rstrip("/") + path
        headers = {}
        if self.settings.auth:
            headers["Authorization"] = f"Bearer {self.settings.auth}"
        attempts = self.settings.max_retries + 1
        last_error: Exception | None = None
        for attempt in range(attempts):
            try:
                resp = self._client.post(url, json=payload, headers=headers)
                if resp.status_code >= 500:
                    last_error = ProviderFailure(f"server error {resp.status_code}")
                    continue
                resp.raise_for_status()
                return resp.json()
            except (httpx.HTTPError, ValueError) as exc:
                last_error = exc
        raise ProviderFailure(f"{url}: {last_error}", retries=attempts - 1)


class RemoteEmbeddingProvider(_HttpAdapter):
    def __init__(self, settings: ProviderSettings, client: httpx.Client | None = None):
        super().__init__(settings, client)
        self._dims: dict[str, int] = {}

    def _embed(self, modality: str, payload: dict) -> EmbeddingVector:
        data = self.post("/embed", {"modality": modality, **payload})
        values = np.asarray(data.get("values", []), dtype=np.float64)
        if values.ndim != 1 or len(values) == 0 or not np.all(np.isfinite(values)):
            raise ProviderFailure(f"malformed embedding for {modality}")
        declared = self._dims.setdefault(modality, len(values))
        if len(values) != declared:
            raise DimensionMismatch(
                f"{modality} dim changed mid-run: {declared} -> {len(values)}")
        return EmbeddingVector(values=values, modality=modality, dim=declared)

    def semantic_embed(self, frame) -> EmbeddingVector:
        return self._embed("semantic_image", {"image": _frame_b64(frame)})

    def visual_embed(self, frame) -> EmbeddingVector:
        return self._embed("visual_image", {"image": _frame_b64(frame)})

    def joint_embed_text(self, text: str) -> EmbeddingVector:
        return self._embed("joint_text", {"text": text})

    def joint_embed_image(self, frame) -> EmbeddingVector:
        return self._embed("joint_image", {"image": _frame_b64(frame)})


class RemoteVisionLanguageProvider(_HttpAdapter):
    def caption_pair(self, prev, cur, context: str = "") -> CaptionResult:
        prompt = StructuredPrompt("frame_caption", {"context": context}, "caption")

        def fetch(p: StructuredPrompt, hint: str | None) -> dict:
            payload = {"prompt": p.render() + (f"\n\n{hint}" if hint else ""),
                       "current": _frame_b64(cur)}
            if prev is not None:
                payload["previous"] = _frame_b64(prev)
            return self.post("/caption", payload)

        data = validated_completion(fetch, prompt)
        kind = "CHANGE" if prev is None else data["kind"]  # boundary rule
        return CaptionResult(kind=kind, text=str(data.get("text", "")))

    def complete_structured(self, prompt: StructuredPrompt) -> dict:
        def fetch(p: StructuredPrompt, hint: str | None) -> dict:
            text = p.render()
            if hint:
                text = f"{text}\n\n{hint}"
            data = self.post("/complete", {
                "template_id": p.template_id,
                "prompt": text,
                "response_schema_id": p.response_schema_id,
            })
            return data.get("response", data)

        return validated_completion(fetch, prompt)

    def detect_annotations(self, frame, subtask: str, transcript_window: str,
                           prior: str = "") -> DetectionResult:
        prompt = StructuredPrompt(
            SUBTASK_TEMPLATE_IDS[subtask],
            {"transcript_window": transcript_window, "prior": prior},
            "detection")

        def fetch(p: StructuredPrompt, hint: str | None) -> dict:
            return self.post("/detect", {
                "subtask": subtask,
                "prompt": p.render() + (f"\n\n{hint}" if hint else ""),
                "image": _frame_b64(frame),
            })

        data = validated_completion(fetch, prompt)
        return DetectionResult(
            positive=data["positive"],
            ocr_text=str(data.get("ocr_text", "")),
            explanation=str(data.get("explanation", "")),
        )


class RemoteTranscriptionProvider(_HttpAdapter):
    def transcribe(self, audio) -> list[TranscriptSegment]:
        payload = {
            "sample_rate": audio.sample_rate,
            "pcm16": base64.b64encode(audio.samples.tobytes()).decode("ascii"),
        }
        data = self.post("/transcribe", payload)
        segments = []
        for i, item in enumerate(data.get("segments", [])):
            segments.append(TranscriptSegment(
                seg_id=i, text=str(item.get("text", "")),
                t_s=float(item.get("t_s", 0.0)), t_e=float(item.get("t_e", 0.0))))
        return segments


class RemoteDepthProvider(_HttpAdapter):
    def estimate_depth(self, frame) -> np.ndarray:
        data = self.post("/depth", {"image": _frame_b64(frame)})
        depth = np.asarray(data.get("depth", []), dtype=np.float64)
        expected = frame.image.shape[:2]
        if depth.shape != expected:
            raise ProviderFailure(f"depth shape {depth.shape} != frame {expected}")
        if not np.all(np.isfinite(depth)) or depth.min() < 0.0 or depth.max() > 1.0:
            raise ProviderFailure("depth map outside [0, 1] or non-finite")
        return depth


def build_remote_providers(config: PipelineConfig) -> "ProviderBundle":
    from .base import ProviderBundle

    return ProviderBundle(
        embed=RemoteEmbeddingProvider(config.embed),
        vlm=RemoteVisionLanguageProvider(config.vlm),
        asr=RemoteTranscriptionProvider(config.asr),
        depth=RemoteDepthProvider(config.depth),
        parallelism=config.vlm.parallelism,
    )
