"""Swappable model capabilities: embeddings, vision-language, speech, depth.

Every capability has a deterministic mock (fixture-table driven) and a
remote HTTP adapter behind the same contract.
"""

from .base import (
    CaptionResult,
    DetectionResult,
    EmbeddingVector,
    ProviderBundle,
    StructuredPrompt,
    validated_completion,
)
from .mock import (
    MockDepthProvider,
    MockEmbeddingProvider,
    MockTranscriptionProvider,
    MockVisionLanguageProvider,
    build_mock_providers,
    load_mock_tables,
)
from .remote import build_remote_providers

__all__ = [
    "CaptionResult",
    "DetectionResult",
    "EmbeddingVector",
    "MockDepthProvider",
    "MockEmbeddingProvider",
    "MockTranscriptionProvider",
    "MockVisionLanguageProvider",
    "ProviderBundle",
    "StructuredPrompt",
    "build_mock_providers",
    "build_remote_providers",
    "load_mock_tables",
    "validated_completion",
]
