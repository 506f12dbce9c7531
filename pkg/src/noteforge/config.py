"""Pipeline configuration with file and environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path


@dataclass
class ProviderSettings:
    """Connection settings for one remote provider capability."""

    endpoint: str = ""
    auth: str = ""
    timeout: float = 30.0
    max_retries: int = 2
    parallelism: int = 4

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")


@dataclass
class DynamicThresholds:
    """Decision rule for perspective-change boundaries (all must hold)."""

    semantic_min: float = 0.75
    keypoint_min: float = 0.10
    ssim_global_max: float = 0.60
    ssim_center_max: float = 0.70
    hist_min: float = 0.15
    depth_min: float = 0.15


@dataclass
class PipelineConfig:
    sample_rate: float = 1.0
    max_dimension: int = 512
    semantic_threshold: float = 0.92
    visual_threshold: float = 0.85
    dedup_mode: str = "consecutive"  # or "last_kept"
    scene_threshold: float = 0.30
    dynamic: DynamicThresholds = field(default_factory=DynamicThresholds)
    transcript_window: float = 10.0  # seconds of context around a frame
    snap_window: float = 1.0  # boundary snap to transcript edges
    caption_context_chars: int = 8000
    gif_max_frames: int = 40
    gif_fps: float = 2.0
    step_gifs: bool = True
    mock: bool = False
    mock_dir: str = ""
    seed: int = 0
    embed_dim: int = 32
    max_concurrent_jobs: int = 2
    vlm: ProviderSettings = field(default_factory=ProviderSettings)
    embed: ProviderSettings = field(default_factory=ProviderSettings)
    depth: ProviderSettings = field(default_factory=ProviderSettings)
    asr: ProviderSettings = field(default_factory=ProviderSettings)

    @classmethod
    def load(cls, path: str | Path | None = None, env: dict | None = None) -> "PipelineConfig":
        """Build a config from an optional JSON file plus environment overrides."""
        data: dict = {}
        if path is not None:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        cfg = cls.from_dict(data)
        env = os.environ if env is None else env
        cfg.vlm.endpoint = env.get("NOTEFORGE_VLM_URL", cfg.vlm.endpoint)
        cfg.vlm.auth = env.get("NOTEFORGE_VLM_KEY", cfg.vlm.auth)
        cfg.embed.endpoint = env.get("NOTEFORGE_EMBED_URL", cfg.embed.endpoint)
        cfg.depth.endpoint = env.get("NOTEFORGE_DEPTH_URL", cfg.depth.endpoint)
        cfg.asr.endpoint = env.get("NOTEFORGE_ASR_URL", cfg.asr.endpoint)
        cfg.mock_dir = env.get("NOTEFORGE_MOCK_DIR", cfg.mock_dir)
        return cfg

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        kwargs = {}
        nested = {
            "dynamic": DynamicThresholds,
            "vlm": ProviderSettings,
            "embed": ProviderSettings,
            "depth": ProviderSettings,
            "asr": ProviderSettings,
        }
        names = {f.name for f in fields(cls)}
        for key, value in data.items():
            if key not in names:
                raise ValueError(f"unknown config key: {key}")
            if key in nested:
                kwargs[key] = nested[key](**value)
            else:
                kwargs[key] = value
        return cls(**kwargs)

    def to_dict(self) -> dict:
        def convert(obj):
            if hasattr(obj, "__dataclass_fields__"):
                return {f.name: convert(getattr(obj, f.name)) for f in fields(obj)}
            return obj

        return convert(self)
