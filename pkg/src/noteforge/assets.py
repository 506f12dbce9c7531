"""Content-addressed asset store for one job (thumbnails, keyframes, GIFs)."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .rasters import digest_bytes


class AssetStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def put_bytes(self, data: bytes, ext: str) -> str:
        name = f"{digest_bytes(data)}.{ext}"
        target = self.root / name
        if not target.exists():
            tmp = target.with_suffix(target.suffix + ".tmp")
            tmp.write_bytes(data)
            tmp.rename(target)
        return name

    def put_png(self, image: np.ndarray) -> str:
        buf = io.BytesIO()
        Image.fromarray(image).save(buf, format="PNG")
        return self.put_bytes(buf.getvalue(), "png")

    def put_gif(self, images: list[np.ndarray], fps: float) -> str:
        frames = [Image.fromarray(img) for img in images]
        buf = io.BytesIO()
        frames[0].save(buf, format="GIF", save_all=True, append_images=frames[1:],
                       duration=int(round(1000.0 / fps)), loop=0)
        return self.put_bytes(buf.getvalue(), "gif")

    def exists(self, name: str) -> bool:
        return (self.root / name).exists()

    def path(self, name: str) -> Path:
        return self.root / name

    def names(self) -> set[str]:
        return {p.name for p in self.root.iterdir() if p.is_file()}
