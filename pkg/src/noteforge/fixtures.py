"""Deterministic test-video generation: synthetic scenes, scripted sidecar
transcripts, and the mock provider tables that drive them.

Videos are written losslessly (FFV1 in AVI) so decoded rasters equal the
generated ones bit for bit, keeping digests and golden outputs stable.
"""

from __future__ import annotations

import json
import math
import wave
from pathlib import Path

import cv2
import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .rasters import digest

FIXTURE_FPS = 10.0
PANEL_SIZE = (240, 320)  # rows, cols


# ---------------------------------------------------------------------------
# Pattern builders
# ---------------------------------------------------------------------------

def solid_frame(color: tuple[int, int, int], size=PANEL_SIZE) -> np.ndarray:
    img = np.zeros((*size, 3), dtype=np.uint8)
    img[:, :] = color
    return img


def stamp_text(image: np.ndarray, text: str, xy=(40, 100),
               fill=(255, 255, 0)) -> np.ndarray:
    pil = Image.fromarray(image)
    draw = ImageDraw.Draw(pil)
    draw.text(xy, text, fill=fill, font=ImageFont.load_default())
    return np.asarray(pil).copy()


def stamp_mark(image: np.ndarray) -> np.ndarray:
    out = image.copy()
    cv2.circle(out, (160, 120), 40, (255, 40, 40), 3)
    cv2.arrowedLine(out, (60, 60), (130, 105), (255, 40, 40), 3)
    return out


def stamp_diagram(image: np.ndarray) -> np.ndarray:
    out = image.copy()
    for i in range(4):
        y = 60 + i * 35
        cv2.line(out, (60, y), (260, y), (20, 20, 20), 2)
    for j in range(4):
        x = 60 + j * 67
        cv2.line(out, (x, 60), (x, 165), (20, 20, 20), 2)
    return stamp_text(out, "PLAN", (70, 70), fill=(20, 20, 20))


def zoom_panel(seed: int = 1, n_shapes: int = 18) -> np.ndarray:
    """Wide view: bright textured center panel with distinct shapes on a
    darker surround. Built so a 2x zoom onto the center keeps the subject
    (shape matches) while shifting structure, histogram, and median depth."""
    h, w = PANEL_SIZE
    img = np.full((h, w, 3), 64, np.uint8)
    rng = np.random.default_rng(seed)
    cx0, cy0, cx1, cy1 = w // 4, h // 4, 3 * w // 4, 3 * h // 4
    img[cy0:cy1, cx0:cx1] = 153
    stripes = ((np.indices((h, w)).sum(0) % 7) * 4).astype(np.uint8)
    img = cv2.add(img, np.stack([stripes] * 3, -1))
    for i in range(n_shapes):
        x = int(rng.integers(cx0 + 16, cx1 - 16))
        y = int(rng.integers(cy0 + 14, cy1 - 14))
        color = tuple(int(v) for v in rng.integers(0, 256, 3))
        sz = int(rng.integers(6, 16))
        angle = float(rng.uniform(0, 180))
        kind = i % 4
        if kind == 0:
            box = cv2.boxPoints(((x, y), (sz * 2, sz), angle)).astype(np.int32)
            cv2.fillPoly(img, [box], color)
        elif kind == 1:
            pts = np.array([[x, y - sz], [x - sz, y + sz], [x + sz, y + sz]])
            cv2.fillPoly(img, [pts], color)
        elif kind == 2:
            cv2.circle(img, (x, y), sz, color, -1)
        else:
            cv2.ellipse(img, (x, y), (sz * 2, sz), angle, 0, 360, color, -1)
    return img


def zoom_closeup(panel: np.ndarray) -> np.ndarray:
    h, w = panel.shape[:2]
    crop = panel[h // 4:3 * h // 4, w // 4:3 * w // 4]
    return cv2.resize(crop, (w, h), interpolation=cv2.INTER_LINEAR)


# ---------------------------------------------------------------------------
# Low-level writers
# ---------------------------------------------------------------------------

def write_video(path: Path, rgb_frames: list[np.ndarray], fps: float = FIXTURE_FPS) -> None:
    h, w = rgb_frames[0].shape[:2]
    writer = cv2.VideoWriter(str(path), cv2.VideoWriter_fourcc(*"FFV1"), fps, (w, h))
    if not writer.isOpened():
        raise RuntimeError("FFV1 writer unavailable")
    for frame in rgb_frames:
        writer.write(cv2.cvtColor(frame, cv2.COLOR_RGB2BGR))
    writer.release()


def write_tone_wav(path: Path, duration: float, sample_rate: int = 16000,
                   freq: float = 440.0) -> None:
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    samples = (0.3 * 32767 * np.sin(2 * math.pi * freq * t)).astype(np.int16)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(sample_rate)
        wf.writeframes(samples.tobytes())


def write_transcript(path: Path, rows: list[tuple[float, float, str]]) -> None:
    lines = [f"{t_s}\t{t_e}\t{text}" for t_s, t_e, text in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_mock(mock_dir: Path, name: str, payload) -> None:
    mock_dir.mkdir(parents=True, exist_ok=True)
    (mock_dir / f"{name}.json").write_text(
        json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True),
        encoding="utf-8")


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------

def _scenario_solid30(out: Path) -> dict:
    """One second of 30 distinct solid frames at 30 fps; digests exercise the
    sampling grid."""
    frames = [solid_frame(((i * 8) % 256, (255 - i * 5) % 256, (i * 13) % 256))
              for i in range(30)]
    video = out / "solid30.avi"
    write_video(video, frames, fps=30.0)
    return {
        "scenario": "solid30",
        "video": str(video),
        "fps": 30.0,
        "duration": 1.0,
        "frame_digests": [digest(f) for f in frames],
    }


def _scenario_scenes3(out: Path) -> dict:
    """Three solid scenes (red, green, blue) of five seconds each."""
    colors = [(255, 0, 0), (0, 255, 0), (0, 0, 255)]
    frames = []
    for k in range(145):  # 14.5 s at 10 fps
        t = k / FIXTURE_FPS
        frames.append(solid_frame(colors[min(2, int(t // 5))]))
    video = out / "scenes3.avi"
    write_video(video, frames)
    return {
        "scenario": "scenes3",
        "video": str(video),
        "fps": FIXTURE_FPS,
        "duration": 14.5,
        "expected_boundaries": [5, 10],
    }


def _scenario_zoom(out: Path) -> dict:
    """A wide-to-close perspective cut that must classify as dynamic, plus a
    red-to-blue hard cut that must not (different subjects)."""
    wide = zoom_panel()
    close = zoom_closeup(wide)
    red = solid_frame((255, 0, 0))
    blue = solid_frame((0, 0, 255))
    segments = [(wide, 6.0), (close, 6.0), (red, 4.0), (blue, 4.0)]
    frames = []
    for raster, seconds in segments:
        frames.extend([raster] * int(seconds * FIXTURE_FPS))
    video = out / "zoom.avi"
    write_video(video, frames)
    duration = sum(s for _, s in segments)
    write_tone_wav(out / "zoom.wav", duration)
    write_transcript(out / "zoom.transcript.tsv", [
        (0.0, 6.0, "Watch the hand position from the side."),
        (6.0, 12.0, "Up close you can see the thumb placement."),
        (12.0, 20.0, "Different materials need different care."),
    ])
    mock_dir = out / "mock"
    _write_mock(mock_dir, "embeddings", {"dim": 32, "entries": [
        {"modality": "semantic_image", "digest": digest(wide), "label": "subject", "cos": 1.0},
        {"modality": "semantic_image", "digest": digest(close), "label": "subject", "cos": 0.85},
        {"modality": "semantic_image", "digest": digest(red), "label": "warm", "cos": 1.0},
        {"modality": "semantic_image", "digest": digest(blue), "label": "cool", "cos": 1.0},
    ]})
    return {
        "scenario": "zoom",
        "video": str(video),
        "mock_dir": str(mock_dir),
        "fps": FIXTURE_FPS,
        "duration": duration,
        "digests": {"wide": digest(wide), "close": digest(close),
                    "red": digest(red), "blue": digest(blue)},
        "dynamic_boundary_time": 6.0,
        "hard_cut_time": 16.0,
    }


_DIAMOND_SEGMENTS = [
    # (chapter, base color, stamp)
    (1, (200, 60, 60), None),
    (1, (60, 160, 220), None),
    (2, (60, 60, 200), None),
    (2, (200, 200, 60), "diagram"),
    (3, (200, 60, 200), "text"),
    (3, (60, 200, 200), None),
    (4, None, "panel"),
    (4, None, "closeup"),
    (5, (120, 120, 220), "mark"),
    (5, (220, 150, 90), None),
]

_DIAMOND_CAPTIONS = [
    "A trainer stands on a mat in a bright room.",
    "The trainer rolls both shoulders to loosen up.",
    "A cable machine comes into view with a wide bar.",
    "A printed table lays out the session plan.",
    "A timer panel appears over the plank position.",
    "The trainer lowers onto both forearms.",
    "A wide view shows the full rowing posture.",
    "A close view highlights the hand position on the bar.",
    "A circle appears around the lower back area.",
    "The trainer walks in place to cool down.",
]

_DIAMOND_SENTENCES = [
    "Start with easy shoulder rolls.", "Let the arms hang loose.",
    "Swing each arm across the chest.", "Keep the knees soft while you swing.",
    "Set your grip just wider than the shoulders.", "Pull the bar down to the collarbone.",
    "Read the plan before the next set.", "Rest exactly one minute between sets.",
    "Settle onto both forearms for the plank.", "Hold the position until the timer ends.",
    "Squeeze the core the entire time.", "Breathe slowly and steadily.",
    "Sit tall in front of the cable row.", "Drive the elbows straight back.",
    "Watch the hand position up close.", "Wrap the thumbs fully around the bar.",
    "Check the lower back stays neutral.", "Stop if the lower back rounds.",
    "Walk in place to bring the pulse down.", "Shake out the arms to finish.",
]


def _scenario_diamond(out: Path) -> dict:
    """The full end-to-end fixture: a five-chapter routine whose middle three
    chapters are parallel, with one text overlay, one diagram, one special
    mark, and one wide-to-close perspective cut."""
    panel = zoom_panel()
    rasters: list[np.ndarray] = []
    for _, color, stamp in _DIAMOND_SEGMENTS:
        if stamp == "panel":
            raster = panel
        elif stamp == "closeup":
            raster = zoom_closeup(panel)
        else:
            raster = solid_frame(color)
            if stamp == "text":
                raster = stamp_text(raster, "10 MIN")
            elif stamp == "diagram":
                raster = stamp_diagram(raster)
            elif stamp == "mark":
                raster = stamp_mark(raster)
        rasters.append(raster)

    frames = []
    for raster in rasters:
        frames.extend([raster] * int(5 * FIXTURE_FPS))
    video = out / "diamond.avi"
    write_video(video, frames)
    duration = 50.0
    write_tone_wav(out / "diamond.wav", duration)
    rows = []
    for i, sentence in enumerate(_DIAMOND_SENTENCES):
        base = i // 2 * 5.0
        (t_s, t_e) = (base, base + 2.2) if i % 2 == 0 else (base + 2.5, base + 4.6)
        rows.append((t_s, t_e, sentence))
    write_transcript(out / "diamond.transcript.tsv", rows)

    digests = [digest(r) for r in rasters]
    mock_dir = out / "mock"
    _write_mock(mock_dir, "captions", {"by_digest": dict(zip(digests, _DIAMOND_CAPTIONS))})
    _write_mock(mock_dir, "embeddings", {"dim": 32, "entries": [
        {"modality": "semantic_image", "digest": digests[6], "label": "rowing", "cos": 1.0},
        {"modality": "semantic_image", "digest": digests[7], "label": "rowing", "cos": 0.85},
    ]})
    _write_mock(mock_dir, "detections", {
        digests[3]: {"DIAGRAM": {"positive": True,
                                 "explanation": "A table lays out sets and reps for the session."}},
        digests[4]: {"TEXT_OVERLAY": {"positive": True, "ocr_text": "10 MIN"}},
        digests[8]: {"SPECIAL_MARK": {"positive": True,
                                      "explanation": "A circle highlights the lower back position."}},
    })
    chapters = [
        {"t_s": 0.0, "t_e": 10.0, "title": "Warm-up"},
        {"t_s": 10.0, "t_e": 20.0, "title": "Lat pull-down"},
        {"t_s": 20.0, "t_e": 30.0, "title": "Plank hold"},
        {"t_s": 30.0, "t_e": 40.0, "title": "Cable row"},
        {"t_s": 40.0, "t_e": 50.0, "title": "Cool-down"},
    ]
    completions = [
        {"template_id": "chapter_cluster", "response": {"chapters": chapters}},
        {"template_id": "relation_classify", "when": {"level": "chapter"},
         "response": {"relations": [{"kind": "PARALLEL", "members": [2, 3, 4]}]}},
    ]
    for i in range(5):
        lo = i * 10.0
        completions.append({
            "template_id": "step_extract", "when": {"chapter_id": str(i + 1)},
            "response": {"steps": [{"t_s": lo, "t_e": lo + 5.0},
                                   {"t_s": lo + 5.0, "t_e": lo + 10.0}]},
        })
    chapter_summaries = [
        "Loosen the shoulders and arms before loading any weight.",
        "Pull the bar down with a wide, controlled grip.",
        "Hold a strict plank for the full timer.",
        "Row with the elbows driving straight back.",
        "Bring the heart rate down and shake out the arms.",
    ]
    for i, summary in enumerate(chapter_summaries):
        completions.append({
            "template_id": "chapter_summary", "when": {"chapter_id": str(i + 1)},
            "response": {"summary": summary},
        })
    completions.append({
        "template_id": "step_summary", "when": {"step_id": "2.1"},
        "response": {
            "concise": "Set a wide grip on the bar.",
            "verbose": ("Take a wide overhand grip on the bar. Keep your back straight "
                        "as you pull. Release the weight with control."),
            "emoji": "🧘",
            "key_spans": [{"target": "VERBOSE", "text": "Keep your back straight",
                           "kind": "WARNING"}],
        },
    })
    completions.append({
        "template_id": "step_summary", "when": {"step_id": "3.1"},
        "response": {
            "concise": "Hold the plank for the full timer.",
            "verbose": ("Settle into a forearm plank with a flat back. Keep breathing "
                        "steadily the whole hold. The on-screen timer shows 10 MIN."),
            "emoji": "💪",
            "key_spans": [
                {"target": "VERBOSE", "text": "Keep breathing steadily", "kind": "TIP"},
                {"target": "VERBOSE", "text": "10 MIN", "kind": "QUANTITY"},
            ],
        },
    })
    _write_mock(mock_dir, "completions", {"entries": completions})
    return {
        "scenario": "diamond",
        "video": str(video),
        "mock_dir": str(mock_dir),
        "fps": FIXTURE_FPS,
        "duration": duration,
        "segment_digests": digests,
        "expected_keyframes": [0, 5, 10, 15, 20, 25, 30, 35, 40, 45],
        "expected_chapters": 5,
        "parallel_chapters": [2, 3, 4],
        "perspective_time": 35.0,
    }


SCENARIOS = {
    "solid30": _scenario_solid30,
    "scenes3": _scenario_scenes3,
    "zoom": _scenario_zoom,
    "diamond": _scenario_diamond,
}


def build_scenario(name: str, out_dir: str | Path) -> dict:
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; have {sorted(SCENARIOS)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = SCENARIOS[name](out)
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
    return manifest
