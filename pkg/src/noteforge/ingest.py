"""Video decoding, frame sampling, audio extraction, and transcript shaping."""

from __future__ import annotations

import math
import shutil
import subprocess
import tempfile
import wave
from dataclasses import dataclass
from pathlib import Path

import cv2
import httpx
import numpy as np

from .errors import EmptyVideo, NoAudioTrack, UnreadableSource
from .rasters import canonicalize, digest


@dataclass(frozen=True)
class FrameRecord:
    """One sampled frame: ordinal index, timestamp, canonical raster, digest."""

    index: int
    timestamp: float
    image: np.ndarray
    content_digest: str

    @property
    def width(self) -> int:
        return self.image.shape[1]

    @property
    def height(self) -> int:
        return self.image.shape[0]


@dataclass(frozen=True)
class TranscriptSegment:
    seg_id: int
    text: str
    t_s: float
    t_e: float


@dataclass(frozen=True)
class MediaInfo:
    duration: float
    native_fps: float
    source_uri: str


@dataclass(frozen=True)
class AudioTrack:
    """Mono waveform reference handed to the transcription provider."""

    samples: np.ndarray  # int16 mono
    sample_rate: int
    duration: float
    source_path: str


def resolve_source(source: str, workdir: Path | None = None) -> Path:
    """Return a local path for a file path or HTTP(S) URL (download first)."""
    if source.startswith(("http://", "https://")):
        workdir = Path(tempfile.mkdtemp(prefix="noteforge-")) if workdir is None else workdir
        workdir.mkdir(parents=True, exist_ok=True)
        name = source.rsplit("/", 1)[-1] or "video"
        target = workdir / name
        try:
            with httpx.stream("GET", source, follow_redirects=True, timeout=60.0) as resp:
                resp.raise_for_status()
                with open(target, "wb") as fh:
                    for chunk in resp.iter_bytes():
                        fh.write(chunk)
        except httpx.HTTPError as exc:
            raise UnreadableSource(f"download failed: {source}") from exc
        return target
    path = Path(source)
    if not path.exists():
        raise UnreadableSource(f"no such file: {source}")
    return path


def probe(path: Path) -> MediaInfo:
    cap = cv2.VideoCapture(str(path))
    if not cap.isOpened():
        raise UnreadableSource(f"cannot decode: {path}")
    fps = cap.get(cv2.CAP_PROP_FPS) or 0.0
    count = int(cap.get(cv2.CAP_PROP_FRAME_COUNT) or 0)
    cap.release()
    if fps <= 0 or count <= 0:
        raise EmptyVideo(f"no decodable frames: {path}")
    return MediaInfo(duration=count / fps, native_fps=fps, source_uri=str(path))


def sample_frames(path: Path, rate: float, max_dimension: int = 512,
                  info: MediaInfo | None = None) -> list[FrameRecord]:
    """Sample frames at timestamps k/rate, taking the nearest decoded frame.

    Sample indices are contiguous from 0; near the end of the video two
    samples may map to the same decoded frame, which shows up as equal
    digests rather than an index gap.
    """
    if rate <= 0:
        raise ValueError("rate must be > 0")
    info = probe(path) if info is None else info
    if rate > info.native_fps:
        raise ValueError(f"rate {rate} exceeds native fps {info.native_fps}")

    total = int(round(info.duration * info.native_fps))
    count = math.floor(info.duration * rate) + 1
    needed: list[tuple[int, float]] = []
    for k in range(count):
        t = k / rate
        src = min(max(0, round(t * info.native_fps)), total - 1)
        needed.append((src, t))

    cap = cv2.VideoCapture(str(path))
    if not cap.isOpened():
        raise UnreadableSource(f"cannot decode: {path}")
    records: list[FrameRecord] = []
    try:
        src_index = -1
        frame = None
        for sample_index, (src, t) in enumerate(needed):
            while src_index < src:
                ok, nxt = cap.read()
                if not ok:
                    break
                frame = nxt
                src_index += 1
            if frame is None:
                raise EmptyVideo(f"no decodable frames: {path}")
            raster = canonicalize(frame, max_dimension)
            records.append(FrameRecord(index=sample_index, timestamp=t,
                                       image=raster, content_digest=digest(raster)))
    finally:
        cap.release()
    return records


def extract_audio(path: Path) -> AudioTrack:
    """Locate the audio for a video: sidecar WAV first, then ffmpeg if present.

    Most containers this build decodes carry their audio as a sibling
    ``<stem>.wav`` (the fixture generator writes one). When ffmpeg is on PATH
    it is used to demux other sources.
    """
    sidecar = path.with_suffix(".wav")
    if sidecar.exists():
        return _read_wav(sidecar, source_path=str(path))
    ffmpeg = shutil.which("ffmpeg")
    if ffmpeg:
        out = Path(tempfile.mkdtemp(prefix="noteforge-audio-")) / "audio.wav"
        proc = subprocess.run(
            [ffmpeg, "-y", "-i", str(path), "-vn", "-ac", "1", "-f", "wav", str(out)],
            capture_output=True,
        )
        if proc.returncode == 0 and out.exists() and out.stat().st_size > 44:
            return _read_wav(out, source_path=str(path))
    raise NoAudioTrack(f"no audio stream for {path}")


def _read_wav(wav_path: Path, source_path: str) -> AudioTrack:
    try:
        with wave.open(str(wav_path), "rb") as wf:
            rate = wf.getframerate()
            n = wf.getnframes()
            raw = wf.readframes(n)
            channels = wf.getnchannels()
            width = wf.getsampwidth()
    except (wave.Error, EOFError) as exc:
        raise NoAudioTrack(f"unreadable audio: {wav_path}") from exc
    if n == 0:
        raise NoAudioTrack(f"zero-length audio: {wav_path}")
    if width != 2:
        raise NoAudioTrack(f"unsupported sample width {width}: {wav_path}")
    samples = np.frombuffer(raw, dtype=np.int16)
    if channels > 1:
        samples = samples.reshape(-1, channels).mean(axis=1).astype(np.int16)
    return AudioTrack(samples=samples, sample_rate=rate,
                      duration=n / rate, source_path=source_path)


def normalize_transcript(segments: list[TranscriptSegment]) -> tuple[list[TranscriptSegment], list[str]]:
    """Order segments, strip text, and clip overlaps to the previous end.

    Providers are noisy; a segment fully swallowed by its predecessor is
    dropped with a warning instead of failing the run.
    """
    warnings: list[str] = []
    cleaned = [s for s in segments if s.text.strip()]
    cleaned.sort(key=lambda s: (s.t_s, s.t_e))
    out: list[TranscriptSegment] = []
    prev_end = 0.0
    for seg in cleaned:
        t_s, t_e = seg.t_s, seg.t_e
        if out and t_s < prev_end:
            warnings.append(f"segment at {t_s:.3f}s overlaps previous; clipped to {prev_end:.3f}s")
            t_s = prev_end
        if t_s >= t_e:
            warnings.append(f"segment at {seg.t_s:.3f}s collapsed after clipping; dropped")
            continue
        out.append(TranscriptSegment(seg_id=len(out), text=seg.text.strip(), t_s=t_s, t_e=t_e))
        prev_end = t_e
    return out, warnings


def transcript_window(segments: list[TranscriptSegment], center: float, radius: float) -> str:
    """Concatenated sentences whose spans intersect [center-radius, center+radius]."""
    lo, hi = center - radius, center + radius
    picked = [s.text for s in segments if s.t_e > lo and s.t_s < hi]
    return " ".join(picked)
