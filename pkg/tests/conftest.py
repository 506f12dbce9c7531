from __future__ import annotations

import random

import numpy as np
import pytest

from noteforge.ingest import FrameRecord, TranscriptSegment
from noteforge.rasters import digest
from noteforge.scheme import (
    ChapterNote,
    Highlight,
    KeyFrameAnnotation,
    NoteScheme,
    StepNote,
    StepSummary,
    Thumbnail,
)


def make_frame(index: int = 0, timestamp: float | None = None,
               color=(255, 0, 0), size=(48, 64), pattern_seed: int | None = None) -> FrameRecord:
    h, w = size
    img = np.zeros((h, w, 3), dtype=np.uint8)
    img[:, :] = color
    if pattern_seed is not None:
        rng = np.random.default_rng(pattern_seed)
        img = rng.integers(0, 256, (h, w, 3), dtype=np.uint8)
    t = float(index) if timestamp is None else timestamp
    return FrameRecord(index=index, timestamp=t, image=img, content_digest=digest(img))


def make_segment(seg_id: int, text: str, t_s: float, t_e: float) -> TranscriptSegment:
    return TranscriptSegment(seg_id=seg_id, text=text, t_s=t_s, t_e=t_e)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(1234)


def random_scheme(rnd: random.Random) -> NoteScheme:
    """A randomized scheme that satisfies every structural invariant.

    Spans live on a 0.01s grid with comfortable separation so strict
    ordering survives 3-decimal timestamp formatting.
    """
    n_chapters = rnd.randint(1, 5)
    duration = 0.0
    chapters = []
    cursor = 0.0
    for ci in range(1, n_chapters + 1):
        span = round(rnd.uniform(4.0, 20.0), 2)
        c_ts, c_te = cursor, round(cursor + span, 3)
        cursor = c_te
        n_steps = rnd.randint(1, 4)
        cuts = sorted(rnd.sample(range(1, int(span * 10)), n_steps - 1)) if n_steps > 1 else []
        edges_t = [c_ts] + [round(c_ts + c / 10.0, 3) for c in cuts] + [c_te]
        steps = []
        for sj in range(n_steps):
            concise = f"Do part {ci}.{sj + 1} of the task."
            verbose = (f"Do part {ci}.{sj + 1} of the task carefully. "
                       f"Check the result before moving on.")
            highlights = []
            if rnd.random() < 0.5:
                word = "carefully"
                start = verbose.find(word)
                highlights.append(Highlight(target="VERBOSE", start=start,
                                            end=start + len(word), kind="WARNING"))
            t_s, t_e = edges_t[sj], edges_t[sj + 1]
            keyframes = []
            if rnd.random() < 0.4:
                kt = round(t_s + (t_e - t_s) * 0.5, 3)
                keyframes.append(KeyFrameAnnotation(
                    kind=rnd.choice(["TEXT_OVERLAY", "DIAGRAM", "SPECIAL_MARK", "PERSPECTIVE"]),
                    frame_index=rnd.randint(0, 500), timestamp=kt,
                    ocr_text="10 MIN", explanation="close view"))
            thumbnail = None
            if rnd.random() < 0.7:
                tt = round(t_s + (t_e - t_s) * 0.25, 3)
                thumbnail = Thumbnail(frame_index=rnd.randint(0, 500), timestamp=tt,
                                      similarity=round(rnd.random(), 6),
                                      asset=f"{rnd.getrandbits(64):016x}.png")
            steps.append(StepNote(
                step_id=f"{ci}.{sj + 1}", t_s=t_s, t_e=t_e,
                summary=StepSummary(concise=concise, verbose=verbose,
                                    emoji=rnd.choice([None, "🔧", "⚠️"]),
                                    highlights=highlights),
                thumbnail=thumbnail,
                gif=f"{rnd.getrandbits(64):016x}.gif" if rnd.random() < 0.5 else None,
                keyframes=keyframes,
            ))
        # step successors: chain, or a diamond when there is room
        if len(steps) >= 4 and rnd.random() < 0.5:
            mids = steps[1:-1]
            steps[0].successors = [s.step_id for s in mids]
            for s in mids:
                s.successors = [steps[-1].step_id]
        else:
            for a, b in zip(steps, steps[1:]):
                a.successors = [b.step_id]
        chapters.append(ChapterNote(
            chapter_id=ci, title=f"Part {ci}", summary=f"Overview of part {ci}.",
            t_s=c_ts, t_e=c_te,
            gif=f"{rnd.getrandbits(64):016x}.gif" if rnd.random() < 0.7 else None,
            steps=steps))
        duration = c_te
    if len(chapters) >= 4 and rnd.random() < 0.5:
        mids = chapters[1:-1]
        chapters[0].successors = [c.chapter_id for c in mids]
        for c in mids:
            c.successors = [chapters[-1].chapter_id]
    else:
        for a, b in zip(chapters, chapters[1:]):
            a.successors = [b.chapter_id]
    return NoteScheme(title="fixture video", duration=duration,
                      source_uri="file:///fixture.avi", chapters=chapters)
