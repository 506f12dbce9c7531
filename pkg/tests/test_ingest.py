from functools import partial
from pathlib import Path

import numpy as np
import pytest

from noteforge.errors import NoAudioTrack, UnreadableSource
from noteforge.fixtures import build_scenario, solid_frame, write_tone_wav, write_video
from noteforge.ingest import (
    extract_audio,
    normalize_transcript,
    probe,
    resolve_source,
    sample_frames,
    transcript_window,
)
from noteforge.providers.mock import MockTranscriptionProvider

from conftest import make_segment


@pytest.fixture(scope="module")
def solid30(tmp_path_factory):
    out = tmp_path_factory.mktemp("solid30")
    return build_scenario("solid30", out)


class TestSampling:
    def test_ten_second_video_rate_one(self, tmp_path):
        video = tmp_path / "ten.avi"
        write_video(video, [solid_frame((10, 20, 30))] * 100, fps=10.0)
        frames = sample_frames(video, 1.0)
        assert len(frames) == 11
        assert [f.timestamp for f in frames] == [float(k) for k in range(11)]

    def test_grid_origin(self, solid30):
        frames = sample_frames(solid30["video"], 1.0)
        assert frames[0].index == 0
        assert frames[0].timestamp == 0.0

    def test_digests_match_generator_oracle(self, solid30):
        frames = sample_frames(solid30["video"], 2.0)
        assert len(frames) == 3
        expected = solid30["frame_digests"]
        # nearest decoded frames for t = 0, 0.5, 1.0 at 30 fps
        assert frames[0].content_digest == expected[0]
        assert frames[1].content_digest == expected[15]
        assert frames[2].content_digest == expected[29]

    def test_frame_count_formula(self, solid30):
        info = probe(resolve_source(solid30["video"]))
        for rate in (1.0, 2.0, 7.0, 30.0):
            frames = sample_frames(solid30["video"], rate, info=info)
            assert len(frames) == int(info.duration * rate) + 1

    def test_rerun_is_deterministic(self, solid30):
        first = [f.content_digest for f in sample_frames(solid30["video"], 3.0)]
        second = [f.content_digest for f in sample_frames(solid30["video"], 3.0)]
        assert first == second

    def test_timestamps_strictly_increase(self, solid30):
        frames = sample_frames(solid30["video"], 7.0)
        stamps = [f.timestamp for f in frames]
        assert stamps == sorted(stamps)
        assert len(set(stamps)) == len(stamps)
        assert [f.index for f in frames] == list(range(len(frames)))

    def test_rate_above_native_rejected(self, solid30):
        with pytest.raises(ValueError):
            sample_frames(solid30["video"], 31.0)

    def test_unreadable_source(self, tmp_path):
        with pytest.raises(UnreadableSource):
            resolve_source(str(tmp_path / "missing.avi"))
        garbage = tmp_path / "garbage.avi"
        garbage.write_bytes(b"not a video")
        with pytest.raises(Exception):
            probe(garbage)

    def test_large_frames_canonicalized_to_512(self, tmp_path):
        big = np.zeros((600, 800, 3), np.uint8)
        video = tmp_path / "big.avi"
        write_video(video, [big] * 5, fps=5.0)
        frames = sample_frames(video, 1.0)
        assert max(frames[0].image.shape[:2]) == 512


class TestUrlSources:
    def test_download_then_decode(self, solid30, tmp_path):
        import http.server
        import threading

        video = Path(solid30["video"])
        handler = partial(http.server.SimpleHTTPRequestHandler,
                          directory=str(video.parent))
        server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), handler)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            port = server.server_address[1]
            url = f"http://127.0.0.1:{port}/{video.name}"
            local = resolve_source(url, workdir=tmp_path / "dl")
            frames = sample_frames(local, 2.0)
            assert [f.content_digest for f in frames] == \
                [f.content_digest for f in sample_frames(video, 2.0)]
        finally:
            server.shutdown()

    def test_download_failure_is_unreadable_source(self, tmp_path):
        with pytest.raises(UnreadableSource):
            resolve_source("http://127.0.0.1:1/none.avi", workdir=tmp_path)


class TestAudio:
    def test_tone_sidecar(self, tmp_path):
        video = tmp_path / "clip.avi"
        write_video(video, [solid_frame((1, 2, 3))] * 20, fps=10.0)
        write_tone_wav(tmp_path / "clip.wav", 2.0)
        track = extract_audio(video)
        assert track.duration == pytest.approx(2.0, abs=0.1)
        assert len(track.samples) > 0

    def test_missing_audio(self, tmp_path):
        video = tmp_path / "mute.avi"
        write_video(video, [solid_frame((1, 2, 3))] * 10, fps=10.0)
        with pytest.raises(NoAudioTrack):
            extract_audio(video)

    def test_zero_length_audio(self, tmp_path):
        video = tmp_path / "empty.avi"
        write_video(video, [solid_frame((1, 2, 3))] * 10, fps=10.0)
        write_tone_wav(tmp_path / "empty.wav", 0.0)
        with pytest.raises(NoAudioTrack):
            extract_audio(video)


class TestTranscript:
    def test_mock_provider_passthrough(self, tmp_path):
        video = tmp_path / "talk.avi"
        write_video(video, [solid_frame((9, 9, 9))] * 70, fps=10.0)
        write_tone_wav(tmp_path / "talk.wav", 7.0)
        (tmp_path / "talk.transcript.tsv").write_text(
            "0.0\t2.0\tFirst sentence.\n2.0\t5.0\tSecond one.\n5.0\t7.0\tThird.\n",
            encoding="utf-8")
        track = extract_audio(video)
        segments, warnings = normalize_transcript(
            MockTranscriptionProvider().transcribe(track))
        assert [s.text for s in segments] == ["First sentence.", "Second one.", "Third."]
        assert warnings == []

    def test_silent_audio_empty_transcript(self, tmp_path):
        video = tmp_path / "quiet.avi"
        write_video(video, [solid_frame((9, 9, 9))] * 10, fps=10.0)
        write_tone_wav(tmp_path / "quiet.wav", 1.0)
        track = extract_audio(video)
        assert MockTranscriptionProvider().transcribe(track) == []

    def test_overlap_clipping_hand_computed(self):
        raw = [make_segment(0, "a", 0.0, 2.0),
               make_segment(1, "b", 1.0, 5.0),
               make_segment(2, "c", 4.0, 7.0)]
        segments, warnings = normalize_transcript(raw)
        assert [(s.t_s, s.t_e) for s in segments] == [(0.0, 2.0), (2.0, 5.0), (5.0, 7.0)]
        assert len(warnings) == 2

    def test_swallowed_segment_dropped(self):
        raw = [make_segment(0, "a", 0.0, 5.0), make_segment(1, "b", 1.0, 2.0)]
        segments, warnings = normalize_transcript(raw)
        assert len(segments) == 1
        assert any("dropped" in w for w in warnings)

    def test_normalized_is_non_overlapping(self, rng):
        raw = [make_segment(i, f"s{i}", rng.uniform(0, 50), rng.uniform(0, 50))
               for i in range(30)]
        raw = [make_segment(s.seg_id, s.text, min(s.t_s, s.t_e), max(s.t_s, s.t_e) + 0.1)
               for s in raw]
        segments, _ = normalize_transcript(raw)
        for a, b in zip(segments, segments[1:]):
            assert a.t_e <= b.t_s

    def test_window_selection(self):
        segments = [make_segment(0, "early", 0.0, 2.0),
                    make_segment(1, "middle", 10.0, 12.0),
                    make_segment(2, "late", 30.0, 32.0)]
        assert transcript_window(segments, 11.0, 5.0) == "middle"
        assert transcript_window(segments, 11.0, 50.0) == "early middle late"
