import pytest

from noteforge.assets import AssetStore
from noteforge.errors import DanglingReference, EmptyContent, ProviderFailure
from noteforge.graph import StructureGraph
from noteforge.keyinfo.dynamic import DynamicKeyframe, SimilarityProfile
from noteforge.keyinfo.static import StaticAnnotation
from noteforge.notegen import (
    assemble_gif,
    assemble_scheme,
    edges_match,
    retrieve_thumbnail,
    summarize_chapter,
    summarize_step,
)
from noteforge.providers.mock import (
    MockEmbeddingProvider,
    MockTables,
    MockVisionLanguageProvider,
)
from noteforge.structure import Chapter, HierarchicalTranscript, Step

from conftest import make_frame, make_segment


class DownVlm(MockVisionLanguageProvider):
    def complete_structured(self, prompt):
        raise ProviderFailure("offline")


def simple_chapter(chapter_id=1, t_s=0.0, t_e=10.0, sentences=("Sand the door edge.",)):
    segments = [make_segment(i, s, t_s + i * 2.0, t_s + i * 2.0 + 1.5)
                for i, s in enumerate(sentences)]
    return Chapter(chapter_id=chapter_id, t_s=t_s, t_e=t_e, segments=segments)


def simple_step(step_id="1.1", t_s=0.0, t_e=10.0, sentences=("Sand the door edge.",)):
    segments = [make_segment(i, s, t_s + i * 2.0, t_s + i * 2.0 + 1.5)
                for i, s in enumerate(sentences)]
    return Step(step_id=step_id, chapter_id=int(step_id.split(".")[0]),
                t_s=t_s, t_e=t_e, segments=segments)


class TestChapterSummary:
    def test_scripted_passthrough(self):
        vlm = MockVisionLanguageProvider(MockTables(completions=[
            {"template_id": "chapter_summary",
             "response": {"summary": "Prepare the surface."}}]))
        text, degraded = summarize_chapter(simple_chapter(), vlm)
        assert text == "Prepare the surface." and not degraded

    def test_two_sentences_truncated(self):
        vlm = MockVisionLanguageProvider(MockTables(completions=[
            {"template_id": "chapter_summary",
             "response": {"summary": "First sentence. Second sentence."}}]))
        text, _ = summarize_chapter(simple_chapter(), vlm)
        assert text == "First sentence."

    def test_empty_content_rejected(self):
        with pytest.raises(EmptyContent):
            summarize_chapter(Chapter(chapter_id=1, t_s=0, t_e=5),
                              MockVisionLanguageProvider())

    def test_failure_falls_back_to_first_transcript_sentence(self):
        warnings = []
        text, degraded = summarize_chapter(simple_chapter(), DownVlm(), warnings)
        assert text == "Sand the door edge."
        assert degraded and warnings


class TestStepSummary:
    def test_scripted_highlight_offsets(self):
        verbose = "Press gently. Do this only if unconscious. Then reassess."
        vlm = MockVisionLanguageProvider(MockTables(completions=[
            {"template_id": "step_summary",
             "response": {"concise": "Check responsiveness.",
                          "verbose": verbose,
                          "key_spans": [{"target": "VERBOSE",
                                         "text": "only if unconscious",
                                         "kind": "WARNING"}]}}]))
        summary = summarize_step(simple_step(), [], vlm)
        assert len(summary.highlights) == 1
        h = summary.highlights[0]
        assert summary.verbose[h.start:h.end] == "only if unconscious"
        assert h.kind == "WARNING"

    def test_ocr_text_reaches_verbose_by_default(self):
        annotations = [StaticAnnotation(frame_index=0, kind="TEXT_OVERLAY",
                                        ocr_text="10 MIN")]
        summary = summarize_step(simple_step(), annotations,
                                 MockVisionLanguageProvider())
        assert "10 MIN" in summary.verbose

    def test_empty_emoji_is_absent(self):
        vlm = MockVisionLanguageProvider(MockTables(completions=[
            {"template_id": "step_summary",
             "response": {"concise": "Do it.", "verbose": "Do it now.",
                          "emoji": ""}}]))
        summary = summarize_step(simple_step(), [], vlm)
        assert summary.emoji is None

    def test_unmappable_span_dropped_with_warning(self):
        warnings = []
        vlm = MockVisionLanguageProvider(MockTables(completions=[
            {"template_id": "step_summary",
             "response": {"concise": "Do it.", "verbose": "Do it now.",
                          "key_spans": [{"target": "VERBOSE",
                                         "text": "never present",
                                         "kind": "TIP"}]}}]))
        summary = summarize_step(simple_step(), [], vlm, warnings)
        assert summary.highlights == []
        assert any("not found" in w for w in warnings)

    def test_failure_degrades_to_first_sentence(self):
        summary = summarize_step(
            simple_step(sentences=("Hold the valve.", "Turn it slowly.")),
            [], DownVlm())
        assert summary.concise == "Hold the valve."
        assert summary.verbose == summary.concise
        assert "DEGRADED" in summary.flags


class TestThumbnail:
    def _store(self, tmp_path):
        return AssetStore(tmp_path / "assets")

    def test_single_candidate_wins(self, tmp_path):
        step = simple_step(t_s=0.0, t_e=10.0)
        frame = make_frame(3, timestamp=4.0, color=(80, 80, 80))
        summary = summarize_step(step, [], MockVisionLanguageProvider())
        thumb = retrieve_thumbnail(step, [frame], summary,
                                   MockEmbeddingProvider(), [frame],
                                   self._store(tmp_path))
        assert thumb.frame_index == 3

    def test_forced_similarities_pick_argmax(self, tmp_path):
        step = simple_step(t_s=0.0, t_e=10.0)
        frames = [make_frame(i, timestamp=float(i * 3 + 1), color=(i * 60, 10, 10))
                  for i in range(3)]
        summary = summarize_step(step, [], MockVisionLanguageProvider())
        entries = [{"modality": "joint_text", "text": summary.concise,
                    "label": "anchor", "cos": 1.0}]
        for frame, cos in zip(frames, (0.2, 0.9, 0.4)):
            entries.append({"modality": "joint_image", "digest": frame.content_digest,
                            "label": "anchor", "cos": cos})
        embed = MockEmbeddingProvider(overrides={"dim": 32, "entries": entries})
        thumb = retrieve_thumbnail(step, frames, summary, embed, frames,
                                   self._store(tmp_path))
        assert thumb.frame_index == 1
        assert thumb.similarity == pytest.approx(0.9, abs=1e-12)

    def test_tie_breaks_to_earlier_timestamp(self, tmp_path):
        step = simple_step(t_s=0.0, t_e=10.0)
        frames = [make_frame(0, timestamp=2.0, color=(10, 10, 10)),
                  make_frame(1, timestamp=7.0, color=(200, 10, 10))]
        summary = summarize_step(step, [], MockVisionLanguageProvider())
        entries = [{"modality": "joint_text", "text": summary.concise,
                    "label": "anchor", "cos": 1.0}]
        for frame in frames:
            entries.append({"modality": "joint_image", "digest": frame.content_digest,
                            "label": "anchor", "cos": 0.7})
        embed = MockEmbeddingProvider(overrides={"dim": 32, "entries": entries})
        thumb = retrieve_thumbnail(step, frames, summary, embed, frames,
                                   self._store(tmp_path))
        assert thumb.frame_index == 0

    def test_no_candidates_falls_back_to_nearest(self, tmp_path):
        step = simple_step(t_s=10.0, t_e=20.0)
        frames = [make_frame(i, timestamp=float(i * 4), color=(i * 9, 0, 0))
                  for i in range(8)]
        summary = summarize_step(step, [], MockVisionLanguageProvider())
        warnings = []
        thumb = retrieve_thumbnail(step, [], summary, MockEmbeddingProvider(),
                                   frames, self._store(tmp_path), warnings)
        assert "FALLBACK" in thumb.flags
        assert thumb.timestamp == 12.0  # nearest in-span frame to t_s


class TestGifs:
    def test_below_cap_keeps_all_frames(self, tmp_path):
        frames = [make_frame(i, timestamp=float(i), color=(i * 20, 0, 0))
                  for i in range(10)]
        spec = assemble_gif(1, (0.0, 9.0), frames, AssetStore(tmp_path))
        assert len(spec.frame_indices) == 10

    def test_cap_applies_uniform_stride(self, tmp_path):
        frames = [make_frame(i, timestamp=i * 0.1, color=(i % 256, 0, 0))
                  for i in range(400)]
        spec = assemble_gif(1, (0.0, 40.0), frames, AssetStore(tmp_path))
        assert len(spec.frame_indices) == 40
        assert spec.frame_indices[:3] == (0, 10, 20)

    def test_byte_identical_across_runs(self, tmp_path):
        frames = [make_frame(i, timestamp=float(i), color=(0, i * 25, 0))
                  for i in range(6)]
        store_a = AssetStore(tmp_path / "a")
        store_b = AssetStore(tmp_path / "b")
        spec_a = assemble_gif(1, (0.0, 5.0), frames, store_a)
        spec_b = assemble_gif(1, (0.0, 5.0), frames, store_b)
        assert spec_a.asset_name == spec_b.asset_name
        assert store_a.path(spec_a.asset_name).read_bytes() == \
            store_b.path(spec_b.asset_name).read_bytes()

    def test_empty_span_returns_none(self, tmp_path):
        frames = [make_frame(0, timestamp=0.0)]
        assert assemble_gif(1, (5.0, 6.0), frames, AssetStore(tmp_path)) is None


def build_small_hierarchy():
    c1 = simple_chapter(1, 0.0, 10.0, ("Warm up first.", "Roll the shoulders."))
    c2 = simple_chapter(2, 10.0, 20.0, ("Now the main set.",))
    c2.segments = [make_segment(0, "Now the main set.", 10.0, 12.0)]
    c1.steps = [simple_step("1.1", 0.0, 5.0), simple_step("1.2", 5.0, 10.0)]
    c2.steps = [Step(step_id="2.1", chapter_id=2, t_s=10.0, t_e=20.0,
                     segments=c2.segments)]
    chapter_graph = StructureGraph(nodes=[1, 2], edges=[(1, 2)])
    step_graphs = {
        1: StructureGraph(nodes=["1.1", "1.2"], edges=[("1.1", "1.2")]),
        2: StructureGraph(nodes=["2.1"]),
    }
    return HierarchicalTranscript(chapters=[c1, c2], chapter_graph=chapter_graph,
                                  step_graphs=step_graphs)


class TestAssembly:
    def _inputs(self, tmp_path):
        hierarchy = build_small_hierarchy()
        frames = [make_frame(i, timestamp=float(i * 2), color=(i * 12 % 256, 30, 30))
                  for i in range(11)]
        store = AssetStore(tmp_path / "assets")
        vlm = MockVisionLanguageProvider()
        embed = MockEmbeddingProvider()
        chapter_summaries, step_summaries, thumbnails = {}, {}, {}
        chapter_gifs, step_gifs = {}, {}
        for chapter in hierarchy.chapters:
            chapter_summaries[chapter.chapter_id] = summarize_chapter(chapter, vlm)[0]
            gif = assemble_gif(chapter.chapter_id, (chapter.t_s, chapter.t_e),
                               frames, store)
            chapter_gifs[chapter.chapter_id] = gif
            for step in chapter.steps:
                step_summaries[step.step_id] = summarize_step(step, [], vlm)
                thumbnails[step.step_id] = retrieve_thumbnail(
                    step, [f for f in frames if step.t_s <= f.timestamp <= step.t_e],
                    step_summaries[step.step_id], embed, frames, store)
        return hierarchy, frames, store, chapter_summaries, step_summaries, \
            thumbnails, chapter_gifs, step_gifs

    def test_scheme_assembles_and_validates(self, tmp_path):
        (hierarchy, frames, store, chapter_summaries, step_summaries,
         thumbnails, chapter_gifs, step_gifs) = self._inputs(tmp_path)
        annotations = [StaticAnnotation(frame_index=2, kind="TEXT_OVERLAY",
                                        ocr_text="10 MIN")]
        dynamic = [DynamicKeyframe(boundary_time=12.0, post_frame_index=6,
                                   profile=SimilarityProfile(0.3, 0.3, 0.5, 0.4,
                                                             0.9, 0.4))]
        scheme = assemble_scheme(hierarchy, chapter_summaries, step_summaries,
                                 thumbnails, annotations, dynamic, chapter_gifs,
                                 step_gifs, frames, store, "clip", 20.0, "file://x")
        assert [c.chapter_id for c in scheme.chapters] == [1, 2]
        kinds = [k.kind for s in scheme.all_steps() for k in s.keyframes]
        assert sorted(kinds) == ["PERSPECTIVE", "TEXT_OVERLAY"]
        assert edges_match(scheme, hierarchy.chapter_graph, hierarchy.step_graphs)

    def test_boundary_keyframe_attaches_to_later_step(self, tmp_path):
        (hierarchy, frames, store, chapter_summaries, step_summaries,
         thumbnails, chapter_gifs, step_gifs) = self._inputs(tmp_path)
        # frame at t exactly 10.0 = end of step 1.2 and start of step 2.1
        annotations = [StaticAnnotation(frame_index=5, kind="SPECIAL_MARK",
                                        explanation="circle")]
        assert frames[5].timestamp == 10.0
        scheme = assemble_scheme(hierarchy, chapter_summaries, step_summaries,
                                 thumbnails, annotations, [], chapter_gifs,
                                 step_gifs, frames, store, "clip", 20.0, "file://x")
        owners = [s.step_id for s in scheme.all_steps() if s.keyframes]
        assert owners == ["2.1"]

    def test_video_end_keyframe_attaches_to_last_step(self, tmp_path):
        (hierarchy, frames, store, chapter_summaries, step_summaries,
         thumbnails, chapter_gifs, step_gifs) = self._inputs(tmp_path)
        annotations = [StaticAnnotation(frame_index=10, kind="DIAGRAM",
                                        explanation="table")]
        assert frames[10].timestamp == 20.0
        scheme = assemble_scheme(hierarchy, chapter_summaries, step_summaries,
                                 thumbnails, annotations, [], chapter_gifs,
                                 step_gifs, frames, store, "clip", 20.0, "file://x")
        owners = [s.step_id for s in scheme.all_steps() if s.keyframes]
        assert owners == ["2.1"]

    def test_bad_thumbnail_reference_aborts(self, tmp_path):
        (hierarchy, frames, store, chapter_summaries, step_summaries,
         thumbnails, chapter_gifs, step_gifs) = self._inputs(tmp_path)
        thumbnails["1.1"].timestamp = 19.0  # outside step 1.1's span
        with pytest.raises(DanglingReference):
            assemble_scheme(hierarchy, chapter_summaries, step_summaries,
                            thumbnails, [], [], chapter_gifs, step_gifs,
                            frames, store, "clip", 20.0, "file://x")
