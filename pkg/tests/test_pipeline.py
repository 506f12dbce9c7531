import pytest

from noteforge.config import PipelineConfig
from noteforge.fixtures import build_scenario
from noteforge.pipeline import (
    keyinfo_stage,
    parse_stage,
    prepare_context,
    run_pipeline,
    structure_stage,
)
from noteforge.scheme import validate_scheme
from noteforge.serialize import parse_scheme


@pytest.fixture(scope="module")
def diamond(tmp_path_factory):
    out = tmp_path_factory.mktemp("diamond-fx")
    return build_scenario("diamond", out)


@pytest.fixture(scope="module")
def diamond_ctx(diamond, tmp_path_factory):
    job_dir = tmp_path_factory.mktemp("diamond-job")
    config = PipelineConfig(mock=True, mock_dir=diamond["mock_dir"])
    return run_pipeline(diamond["video"], job_dir, config), job_dir


class TestParseStage:
    def test_sampling_and_dedup(self, diamond):
        config = PipelineConfig(mock=True, mock_dir=diamond["mock_dir"])
        ctx = prepare_context(diamond["video"], config)
        parse_stage(ctx)
        assert len(ctx.frames) == 51  # floor(50 * 1.0) + 1
        assert list(ctx.keyframes.indices) == diamond["expected_keyframes"]
        assert len(ctx.transcript) == 20

    def test_missing_audio_warns_but_continues(self, tmp_path):
        from noteforge.fixtures import solid_frame, write_video
        video = tmp_path / "mute.avi"
        write_video(video, [solid_frame((5, 5, 5))] * 30, fps=10.0)
        ctx = prepare_context(str(video), PipelineConfig(mock=True))
        parse_stage(ctx)
        assert ctx.transcript == []
        assert any("no audio" in w for w in ctx.warnings)

    def test_content_free_chapter_degrades_not_fails(self, tmp_path):
        # all captions land in the first scripted chapter; the second is empty
        import json
        from noteforge.fixtures import solid_frame, write_video
        video = tmp_path / "skewed.avi"
        write_video(video, [solid_frame((5, 5, 5))] * 200, fps=10.0)
        mock = tmp_path / "mock"
        mock.mkdir()
        (mock / "completions.json").write_text(json.dumps({"entries": [
            {"template_id": "chapter_cluster",
             "response": {"chapters": [{"t_s": 0, "t_e": 10},
                                       {"t_s": 10, "t_e": 20}]}},
        ]}), encoding="utf-8")
        config = PipelineConfig(mock=True, mock_dir=str(mock))
        ctx = run_pipeline(str(video), tmp_path / "job", config)
        assert ctx.scheme is not None
        silent = ctx.scheme.chapters[1]
        assert "DEGRADED" in silent.flags
        assert silent.summary.startswith("Silent span")


class TestStructureStage:
    def test_diamond_graph(self, diamond):
        config = PipelineConfig(mock=True, mock_dir=diamond["mock_dir"])
        ctx = prepare_context(diamond["video"], config)
        parse_stage(ctx)
        structure_stage(ctx)
        hierarchy = ctx.hierarchy
        assert [c.chapter_id for c in hierarchy.chapters] == [1, 2, 3, 4, 5]
        assert set(hierarchy.chapter_graph.edges) == {
            (1, 2), (1, 3), (1, 4), (2, 5), (3, 5), (4, 5)}
        assert all(len(c.steps) == 2 for c in hierarchy.chapters)

    def test_captions_follow_script(self, diamond):
        config = PipelineConfig(mock=True, mock_dir=diamond["mock_dir"])
        ctx = prepare_context(diamond["video"], config)
        parse_stage(ctx)
        structure_stage(ctx)
        assert ctx.captions[0].text == "A trainer stands on a mat in a bright room."
        assert all(c.kind == "CHANGE" for c in ctx.captions)


class TestKeyinfoStage:
    def test_detections_and_perspective(self, diamond):
        config = PipelineConfig(mock=True, mock_dir=diamond["mock_dir"])
        ctx = prepare_context(diamond["video"], config)
        parse_stage(ctx)
        keyinfo_stage(ctx)
        kinds = sorted(a.kind for a in ctx.static_annotations)
        assert kinds == ["DIAGRAM", "SPECIAL_MARK", "TEXT_OVERLAY"]
        assert len(ctx.dynamic_keyframes) == 1
        dyn = ctx.dynamic_keyframes[0]
        assert ctx.frames[dyn.post_frame_index].timestamp == diamond["perspective_time"]
        assert not dyn.low_confidence


class TestFullRun:
    def test_scheme_written_and_valid(self, diamond_ctx):
        ctx, job_dir = diamond_ctx
        scheme = parse_scheme((job_dir / "scheme").read_text(encoding="utf-8"),
                              assets={p.name for p in (job_dir / "assets").iterdir()})
        assert validate_scheme(scheme) == []
        assert scheme.duration == 50.0
        assert len(scheme.all_steps()) == 10

    def test_transcript_persisted(self, diamond_ctx):
        _, job_dir = diamond_ctx
        import json
        data = json.loads((job_dir / "transcript.json").read_text(encoding="utf-8"))
        assert len(data) == 20
        assert data[0]["text"] == "Start with easy shoulder rolls."

    def test_every_keyframe_attached_once(self, diamond_ctx):
        ctx, _ = diamond_ctx
        attached = [k for s in ctx.scheme.all_steps() for k in s.keyframes]
        assert len(attached) == len(ctx.static_annotations) + len(ctx.dynamic_keyframes)

    def test_scripted_highlights_present(self, diamond_ctx):
        ctx, _ = diamond_ctx
        step = next(s for s in ctx.scheme.all_steps() if s.step_id == "3.1")
        kinds = {h.kind for h in step.summary.highlights}
        assert kinds == {"TIP", "QUANTITY"}
        assert step.summary.emoji == "💪"
        target = step.summary.verbose
        for h in step.summary.highlights:
            assert target[h.start:h.end] in ("Keep breathing steadily", "10 MIN")

    def test_step_gifs_emitted(self, diamond_ctx):
        ctx, _ = diamond_ctx
        assert all(s.gif for s in ctx.scheme.all_steps())
        assert all(c.gif for c in ctx.scheme.chapters)

    def test_thumbnails_inside_steps(self, diamond_ctx):
        ctx, _ = diamond_ctx
        for step in ctx.scheme.all_steps():
            assert step.thumbnail is not None
            assert step.t_s <= step.thumbnail.timestamp <= step.t_e
