"""Full pipeline orchestration: parse, structure, key info, note generation.

Each stage is a separate function over a shared context so the CLI can run
partial pipelines (keyframes only, structure only) without duplicating the
earlier stages.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .assets import AssetStore
from .config import PipelineConfig
from .dedup import KeyframeSet, filter_by_similarity, intersect_keyframes
from .errors import NoAudioTrack, ProviderFailure
from .ingest import (
    FrameRecord,
    MediaInfo,
    TranscriptSegment,
    extract_audio,
    normalize_transcript,
    probe,
    resolve_source,
    sample_frames,
)
from .keyinfo.dynamic import (
    DynamicKeyframe,
    build_profile,
    classify_boundary,
    detect_scene_boundaries,
)
from .keyinfo.static import (
    DEFAULT_QUERY,
    StaticAnnotation,
    plan_static_subtasks,
    run_static_extraction,
)
from .notegen import (
    GifSpec,
    assemble_gif,
    assemble_scheme,
    retrieve_thumbnail,
    summarize_chapter,
    summarize_step,
)
from .providers.base import ProviderBundle
from .providers.mock import build_mock_providers
from .providers.remote import build_remote_providers
from .scheme import NoteScheme, StepSummary, Thumbnail
from .serialize import serialize_scheme
from .structure import (
    DifferentialCaption,
    HierarchicalTranscript,
    caption_keyframes,
    build_hierarchy,
)


@dataclass
class PipelineContext:
    source: str
    config: PipelineConfig
    providers: ProviderBundle
    warnings: list[str] = field(default_factory=list)
    video_path: Path | None = None
    info: MediaInfo | None = None
    frames: list[FrameRecord] = field(default_factory=list)
    transcript: list[TranscriptSegment] = field(default_factory=list)
    keyframes: KeyframeSet = field(default_factory=KeyframeSet)
    captions: list[DifferentialCaption] = field(default_factory=list)
    hierarchy: HierarchicalTranscript | None = None
    static_annotations: list[StaticAnnotation] = field(default_factory=list)
    dynamic_keyframes: list[DynamicKeyframe] = field(default_factory=list)
    scheme: NoteScheme | None = None
    scheme_text: str = ""


def build_providers(config: PipelineConfig, source_path: Path | None = None) -> ProviderBundle:
    """Mock providers read fixture tables from the configured directory, or
    by convention from a ``mock/`` directory beside the source video."""
    if not config.mock:
        return build_remote_providers(config)
    if not config.mock_dir and source_path is not None:
        sibling = source_path.parent / "mock"
        if sibling.is_dir():
            config.mock_dir = str(sibling)
    return build_mock_providers(config)


def prepare_context(source: str, config: PipelineConfig,
                    providers: ProviderBundle | None = None,
                    workdir: Path | None = None) -> PipelineContext:
    video_path = resolve_source(source, workdir)
    if providers is None:
        providers = build_providers(config, video_path)
    ctx = PipelineContext(source=source, config=config, providers=providers)
    ctx.video_path = video_path
    return ctx


def parse_stage(ctx: PipelineContext) -> None:
    """Decode, sample, transcribe, embed, and reduce to keyframes."""
    config = ctx.config
    ctx.info = probe(ctx.video_path)
    ctx.frames = sample_frames(ctx.video_path, config.sample_rate,
                               config.max_dimension, ctx.info)
    try:
        audio = extract_audio(ctx.video_path)
        raw_segments = ctx.providers.asr.transcribe(audio)
    except NoAudioTrack as exc:
        ctx.warnings.append(f"no audio track, transcript empty: {exc}")
        raw_segments = []
    except ProviderFailure as exc:
        ctx.warnings.append(f"transcription failed, transcript empty: {exc}")
        raw_segments = []
    ctx.transcript, transcript_warnings = normalize_transcript(raw_segments)
    ctx.warnings.extend(transcript_warnings)

    embed = ctx.providers.embed
    with ThreadPoolExecutor(max_workers=ctx.providers.parallelism) as pool:
        semantic = list(pool.map(embed.semantic_embed, ctx.frames))
        visual = list(pool.map(embed.visual_embed, ctx.frames))
    sem_set = filter_by_similarity(semantic, config.semantic_threshold,
                                   "semantic_image", config.dedup_mode)
    vis_set = filter_by_similarity(visual, config.visual_threshold,
                                   "visual_image", config.dedup_mode)
    ctx.keyframes = intersect_keyframes(sem_set, vis_set)


def structure_stage(ctx: PipelineContext) -> None:
    ctx.captions = caption_keyframes(
        ctx.keyframes, ctx.frames, ctx.providers.vlm, ctx.transcript,
        parallelism=ctx.providers.parallelism,
        context_radius=ctx.config.transcript_window, warnings=ctx.warnings)
    ctx.hierarchy = build_hierarchy(ctx.captions, ctx.transcript,
                                    ctx.info.duration, ctx.providers.vlm,
                                    ctx.config, ctx.warnings)


def keyinfo_stage(ctx: PipelineContext) -> None:
    plan = plan_static_subtasks(DEFAULT_QUERY, ctx.providers.vlm, ctx.warnings)
    ctx.static_annotations = run_static_extraction(
        ctx.keyframes.indices, ctx.frames, ctx.transcript, plan,
        ctx.providers.vlm, window=ctx.config.transcript_window,
        parallelism=ctx.providers.parallelism, warnings=ctx.warnings)

    boundaries = detect_scene_boundaries(ctx.frames, ctx.config.scene_threshold)
    dynamic: list[DynamicKeyframe] = []
    for boundary in boundaries:
        profile = build_profile(boundary, ctx.providers.embed,
                                ctx.providers.depth, ctx.warnings)
        result = classify_boundary(boundary, profile, ctx.config.dynamic)
        if result is not None:
            dynamic.append(result)
    ctx.dynamic_keyframes = dynamic


def notegen_stage(ctx: PipelineContext, store: AssetStore) -> None:
    config, vlm = ctx.config, ctx.providers.vlm
    hierarchy = ctx.hierarchy
    by_frame: dict[int, list[StaticAnnotation]] = {}
    for ann in ctx.static_annotations:
        by_frame.setdefault(ann.frame_index, []).append(ann)

    chapter_summaries: dict[int, str] = {}
    step_summaries: dict[str, StepSummary] = {}
    thumbnails: dict[str, Thumbnail] = {}
    chapter_gifs: dict[int, GifSpec] = {}
    step_gifs: dict[str, GifSpec] = {}
    keyframe_records = [ctx.frames[i] for i in ctx.keyframes.indices]

    for chapter in hierarchy.chapters:
        if chapter.captions or chapter.segments:
            summary, degraded = summarize_chapter(chapter, vlm, ctx.warnings)
        else:  # nothing was said or shown in this span; keep the job alive
            summary, degraded = f"Silent span at {chapter.t_s:.0f}s.", True
            ctx.warnings.append(f"chapter {chapter.chapter_id} has no content; "
                                f"placeholder summary used")
        chapter_summaries[chapter.chapter_id] = summary
        if degraded and "DEGRADED" not in chapter.flags:
            chapter.flags.append("DEGRADED")
        gif = assemble_gif(chapter.chapter_id, (chapter.t_s, chapter.t_e),
                           ctx.frames, store, config.gif_max_frames, config.gif_fps)
        if gif is not None:
            chapter_gifs[chapter.chapter_id] = gif
        for step in chapter.steps:
            attached = [a for f_idx, anns in by_frame.items() for a in anns
                        if step.t_s <= ctx.frames[f_idx].timestamp < step.t_e
                        or (step is chapter.steps[-1]
                            and ctx.frames[f_idx].timestamp == step.t_e)]
            if step.captions or step.segments:
                step_summaries[step.step_id] = summarize_step(step, attached, vlm,
                                                              ctx.warnings)
            else:
                placeholder = f"Continue from {step.t_s:.0f}s."
                step_summaries[step.step_id] = StepSummary(
                    concise=placeholder, verbose=placeholder, flags=["DEGRADED"])
            thumbnails[step.step_id] = retrieve_thumbnail(
                step, keyframe_records, step_summaries[step.step_id],
                ctx.providers.embed, ctx.frames, store, ctx.warnings)
            if config.step_gifs:
                gif = assemble_gif(step.step_id, (step.t_s, step.t_e), ctx.frames,
                                   store, config.gif_max_frames, config.gif_fps)
                if gif is not None:
                    step_gifs[step.step_id] = gif

    title = Path(ctx.source).stem or "video"
    ctx.scheme = assemble_scheme(
        hierarchy, chapter_summaries, step_summaries, thumbnails,
        ctx.static_annotations, ctx.dynamic_keyframes, chapter_gifs, step_gifs,
        ctx.frames, store, title, ctx.info.duration, ctx.source)
    ctx.scheme_text = serialize_scheme(ctx.scheme)


def persist_transcript(ctx: PipelineContext, path: Path) -> None:
    payload = [{"seg_id": s.seg_id, "text": s.text, "t_s": s.t_s, "t_e": s.t_e}
               for s in ctx.transcript]
    path.write_text(json.dumps(payload, ensure_ascii=False, sort_keys=True),
                    encoding="utf-8")


def run_pipeline(source: str, job_dir: str | Path, config: PipelineConfig,
                 providers: ProviderBundle | None = None,
                 status_cb=None) -> PipelineContext:
    """Run every stage, persisting scheme, transcript, and assets under
    ``job_dir``. ``status_cb`` is called with each stage name as it starts."""
    job_dir = Path(job_dir)
    job_dir.mkdir(parents=True, exist_ok=True)
    store = AssetStore(job_dir / "assets")

    def report(stage: str):
        if status_cb is not None:
            status_cb(stage)

    report("PARSING")
    ctx = prepare_context(source, config, providers, workdir=job_dir / "source")
    parse_stage(ctx)
    persist_transcript(ctx, job_dir / "transcript.json")
    report("STRUCTURING")
    structure_stage(ctx)
    report("KEYINFO")
    keyinfo_stage(ctx)
    report("NOTEGEN")
    notegen_stage(ctx, store)
    (job_dir / "scheme").write_text(ctx.scheme_text, encoding="utf-8")
    return ctx
