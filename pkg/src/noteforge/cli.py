"""Command line interface."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .config import PipelineConfig
from .errors import NoteforgeError


def _load_config(config_path, mock, seed=None):
    config = PipelineConfig.load(config_path)
    if mock:
        config.mock = True
    if seed is not None:
        config.seed = seed
    return config


@click.group()
def main():
    """Convert instructional videos into structured, customizable notes."""


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--scenario", required=True)
def fixture(out_dir, scenario):
    """Generate a deterministic test video plus its mock provider tables."""
    from .fixtures import build_scenario

    manifest = build_scenario(scenario, out_dir)
    click.echo(f"wrote {manifest['video']}")


@main.command()
@click.argument("source")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--mock", is_flag=True, default=False)
@click.option("--seed", type=int, default=None)
def process(source, out_dir, config_path, mock, seed):
    """Run the full pipeline; writes scheme, transcript, and assets to OUT."""
    from .pipeline import run_pipeline

    config = _load_config(config_path, mock, seed)
    try:
        ctx = run_pipeline(source, out_dir, config,
                           status_cb=lambda stage: click.echo(f"stage: {stage}"))
    except NoteforgeError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"scheme: {Path(out_dir) / 'scheme'}")
    for warning in ctx.warnings:
        click.echo(f"warning: {warning}", err=True)


@main.command()
@click.option("--scheme", "scheme_path", required=True, type=click.Path(exists=True))
@click.option("--modality", default="TEXT_IMAGE",
              type=click.Choice(["TEXT_ONLY", "TEXT_IMAGE"]))
@click.option("--verbosity", default="VERBOSE",
              type=click.Choice(["CONCISE", "VERBOSE"]))
@click.option("--engagement", default="PRINTABLE",
              type=click.Choice(["PRINTABLE", "INTERACTABLE"]))
@click.option("--show-emoji/--no-emoji", default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--assets", "assets_dir", type=click.Path(exists=True),
              help="Asset directory for existence checks and relative links.")
def render(scheme_path, modality, verbosity, engagement, show_emoji, out_path,
           assets_dir):
    """Render a scheme file to a printable HTML document."""
    from .htmlrender import RenderOptions, render_printable
    from .serialize import parse_scheme

    scheme = parse_scheme(Path(scheme_path).read_text(encoding="utf-8"))
    opts = RenderOptions(modality=modality, verbosity=verbosity,
                         engagement=engagement, show_emoji=show_emoji)
    asset_exists = None
    if assets_dir:
        root = Path(assets_dir)
        asset_exists = lambda name: (root / name).exists()  # noqa: E731
    try:
        html = render_printable(scheme, opts, asset_exists=asset_exists)
    except NoteforgeError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    Path(out_path).write_text(html, encoding="utf-8")
    click.echo(f"wrote {out_path}")


@main.command()
@click.option("--port", default=8000, type=int)
@click.option("--jobs-root", default="jobs", type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--mock", is_flag=True, default=False)
@click.option("--static", "static_dir", type=click.Path(),
              help="Directory of built viewer files to serve at /.")
def serve(port, jobs_root, config_path, mock, static_dir):
    """Start the HTTP service."""
    import uvicorn

    from .service import create_app

    config = _load_config(config_path, mock)
    default_static = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if static_dir is None and default_static.is_dir():
        static_dir = str(default_static)
    app = create_app(config, jobs_root, static_dir)
    uvicorn.run(app, host="127.0.0.1", port=port)


@main.command(name="eval")
@click.option("--pred", "pred_path", required=True, type=click.Path(exists=True))
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--tolerance", default=2.0, type=float)
def eval_cmd(pred_path, gold_path, tolerance):
    """Score predictions against gold annotations (files or directories)."""
    from .evalharness import evaluate, macro_report, parse_annotation_file, render_report

    pred_path, gold_path = Path(pred_path), Path(gold_path)
    if pred_path.is_dir() != gold_path.is_dir():
        click.echo("error: pred and gold must both be files or both directories",
                   err=True)
        sys.exit(1)
    if pred_path.is_dir():
        reports = []
        for gold_file in sorted(gold_path.iterdir()):
            pred_file = pred_path / gold_file.name
            if not pred_file.exists():
                click.echo(f"error: no prediction file for {gold_file.name}", err=True)
                sys.exit(1)
            reports.append(evaluate(parse_annotation_file(pred_file),
                                    parse_annotation_file(gold_file), tolerance))
        click.echo(render_report(macro_report(reports)))
    else:
        report = evaluate(parse_annotation_file(pred_path),
                          parse_annotation_file(gold_path), tolerance)
        click.echo(render_report(report))


def _prepared_context(source, config_path, mock, sem_threshold=None,
                      vis_threshold=None):
    from .pipeline import parse_stage, prepare_context

    config = _load_config(config_path, mock)
    if sem_threshold is not None:
        config.semantic_threshold = sem_threshold
    if vis_threshold is not None:
        config.visual_threshold = vis_threshold
    ctx = prepare_context(source, config)
    parse_stage(ctx)
    return ctx


@main.command()
@click.argument("video")
@click.option("--sem-threshold", default=None, type=float)
@click.option("--vis-threshold", default=None, type=float)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--mock", is_flag=True, default=False)
def keyframes(video, sem_threshold, vis_threshold, out_path, config_path, mock):
    """Write the deduplicated keyframe indices, one per line."""
    ctx = _prepared_context(video, config_path, mock, sem_threshold, vis_threshold)
    lines = [f"{i}\t{ctx.frames[i].timestamp}" for i in ctx.keyframes.indices]
    Path(out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    click.echo(f"kept {len(lines)} of {len(ctx.frames)} frames")


@main.command()
@click.argument("video")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--dot", "dot_path", type=click.Path(),
              help="Also write a plain edge-list description of the graphs.")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--mock", is_flag=True, default=False)
def structure(video, out_path, dot_path, config_path, mock):
    """Extract the chapter/step hierarchy and dump it as canonical text."""
    from .pipeline import structure_stage
    from .serialize import dumps_canonical

    ctx = _prepared_context(video, config_path, mock)
    structure_stage(ctx)
    hierarchy = ctx.hierarchy
    payload = {
        "duration": ctx.info.duration,
        "chapters": [{
            "id": c.chapter_id, "title": c.title, "t_s": c.t_s, "t_e": c.t_e,
            "steps": [{"id": s.step_id, "t_s": s.t_s, "t_e": s.t_e}
                      for s in c.steps],
        } for c in hierarchy.chapters],
        "chapter_edges": [list(e) for e in hierarchy.chapter_graph.edges],
        "step_edges": {str(cid): [list(e) for e in g.edges]
                       for cid, g in hierarchy.step_graphs.items()},
    }
    Path(out_path).write_text(dumps_canonical(payload), encoding="utf-8")
    if dot_path:
        lines = [f"{a} -> {b}" for a, b in hierarchy.chapter_graph.edges]
        for cid, g in sorted(hierarchy.step_graphs.items()):
            lines += [f"{a} -> {b}" for a, b in g.edges]
        Path(dot_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    click.echo(f"wrote {out_path}")


@main.command()
@click.argument("video")
@click.option("--static/--no-static", "want_static", default=True)
@click.option("--dynamic/--no-dynamic", "want_dynamic", default=True)
@click.option("--report", "report_path", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--mock", is_flag=True, default=False)
def keyinfo(video, want_static, want_dynamic, report_path, config_path, mock):
    """Detect static and dynamic key frames; write a line-oriented report."""
    from .pipeline import keyinfo_stage

    ctx = _prepared_context(video, config_path, mock)
    keyinfo_stage(ctx)
    lines = []
    if want_static:
        for ann in ctx.static_annotations:
            t = ctx.frames[ann.frame_index].timestamp
            lines.append(f"{t}\t{ann.kind}\t{ann.ocr_text}\t{ann.explanation}")
    if want_dynamic:
        for dyn in ctx.dynamic_keyframes:
            t = ctx.frames[dyn.post_frame_index].timestamp
            lines.append(f"{t}\tPERSPECTIVE\t\tperspective change"
                         f"{' (low confidence)' if dyn.low_confidence else ''}")
    lines.sort(key=lambda line: float(line.split("\t", 1)[0]))
    Path(report_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    click.echo(f"wrote {len(lines)} detections")


if __name__ == "__main__":
    main()
