"""Printable note rendering: one self-contained HTML document per scheme."""

from __future__ import annotations

import html
from dataclasses import dataclass

from .errors import MissingAsset
from .graph import topological_layers
from .scheme import ChapterNote, NoteScheme, StepNote, StepSummary

MODALITIES = ("TEXT_ONLY", "TEXT_IMAGE")
VERBOSITIES = ("CONCISE", "VERBOSE")
ENGAGEMENTS = ("PRINTABLE", "INTERACTABLE")

_STYLE = """
body { font-family: system-ui, sans-serif; max-width: 46rem; margin: 2rem auto;
       color: #1a1a1a; }
.chapter { border-top: 2px solid #ccc; padding-top: 1rem; margin-top: 1.5rem; }
.step { margin: 0.8rem 0 0.8rem 1rem; }
.parallel-group { border-left: 4px solid #7aa7d6; padding-left: 0.8rem;
                  margin: 0.8rem 0; }
.group-label { font-size: 0.8rem; text-transform: uppercase; color: #46658c;
               letter-spacing: 0.05em; }
.time { color: #777; font-size: 0.85rem; margin-left: 0.4rem; }
mark.hl-tip { background: #d3f0d3; }
mark.hl-warning { background: #ffd9c4; border-bottom: 2px solid #d9804d; }
mark.hl-quantity { background: #d7e7fb; }
img.thumbnail, img.keyframe { max-width: 14rem; display: block; margin: 0.4rem 0; }
img.chapter-gif { max-width: 18rem; display: block; margin: 0.4rem 0; }
figcaption { font-size: 0.8rem; color: #555; }
"""


@dataclass(frozen=True)
class RenderOptions:
    modality: str = "TEXT_IMAGE"
    verbosity: str = "VERBOSE"
    engagement: str = "PRINTABLE"
    show_emoji: bool = True

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise ValueError(f"modality must be one of {MODALITIES}")
        if self.verbosity not in VERBOSITIES:
            raise ValueError(f"verbosity must be one of {VERBOSITIES}")
        if self.engagement not in ENGAGEMENTS:
            raise ValueError(f"engagement must be one of {ENGAGEMENTS}")


def highlighted_text(summary: StepSummary, verbosity: str) -> str:
    """Escape the selected summary text and wrap its highlight spans."""
    text = summary.concise if verbosity == "CONCISE" else summary.verbose
    spans = sorted((h for h in summary.highlights if h.target == verbosity),
                   key=lambda h: (h.start, h.end))
    parts: list[str] = []
    cursor = 0
    for span in spans:
        if span.start < cursor:
            continue  # overlapping provider spans: keep the earlier one
        parts.append(html.escape(text[cursor:span.start]))
        parts.append(f'<mark class="hl-{span.kind.lower()}">'
                     f"{html.escape(text[span.start:span.end])}</mark>")
        cursor = span.end
    parts.append(html.escape(text[cursor:]))
    return "".join(parts)


def ordered_groups(nodes: list, edges: list, start_time: dict) -> list[list]:
    """Topological-layer order with maximal parallel sibling groups kept
    together; every returned group of length > 1 is a parallel group."""
    from .graph import StructureGraph

    graph = StructureGraph(nodes=list(nodes), edges=list(edges))
    preds = {n: frozenset(graph.predecessors(n)) for n in nodes}
    succs = {n: frozenset(graph.successors(n)) for n in nodes}
    groups: list[list] = []
    for layer in topological_layers(graph):
        layer = sorted(layer, key=lambda n: start_time[n])
        by_signature: dict[tuple, list] = {}
        for node in layer:
            by_signature.setdefault((preds[node], succs[node]), []).append(node)
        emitted = set()
        for node in layer:
            if node in emitted:
                continue
            group = by_signature[(preds[node], succs[node])]
            emitted.update(group)
            groups.append(group)
    return groups


def render_printable(scheme: NoteScheme, opts: RenderOptions,
                     asset_href=None, asset_exists=None) -> str:
    """Sequence the whole scheme into static hypertext.

    ``asset_href`` maps an asset name to a URL (default: relative
    ``assets/<name>``); ``asset_exists``, when given, gates every referenced
    asset and raises MissingAsset on a broken reference.
    """
    if opts.engagement != "PRINTABLE":
        raise ValueError("render_printable requires PRINTABLE engagement")
    href = asset_href or (lambda name: f"assets/{name}")

    def img(name: str | None, css: str, alt: str) -> str:
        if opts.modality != "TEXT_IMAGE" or not name:
            return ""
        if asset_exists is not None and not asset_exists(name):
            raise MissingAsset(name)
        return f'<img class="{css}" src="{html.escape(href(name))}" alt="{html.escape(alt)}">'

    out: list[str] = [
        "<!doctype html>",
        '<html lang="en"><head><meta charset="utf-8">',
        f"<title>{html.escape(scheme.title)}</title>",
        f"<style>{_STYLE}</style></head>",
        f'<body><article class="notes" data-modality="{opts.modality}" '
        f'data-verbosity="{opts.verbosity}">',
        f"<h1>{html.escape(scheme.title)}</h1>",
        f'<p class="time">Source duration {scheme.duration:.1f}s — '
        f"{html.escape(scheme.source_uri)}</p>",
    ]

    chapters_by_id = {c.chapter_id: c for c in scheme.chapters}
    chapter_groups = ordered_groups(
        [c.chapter_id for c in scheme.chapters],
        [(c.chapter_id, s) for c in scheme.chapters for s in c.successors],
        {c.chapter_id: c.t_s for c in scheme.chapters})

    for group in chapter_groups:
        parallel = len(group) > 1
        if parallel:
            out.append('<div class="parallel-group">'
                       '<div class="group-label">Parallel chapters — any order</div>')
        for chapter_id in group:
            out.append(_render_chapter(chapters_by_id[chapter_id], opts, img))
        if parallel:
            out.append("</div>")

    out.append("</article></body></html>")
    return "\n".join(part for part in out if part)


def _render_chapter(chapter: ChapterNote, opts: RenderOptions, img) -> str:
    out = [f'<section class="chapter" data-chapter-id="{chapter.chapter_id}" '
           f'id="chapter-{chapter.chapter_id}">']
    heading = chapter.title or f"Chapter {chapter.chapter_id}"
    out.append(f"<h2>{html.escape(heading)}"
               f'<span class="time">{chapter.t_s:.1f}–{chapter.t_e:.1f}s</span></h2>')
    out.append(f'<p class="chapter-summary">{html.escape(chapter.summary)}</p>')
    out.append(img(chapter.gif, "chapter-gif", f"animation of {heading}"))

    step_groups = ordered_groups(
        [s.step_id for s in chapter.steps],
        [(s.step_id, t) for s in chapter.steps for t in s.successors],
        {s.step_id: s.t_s for s in chapter.steps})
    steps_by_id = {s.step_id: s for s in chapter.steps}
    for group in step_groups:
        parallel = len(group) > 1
        if parallel:
            out.append('<div class="parallel-group">'
                       '<div class="group-label">Parallel steps — any order</div>')
        for step_id in group:
            out.append(_render_step(steps_by_id[step_id], opts, img))
        if parallel:
            out.append("</div>")
    out.append("</section>")
    return "\n".join(part for part in out if part)


def _render_step(step: StepNote, opts: RenderOptions, img) -> str:
    out = [f'<section class="step" data-step-id="{html.escape(step.step_id)}" '
           f'id="step-{html.escape(step.step_id)}">']
    emoji = ""
    if opts.show_emoji and step.summary.emoji:
        emoji = f' <span class="emoji">{html.escape(step.summary.emoji)}</span>'
    out.append(f"<h3>Step {html.escape(step.step_id)}{emoji}"
               f'<span class="time">{step.t_s:.1f}s</span></h3>')
    out.append(f'<p class="summary">{highlighted_text(step.summary, opts.verbosity)}</p>')
    if step.thumbnail:
        out.append(img(step.thumbnail.asset, "thumbnail",
                       f"thumbnail for step {step.step_id}"))
    for kf in step.keyframes:
        caption = kf.ocr_text or kf.explanation or kf.kind
        figure_img = img(kf.asset, "keyframe", caption)
        label = kf.kind.replace("_", " ").title()
        if opts.modality == "TEXT_IMAGE" and figure_img:
            out.append(f"<figure>{figure_img}<figcaption>{html.escape(label)}: "
                       f"{html.escape(caption)} ({kf.timestamp:.1f}s)"
                       f"</figcaption></figure>")
        else:
            out.append(f'<p class="keyframe-note">{html.escape(label)}: '
                       f"{html.escape(caption)} ({kf.timestamp:.1f}s)</p>")
    out.append("</section>")
    return "\n".join(part for part in out if part)
