// The note column: renders the loaded scheme for any option combination.
// Every toggle re-renders from the scheme already in memory; the only
// network activity this module can cause is the browser fetching <img> assets.

import { orderedGroups } from "./groups.js";
import type { Chapter, Scheme, Step, StepSummary, ViewOptions } from "./types.js";

export interface NoteHandlers {
  onSeek(t: number): void;
  onEdit(stepId: string, field: "concise" | "verbose", text: string): void;
  assetUrl(name: string): string;
}

export function renderNotes(
  container: HTMLElement,
  scheme: Scheme,
  opts: ViewOptions,
  handlers: NoteHandlers,
): void {
  container.textContent = "";
  container.dataset.modality = opts.modality;
  container.dataset.verbosity = opts.verbosity;
  container.dataset.engagement = opts.engagement;

  const chapterById = new Map(scheme.chapters.map((c) => [c.id, c]));
  const groups = orderedGroups(
    scheme.chapters.map((c) => c.id),
    scheme.chapters.flatMap((c) => c.successors.map((s) => [c.id, s] as [number, number])),
    new Map(scheme.chapters.map((c) => [c.id, c.t_s])),
  );

  for (const group of groups) {
    const chapters = group.map((id) => chapterById.get(id as number)!);
    if (group.length > 1 && opts.engagement === "INTERACTABLE") {
      container.appendChild(
        tabGroup(chapters.map((c) => ({
          label: c.title || `Chapter ${c.id}`,
          body: chapterBlock(c, opts, handlers),
        }))),
      );
    } else if (group.length > 1) {
      const wrapper = div("parallel-group");
      wrapper.appendChild(div("group-label", "Parallel chapters — any order"));
      chapters.forEach((c) => wrapper.appendChild(chapterBlock(c, opts, handlers)));
      container.appendChild(wrapper);
    } else {
      container.appendChild(chapterBlock(chapters[0], opts, handlers));
    }
  }
}

function chapterBlock(chapter: Chapter, opts: ViewOptions, handlers: NoteHandlers): HTMLElement {
  const section = document.createElement("section");
  section.className = "chapter-note";
  section.dataset.chapterId = String(chapter.id);

  const heading = document.createElement("h2");
  heading.appendChild(timeLink(chapter.t_s, handlers));
  heading.appendChild(text(` ${chapter.title || `Chapter ${chapter.id}`}`));
  section.appendChild(heading);
  section.appendChild(div("chapter-summary", chapter.summary));
  if (opts.modality === "TEXT_IMAGE" && chapter.gif) {
    section.appendChild(img(handlers.assetUrl(chapter.gif), "chapter-gif"));
  }

  const stepById = new Map(chapter.steps.map((s) => [s.id, s]));
  const groups = orderedGroups(
    chapter.steps.map((s) => s.id),
    chapter.steps.flatMap((s) => s.successors.map((t) => [s.id, t] as [string, string])),
    new Map(chapter.steps.map((s) => [s.id, s.t_s])),
  );
  for (const group of groups) {
    const steps = group.map((id) => stepById.get(id as string)!);
    if (group.length > 1 && opts.engagement === "INTERACTABLE") {
      section.appendChild(
        tabGroup(steps.map((s) => ({
          label: s.summary.concise,
          body: stepBlock(s, opts, handlers),
        }))),
      );
    } else if (group.length > 1) {
      const wrapper = div("parallel-group");
      wrapper.appendChild(div("group-label", "Parallel steps — any order"));
      steps.forEach((s) => wrapper.appendChild(stepBlock(s, opts, handlers)));
      section.appendChild(wrapper);
    } else {
      section.appendChild(stepBlock(steps[0], opts, handlers));
    }
  }
  return section;
}

function stepBlock(step: Step, opts: ViewOptions, handlers: NoteHandlers): HTMLElement {
  const section = document.createElement("section");
  section.className = "step-note";
  section.dataset.stepId = step.id;
  section.id = `note-step-${step.id}`;

  const heading = document.createElement("h3");
  const index = document.createElement("a");
  index.className = "step-index";
  index.textContent = `Step ${step.id}`;
  index.href = "#";
  index.addEventListener("click", (event) => {
    event.preventDefault();
    handlers.onSeek(step.t_s);
  });
  heading.appendChild(index);
  if (opts.showEmoji && step.summary.emoji) {
    const emoji = document.createElement("span");
    emoji.className = "emoji";
    emoji.textContent = ` ${step.summary.emoji}`;
    heading.appendChild(emoji);
  }
  heading.appendChild(timeLink(step.t_s, handlers));
  section.appendChild(heading);

  const summary = summaryParagraph(step, opts, handlers);
  section.appendChild(summary);

  if (opts.modality === "TEXT_IMAGE") {
    if (opts.engagement === "INTERACTABLE" && step.gif) {
      section.appendChild(img(handlers.assetUrl(step.gif), "step-gif"));
    } else if (step.thumbnail) {
      section.appendChild(img(handlers.assetUrl(step.thumbnail.asset), "thumbnail"));
    }
  }

  if (opts.verbosity === "VERBOSE" && step.keyframes.length) {
    const hints = div("keyframe-hints");
    for (const kf of step.keyframes) {
      const hint = div(`hint hint-${kf.kind.toLowerCase()}`);
      if (opts.modality === "TEXT_IMAGE" && kf.asset) {
        hint.appendChild(img(handlers.assetUrl(kf.asset), "keyframe"));
      }
      const label = kf.kind.replace(/_/g, " ").toLowerCase();
      hint.appendChild(div("hint-caption",
        `${label}: ${kf.ocr_text || kf.explanation}`));
      hints.appendChild(hint);
    }
    section.appendChild(hints);
  }
  return section;
}

function summaryParagraph(step: Step, opts: ViewOptions, handlers: NoteHandlers): HTMLElement {
  const p = document.createElement("p");
  p.className = "summary";
  const field = opts.verbosity === "CONCISE" ? "concise" : "verbose";
  renderHighlighted(p, step.summary, opts.verbosity);
  p.contentEditable = "true";
  p.addEventListener("blur", () => {
    const edited = p.textContent ?? "";
    if (edited.trim() && edited !== step.summary[field]) {
      handlers.onEdit(step.id, field, edited.trim());
    }
  });
  return p;
}

function renderHighlighted(target: HTMLElement, summary: StepSummary,
                           verbosity: "CONCISE" | "VERBOSE"): void {
  const body = verbosity === "CONCISE" ? summary.concise : summary.verbose;
  const spans = summary.highlights
    .filter((h) => h.target === verbosity)
    .sort((a, b) => a.start - b.start || a.end - b.end);
  let cursor = 0;
  for (const span of spans) {
    if (span.start < cursor) continue;
    target.appendChild(text(body.slice(cursor, span.start)));
    const mark = document.createElement("mark");
    mark.className = `hl-${span.kind.toLowerCase()}`;
    mark.textContent = body.slice(span.start, span.end);
    target.appendChild(mark);
    cursor = span.end;
  }
  target.appendChild(text(body.slice(cursor)));
}

/** Parallel sections collapse into slides with a tab per section summary. */
function tabGroup(panels: { label: string; body: HTMLElement }[]): HTMLElement {
  const root = div("tab-group");
  const bar = div("tab-bar");
  const area = div("tab-panels");
  root.appendChild(div("group-label", "Parallel — any order"));
  root.appendChild(bar);
  root.appendChild(area);
  const buttons: HTMLButtonElement[] = [];
  panels.forEach((panel, i) => {
    const button = document.createElement("button");
    button.className = "tab";
    button.type = "button";
    button.textContent = panel.label;
    button.addEventListener("click", () => activate(i));
    bar.appendChild(button);
    buttons.push(button);
    panel.body.classList.add("tab-panel");
    area.appendChild(panel.body);
  });
  const activate = (index: number) => {
    panels.forEach((panel, i) => {
      panel.body.style.display = i === index ? "" : "none";
      buttons[i].classList.toggle("active", i === index);
    });
  };
  activate(0);
  return root;
}

function timeLink(t: number, handlers: NoteHandlers): HTMLElement {
  const link = document.createElement("a");
  link.className = "time-link";
  link.href = "#";
  link.dataset.t = String(t);
  link.textContent = formatTime(t);
  link.addEventListener("click", (event) => {
    event.preventDefault();
    handlers.onSeek(t);
  });
  return link;
}

export function formatTime(t: number): string {
  const minutes = Math.floor(t / 60);
  const seconds = Math.floor(t % 60);
  return `${minutes}:${String(seconds).padStart(2, "0")}`;
}

function div(className: string, textContent?: string): HTMLDivElement {
  const el = document.createElement("div");
  el.className = className;
  if (textContent !== undefined) el.textContent = textContent;
  return el;
}

function img(src: string, className: string): HTMLImageElement {
  const el = document.createElement("img");
  el.src = src;
  el.className = className;
  el.loading = "lazy";
  return el;
}

function text(value: string): Text {
  return document.createTextNode(value);
}
