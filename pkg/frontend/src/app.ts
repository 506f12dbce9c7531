// Composition root: three columns, cross-component seek, option toggles,
// summary editing with serialized saves.

import { ApiClient } from "./api.js";
import { renderChapterGraph, renderStepGraph } from "./hierarchy.js";
import { renderNotes } from "./notes.js";
import { Player } from "./player.js";
import { DEFAULT_OPTIONS, type Scheme, type ViewOptions } from "./types.js";

export class App {
  readonly api: ApiClient;
  options: ViewOptions = { ...DEFAULT_OPTIONS };
  scheme: Scheme | null = null;
  jobId = "";
  selectedChapter = 0;
  hierarchyVisible = true;

  private player: Player;
  private saving: Promise<void> = Promise.resolve();

  constructor(private root: HTMLElement, api?: ApiClient) {
    this.api = api ?? new ApiClient();
    this.root.innerHTML = `
      <header class="toolbar">
        <span class="brand">noteforge</span>
        <button data-action="toggle-hierarchy" type="button">Hierarchy</button>
        <div class="option-toggles">
          <button data-option="modality" type="button"></button>
          <button data-option="verbosity" type="button"></button>
          <button data-option="engagement" type="button"></button>
          <button data-option="emoji" type="button"></button>
        </div>
      </header>
      <main class="columns">
        <section class="column player-column"></section>
        <section class="column hierarchy-column">
          <div class="chapter-graph"></div>
          <div class="step-graph"></div>
        </section>
        <section class="column notes-column"></section>
      </main>
      <div class="status-screen" hidden></div>`;
    this.player = new Player(this.query(".player-column"));
    this.wireToolbar();
  }

  query<T extends HTMLElement = HTMLElement>(selector: string): T {
    return this.root.querySelector(selector) as T;
  }

  /** Poll until the job is DONE, then load scheme and transcript. */
  async load(jobId: string, pollMs = 1500): Promise<void> {
    this.jobId = jobId;
    const status = this.query(".status-screen");
    for (;;) {
      const job = await this.api.getJob(jobId);
      if (job.status === "DONE") break;
      if (job.status === "FAILED") {
        status.hidden = false;
        status.textContent = `Processing failed: ${job.error ?? "unknown error"}`;
        return;
      }
      status.hidden = false;
      status.textContent = `Processing — ${job.status}`;
      await new Promise((resolve) => setTimeout(resolve, pollMs));
    }
    status.hidden = true;
    this.scheme = await this.api.getScheme(jobId);
    const job = await this.api.getJob(jobId);
    this.player.setSource(job.source_uri);
    this.player.setTranscript(await this.api.getTranscript(jobId));
    this.selectedChapter = this.scheme.chapters[0]?.id ?? 0;
    this.renderAll();
  }

  setScheme(scheme: Scheme, jobId = "local"): void {
    this.scheme = scheme;
    this.jobId = jobId;
    this.selectedChapter = scheme.chapters[0]?.id ?? 0;
    this.renderAll();
  }

  setOption<K extends keyof ViewOptions>(key: K, value: ViewOptions[K]): void {
    this.options = { ...this.options, [key]: value };
    this.renderAll(); // pure presentation: no pipeline calls
  }

  selectChapter(chapterId: number): void {
    this.selectedChapter = chapterId;
    this.renderHierarchy();
    const chapter = this.scheme?.chapters.find((c) => c.id === chapterId);
    if (chapter) this.seekAndHighlight(chapter.t_s, `[data-chapter-id="${chapterId}"]`);
  }

  seekAndHighlight(t: number, selector?: string): void {
    this.player.seek(t);
    if (!selector) return;
    const notes = this.query(".notes-column");
    notes.querySelectorAll(".focused").forEach((el) => el.classList.remove("focused"));
    const target = notes.querySelector<HTMLElement>(selector);
    if (target) {
      target.classList.add("focused");
      target.scrollIntoView?.({ block: "center", behavior: "smooth" });
    }
  }

  renderAll(): void {
    if (!this.scheme) return;
    this.renderHierarchy();
    this.renderNoteColumn();
    this.updateToolbar();
  }

  private renderNoteColumn(): void {
    if (!this.scheme) return;
    renderNotes(this.query(".notes-column"), this.scheme, this.options, {
      onSeek: (t) => {
        this.player.seek(t);
      },
      onEdit: (stepId, field, text) => this.saveEdit(stepId, field, text),
      assetUrl: (name) => this.api.assetUrl(this.jobId, name),
    });
  }

  private renderHierarchy(): void {
    if (!this.scheme) return;
    renderChapterGraph(this.query(".chapter-graph"), this.scheme,
      this.selectedChapter, (id) => this.selectChapter(id));
    const chapter = this.scheme.chapters.find((c) => c.id === this.selectedChapter)
      ?? this.scheme.chapters[0];
    if (chapter) {
      renderStepGraph(this.query(".step-graph"), chapter, (stepId) => {
        const step = chapter.steps.find((s) => s.id === stepId);
        if (step) this.seekAndHighlight(step.t_s, `[data-step-id="${stepId}"]`);
      });
    }
  }

  /** Edits are serialized: one in-flight PUT at a time. */
  private saveEdit(stepId: string, field: "concise" | "verbose", text: string): void {
    if (!this.scheme) return;
    for (const chapter of this.scheme.chapters) {
      for (const step of chapter.steps) {
        if (step.id === stepId) step.summary[field] = text;
      }
    }
    const snapshot = this.scheme;
    this.saving = this.saving
      .then(() => this.api.putScheme(this.jobId, snapshot))
      .catch((error) => console.warn("edit not saved:", error));
  }

  private wireToolbar(): void {
    this.query('[data-action="toggle-hierarchy"]').addEventListener("click", () => {
      this.hierarchyVisible = !this.hierarchyVisible;
      this.query(".hierarchy-column").style.display =
        this.hierarchyVisible ? "" : "none";
    });
    this.query('[data-option="modality"]').addEventListener("click", () =>
      this.setOption("modality",
        this.options.modality === "TEXT_IMAGE" ? "TEXT_ONLY" : "TEXT_IMAGE"));
    this.query('[data-option="verbosity"]').addEventListener("click", () =>
      this.setOption("verbosity",
        this.options.verbosity === "VERBOSE" ? "CONCISE" : "VERBOSE"));
    this.query('[data-option="engagement"]').addEventListener("click", () =>
      this.setOption("engagement",
        this.options.engagement === "INTERACTABLE" ? "PRINTABLE" : "INTERACTABLE"));
    this.query('[data-option="emoji"]').addEventListener("click", () =>
      this.setOption("showEmoji", !this.options.showEmoji));
  }

  private updateToolbar(): void {
    this.query('[data-option="modality"]').textContent =
      this.options.modality === "TEXT_IMAGE" ? "Text + image" : "Text only";
    this.query('[data-option="verbosity"]').textContent =
      this.options.verbosity === "VERBOSE" ? "Verbose" : "Concise";
    this.query('[data-option="engagement"]').textContent =
      this.options.engagement === "INTERACTABLE" ? "Interactable" : "Printable";
    this.query('[data-option="emoji"]').textContent =
      this.options.showEmoji ? "Emoji on" : "Emoji off";
  }
}
