// Left column: the original video plus its transcript, kept in sync.

import { formatTime } from "./notes.js";
import type { TranscriptSegment } from "./types.js";

export class Player {
  readonly video: HTMLVideoElement;
  private transcriptList: HTMLElement;
  private segments: TranscriptSegment[] = [];

  constructor(private container: HTMLElement) {
    this.video = document.createElement("video");
    this.video.controls = true;
    this.video.className = "player-video";
    this.transcriptList = document.createElement("div");
    this.transcriptList.className = "transcript";
    container.appendChild(this.video);
    container.appendChild(this.transcriptList);
    this.video.addEventListener("timeupdate", () => this.highlightCurrent());
  }

  setSource(url: string): void {
    this.video.src = url;
  }

  setTranscript(segments: TranscriptSegment[]): void {
    this.segments = segments;
    this.transcriptList.textContent = "";
    for (const segment of segments) {
      const row = document.createElement("p");
      row.className = "transcript-row";
      row.dataset.tS = String(segment.t_s);
      const stamp = document.createElement("span");
      stamp.className = "stamp";
      stamp.textContent = formatTime(segment.t_s);
      row.appendChild(stamp);
      row.appendChild(document.createTextNode(` ${segment.text}`));
      row.addEventListener("click", () => this.seek(segment.t_s));
      this.transcriptList.appendChild(row);
    }
  }

  seek(t: number): void {
    this.video.currentTime = t;
    try {
      const playing = this.video.play?.();
      if (playing && typeof playing.catch === "function") {
        playing.catch(() => undefined); // autoplay restrictions are fine
      }
    } catch {
      // non-media environments (tests) cannot play; seeking still counts
    }
  }

  private highlightCurrent(): void {
    const t = this.video.currentTime;
    const rows = this.transcriptList.querySelectorAll<HTMLElement>(".transcript-row");
    rows.forEach((row, i) => {
      const segment = this.segments[i];
      row.classList.toggle("active",
        segment !== undefined && segment.t_s <= t && t < segment.t_e);
    });
  }
}
