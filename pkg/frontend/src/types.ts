// Wire types mirroring the scheme document and job records served by the API.

export type HighlightKind = "TIP" | "WARNING" | "QUANTITY";
export type KeyframeKind = "TEXT_OVERLAY" | "DIAGRAM" | "SPECIAL_MARK" | "PERSPECTIVE";

export interface Highlight {
  target: "CONCISE" | "VERBOSE";
  start: number;
  end: number;
  kind: HighlightKind;
}

export interface StepSummary {
  concise: string;
  verbose: string;
  emoji: string | null;
  highlights: Highlight[];
  flags: string[];
}

export interface Thumbnail {
  frame_index: number;
  timestamp: number;
  similarity: number;
  asset: string;
  flags: string[];
}

export interface Keyframe {
  kind: KeyframeKind;
  frame_index: number;
  timestamp: number;
  ocr_text: string;
  explanation: string;
  asset: string;
}

export interface Step {
  id: string;
  t_s: number;
  t_e: number;
  summary: StepSummary;
  thumbnail: Thumbnail | null;
  gif: string | null;
  keyframes: Keyframe[];
  successors: string[];
}

export interface Chapter {
  id: number;
  title: string;
  summary: string;
  t_s: number;
  t_e: number;
  gif: string | null;
  steps: Step[];
  successors: number[];
  flags: string[];
}

export interface Scheme {
  schema_version: string;
  title: string;
  duration: number;
  source_uri: string;
  chapters: Chapter[];
}

export interface JobStatus {
  job_id: string;
  source_uri: string;
  status: string;
  warnings: string[];
  error: string | null;
}

export interface TranscriptSegment {
  seg_id: number;
  text: string;
  t_s: number;
  t_e: number;
}

export interface ViewOptions {
  modality: "TEXT_ONLY" | "TEXT_IMAGE";
  verbosity: "CONCISE" | "VERBOSE";
  engagement: "PRINTABLE" | "INTERACTABLE";
  showEmoji: boolean;
}

export const DEFAULT_OPTIONS: ViewOptions = {
  modality: "TEXT_IMAGE",
  verbosity: "VERBOSE",
  engagement: "INTERACTABLE",
  showEmoji: true,
};
