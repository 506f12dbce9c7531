// Thin client over the job service HTTP API.

import type { JobStatus, Scheme, TranscriptSegment } from "./types.js";

export class ApiClient {
  constructor(private base: string = "") {}

  async getJob(jobId: string): Promise<JobStatus> {
    return this.json(`/api/jobs/${jobId}`);
  }

  async getScheme(jobId: string): Promise<Scheme> {
    return this.json(`/api/jobs/${jobId}/scheme`);
  }

  async getTranscript(jobId: string): Promise<TranscriptSegment[]> {
    return this.json(`/api/jobs/${jobId}/transcript`);
  }

  async putScheme(jobId: string, scheme: Scheme): Promise<void> {
    const response = await fetch(`${this.base}/api/jobs/${jobId}/scheme`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(scheme),
    });
    if (!response.ok) {
      throw new Error(`scheme update rejected: ${response.status}`);
    }
  }

  async submit(source: string): Promise<string> {
    const response = await fetch(`${this.base}/api/jobs`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ source }),
    });
    if (!response.ok) throw new Error(`submit failed: ${response.status}`);
    return (await response.json()).job_id;
  }

  assetUrl(jobId: string, name: string): string {
    return `${this.base}/api/jobs/${jobId}/assets/${name}`;
  }

  private async json<T>(path: string): Promise<T> {
    const response = await fetch(this.base + path);
    if (!response.ok) throw new Error(`${path}: ${response.status}`);
    return (await response.json()) as T;
  }
}
