/** Typed client for the serve-mode API; the UI's only data source. */

import type {
  Annotation,
  DatasetIndex,
  DownsampledSensors,
  GeoJsonDoc,
  InstanceDetail,
  Taxonomy,
  ValidationEntry,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly report: ValidationEntry[] = [],
  ) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<never> {
  let message = `${resp.status} ${resp.statusText}`;
  let report: ValidationEntry[] = [];
  try {
    const body = await resp.json();
    if (body.error) message = body.error;
    if (Array.isArray(body.report)) report = body.report;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(resp.status, message, report);
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await fetch(this.baseUrl + path);
    if (!resp.ok) await parseError(resp);
    return resp.json() as Promise<T>;
  }

  getTaxonomy(): Promise<Taxonomy> {
    return this.getJson("/api/taxonomy");
  }

  getInstances(): Promise<DatasetIndex> {
    return this.getJson("/api/instances");
  }

  getInstance(id: string): Promise<InstanceDetail> {
    return this.getJson(`/api/instances/${encodeURIComponent(id)}`);
  }

  getAnnotations(id: string): Promise<Annotation[]> {
    return this.getJson(`/api/instances/${encodeURIComponent(id)}/annotations`);
  }

  async putAnnotations(id: string, annotations: Annotation[]): Promise<void> {
    const resp = await fetch(
      `${this.baseUrl}/api/instances/${encodeURIComponent(id)}/annotations`,
      {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(annotations),
      },
    );
    if (!resp.ok) await parseError(resp);
  }

  getBundleSensors(id: string): Promise<DownsampledSensors> {
    return this.getJson(
      `/api/instances/${encodeURIComponent(id)}/bundle/sensors.downsampled.json`,
    );
  }

  getBundleTrack(id: string): Promise<GeoJsonDoc> {
    return this.getJson(
      `/api/instances/${encodeURIComponent(id)}/bundle/gps.geojson`,
    );
  }

  bundleVideoUrl(id: string): string {
    return `${this.baseUrl}/api/instances/${encodeURIComponent(id)}/bundle/video.mp4`;
  }
}
