/**
 * Annotation editing session: drafts, client-side validation, save.
 *
 * Drafts must satisfy the same invariants the server enforces before
 * a submission is even attempted; a 422 response maps the server's
 * validation report back onto the offending entries.
 */

import { ApiClient, ApiError } from "./api.js";
import type { Annotation, Taxonomy, ValidationEntry } from "./types.js";

export interface SpanInfo {
  instanceId: string;
  startMs: number;
  stopMs: number;
}

export function validateDraft(
  draft: Annotation,
  span: SpanInfo,
  taxonomy: Taxonomy,
): string[] {
  const problems: string[] = [];
  if (!Number.isFinite(draft.t_start_ms) || !Number.isFinite(draft.t_end_ms)) {
    problems.push("start and end must be numbers");
    return problems;
  }
  if (draft.t_end_ms <= draft.t_start_ms) {
    problems.push("end must be after start");
  }
  if (draft.t_start_ms < span.startMs || draft.t_end_ms > span.stopMs) {
    problems.push("range is outside the recording");
  }
  const category = taxonomy.categories.find((c) => c.name === draft.category);
  if (!category) {
    problems.push(`unknown category: ${draft.category}`);
  } else if (!category.elements.includes(draft.element)) {
    problems.push(`${draft.element} is not under ${draft.category}`);
  }
  return problems;
}

export interface SaveResult {
  ok: boolean;
  readOnly?: boolean;
  report?: ValidationEntry[];
}

export class AnnotationSession {
  annotations: Annotation[] = [];
  dirty = false;
  readOnly = false;
  private counter = 0;

  constructor(
    private api: ApiClient,
    private span: SpanInfo,
    private taxonomy: Taxonomy,
    private author: string = "annotator",
  ) {}

  async load(): Promise<void> {
    this.annotations = await this.api.getAnnotations(this.span.instanceId);
    this.dirty = false;
  }

  /** Client-side guard: invalid drafts are rejected and never sent. */
  addDraft(
    startMs: number,
    endMs: number,
    category: string,
    element: string,
    note = "",
  ): { annotation?: Annotation; problems: string[] } {
    const draft: Annotation = {
      id: `local-${Date.now()}-${this.counter++}`,
      instance_id: this.span.instanceId,
      t_start_ms: Math.round(startMs),
      t_end_ms: Math.round(endMs),
      category,
      element,
      note,
      author: this.author,
      created_at: Date.now(),
    };
    const problems = validateDraft(draft, this.span, this.taxonomy);
    if (problems.length > 0) return { problems };
    this.annotations.push(draft);
    this.dirty = true;
    return { annotation: draft, problems: [] };
  }

  remove(id: string): void {
    const before = this.annotations.length;
    this.annotations = this.annotations.filter((a) => a.id !== id);
    if (this.annotations.length !== before) this.dirty = true;
  }

  async save(): Promise<SaveResult> {
    try {
      await this.api.putAnnotations(this.span.instanceId, this.annotations);
    } catch (err) {
      if (err instanceof ApiError && err.status === 403) {
        this.readOnly = true;
        return { ok: false, readOnly: true };
      }
      if (err instanceof ApiError && err.status === 422) {
        return { ok: false, report: err.report };
      }
      throw err;
    }
    // adopt last-writer-wins state from the server after every save
    await this.load();
    return { ok: true };
  }
}
