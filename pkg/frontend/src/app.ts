/**
 * Application shell: instance picker, synchronized playback view
 * (video / sensor chart / track map) and the annotation editor.
 */

import { ApiClient, ApiError } from "./api.js";
import { AnnotationSession } from "./annotations.js";
import { SensorChart } from "./chart.js";
import { TrackMap } from "./map.js";
import { TaxonomyPicker } from "./picker.js";
import { PlaybackSync, VideoFollower } from "./sync.js";
import type { InstanceDetail, Taxonomy } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function fmtClock(tMs: number, startMs: number): string {
  const s = (tMs - startMs) / 1000;
  return `${Math.floor(s / 60)}:${(s % 60).toFixed(1).padStart(4, "0")}`;
}

export class App {
  private api: ApiClient;
  private root: HTMLElement;

  constructor(root: HTMLElement, baseUrl = "") {
    this.root = root;
    this.api = new ApiClient(baseUrl);
  }

  async start(): Promise<void> {
    const params = new URLSearchParams(window.location.search);
    const instanceId = params.get("instance");
    try {
      if (instanceId) {
        await this.showInstance(instanceId);
      } else {
        await this.showIndex();
      }
    } catch (err) {
      this.showError(err, () => this.start());
    }
  }

  private clear(): void {
    this.root.innerHTML = "";
  }

  private showError(err: unknown, retry: () => void): void {
    this.clear();
    const pane = el("div", "error-pane");
    const message =
      err instanceof ApiError ? `${err.status}: ${err.message}` : String(err);
    pane.appendChild(el("p", "error-text", `failed to load: ${message}`));
    const button = el("button", "retry", "retry");
    button.addEventListener("click", retry);
    pane.appendChild(button);
    this.root.appendChild(pane);
  }

  private async showIndex(): Promise<void> {
    const index = await this.api.getInstances();
    this.clear();
    this.root.appendChild(el("h1", "", "recordings"));
    const list = el("ul", "instance-list");
    for (const entry of index.entries) {
      const item = el("li");
      const link = el("a", "", `${entry.instance_id} (${entry.city})`);
      link.setAttribute("href", `?instance=${encodeURIComponent(entry.instance_id)}`);
      if (entry.status !== "ok") {
        item.appendChild(el("span", "bad-entry", `${entry.instance_id}: ${entry.status}`));
      } else {
        item.appendChild(link);
      }
      list.appendChild(item);
    }
    this.root.appendChild(list);
  }

  private async showInstance(instanceId: string): Promise<void> {
    const [detail, taxonomy] = await Promise.all([
      this.api.getInstance(instanceId),
      this.api.getTaxonomy(),
    ]);
    const sensors = await this.api.getBundleSensors(instanceId);
    const track = await this.api.getBundleTrack(instanceId);
    this.clear();

    const meta = detail.metadata;
    const sync = new PlaybackSync(meta.start_epoch_ms, meta.stop_epoch_ms);

    const header = el("div", "header");
    header.appendChild(el("h1", "", instanceId));
    header.appendChild(
      el("span", "meta",
         `${meta.city} · ${detail.summary.distance_m.toFixed(0)} m · ` +
         `${detail.summary.duration_s.toFixed(0)} s`),
    );
    const clock = el("span", "clock");
    sync.attach({ seekTo: (t) => { clock.textContent = fmtClock(t, sync.startMs); } });
    header.appendChild(clock);
    this.root.appendChild(header);

    const panes = el("div", "panes");
    panes.appendChild(this.videoPane(detail, sync));

    const chartPane = el("div", "pane chart-pane");
    const canvas = el("canvas") as HTMLCanvasElement;
    canvas.width = 900;
    canvas.height = 220;
    chartPane.appendChild(canvas);
    panes.appendChild(chartPane);

    const mapPane = el("div", "pane map-pane");
    new TrackMap(mapPane, track, sync);
    panes.appendChild(mapPane);
    this.root.appendChild(panes);

    const trace =
      sensors.sensors["accelerometer"] ??
      Object.values(sensors.sensors)[0];
    if (!trace) {
      this.root.appendChild(el("p", "", "no sensor traces in bundle"));
      return;
    }
    const chart = new SensorChart(canvas, trace, sync);
    this.annotationEditor(detail, taxonomy, chart);
  }

  private videoPane(detail: InstanceDetail, sync: PlaybackSync): HTMLElement {
    const pane = el("div", "pane video-pane");
    if (detail.sensor_only) {
      pane.appendChild(el("div", "sensor-only", "sensor-only"));
      return pane;
    }
    const video = el("video") as HTMLVideoElement;
    video.src = this.api.bundleVideoUrl(detail.instance_id);
    video.controls = true;
    pane.appendChild(video);
    new VideoFollower(video, sync);
    return pane;
  }

  private annotationEditor(
    detail: InstanceDetail,
    taxonomy: Taxonomy,
    chart: SensorChart,
  ): void {
    const meta = detail.metadata;
    const session = new AnnotationSession(this.api, {
      instanceId: detail.instance_id,
      startMs: meta.start_epoch_ms,
      stopMs: meta.stop_epoch_ms,
    }, taxonomy);

    const editor = el("div", "editor");
    const banner = el("div", "banner");
    banner.hidden = true;
    editor.appendChild(banner);

    const controls = el("div", "controls");
    const picker = new TaxonomyPicker(controls, taxonomy);
    const rangeLabel = el("span", "range-label", "drag on the chart to mark a range");
    const addButton = el("button", "add", "add annotation");
    addButton.disabled = true;
    const saveButton = el("button", "save", "save");
    const problems = el("div", "problems");
    controls.appendChild(rangeLabel);
    controls.appendChild(addButton);
    controls.appendChild(saveButton);
    editor.appendChild(controls);
    editor.appendChild(problems);
    const listing = el("ul", "annotation-list");
    editor.appendChild(listing);
    this.root.appendChild(editor);

    let pending: { startMs: number; endMs: number } | null = null;

    const refresh = () => {
      listing.innerHTML = "";
      for (const a of session.annotations) {
        const item = el(
          "li", "",
          `[${fmtClock(a.t_start_ms, meta.start_epoch_ms)} – ` +
          `${fmtClock(a.t_end_ms, meta.start_epoch_ms)}] ` +
          `${a.category} / ${a.element}`,
        );
        const drop = el("button", "remove", "×");
        drop.disabled = session.readOnly;
        drop.addEventListener("click", () => {
          session.remove(a.id);
          refresh();
        });
        item.appendChild(drop);
        listing.appendChild(item);
      }
      chart.setHighlights(session.annotations.map((a) => ({
        startMs: a.t_start_ms,
        endMs: a.t_end_ms,
      })));
      saveButton.textContent = session.dirty ? "save *" : "save";
      if (session.readOnly) {
        banner.hidden = false;
        banner.textContent = "read-only server: editing disabled";
        addButton.disabled = true;
        saveButton.disabled = true;
        picker.setDisabled(true);
      }
    };

    chart.onRange = (range) => {
      pending = range;
      rangeLabel.textContent =
        `${fmtClock(range.startMs, meta.start_epoch_ms)} – ` +
        `${fmtClock(range.endMs, meta.start_epoch_ms)}`;
      addButton.disabled = session.readOnly;
    };

    addButton.addEventListener("click", () => {
      if (!pending) return;
      const { category, element } = picker.choice;
      const result = session.addDraft(
        pending.startMs, pending.endMs, category, element);
      problems.textContent = result.problems.join("; ");
      pending = null;
      addButton.disabled = true;
      refresh();
    });

    saveButton.addEventListener("click", async () => {
      const result = await session.save();
      if (result.ok) {
        problems.textContent = "";
      } else if (result.readOnly) {
        problems.textContent = "";
      } else if (result.report) {
        problems.textContent = result.report
          .map((e) => `${e.code}: ${e.message}`)
          .join("\n");
      }
      refresh();
    });

    session.load().then(refresh).catch(() => refresh());
  }
}

export function boot(): void {
  const root = document.getElementById("app");
  if (root) new App(root).start();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}
