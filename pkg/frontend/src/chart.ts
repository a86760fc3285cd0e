/**
 * Canvas chart of downsampled three-axis sensor traces with a playback
 * cursor and drag range selection for annotations.
 *
 * The time<->pixel mapping lives in ChartScale so the interaction
 * logic is testable without a DOM.
 */

import type { DownsampledSensor } from "./types.js";
import type { PlaybackSync, TimeFollower } from "./sync.js";

export class ChartScale {
  constructor(
    readonly t0Ms: number,
    readonly t1Ms: number,
    readonly widthPx: number,
  ) {}

  xOf(tMs: number): number {
    const f = (tMs - this.t0Ms) / (this.t1Ms - this.t0Ms);
    return Math.min(Math.max(f, 0), 1) * this.widthPx;
  }

  timeOf(xPx: number): number {
    const f = Math.min(Math.max(xPx / this.widthPx, 0), 1);
    return this.t0Ms + f * (this.t1Ms - this.t0Ms);
  }
}

export interface RangeSelection {
  startMs: number;
  endMs: number;
}

/** Drag state machine: press, move, release -> ordered time range. */
export class RangeSelector {
  private anchorMs: number | null = null;
  private currentMs: number | null = null;

  begin(tMs: number): void {
    this.anchorMs = tMs;
    this.currentMs = tMs;
  }

  update(tMs: number): void {
    if (this.anchorMs !== null) this.currentMs = tMs;
  }

  /** Null when the drag never moved (that is a cursor click, not a range). */
  finish(): RangeSelection | null {
    const a = this.anchorMs;
    const b = this.currentMs;
    this.anchorMs = this.currentMs = null;
    if (a === null || b === null || a === b) return null;
    return { startMs: Math.min(a, b), endMs: Math.max(a, b) };
  }

  get active(): RangeSelection | null {
    if (this.anchorMs === null || this.currentMs === null) return null;
    return {
      startMs: Math.min(this.anchorMs, this.currentMs),
      endMs: Math.max(this.anchorMs, this.currentMs),
    };
  }
}

const AXIS_COLORS = ["#d05050", "#3f9b50", "#3a6fd0"];

export class SensorChart implements TimeFollower {
  private cursorMs: number;
  readonly scale: ChartScale;
  readonly selector = new RangeSelector();
  onRange: (range: RangeSelection) => void = () => {};

  constructor(
    private canvas: HTMLCanvasElement,
    private data: DownsampledSensor,
    private sync: PlaybackSync,
    private highlight: RangeSelection[] = [],
  ) {
    this.cursorMs = sync.startMs;
    const n = data.channels[0]?.length ?? 0;
    this.scale = new ChartScale(
      sync.startMs,
      Math.max(data.t0_ms + data.dt_ms * Math.max(n - 1, 1), sync.endMs),
      canvas.width,
    );
    sync.attach(this);
    this.bindPointerEvents();
    this.render();
  }

  seekTo(tMs: number): void {
    this.cursorMs = tMs;
    this.render();
  }

  setHighlights(ranges: RangeSelection[]): void {
    this.highlight = ranges;
    this.render();
  }

  private bindPointerEvents(): void {
    const toTime = (ev: MouseEvent) => {
      const rect = this.canvas.getBoundingClientRect();
      return this.scale.timeOf(ev.clientX - rect.left);
    };
    this.canvas.addEventListener("mousedown", (ev) => {
      this.selector.begin(toTime(ev));
    });
    this.canvas.addEventListener("mousemove", (ev) => {
      if (this.selector.active) {
        this.selector.update(toTime(ev));
        this.render();
      }
    });
    this.canvas.addEventListener("mouseup", (ev) => {
      const tMs = toTime(ev);
      this.selector.update(tMs);
      const range = this.selector.finish();
      if (range) {
        this.onRange(range);
      } else {
        this.sync.seek(tMs, this);
        this.cursorMs = this.sync.positionMs;
      }
      this.render();
    });
  }

  render(): void {
    const ctx = this.canvas.getContext?.("2d");
    if (!ctx) return; // headless tests exercise the math only
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#fbfbfb";
    ctx.fillRect(0, 0, width, height);

    const all = this.data.channels.flat();
    const lo = Math.min(...all);
    const hi = Math.max(...all);
    const span = hi - lo || 1;
    const yOf = (v: number) => height - ((v - lo) / span) * (height - 10) - 5;

    ctx.fillStyle = "rgba(240, 200, 60, 0.35)";
    for (const range of this.highlight) {
      const x0 = this.scale.xOf(range.startMs);
      ctx.fillRect(x0, 0, this.scale.xOf(range.endMs) - x0, height);
    }
    const active = this.selector.active;
    if (active) {
      ctx.fillStyle = "rgba(90, 140, 240, 0.25)";
      const x0 = this.scale.xOf(active.startMs);
      ctx.fillRect(x0, 0, this.scale.xOf(active.endMs) - x0, height);
    }

    this.data.channels.forEach((channel, k) => {
      ctx.strokeStyle = AXIS_COLORS[k % AXIS_COLORS.length];
      ctx.lineWidth = 1;
      ctx.beginPath();
      channel.forEach((v, i) => {
        const x = this.scale.xOf(this.data.t0_ms + i * this.data.dt_ms);
        const y = yOf(v);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.stroke();
    });

    ctx.strokeStyle = "#222";
    ctx.lineWidth = 1.5;
    const cx = this.scale.xOf(this.cursorMs);
    ctx.beginPath();
    ctx.moveTo(cx, 0);
    ctx.lineTo(cx, height);
    ctx.stroke();
  }
}
