/**
 * SVG polyline of the GPS track with a position marker.
 *
 * Bundle GeoJSON carries no per-fix timestamps; fixes are sampled at a
 * constant rate, so the marker position for time t interpolates the
 * polyline at the elapsed fraction of the recording.
 */

import type { GeoJsonDoc } from "./types.js";
import type { PlaybackSync, TimeFollower } from "./sync.js";

export interface LonLat {
  lon: number;
  lat: number;
}

/** Interpolated track position at the given elapsed fraction [0, 1]. */
export function pointAtFraction(coords: number[][], f: number): LonLat {
  if (coords.length === 0) return { lon: 0, lat: 0 };
  const clamped = Math.min(Math.max(f, 0), 1);
  const idx = clamped * (coords.length - 1);
  const i = Math.min(Math.floor(idx), coords.length - 2);
  const w = coords.length > 1 ? idx - i : 0;
  const a = coords[Math.max(i, 0)];
  const b = coords[Math.min(i + 1, coords.length - 1)];
  return {
    lon: a[0] + (b[0] - a[0]) * w,
    lat: a[1] + (b[1] - a[1]) * w,
  };
}

export class TrackMap implements TimeFollower {
  private coords: number[][];
  private marker: SVGCircleElement | null = null;
  private svg: SVGSVGElement | null = null;

  constructor(
    private container: HTMLElement,
    track: GeoJsonDoc,
    private sync: PlaybackSync,
  ) {
    this.coords = track.features[0]?.geometry.coordinates ?? [];
    this.build();
    sync.attach(this);
  }

  seekTo(tMs: number): void {
    if (!this.marker || this.coords.length === 0) return;
    const f = (tMs - this.sync.startMs) / (this.sync.endMs - this.sync.startMs);
    const p = pointAtFraction(this.coords, f);
    const [x, y] = this.project(p.lon, p.lat);
    this.marker.setAttribute("cx", String(x));
    this.marker.setAttribute("cy", String(y));
  }

  private bounds() {
    const lons = this.coords.map((c) => c[0]);
    const lats = this.coords.map((c) => c[1]);
    return {
      lonMin: Math.min(...lons),
      lonMax: Math.max(...lons),
      latMin: Math.min(...lats),
      latMax: Math.max(...lats),
    };
  }

  private project(lon: number, lat: number): [number, number] {
    const b = this.bounds();
    const pad = 12;
    const w = 300 - 2 * pad;
    const h = 300 - 2 * pad;
    const lonSpan = b.lonMax - b.lonMin || 1e-9;
    const latSpan = b.latMax - b.latMin || 1e-9;
    const scale = Math.min(w / lonSpan, h / latSpan);
    const x = pad + (lon - b.lonMin) * scale;
    const y = pad + (b.latMax - lat) * scale; // north up
    return [x, y];
  }

  private build(): void {
    if (typeof document === "undefined") return;
    const ns = "http://www.w3.org/2000/svg";
    this.svg = document.createElementNS(ns, "svg");
    this.svg.setAttribute("viewBox", "0 0 300 300");
    this.svg.classList.add("track-map");
    if (this.coords.length >= 2) {
      const line = document.createElementNS(ns, "polyline");
      line.setAttribute(
        "points",
        this.coords.map((c) => this.project(c[0], c[1]).join(",")).join(" "),
      );
      line.setAttribute("fill", "none");
      line.setAttribute("stroke", "#3a6fd0");
      line.setAttribute("stroke-width", "2");
      this.svg.appendChild(line);
      this.marker = document.createElementNS(ns, "circle");
      this.marker.setAttribute("r", "5");
      this.marker.setAttribute("fill", "#d05050");
      this.svg.appendChild(this.marker);
    } else {
      const note = document.createElementNS(ns, "text");
      note.setAttribute("x", "20");
      note.setAttribute("y", "150");
      note.textContent = "no GPS track";
      this.svg.appendChild(note);
    }
    this.container.appendChild(this.svg);
    this.svg.addEventListener("click", (ev: MouseEvent) => {
      // clicking the track scrubs to the closest point's time
      const rect = this.svg!.getBoundingClientRect();
      const sx = ((ev.clientX - rect.left) / rect.width) * 300;
      const sy = ((ev.clientY - rect.top) / rect.height) * 300;
      const f = this.closestFraction(sx, sy);
      if (f !== null) {
        this.sync.seek(
          this.sync.startMs + f * (this.sync.endMs - this.sync.startMs),
          this,
        );
        this.seekTo(this.sync.positionMs);
      }
    });
  }

  private closestFraction(x: number, y: number): number | null {
    if (this.coords.length === 0) return null;
    let best = 0;
    let bestDist = Infinity;
    this.coords.forEach((c, i) => {
      const [px, py] = this.project(c[0], c[1]);
      const d = (px - x) ** 2 + (py - y) ** 2;
      if (d < bestDist) {
        bestDist = d;
        best = i;
      }
    });
    return this.coords.length > 1 ? best / (this.coords.length - 1) : 0;
  }
}
