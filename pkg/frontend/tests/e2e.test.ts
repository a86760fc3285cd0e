/**
 * End-to-end against the real Python serve mode: generates a synthetic
 * recording, starts the server, and drives the annotation workflow the
 * way the UI does.  Requires the walksense package to be installed.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { ApiClient, ApiError } from "../src/api.js";
import { AnnotationSession } from "../src/annotations.js";
import type { Taxonomy } from "../src/types.js";

const GEN_CONFIG = {
  seed: 21,
  cities: [{
    name: "Uitown",
    country: "USA",
    origin: [40.0, -75.0],
    routes: [{ length_m: 26.0, pauses: [[0, 2], [22, 2]], seed: 21 }],
  }],
};

let root: string;
let dataRoot: string;
let servers: ChildProcess[] = [];

function startServer(args: string[]): Promise<{ proc: ChildProcess; port: number }> {
  return new Promise((resolve, reject) => {
    const proc = spawn("walksense", ["serve", dataRoot, "--port", "0", ...args]);
    servers.push(proc);
    let out = "";
    const timer = setTimeout(
      () => reject(new Error(`server did not announce a port: ${out}`)),
      15_000,
    );
    proc.stdout!.on("data", (chunk: Buffer) => {
      out += chunk.toString();
      const m = out.match(/http:\/\/[^:]+:(\d+)\/api/);
      if (m) {
        clearTimeout(timer);
        resolve({ proc, port: Number(m[1]) });
      }
    });
    proc.on("error", reject);
  });
}

beforeAll(async () => {
  root = mkdtempSync(join(tmpdir(), "walksense-e2e-"));
  dataRoot = join(root, "data");
  const cfg = join(root, "gen.json");
  writeFileSync(cfg, JSON.stringify(GEN_CONFIG));
  const gen = spawnSync("walksense",
    ["synth", "--config", cfg, "--out", dataRoot],
    { encoding: "utf-8" });
  if (gen.status !== 0) {
    throw new Error(`synth failed: ${gen.stderr}`);
  }
}, 30_000);

afterAll(() => {
  for (const proc of servers) proc.kill();
});

describe("annotation workflow against the live server", () => {
  let api: ApiClient;
  let taxonomy: Taxonomy;
  let instanceId: string;

  beforeAll(async () => {
    const { port } = await startServer([]);
    api = new ApiClient(`http://127.0.0.1:${port}`);
    taxonomy = await api.getTaxonomy();
    const index = await api.getInstances();
    instanceId = index.entries[0].instance_id;
  }, 30_000);

  it("taxonomy comes from the API with the full vocabulary", () => {
    expect(taxonomy.categories).toHaveLength(6);
    const leaves = taxonomy.categories.reduce(
      (n, c) => n + c.elements.length, 0);
    expect(leaves).toBe(68);
  });

  it("saves one annotation per taxonomy category, all accepted", async () => {
    const detail = await api.getInstance(instanceId);
    const session = new AnnotationSession(api, {
      instanceId,
      startMs: detail.metadata.start_epoch_ms,
      stopMs: detail.metadata.stop_epoch_ms,
    }, taxonomy, "e2e");
    await session.load();

    const start = detail.metadata.start_epoch_ms;
    taxonomy.categories.forEach((category, i) => {
      const result = session.addDraft(
        start + 1000 + i * 2000,
        start + 2500 + i * 2000,
        category.name,
        category.elements[0],
      );
      expect(result.problems).toEqual([]);
    });
    expect(session.dirty).toBe(true);
    expect(session.annotations).toHaveLength(6);

    const saved = await session.save();
    expect(saved.ok).toBe(true);
    expect(session.dirty).toBe(false);

    const back = await api.getAnnotations(instanceId);
    expect(back).toHaveLength(6);
    const categories = new Set(back.map((a) => a.category));
    expect(categories.size).toBe(6);
  });

  it("server rejects a cross-category leaf with a 422 report", async () => {
    const detail = await api.getInstance(instanceId);
    const start = detail.metadata.start_epoch_ms;
    const bad = [{
      id: "bad-1",
      instance_id: instanceId,
      t_start_ms: start + 100,
      t_end_ms: start + 600,
      category: "Obstacles",
      element: "Pothole", // lives under Pavement condition
      note: "",
      author: "e2e",
      created_at: 0,
    }];
    await expect(api.putAnnotations(instanceId, bad)).rejects.toMatchObject({
      status: 422,
    });
    try {
      await api.putAnnotations(instanceId, bad);
    } catch (err) {
      const report = (err as ApiError).report;
      expect(report.some((e) => e.code === "taxonomy.mismatch")).toBe(true);
    }
  });

  it("client-side guard blocks a reversed range before any request", async () => {
    const detail = await api.getInstance(instanceId);
    const session = new AnnotationSession(api, {
      instanceId,
      startMs: detail.metadata.start_epoch_ms,
      stopMs: detail.metadata.stop_epoch_ms,
    }, taxonomy);
    const result = session.addDraft(
      detail.metadata.start_epoch_ms + 5000,
      detail.metadata.start_epoch_ms + 1000,
      "Obstacles", "Bench");
    expect(result.problems.length).toBeGreaterThan(0);
    expect(session.annotations).toHaveLength(0);
    expect(session.dirty).toBe(false);
  });

  it("bundle files feed the chart and map", async () => {
    const sensors = await api.getBundleSensors(instanceId);
    expect(Object.keys(sensors.sensors)).toContain("accelerometer");
    expect(sensors.rate_hz).toBe(10);
    const track = await api.getBundleTrack(instanceId);
    expect(track.features[0].geometry.type).toBe("LineString");
  });

  it("unknown instances surface a 404 for the error view", async () => {
    await expect(api.getInstance("missing-id")).rejects.toMatchObject({
      status: 404,
    });
  });
});

describe("read-only server", () => {
  it("refuses writes with 403 and the session flips to read-only", async () => {
    const { port } = await startServer(["--read-only"]);
    const api = new ApiClient(`http://127.0.0.1:${port}`);
    const taxonomy = await api.getTaxonomy();
    const index = await api.getInstances();
    const instanceId = index.entries[0].instance_id;
    const detail = await api.getInstance(instanceId);

    const session = new AnnotationSession(api, {
      instanceId,
      startMs: detail.metadata.start_epoch_ms,
      stopMs: detail.metadata.stop_epoch_ms,
    }, taxonomy);
    await session.load();
    session.addDraft(
      detail.metadata.start_epoch_ms + 1000,
      detail.metadata.start_epoch_ms + 2000,
      taxonomy.categories[0].name,
      taxonomy.categories[0].elements[0],
    );
    const result = await session.save();
    expect(result.ok).toBe(false);
    expect(result.readOnly).toBe(true);
    expect(session.readOnly).toBe(true);
  }, 30_000);
});
