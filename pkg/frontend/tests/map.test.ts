// Map rendering is pure: the same snapshot fixture always yields the same
// draw ops, and the ops carry the scene and telemetry content.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { DrawOp, renderMap } from "../src/map";
import { snapshotSchema } from "../src/protocol";

function loadSnapshot(name: string) {
  return snapshotSchema.parse(
    JSON.parse(readFileSync(join(__dirname, "fixtures", name), "utf-8")),
  );
}

const first = loadSnapshot("snapshot_with_scene.json");
const scene = first.scene!;
const later = loadSnapshot("snapshot.json");

function kinds(ops: DrawOp[]): string[] {
  return ops.map((o) => o.kind);
}

describe("renderMap", () => {
  it("is deterministic over a fixture", () => {
    const a = renderMap(later, scene, [], false);
    const b = renderMap(later, scene, [], false);
    expect(a).toEqual(b);
  });

  it("draws the scene with labels, obstacles and the poi", () => {
    const ops = renderMap(later, scene, [], false);
    const polys = ops.filter((o) => o.kind === "polyline");
    expect(polys[0]).toMatchObject({ points: scene.hull, close: true });
    const labels = ops.filter((o) => o.kind === "label");
    for (const edgeLabel of scene.edge_labels) {
      expect(labels.some((l) => l.kind === "label" && l.text === edgeLabel)).toBe(true);
    }
    expect(ops.filter((o) => o.kind === "disc")).toHaveLength(scene.obstacles.length);
    const star = ops.find((o) => o.kind === "marker" && o.shape === "star");
    expect(star).toMatchObject({ at: scene.poi });
  });

  it("highlights the sonar fan when the poi is visible", () => {
    const visible = {
      ...later,
      poi_visibility: { ...later.poi_visibility, visible: true },
    };
    const hidden = {
      ...later,
      poi_visibility: { ...later.poi_visibility, visible: false },
    };
    const fanOf = (snap: typeof later) =>
      renderMap(snap, scene, [], false).find(
        (o) => o.kind === "polyline" && o.points.length > 30,
      );
    const fanVisible = fanOf(visible);
    const fanHidden = fanOf(hidden);
    expect(fanVisible).toBeDefined();
    expect(fanVisible!.kind === "polyline" && fanVisible!.fill).not.toEqual(
      fanHidden!.kind === "polyline" && fanHidden!.fill,
    );
  });

  it("draws ghost and age label for the last-known leader pose", () => {
    const ops = renderMap(later, scene, [], false);
    const ageLabel = ops.find(
      (o) => o.kind === "label" && o.text.startsWith("age "),
    );
    expect(later.last_known).not.toBeNull();
    expect(ageLabel).toBeDefined();
  });

  it("adds a STALE banner when snapshots stop", () => {
    const ops = renderMap(later, scene, [], true);
    expect(ops.at(-1)).toEqual({ kind: "banner", text: "STALE", color: expect.any(String) });
    const fresh = renderMap(later, scene, [], false);
    expect(kinds(fresh)).not.toContain("banner");
  });

  it("no trail polyline at episode start", () => {
    const withTrail = renderMap(later, scene, [[0, 0], [1, 1]], false);
    const without = renderMap(later, scene, [], false);
    expect(withTrail.filter((o) => o.kind === "polyline").length).toBe(
      without.filter((o) => o.kind === "polyline").length + 1,
    );
  });

  it("renders a waiting banner without a scene", () => {
    const ops = renderMap(null, null, [], false);
    expect(ops).toEqual([
      { kind: "banner", text: "WAITING FOR SCENE", color: expect.any(String) },
    ]);
  });
});
