// BT panel row flattening from the recorded snapshot's tree view.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { flattenTree, kindLabel } from "../src/btpanel";
import { BtView, snapshotSchema } from "../src/protocol";

const snap = snapshotSchema.parse(
  JSON.parse(
    readFileSync(join(__dirname, "fixtures", "snapshot.json"), "utf-8"),
  ),
);
const tree = snap.bt!;

describe("flattenTree", () => {
  it("keeps preorder ids and child order", () => {
    const rows = flattenTree(tree);
    expect(rows[0].id).toBe(tree.id);
    expect(rows.map((r) => r.id)).toEqual([...rows.map((r) => r.id)].sort((a, b) => a - b));
    const count = (n: BtView): number =>
      1 + n.children.reduce((acc, c) => acc + count(c), 0);
    expect(rows).toHaveLength(count(tree));
  });

  it("depth increases for children", () => {
    const rows = flattenTree(tree);
    expect(rows[0].depth).toBe(0);
    expect(rows[1].depth).toBe(1);
    expect(Math.max(...rows.map((r) => r.depth))).toBeGreaterThanOrEqual(2);
  });

  it("carries statuses from the live mission", () => {
    const rows = flattenTree(tree);
    expect(rows[0].status).toBe("Running");
    expect(rows.some((r) => r.status === null)).toBe(true);
  });

  it("marks forced nodes", () => {
    const forcedTree: BtView = {
      ...tree,
      children: [
        { ...tree.children[0], forced: "Success" },
        ...tree.children.slice(1),
      ],
    };
    const rows = flattenTree(forcedTree);
    expect(rows.find((r) => r.id === tree.children[0].id)!.forced).toBe("Success");
  });
});

describe("kindLabel", () => {
  const base: BtView = {
    id: 0, name: "n", kind: "Sequence", memory: false, threshold: 0,
    limit: 0, leaf: "", status: null, forced: null, children: [],
  };

  it("renders composite parameters", () => {
    expect(kindLabel({ ...base, kind: "Sequence", memory: true })).toBe("Sequence(mem)");
    expect(kindLabel({ ...base, kind: "Fallback" })).toBe("Fallback");
    expect(kindLabel({ ...base, kind: "Parallel", threshold: 2 })).toBe("Parallel(2)");
    expect(kindLabel({ ...base, kind: "Repeat", limit: 3 })).toBe("Repeat(3)");
    expect(kindLabel({ ...base, kind: "Action" })).toBe("Action");
  });
});
