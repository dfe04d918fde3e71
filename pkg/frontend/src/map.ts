// Live map rendering, split in two: a pure builder from snapshot/scene to
// draw ops (unit-testable) and a canvas painter that executes them.

import type { Scene, Snapshot } from "./protocol";

export type Pt = [number, number];

export type DrawOp =
  | {
      kind: "polyline";
      points: Pt[];
      color: string;
      width: number;
      close?: boolean;
      fill?: string;
      dash?: number[];
    }
  | { kind: "disc"; center: Pt; radius: number; color: string; fill?: string }
  | { kind: "marker"; at: Pt; color: string; shape: "star" | "cross"; size: number }
  | { kind: "label"; at: Pt; text: string; color: string }
  | { kind: "banner"; text: string; color: string };

const COLORS = {
  hull: "#4a6572",
  hullFill: "rgba(74,101,114,0.25)",
  obstacle: "#a65d57",
  obstacleFill: "rgba(166,93,87,0.35)",
  poi: "#f2c14e",
  leader: "#6cc24a",
  follower: "#4aa3f2",
  ghost: "#9ad1ff",
  fan: "rgba(74,163,242,0.18)",
  fanVisible: "rgba(110,231,183,0.30)",
  fanEdge: "rgba(74,163,242,0.5)",
  target: "#e879f9",
  trail: "rgba(74,163,242,0.45)",
  text: "#c9d6df",
  stale: "#f87171",
};

function vehicleGlyph(x: number, y: number, heading: number, size: number): Pt[] {
  const c = Math.cos(heading);
  const s = Math.sin(heading);
  const local: Pt[] = [
    [size, 0],
    [-0.6 * size, 0.5 * size],
    [-0.3 * size, 0],
    [-0.6 * size, -0.5 * size],
  ];
  return local.map(([px, py]) => [x + c * px - s * py, y + s * px + c * py]);
}

export function renderMap(
  snapshot: Snapshot | null,
  scene: Scene | null,
  trail: Pt[],
  stale: boolean,
): DrawOp[] {
  const ops: DrawOp[] = [];
  if (!scene) {
    ops.push({ kind: "banner", text: "WAITING FOR SCENE", color: COLORS.stale });
    return ops;
  }
  ops.push({
    kind: "polyline",
    points: scene.hull,
    color: COLORS.hull,
    width: 2,
    close: true,
    fill: COLORS.hullFill,
  });
  scene.hull.forEach(([x0, y0], i) => {
    const [x1, y1] = scene.hull[(i + 1) % scene.hull.length];
    ops.push({
      kind: "label",
      at: [(x0 + x1) / 2, (y0 + y1) / 2],
      text: scene.edge_labels[i] ?? "",
      color: COLORS.text,
    });
  });
  for (const ob of scene.obstacles) {
    ops.push({
      kind: "disc",
      center: ob.center,
      radius: ob.radius,
      color: COLORS.obstacle,
      fill: COLORS.obstacleFill,
    });
  }
  ops.push({ kind: "marker", at: scene.poi, color: COLORS.poi, shape: "star", size: 1.2 });

  if (snapshot) {
    if (trail.length > 1) {
      ops.push({ kind: "polyline", points: trail, color: COLORS.trail, width: 1 });
    }
    const f = snapshot.follower.pose;
    // sonar fan from the follower through each beam endpoint
    const fanPts: Pt[] = [[f[0], f[1]]];
    snapshot.scan.bearings.forEach((b, i) => {
      const ang = f[2] + b;
      const r = snapshot.scan.ranges[i];
      fanPts.push([f[0] + r * Math.cos(ang), f[1] + r * Math.sin(ang)]);
    });
    ops.push({
      kind: "polyline",
      points: fanPts,
      color: COLORS.fanEdge,
      width: 1,
      close: true,
      fill: snapshot.poi_visibility.visible ? COLORS.fanVisible : COLORS.fan,
    });

    if (snapshot.formation_target) {
      ops.push({
        kind: "marker",
        at: snapshot.formation_target.position,
        color: COLORS.target,
        shape: "cross",
        size: 1.0,
      });
    }
    if (snapshot.last_known) {
      const g = snapshot.last_known.pose;
      ops.push({
        kind: "polyline",
        points: vehicleGlyph(g[0], g[1], g[2], 1.2),
        color: COLORS.ghost,
        width: 1,
        close: true,
        dash: [0.4, 0.4],
      });
      ops.push({
        kind: "label",
        at: [g[0], g[1] - 1.6],
        text: `age ${snapshot.last_known.age.toFixed(1)}s`,
        color: COLORS.ghost,
      });
    }
    const l = snapshot.leader.pose;
    ops.push({
      kind: "polyline",
      points: vehicleGlyph(l[0], l[1], l[2], 1.5),
      color: COLORS.leader,
      width: 2,
      close: true,
      fill: COLORS.leader,
    });
    ops.push({
      kind: "polyline",
      points: vehicleGlyph(f[0], f[1], f[2], 1.5),
      color: COLORS.follower,
      width: 2,
      close: true,
      fill: COLORS.follower,
    });
    if (snapshot.collided) {
      ops.push({ kind: "banner", text: "COLLIDED", color: COLORS.stale });
    }
  }
  if (stale) {
    ops.push({ kind: "banner", text: "STALE", color: COLORS.stale });
  }
  return ops;
}

export type Viewport = {
  scale: number;
  offsetX: number;
  offsetY: number;
  height: number;
};

export function viewportFor(scene: Scene, width: number, height: number): Viewport {
  const [xmin, ymin, xmax, ymax] = scene.bounds;
  const scale = Math.min(width / (xmax - xmin), height / (ymax - ymin)) * 0.95;
  return {
    scale,
    offsetX: width / 2 - ((xmin + xmax) / 2) * scale,
    offsetY: height / 2 + ((ymin + ymax) / 2) * scale,
    height,
  };
}

function toScreen(vp: Viewport, p: Pt): [number, number] {
  return [vp.offsetX + p[0] * vp.scale, vp.offsetY - p[1] * vp.scale];
}

export function paint(
  ctx: CanvasRenderingContext2D,
  ops: DrawOp[],
  vp: Viewport,
  width: number,
): void {
  ctx.clearRect(0, 0, width, vp.height);
  for (const op of ops) {
    switch (op.kind) {
      case "polyline": {
        ctx.beginPath();
        op.points.forEach((p, i) => {
          const [x, y] = toScreen(vp, p);
          if (i === 0) ctx.moveTo(x, y);
          else ctx.lineTo(x, y);
        });
        if (op.close) ctx.closePath();
        ctx.setLineDash(op.dash ? op.dash.map((d) => d * vp.scale) : []);
        if (op.fill) {
          ctx.fillStyle = op.fill;
          ctx.fill();
        }
        ctx.strokeStyle = op.color;
        ctx.lineWidth = op.width;
        ctx.stroke();
        ctx.setLineDash([]);
        break;
      }
      case "disc": {
        const [x, y] = toScreen(vp, op.center);
        ctx.beginPath();
        ctx.arc(x, y, op.radius * vp.scale, 0, 2 * Math.PI);
        if (op.fill) {
          ctx.fillStyle = op.fill;
          ctx.fill();
        }
        ctx.strokeStyle = op.color;
        ctx.lineWidth = 1;
        ctx.stroke();
        break;
      }
      case "marker": {
        const [x, y] = toScreen(vp, op.at);
        const s = op.size * vp.scale;
        ctx.strokeStyle = op.color;
        ctx.lineWidth = 2;
        ctx.beginPath();
        if (op.shape === "cross") {
          ctx.moveTo(x - s, y);
          ctx.lineTo(x + s, y);
          ctx.moveTo(x, y - s);
          ctx.lineTo(x, y + s);
        } else {
          for (let k = 0; k < 5; k++) {
            const a = -Math.PI / 2 + (k * 4 * Math.PI) / 5;
            const px = x + s * Math.cos(a);
            const py = y + s * Math.sin(a);
            if (k === 0) ctx.moveTo(px, py);
            else ctx.lineTo(px, py);
          }
          ctx.closePath();
        }
        ctx.stroke();
        break;
      }
      case "label": {
        const [x, y] = toScreen(vp, op.at);
        ctx.fillStyle = op.color;
        ctx.font = "11px sans-serif";
        ctx.textAlign = "center";
        ctx.fillText(op.text, x, y);
        break;
      }
      case "banner": {
        ctx.fillStyle = op.color;
        ctx.font = "bold 28px sans-serif";
        ctx.textAlign = "center";
        ctx.fillText(op.text, width / 2, 40);
        break;
      }
    }
  }
}
