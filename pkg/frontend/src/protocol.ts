// Wire protocol mirror of docs/protocol.md: zod schemas for inbound server
// frames, typed builders for everything the console sends. One JSON object
// per WebSocket text frame.

import { z } from "zod";

export const PROTOCOL_SCHEMA = 1;

const pose = z.tuple([z.number(), z.number(), z.number()]);
const point = z.tuple([z.number(), z.number()]);

const vehicle = z.object({
  pose,
  surge: z.number(),
  yaw_rate: z.number(),
});

export const sceneSchema = z.object({
  schema: z.literal(1),
  hull: z.array(point).min(3),
  edge_labels: z.array(z.string()),
  obstacles: z.array(z.object({ center: point, radius: z.number() })),
  poi: point,
  bounds: z.tuple([z.number(), z.number(), z.number(), z.number()]),
  dt: z.number(),
  v_max: z.number(),
  omega_max: z.number(),
  standoff: z.number(),
  waypoint_spacing: z.number(),
  d_col: z.number(),
  patrol: z.array(point),
});
export type Scene = z.infer<typeof sceneSchema>;

export type BtView = {
  id: number;
  name: string;
  kind: string;
  memory: boolean;
  threshold: number;
  limit: number;
  leaf: string;
  status: string | null;
  forced: string | null;
  children: BtView[];
};

const btView: z.ZodType<BtView> = z.lazy(() =>
  z.object({
    id: z.number().int(),
    name: z.string(),
    kind: z.string(),
    memory: z.boolean(),
    threshold: z.number().int(),
    limit: z.number().int(),
    leaf: z.string(),
    status: z.string().nullable(),
    forced: z.string().nullable(),
    children: z.array(btView),
  }),
);

export const snapshotSchema = z.object({
  type: z.literal("snapshot"),
  schema: z.literal(1),
  time: z.number(),
  paused: z.boolean(),
  leader: vehicle.extend({ mode: z.enum(["Manual", "Autonomous"]) }),
  follower: vehicle,
  collided: z.boolean(),
  last_known: z.object({ pose, age: z.number() }).nullable(),
  formation_target: z
    .object({ position: point, heading: z.number() })
    .nullable(),
  formation: z.object({ radius: z.number(), offset: z.number() }),
  scan: z.object({ bearings: z.array(z.number()), ranges: z.array(z.number()) }),
  poi_visibility: z.object({
    visible: z.boolean(),
    bearing: z.number(),
    range: z.number(),
    reason: z.string(),
  }),
  bt: btView.nullable(),
  metrics: z
    .object({
      visibility_fraction: z.number(),
      mean_formation_deviation: z.number(),
      safety_violations: z.number().int(),
      collided: z.boolean(),
      steps: z.number().int(),
    })
    .nullable(),
  scene: sceneSchema.optional(),
});
export type Snapshot = z.infer<typeof snapshotSchema>;

export const ackSchema = z.object({
  type: z.literal("ack"),
  ref: z.number().int(),
  ok: z.literal(true),
  result: z.record(z.unknown()).optional(),
});
export const errSchema = z.object({
  type: z.literal("err"),
  ref: z.number().int().nullable(),
  code: z.string(),
  detail: z.string(),
});
export const summarySchema = z.object({
  type: z.literal("summary"),
  text: z.string(),
});

export const serverFrameSchema = z.discriminatedUnion("type", [
  snapshotSchema,
  ackSchema,
  errSchema,
  summarySchema,
]);
export type ServerFrame = z.infer<typeof serverFrameSchema>;

// --- client frames -----------------------------------------------------------

export const teleopFrame = z.object({
  type: z.literal("teleop"),
  ref: z.number().int(),
  surge: z.number(),
  yaw_rate: z.number(),
});
export const setModeFrame = z.object({
  type: z.literal("set_mode"),
  ref: z.number().int(),
  mode: z.enum(["Manual", "Autonomous"]),
});
export const nlCommandFrame = z.object({
  type: z.literal("nl_command"),
  ref: z.number().int(),
  text: z.string().min(1),
});
export const btOverrideFrame = z.object({
  type: z.literal("bt_override"),
  ref: z.number().int(),
  node_id: z.number().int(),
  forced: z.enum(["Success", "Failure", "Running"]).nullable(),
});
export const setFormationFrame = z
  .object({
    type: z.literal("set_formation"),
    ref: z.number().int(),
    radius: z.number().positive().optional(),
    offset: z.number().optional(),
  })
  .refine((f) => f.radius !== undefined || f.offset !== undefined, {
    message: "set_formation needs radius and/or offset",
  });
export const controlFrame = z.object({
  type: z.literal("control"),
  ref: z.number().int(),
  action: z.enum(["Pause", "Resume", "Reset"]),
});

export const clientFrameSchema = z.union([
  teleopFrame,
  setModeFrame,
  nlCommandFrame,
  btOverrideFrame,
  setFormationFrame,
  controlFrame,
]);
export type ClientFrame = z.infer<typeof clientFrameSchema>;

let nextRef = 1;
export function takeRef(): number {
  return nextRef++;
}
export function resetRefs(): void {
  nextRef = 1;
}

export function makeTeleop(surge: number, yawRate: number): ClientFrame {
  return { type: "teleop", ref: takeRef(), surge, yaw_rate: yawRate };
}
export function makeSetMode(mode: "Manual" | "Autonomous"): ClientFrame {
  return { type: "set_mode", ref: takeRef(), mode };
}
export function makeNlCommand(text: string): ClientFrame {
  return { type: "nl_command", ref: takeRef(), text };
}
export function makeBtOverride(
  nodeId: number,
  forced: "Success" | "Failure" | "Running" | null,
): ClientFrame {
  return { type: "bt_override", ref: takeRef(), node_id: nodeId, forced };
}
export function makeSetFormation(radius?: number, offset?: number): ClientFrame {
  const frame: Record<string, unknown> = { type: "set_formation", ref: takeRef() };
  if (radius !== undefined) frame.radius = radius;
  if (offset !== undefined) frame.offset = offset;
  return frame as ClientFrame;
}
export function makeControl(action: "Pause" | "Resume" | "Reset"): ClientFrame {
  return { type: "control", ref: takeRef(), action };
}

/** Serialize an outgoing frame, refusing anything off-schema. */
export function encodeClientFrame(frame: ClientFrame): string {
  return JSON.stringify(clientFrameSchema.parse(frame));
}

export function decodeServerFrame(text: string): ServerFrame {
  return serverFrameSchema.parse(JSON.parse(text));
}
