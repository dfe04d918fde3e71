// Keyboard teleop mapping: the documented command stream while keys are
// held, one zero on release, then silence.

import { describe, expect, it } from "vitest";

import { TeleopTracker, commandFor, emptyKeys } from "../src/teleop";

const LIMITS = { vMax: 1.0, omegaMax: 1.0 };

describe("key mapping", () => {
  it("forward gives full surge straight ahead", () => {
    expect(commandFor({ ...emptyKeys(), forward: true }, LIMITS)).toEqual({
      surge: 1.0,
      yawRate: 0.0,
    });
  });

  it("forward plus left turns positive", () => {
    expect(
      commandFor({ ...emptyKeys(), forward: true, left: true }, LIMITS),
    ).toEqual({ surge: 1.0, yawRate: 1.0 });
  });

  it("forward plus right turns negative", () => {
    expect(
      commandFor({ ...emptyKeys(), forward: true, right: true }, LIMITS),
    ).toEqual({ surge: 1.0, yawRate: -1.0 });
  });

  it("left and right cancel", () => {
    expect(
      commandFor({ ...emptyKeys(), left: true, right: true }, LIMITS),
    ).toEqual({ surge: 0.0, yawRate: 0.0 });
  });

  it("stop overrides everything", () => {
    expect(
      commandFor({ ...emptyKeys(), forward: true, left: true, stop: true }, LIMITS),
    ).toEqual({ surge: 0.0, yawRate: 0.0 });
  });

  it("limits scale with the scene", () => {
    expect(
      commandFor({ ...emptyKeys(), forward: true, left: true },
                 { vMax: 0.5, omegaMax: 2.0 }),
    ).toEqual({ surge: 0.5, yawRate: 2.0 });
  });
});

describe("command stream", () => {
  it("streams while held, emits one zero on release, then goes silent", () => {
    const t = new TeleopTracker();
    expect(t.keyDown("w")).toBe(true);
    const stream = [t.tick(LIMITS), t.tick(LIMITS), t.tick(LIMITS)];
    expect(stream).toEqual([
      { surge: 1.0, yawRate: 0.0 },
      { surge: 1.0, yawRate: 0.0 },
      { surge: 1.0, yawRate: 0.0 },
    ]);
    t.keyUp("w");
    expect(t.tick(LIMITS)).toEqual({ surge: 0.0, yawRate: 0.0 });
    expect(t.tick(LIMITS)).toBeNull();
    expect(t.tick(LIMITS)).toBeNull();
  });

  it("arrow keys alias wasd", () => {
    const t = new TeleopTracker();
    t.keyDown("ArrowUp");
    t.keyDown("ArrowLeft");
    expect(t.tick(LIMITS)).toEqual({ surge: 1.0, yawRate: 1.0 });
    t.keyUp("ArrowUp");
    expect(t.tick(LIMITS)).toEqual({ surge: 0.0, yawRate: 1.0 });
  });

  it("ignores unbound keys", () => {
    const t = new TeleopTracker();
    expect(t.keyDown("x")).toBe(false);
    expect(t.tick(LIMITS)).toBeNull();
  });

  it("release() drops all keys (window blur)", () => {
    const t = new TeleopTracker();
    t.keyDown("w");
    t.tick(LIMITS);
    t.release();
    expect(t.tick(LIMITS)).toEqual({ surge: 0.0, yawRate: 0.0 });
    expect(t.tick(LIMITS)).toBeNull();
  });
});
