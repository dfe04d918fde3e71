// Keyboard teleoperation: held keys map to (surge, yaw_rate); ticked at 10 Hz
// while keys are held, with a single zero command on release.

export type TeleopCommand = { surge: number; yawRate: number };

export type Limits = { vMax: number; omegaMax: number };

export const KEY_BINDINGS: Record<string, keyof KeyState> = {
  w: "forward",
  arrowup: "forward",
  a: "left",
  arrowleft: "left",
  d: "right",
  arrowright: "right",
  s: "stop",
  arrowdown: "stop",
};

export type KeyState = {
  forward: boolean;
  left: boolean;
  right: boolean;
  stop: boolean;
};

export function emptyKeys(): KeyState {
  return { forward: false, left: false, right: false, stop: false };
}

export function commandFor(keys: KeyState, limits: Limits): TeleopCommand {
  if (keys.stop) return { surge: 0, yawRate: 0 };
  const surge = keys.forward ? limits.vMax : 0;
  let yaw = 0;
  if (keys.left) yaw += limits.omegaMax;
  if (keys.right) yaw -= limits.omegaMax;
  return { surge, yawRate: yaw };
}

export const TELEOP_HZ = 10;

/** Drives the 10 Hz stream; `tick()` returns the command to send, or null. */
export class TeleopTracker {
  keys: KeyState = emptyKeys();
  private zeroSent = true;

  keyDown(key: string): boolean {
    const name = KEY_BINDINGS[key.toLowerCase()];
    if (!name) return false;
    this.keys[name] = true;
    return true;
  }

  keyUp(key: string): boolean {
    const name = KEY_BINDINGS[key.toLowerCase()];
    if (!name) return false;
    this.keys[name] = false;
    return true;
  }

  anyHeld(): boolean {
    return this.keys.forward || this.keys.left || this.keys.right || this.keys.stop;
  }

  tick(limits: Limits): TeleopCommand | null {
    if (this.anyHeld()) {
      this.zeroSent = false;
      return commandFor(this.keys, limits);
    }
    if (!this.zeroSent) {
      this.zeroSent = true;
      return { surge: 0, yawRate: 0 };
    }
    return null;
  }

  release(): void {
    this.keys = emptyKeys();
  }
}
