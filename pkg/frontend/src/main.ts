// Console entry point: socket wiring, input handling, render loop.

import { renderBtPanel } from "./btpanel";
import { paint, renderMap, viewportFor } from "./map";
import {
  ClientFrame,
  decodeServerFrame,
  encodeClientFrame,
  makeBtOverride,
  makeControl,
  makeNlCommand,
  makeSetFormation,
  makeSetMode,
  makeTeleop,
} from "./protocol";
import {
  ConsoleState,
  applyServerFrame,
  canSendTeleop,
  initialState,
  isStale,
  trackSent,
} from "./state";
import { TELEOP_HZ, TeleopTracker } from "./teleop";

let state: ConsoleState = initialState();
let socket: WebSocket | null = null;
const tracker = new TeleopTracker();

function byId<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function sendFrame(frame: ClientFrame): void {
  if (!socket || socket.readyState !== WebSocket.OPEN) return;
  socket.send(encodeClientFrame(frame));
  state = trackSent(state, frame, Date.now());
  if (frame.type !== "teleop") {
    state.history.push({ kind: "sent", ref: frame.ref, text: JSON.stringify(frame) });
    renderHistory();
  }
}

function connect(): void {
  const url = byId<HTMLInputElement>("server-url").value;
  socket = new WebSocket(url);
  socket.onopen = () => {
    state = { ...state, connected: true };
    setStatus(`connected to ${url}`);
  };
  socket.onclose = () => {
    state = { ...state, connected: false };
    setStatus("disconnected");
  };
  socket.onerror = () => setStatus("socket error");
  socket.onmessage = (ev) => {
    try {
      const frame = decodeServerFrame(ev.data as string);
      state = applyServerFrame(state, frame, Date.now());
      if (frame.type !== "snapshot") renderHistory();
    } catch (e) {
      setStatus(`bad frame: ${e}`);
    }
  };
}

function setStatus(text: string): void {
  byId("status").textContent = text;
}

function renderHistory(): void {
  const log = byId("history");
  log.textContent = "";
  for (const entry of state.history.slice(-40)) {
    const el = document.createElement("div");
    el.className = `hist hist-${entry.kind}`;
    el.textContent =
      (entry.ref !== undefined ? `#${entry.ref} ` : "") + `${entry.kind}: ${entry.text}`;
    log.appendChild(el);
  }
  for (const warning of state.warnings.splice(0)) {
    const el = document.createElement("div");
    el.className = "hist hist-warn";
    el.textContent = `warn: ${warning}`;
    log.appendChild(el);
  }
  log.scrollTop = log.scrollHeight;
}

function renderMetrics(): void {
  const m = state.snapshot?.metrics;
  const el = byId("metrics");
  if (!m) {
    el.textContent = "no metrics yet";
    return;
  }
  el.textContent =
    `PoI visible ${(100 * m.visibility_fraction).toFixed(1)}%  |  ` +
    `formation dev ${m.mean_formation_deviation.toFixed(2)} m  |  ` +
    `safety events ${m.safety_violations}  |  steps ${m.steps}` +
    (m.collided ? "  |  COLLIDED" : "");
}

function renderFrame(): void {
  const canvas = byId<HTMLCanvasElement>("map");
  const ctx = canvas.getContext("2d");
  if (ctx) {
    const ops = renderMap(state.snapshot, state.scene, state.trail,
                          isStale(state, Date.now()));
    if (state.scene) {
      const vp = viewportFor(state.scene, canvas.width, canvas.height);
      paint(ctx, ops, vp, canvas.width);
    } else {
      ctx.clearRect(0, 0, canvas.width, canvas.height);
      ctx.fillStyle = "#f87171";
      ctx.font = "bold 24px sans-serif";
      ctx.textAlign = "center";
      ctx.fillText("WAITING FOR SCENE", canvas.width / 2, canvas.height / 2);
    }
  }
  const snap = state.snapshot;
  byId("mode").textContent = snap
    ? `t=${snap.time.toFixed(1)}s  leader:${snap.leader.mode}` +
      `  input:${state.inputMode}${snap.paused ? "  PAUSED" : ""}`
    : "no telemetry";
  renderMetrics();
  renderBtPanel(
    byId("bt-panel"),
    snap?.bt ?? null,
    state.selectedNode,
    (id) => {
      state = { ...state, selectedNode: state.selectedNode === id ? null : id };
    },
    (req) => sendFrame(makeBtOverride(req.nodeId, req.forced)),
  );
  requestAnimationFrame(renderFrame);
}

function setupInputs(): void {
  byId<HTMLButtonElement>("connect").addEventListener("click", connect);
  byId<HTMLButtonElement>("mode-toggle").addEventListener("click", () => {
    const manual = state.snapshot?.leader.mode === "Manual";
    sendFrame(makeSetMode(manual ? "Autonomous" : "Manual"));
    state = { ...state, inputMode: manual ? "observe" : "teleop" };
  });
  for (const action of ["Pause", "Resume", "Reset"] as const) {
    byId<HTMLButtonElement>(`ctl-${action.toLowerCase()}`).addEventListener(
      "click",
      () => sendFrame(makeControl(action)),
    );
  }
  byId<HTMLButtonElement>("formation-apply").addEventListener("click", () => {
    const radius = parseFloat(byId<HTMLInputElement>("formation-radius").value);
    const offset = parseFloat(byId<HTMLInputElement>("formation-offset").value);
    sendFrame(
      makeSetFormation(
        Number.isFinite(radius) ? radius : undefined,
        Number.isFinite(offset) ? offset : undefined,
      ),
    );
  });
  const commandInput = byId<HTMLInputElement>("command");
  commandInput.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter" && commandInput.value.trim()) {
      sendFrame(makeNlCommand(commandInput.value.trim()));
      commandInput.value = "";
    }
    ev.stopPropagation();
  });
  document.addEventListener("keydown", (ev) => {
    if (state.inputMode === "teleop" && tracker.keyDown(ev.key)) ev.preventDefault();
  });
  document.addEventListener("keyup", (ev) => {
    if (tracker.keyUp(ev.key)) ev.preventDefault();
  });
  window.addEventListener("blur", () => tracker.release());

  setInterval(() => {
    const scene = state.scene;
    const limits = scene
      ? { vMax: scene.v_max, omegaMax: scene.omega_max }
      : { vMax: 1.0, omegaMax: 1.0 };
    const cmd = tracker.tick(limits);
    if (cmd && canSendTeleop(state)) {
      sendFrame(makeTeleop(cmd.surge, cmd.yawRate));
    }
  }, 1000 / TELEOP_HZ);
}

window.addEventListener("load", () => {
  setupInputs();
  requestAnimationFrame(renderFrame);
});
