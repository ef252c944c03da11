// Wiring: session setup, socket, pointer gestures, paint loop, stats panel.

import { gestureCommand, type Drag } from "./gestures.js";
import type { MapInfo } from "./protocol.js";
import { buildScene, paint } from "./render.js";
import { initialState, reduce, type Event, type ToolMode, type ViewState } from "./state.js";
import { readouts, sparklineSegments } from "./stats.js";
import { fitToWorld, panBy, zoomAt, type Viewport } from "./transform.js";
import { SocketClient } from "./net.js";

const canvas = document.getElementById("world") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const spark = document.getElementById("sparkline") as HTMLCanvasElement;
const sparkCtx = spark.getContext("2d")!;

let state: ViewState = initialState();
let socket: SocketClient | null = null;
let dirty = true;

function dispatch(event: Event): void {
  state = reduce(state, event);
  dirty = true;
  syncPanel();
}

function viewport(): Viewport {
  return { width: canvas.width, height: canvas.height };
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(location.search);
  const scenario = params.get("scenario") ?? "office";
  const planner = params.get("planner") ?? "bi-am-rrt-d";
  const resp = await fetch("/sessions", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ scenario, planner, overrides: { tick_rate_hz: 10.0 } }),
  });
  if (!resp.ok) {
    document.getElementById("banner")!.textContent = `session failed: ${await resp.text()}`;
    return;
  }
  const info = await resp.json();
  const map = info.map as MapInfo;
  dispatch({
    kind: "session",
    id: info.id,
    map,
    camera: fitToWorld(map.width_m, map.height_m, viewport()),
  });
  const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/sessions/${info.id}/socket`;
  socket = new SocketClient(wsUrl, {
    onMessage: (msg) => {
      if (msg.type === "snapshot") dispatch({ kind: "snapshot", snapshot: msg });
      else if (msg.type === "ack") dispatch({ kind: "ack", ack: msg });
      else dispatch({ kind: "error", error: msg });
    },
    onSchemaMismatch: () => dispatch({ kind: "schema-mismatch" }),
    onConnected: () => dispatch({ kind: "connected" }),
    onDisconnected: () => dispatch({ kind: "disconnected" }),
    onQueuedOffline: (command) => dispatch({ kind: "queued-offline", command }),
    onFlushed: () => dispatch({ kind: "flushed-offline" }),
  });
  socket.connect();
  document.title = `biamrrt - ${scenario} / ${planner}`;
}

// -- pointer handling ---------------------------------------------------------

let drag: Drag | null = null;
let panning = false;
let lastPan: [number, number] = [0, 0];

canvas.addEventListener("pointerdown", (ev) => {
  const rect = canvas.getBoundingClientRect();
  const px = ev.clientX - rect.left;
  const py = ev.clientY - rect.top;
  if (ev.button === 1 || ev.shiftKey) {
    panning = true;
    lastPan = [px, py];
  } else {
    drag = { startPx: [px, py], endPx: [px, py] };
  }
  canvas.setPointerCapture(ev.pointerId);
});

canvas.addEventListener("pointermove", (ev) => {
  const rect = canvas.getBoundingClientRect();
  const px = ev.clientX - rect.left;
  const py = ev.clientY - rect.top;
  if (panning) {
    dispatch({ kind: "set-camera", camera: panBy(state.camera, px - lastPan[0], py - lastPan[1]) });
    lastPan = [px, py];
  } else if (drag) {
    drag.endPx = [px, py];
    dirty = true;
  }
});

canvas.addEventListener("pointerup", () => {
  if (panning) {
    panning = false;
    return;
  }
  if (!drag) return;
  const cmd = gestureCommand(state.tool, drag, state.camera, viewport(), state.snapshot);
  drag = null;
  if (cmd && socket) socket.send(cmd);
});

canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  const rect = canvas.getBoundingClientRect();
  const factor = ev.deltaY < 0 ? 1.15 : 1 / 1.15;
  dispatch({
    kind: "set-camera",
    camera: zoomAt(state.camera, viewport(), ev.clientX - rect.left, ev.clientY - rect.top, factor),
  });
});

// -- toolbar -----------------------------------------------------------------

for (const id of ["place-goal", "place-obstacle", "erase-obstacle"] as ToolMode[]) {
  document.getElementById(`tool-${id}`)!.addEventListener("click", () => {
    dispatch({ kind: "set-tool", tool: id });
    for (const other of ["place-goal", "place-obstacle", "erase-obstacle"]) {
      document.getElementById(`tool-${other}`)!.classList.toggle("active", other === id);
    }
  });
}
document.getElementById("btn-pause")!.addEventListener("click", () => socket?.send({ v: 1, cmd: "pause" }));
document.getElementById("btn-resume")!.addEventListener("click", () => socket?.send({ v: 1, cmd: "resume" }));
for (const layer of ["tree", "path", "obstacles", "grid"] as const) {
  document.getElementById(`layer-${layer}`)!.addEventListener("change", () => {
    dispatch({ kind: "toggle-layer", layer });
  });
}

// -- panels -------------------------------------------------------------------

function syncPanel(): void {
  const r = readouts(state.snapshot);
  const set = (id: string, text: string) => (document.getElementById(id)!.textContent = text);
  set("stat-cost", r.cost);
  set("stat-nodes", `${r.nodesF} / ${r.nodesR}`);
  set("stat-elapsed", r.elapsed);
  set("stat-search", r.searchTime);
  set("stat-traveled", r.traveled);
  const badge = document.getElementById("phase-badge")!;
  badge.textContent = r.phase;
  badge.className = `badge ${r.phase}`;
  const banner = document.getElementById("banner")!;
  banner.textContent = state.banner ?? (state.lastError ? `error: ${state.lastError}` : "");
  banner.style.display = banner.textContent ? "block" : "none";
  const offline = document.getElementById("offline")!;
  offline.style.display = state.connected ? "none" : "inline";
  const queued = state.pendingWhileOffline.length;
  offline.textContent = queued ? `offline (${queued} queued)` : "offline";
}

function frame(): void {
  if (dirty && !(state.banner ?? "").includes("schema")) {
    dirty = false;
    paint(ctx, viewport(), buildScene(state.snapshot, state.map, state.camera, viewport(), state.layers));
    sparkCtx.fillStyle = "#10141a";
    sparkCtx.fillRect(0, 0, spark.width, spark.height);
    sparkCtx.strokeStyle = "#f2c14e";
    sparkCtx.lineWidth = 1;
    for (const seg of sparklineSegments(state.costHistory, spark.width, spark.height)) {
      sparkCtx.beginPath();
      seg.forEach(([x, y], i) => (i ? sparkCtx.lineTo(x, y) : sparkCtx.moveTo(x, y)));
      sparkCtx.stroke();
    }
  }
  requestAnimationFrame(frame);
}

boot().then(() => requestAnimationFrame(frame));
