// Single reducer for everything the UI remembers. Rendering is a pure
// function of (latest snapshot, view state); no planning logic lives here.

import type { Ack, Command, ErrorMsg, MapInfo, Snapshot } from "./protocol.js";
import type { Camera } from "./transform.js";

export type ToolMode = "place-goal" | "place-obstacle" | "erase-obstacle";

export interface Layers {
  tree: boolean;
  path: boolean;
  obstacles: boolean;
  grid: boolean;
}

export interface ViewState {
  sessionId: string | null;
  map: MapInfo | null;
  camera: Camera;
  layers: Layers;
  tool: ToolMode;
  connected: boolean;
  snapshot: Snapshot | null;
  costHistory: { tick: number; cost: number | null }[];
  pendingWhileOffline: Command[];
  lastAck: Ack | null;
  lastError: string | null;
  banner: string | null; // schema mismatch or disconnect notice
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    map: null,
    camera: { scale: 4, cx: 50, cy: 50 },
    layers: { tree: true, path: true, obstacles: true, grid: true },
    tool: "place-goal",
    connected: false,
    snapshot: null,
    costHistory: [],
    pendingWhileOffline: [],
    lastAck: null,
    lastError: null,
    banner: null,
  };
}

export type Event =
  | { kind: "session"; id: string; map: MapInfo; camera: Camera }
  | { kind: "connected" }
  | { kind: "disconnected" }
  | { kind: "snapshot"; snapshot: Snapshot }
  | { kind: "schema-mismatch" }
  | { kind: "ack"; ack: Ack }
  | { kind: "error"; error: ErrorMsg }
  | { kind: "set-tool"; tool: ToolMode }
  | { kind: "toggle-layer"; layer: keyof Layers }
  | { kind: "set-camera"; camera: Camera }
  | { kind: "queued-offline"; command: Command }
  | { kind: "flushed-offline" };

const HISTORY_LIMIT = 600;

export function reduce(state: ViewState, event: Event): ViewState {
  switch (event.kind) {
    case "session":
      return {
        ...initialState(),
        sessionId: event.id,
        map: event.map,
        camera: event.camera,
        tool: state.tool,
        layers: state.layers,
      };
    case "connected":
      return { ...state, connected: true, banner: null };
    case "disconnected":
      return { ...state, connected: false, banner: "offline - reconnecting" };
    case "snapshot": {
      // stale or replayed snapshots never move the clock backwards
      if (state.snapshot && event.snapshot.tick <= state.snapshot.tick) return state;
      const history = [...state.costHistory, {
        tick: event.snapshot.tick,
        cost: event.snapshot.stats.cost_goal,
      }];
      if (history.length > HISTORY_LIMIT) history.splice(0, history.length - HISTORY_LIMIT);
      return { ...state, snapshot: event.snapshot, costHistory: history };
    }
    case "schema-mismatch":
      return { ...state, banner: "snapshot schema mismatch - rendering suspended" };
    case "ack":
      return { ...state, lastAck: event.ack, lastError: null };
    case "error":
      return { ...state, lastError: event.error.reason };
    case "set-tool":
      return { ...state, tool: event.tool };
    case "toggle-layer":
      return {
        ...state,
        layers: { ...state.layers, [event.layer]: !state.layers[event.layer] },
      };
    case "set-camera":
      return { ...state, camera: event.camera };
    case "queued-offline":
      return { ...state, pendingWhileOffline: [...state.pendingWhileOffline, event.command] };
    case "flushed-offline":
      return { ...state, pendingWhileOffline: [] };
  }
}
