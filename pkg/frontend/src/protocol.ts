// JSON message protocol shared with the planner service (schema v1).

export const PROTOCOL_VERSION = 1;

export interface SnapshotStats {
  cost_goal: number | null;
  nodes_f: number;
  nodes_r: number;
  elapsed_s: number;
  search_time_s: number | null;
  traveled_m: number;
}

export interface Snapshot {
  type: "snapshot";
  v: number;
  tick: number;
  lifecycle: string;
  phase: string;
  agent: [number, number];
  goal: [number, number] | null;
  path: [number, number][];
  edges: [number, number, number, number][];
  forward_edge_count: number;
  obstacles: { id: string; x: number; y: number; r: number }[];
  stats: SnapshotStats;
}

export interface Ack {
  type: "ack";
  v: number;
  cmd: string;
  effective_tick: number;
}

export interface ErrorMsg {
  type: "error";
  v: number;
  reason: string;
}

export type ServerMessage = Snapshot | Ack | ErrorMsg;

export type Command =
  | { v: number; cmd: "set_goal"; x: number; y: number }
  | { v: number; cmd: "add_obstacle"; x: number; y: number; r: number }
  | { v: number; cmd: "remove_obstacle"; id: string }
  | { v: number; cmd: "pause" }
  | { v: number; cmd: "resume" }
  | { v: number; cmd: "set_speed"; v_mps: number };

export interface MapInfo {
  width_m: number;
  height_m: number;
  cell_size_m: number;
  occupied: [number, number][];
  start: [number, number];
  goal_hint: [number, number];
}

const isNum = (x: unknown): x is number => typeof x === "number" && Number.isFinite(x);
const isPoint = (p: unknown): p is [number, number] =>
  Array.isArray(p) && p.length === 2 && isNum(p[0]) && isNum(p[1]);

/** Parse a server frame; returns null (never throws) on schema mismatch. */
export function parseServerMessage(text: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const msg = raw as Record<string, unknown>;
  if (msg.v !== PROTOCOL_VERSION) return null;
  switch (msg.type) {
    case "ack":
      return typeof msg.cmd === "string" && isNum(msg.effective_tick) ? (msg as unknown as Ack) : null;
    case "error":
      return typeof msg.reason === "string" ? (msg as unknown as ErrorMsg) : null;
    case "snapshot":
      return validShapshotShape(msg) ? (msg as unknown as Snapshot) : null;
    default:
      return null;
  }
}

function validShapshotShape(msg: Record<string, unknown>): boolean {
  if (!isNum(msg.tick) || typeof msg.phase !== "string") return false;
  if (!isPoint(msg.agent)) return false;
  if (!Array.isArray(msg.path) || !Array.isArray(msg.edges) || !Array.isArray(msg.obstacles)) {
    return false;
  }
  const stats = msg.stats as Record<string, unknown> | undefined;
  if (!stats || !isNum(stats.nodes_f) || !isNum(stats.elapsed_s)) return false;
  return true;
}

export function serializeCommand(cmd: Command): string {
  return JSON.stringify(cmd);
}
