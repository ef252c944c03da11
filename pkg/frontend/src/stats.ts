// Live readout values and the cost sparkline geometry.

import type { Snapshot } from "./protocol.js";

export interface Readouts {
  cost: string;
  nodesF: number;
  nodesR: number;
  elapsed: string;
  searchTime: string;
  traveled: string;
  phase: string;
}

export function readouts(snapshot: Snapshot | null): Readouts {
  if (!snapshot) {
    return { cost: "∞", nodesF: 0, nodesR: 0, elapsed: "0.0s", searchTime: "-", traveled: "0.0m", phase: "idle" };
  }
  const s = snapshot.stats;
  return {
    cost: s.cost_goal === null ? "∞" : `${s.cost_goal.toFixed(1)}m`,
    nodesF: s.nodes_f,
    nodesR: s.nodes_r,
    elapsed: `${s.elapsed_s.toFixed(1)}s`,
    searchTime: s.search_time_s === null ? "-" : `${s.search_time_s.toFixed(2)}s`,
    traveled: `${s.traveled_m.toFixed(1)}m`,
    phase: snapshot.phase,
  };
}

/** Polyline points for the cost-over-ticks sparkline in a w x h box.
 *  Ticks with no finite cost leave gaps (segments split). */
export function sparklineSegments(
  history: { tick: number; cost: number | null }[],
  w: number,
  h: number,
): [number, number][][] {
  const finite = history.filter((p) => p.cost !== null) as { tick: number; cost: number }[];
  if (finite.length === 0 || history.length < 2) return [];
  const tickMin = history[0].tick;
  const tickMax = history[history.length - 1].tick;
  const span = Math.max(tickMax - tickMin, 1);
  const costMax = Math.max(...finite.map((p) => p.cost));
  const costMin = Math.min(...finite.map((p) => p.cost));
  const range = Math.max(costMax - costMin, 1e-9);
  const segments: [number, number][][] = [];
  let current: [number, number][] = [];
  for (const p of history) {
    if (p.cost === null) {
      if (current.length > 1) segments.push(current);
      current = [];
      continue;
    }
    current.push([
      ((p.tick - tickMin) / span) * w,
      h - ((p.cost - costMin) / range) * (h - 2) - 1,
    ]);
  }
  if (current.length > 1) segments.push(current);
  return segments;
}
