import { describe, expect, it } from "vitest";
import { buildScene, COLORS } from "../src/render.js";
import type { MapInfo, Snapshot } from "../src/protocol.js";
import { readouts, sparklineSegments } from "../src/stats.js";
import { fitToWorld, type Viewport } from "../src/transform.js";

const view: Viewport = { width: 1100, height: 780 };
const layers = { tree: true, path: true, obstacles: true, grid: false };

const map: MapInfo = {
  width_m: 100, height_m: 100, cell_size_m: 1,
  occupied: [[10, 10], [10, 11]],
  start: [5, 5], goal_hint: [90, 90],
};

function snap(partial: Partial<Snapshot> = {}): Snapshot {
  return {
    type: "snapshot", v: 1, tick: 9, lifecycle: "running", phase: "tracking",
    agent: [5, 5], goal: [90, 90],
    path: [[5, 5], [20, 20], [40, 41]],
    edges: [[5, 5, 8, 8], [8, 8, 12, 9], [90, 90, 87, 88]],
    forward_edge_count: 2,
    obstacles: [{ id: "o1", x: 50, y: 50, r: 4 }],
    stats: { cost_goal: 120.5, nodes_f: 3, nodes_r: 1, elapsed_s: 1.35, search_time_s: 0.45, traveled_m: 12.25 },
    ...partial,
  };
}

describe("scene construction", () => {
  it("empty snapshot renders the map only", () => {
    const cmds = buildScene(null, map, fitToWorld(100, 100, view), view, layers);
    const kinds = new Set(cmds.map((c) => c.op));
    expect(kinds.has("rect")).toBe(true);       // walls
    expect(kinds.has("segments")).toBe(false);  // no tree yet
  });

  it("path is visibly distinct from tree edges", () => {
    const cmds = buildScene(snap(), map, fitToWorld(100, 100, view), view, layers);
    const path = cmds.find((c) => c.op === "polyline" && c.color === COLORS.path);
    const tree = cmds.filter((c) => c.op === "segments");
    expect(path).toBeDefined();
    expect(tree.length).toBeGreaterThan(0);
    if (path?.op === "polyline") {
      for (const t of tree) {
        if (t.op === "segments") {
          expect(t.color).not.toBe(path.color);
          expect(t.width).toBeLessThan(path.width);
        }
      }
    }
  });

  it("forward edges draw blue, reverse edges green", () => {
    const cmds = buildScene(snap(), map, fitToWorld(100, 100, view), view, layers);
    const segs = cmds.filter((c) => c.op === "segments");
    expect(segs.some((s) => s.op === "segments" && s.color === COLORS.forwardTree)).toBe(true);
    expect(segs.some((s) => s.op === "segments" && s.color === COLORS.reverseTree)).toBe(true);
  });

  it("obstacles appear as filled discs when the layer is on", () => {
    const on = buildScene(snap(), map, fitToWorld(100, 100, view), view, layers);
    const off = buildScene(snap(), map, fitToWorld(100, 100, view), view, { ...layers, obstacles: false });
    const discs = (cmds: typeof on) =>
      cmds.filter((c) => c.op === "circle" && c.fill && c.color === COLORS.obstacle).length;
    expect(discs(on)).toBe(1);
    expect(discs(off)).toBe(0);
  });
});

describe("scene construction at full decimation load", () => {
  it("builds a 5000-edge scene well inside the 33 ms frame budget", () => {
    const edges: [number, number, number, number][] = [];
    for (let i = 0; i < 5000; i++) {
      edges.push([(i * 7) % 100, (i * 13) % 100, (i * 11) % 100, (i * 17) % 100]);
    }
    const big = snap({ edges, forward_edge_count: 3000 });
    const t0 = performance.now();
    const cmds = buildScene(big, map, fitToWorld(100, 100, view), view, layers);
    const elapsed = performance.now() - t0;
    expect(cmds.length).toBeGreaterThan(0);
    expect(elapsed).toBeLessThan(33);
  });
});

describe("stats panel model", () => {
  it("shows infinity before attachment", () => {
    const r = readouts(snap({ stats: { cost_goal: null, nodes_f: 5, nodes_r: 2, elapsed_s: 0.3, search_time_s: null, traveled_m: 0 } }));
    expect(r.cost).toBe("∞");
    expect(r.searchTime).toBe("-");
  });

  it("cost readout equals the snapshot payload exactly", () => {
    const r = readouts(snap());
    expect(r.cost).toBe("120.5m");
    expect(r.nodesF).toBe(3);
    expect(r.phase).toBe("tracking");
  });

  it("sparkline of a non-increasing series never slopes down on screen", () => {
    const history = [
      { tick: 1, cost: null },
      { tick: 2, cost: 100 },
      { tick: 3, cost: 90 },
      { tick: 4, cost: 80 },
      { tick: 5, cost: 80 },
    ];
    const segs = sparklineSegments(history, 200, 60);
    expect(segs.length).toBe(1);
    const ys = segs[0].map(([, y]) => y);
    // canvas y grows downward, so decreasing cost means increasing y
    for (let i = 1; i < ys.length; i++) expect(ys[i]).toBeGreaterThanOrEqual(ys[i - 1]);
  });

  it("gaps split the sparkline", () => {
    const history = [
      { tick: 1, cost: 100 },
      { tick: 2, cost: 95 },
      { tick: 3, cost: null },
      { tick: 4, cost: 90 },
      { tick: 5, cost: 85 },
    ];
    expect(sparklineSegments(history, 200, 60).length).toBe(2);
  });
});
