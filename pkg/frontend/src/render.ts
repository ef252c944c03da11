// Scene construction is pure (testable); painting is a thin canvas walker.
// Forward tree edges draw blue and reverse edges green, matching the
// planner's conventional colors; the current path is a thick highlight.

import type { MapInfo, Snapshot } from "./protocol.js";
import { worldToScreen, type Camera, type Viewport } from "./transform.js";
import type { Layers } from "./state.js";

export type DrawCommand =
  | { op: "clear"; color: string }
  | { op: "rect"; x: number; y: number; w: number; h: number; color: string }
  | { op: "circle"; x: number; y: number; r: number; color: string; fill: boolean }
  | { op: "polyline"; points: [number, number][]; color: string; width: number }
  | { op: "segments"; segs: [number, number, number, number][]; color: string; width: number };

export const COLORS = {
  background: "#10141a",
  wall: "#3d4653",
  gridline: "#1c232d",
  forwardTree: "#4f8fde",
  reverseTree: "#3fae6a",
  path: "#f2c14e",
  agent: "#e8554d",
  goal: "#58c9f0",
  obstacle: "#0a0a0a",
  obstacleRim: "#666",
};

export function buildScene(
  snapshot: Snapshot | null,
  map: MapInfo | null,
  camera: Camera,
  view: Viewport,
  layers: Layers,
): DrawCommand[] {
  const cmds: DrawCommand[] = [{ op: "clear", color: COLORS.background }];
  if (!map) return cmds;
  const w2s = (x: number, y: number) => worldToScreen(camera, view, x, y);

  if (layers.grid) {
    const step = map.width_m > 150 ? 20 : 10;
    for (let gx = 0; gx <= map.width_m; gx += step) {
      const [x0, y0] = w2s(gx, 0);
      const [x1, y1] = w2s(gx, map.height_m);
      cmds.push({ op: "polyline", points: [[x0, y0], [x1, y1]], color: COLORS.gridline, width: 1 });
    }
    for (let gy = 0; gy <= map.height_m; gy += step) {
      const [x0, y0] = w2s(0, gy);
      const [x1, y1] = w2s(map.width_m, gy);
      cmds.push({ op: "polyline", points: [[x0, y0], [x1, y1]], color: COLORS.gridline, width: 1 });
    }
  }

  const cell = map.cell_size_m;
  for (const [ix, iy] of map.occupied) {
    const [px, py] = w2s(ix * cell, (iy + 1) * cell);
    cmds.push({ op: "rect", x: px, y: py, w: cell * camera.scale, h: cell * camera.scale, color: COLORS.wall });
  }

  if (!snapshot) return cmds;

  if (layers.tree && snapshot.edges.length) {
    const forward: [number, number, number, number][] = [];
    const reverse: [number, number, number, number][] = [];
    snapshot.edges.forEach(([ax, ay, bx, by], i) => {
      const [sx1, sy1] = w2s(ax, ay);
      const [sx2, sy2] = w2s(bx, by);
      (i < snapshot.forward_edge_count ? forward : reverse).push([sx1, sy1, sx2, sy2]);
    });
    if (forward.length) cmds.push({ op: "segments", segs: forward, color: COLORS.forwardTree, width: 1 });
    if (reverse.length) cmds.push({ op: "segments", segs: reverse, color: COLORS.reverseTree, width: 1 });
  }

  if (layers.obstacles) {
    for (const o of snapshot.obstacles) {
      const [px, py] = w2s(o.x, o.y);
      cmds.push({ op: "circle", x: px, y: py, r: o.r * camera.scale, color: COLORS.obstacle, fill: true });
      cmds.push({ op: "circle", x: px, y: py, r: o.r * camera.scale, color: COLORS.obstacleRim, fill: false });
    }
  }

  if (layers.path && snapshot.path.length > 1) {
    cmds.push({
      op: "polyline",
      points: snapshot.path.map(([x, y]) => w2s(x, y)),
      color: COLORS.path,
      width: 3,
    });
  }

  const [ax, ay] = w2s(snapshot.agent[0], snapshot.agent[1]);
  cmds.push({ op: "circle", x: ax, y: ay, r: 5, color: COLORS.agent, fill: true });
  if (snapshot.goal) {
    const [gx, gy] = w2s(snapshot.goal[0], snapshot.goal[1]);
    cmds.push({ op: "circle", x: gx, y: gy, r: 6, color: COLORS.goal, fill: false });
    cmds.push({ op: "circle", x: gx, y: gy, r: 2, color: COLORS.goal, fill: true });
  }
  return cmds;
}

export function paint(ctx: CanvasRenderingContext2D, view: Viewport, cmds: DrawCommand[]): void {
  for (const c of cmds) {
    switch (c.op) {
      case "clear":
        ctx.fillStyle = c.color;
        ctx.fillRect(0, 0, view.width, view.height);
        break;
      case "rect":
        ctx.fillStyle = c.color;
        ctx.fillRect(c.x, c.y, c.w, c.h);
        break;
      case "circle":
        ctx.beginPath();
        ctx.arc(c.x, c.y, c.r, 0, Math.PI * 2);
        if (c.fill) {
          ctx.fillStyle = c.color;
          ctx.fill();
        } else {
          ctx.strokeStyle = c.color;
          ctx.lineWidth = 1.5;
          ctx.stroke();
        }
        break;
      case "polyline":
        ctx.strokeStyle = c.color;
        ctx.lineWidth = c.width;
        ctx.beginPath();
        c.points.forEach(([x, y], i) => (i ? ctx.lineTo(x, y) : ctx.moveTo(x, y)));
        ctx.stroke();
        break;
      case "segments":
        ctx.strokeStyle = c.color;
        ctx.lineWidth = c.width;
        ctx.beginPath();
        for (const [x1, y1, x2, y2] of c.segs) {
          ctx.moveTo(x1, y1);
          ctx.lineTo(x2, y2);
        }
        ctx.stroke();
        break;
    }
  }
}
