// Pointer gestures -> protocol commands, through the camera transform.

import { PROTOCOL_VERSION, type Command, type Snapshot } from "./protocol.js";
import { screenToWorld, type Camera, type Viewport } from "./transform.js";
import type { ToolMode } from "./state.js";

export interface Drag {
  startPx: [number, number];
  endPx: [number, number];
}

const MIN_OBSTACLE_RADIUS = 0.5;

/** Command for a finished gesture, or null when the gesture means nothing. */
export function gestureCommand(
  tool: ToolMode,
  drag: Drag,
  camera: Camera,
  view: Viewport,
  snapshot: Snapshot | null,
): Command | null {
  const [wx, wy] = screenToWorld(camera, view, drag.startPx[0], drag.startPx[1]);
  if (tool === "place-goal") {
    return { v: PROTOCOL_VERSION, cmd: "set_goal", x: wx, y: wy };
  }
  if (tool === "place-obstacle") {
    const [ex, ey] = screenToWorld(camera, view, drag.endPx[0], drag.endPx[1]);
    const r = Math.max(Math.hypot(ex - wx, ey - wy), MIN_OBSTACLE_RADIUS);
    return { v: PROTOCOL_VERSION, cmd: "add_obstacle", x: wx, y: wy, r };
  }
  // erase: hit-test the obstacle discs in the latest snapshot
  if (!snapshot) return null;
  for (const o of snapshot.obstacles) {
    if (Math.hypot(o.x - wx, o.y - wy) <= o.r) {
      return { v: PROTOCOL_VERSION, cmd: "remove_obstacle", id: o.id };
    }
  }
  return null;
}
