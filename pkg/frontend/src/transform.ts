// World <-> screen mapping. World y points up, canvas y points down.

export interface Camera {
  scale: number; // pixels per meter
  cx: number;    // world point at the canvas center
  cy: number;
}

export interface Viewport {
  width: number;
  height: number;
}

export function fitToWorld(widthM: number, heightM: number, view: Viewport, margin = 20): Camera {
  const scale = Math.min(
    (view.width - 2 * margin) / widthM,
    (view.height - 2 * margin) / heightM,
  );
  return { scale, cx: widthM / 2, cy: heightM / 2 };
}

export function worldToScreen(cam: Camera, view: Viewport, x: number, y: number): [number, number] {
  return [
    view.width / 2 + (x - cam.cx) * cam.scale,
    view.height / 2 - (y - cam.cy) * cam.scale,
  ];
}

export function screenToWorld(cam: Camera, view: Viewport, px: number, py: number): [number, number] {
  return [
    cam.cx + (px - view.width / 2) / cam.scale,
    cam.cy - (py - view.height / 2) / cam.scale,
  ];
}

export function panBy(cam: Camera, dxPx: number, dyPx: number): Camera {
  return { scale: cam.scale, cx: cam.cx - dxPx / cam.scale, cy: cam.cy + dyPx / cam.scale };
}

/** Zoom keeping the world point under the cursor fixed on screen. */
export function zoomAt(cam: Camera, view: Viewport, px: number, py: number, factor: number): Camera {
  const [wx, wy] = screenToWorld(cam, view, px, py);
  const scale = Math.min(Math.max(cam.scale * factor, 0.5), 200);
  const cx = wx - (px - view.width / 2) / scale;
  const cy = wy + (py - view.height / 2) / scale;
  return { scale, cx, cy };
}
