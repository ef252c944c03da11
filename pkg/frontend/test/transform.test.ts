import { describe, expect, it } from "vitest";
import { fitToWorld, panBy, screenToWorld, worldToScreen, zoomAt, type Viewport } from "../src/transform.js";

const view: Viewport = { width: 1100, height: 780 };

describe("camera transform", () => {
  it("round-trips world -> screen -> world within one pixel's world size", () => {
    const cam = fitToWorld(200, 200, view);
    const pixelWorld = 1 / cam.scale;
    for (let i = 0; i < 500; i++) {
      const x = Math.random() * 200;
      const y = Math.random() * 200;
      const [px, py] = worldToScreen(cam, view, x, y);
      const [bx, by] = screenToWorld(cam, view, px, py);
      expect(Math.abs(bx - x)).toBeLessThan(pixelWorld);
      expect(Math.abs(by - y)).toBeLessThan(pixelWorld);
    }
  });

  it("fits the whole world inside the viewport", () => {
    const cam = fitToWorld(100, 100, view);
    for (const [x, y] of [[0, 0], [100, 0], [0, 100], [100, 100]] as const) {
      const [px, py] = worldToScreen(cam, view, x, y);
      expect(px).toBeGreaterThanOrEqual(0);
      expect(px).toBeLessThanOrEqual(view.width);
      expect(py).toBeGreaterThanOrEqual(0);
      expect(py).toBeLessThanOrEqual(view.height);
    }
  });

  it("world y axis points up on screen", () => {
    const cam = fitToWorld(100, 100, view);
    const [, low] = worldToScreen(cam, view, 50, 10);
    const [, high] = worldToScreen(cam, view, 50, 90);
    expect(high).toBeLessThan(low);
  });

  it("pan moves the view by the pixel delta", () => {
    const cam = fitToWorld(100, 100, view);
    const [px, py] = worldToScreen(cam, view, 30, 30);
    const panned = panBy(cam, 50, -20);
    const [qx, qy] = worldToScreen(panned, view, 30, 30);
    expect(qx - px).toBeCloseTo(50, 6);
    expect(qy - py).toBeCloseTo(-20, 6);
  });

  it("zoom keeps the anchor point fixed", () => {
    const cam = fitToWorld(100, 100, view);
    const anchor: [number, number] = [200, 300];
    const before = screenToWorld(cam, view, ...anchor);
    const zoomed = zoomAt(cam, view, anchor[0], anchor[1], 1.5);
    const after = screenToWorld(zoomed, view, ...anchor);
    expect(after[0]).toBeCloseTo(before[0], 9);
    expect(after[1]).toBeCloseTo(before[1], 9);
    expect(zoomed.scale).toBeCloseTo(cam.scale * 1.5, 9);
  });
});
