// Round-trip against a really-running service: the gesture pipeline's
// commands must be acked fast and visible in the snapshot stream.

import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";
import { gestureCommand } from "../src/gestures.js";
import { parseServerMessage, serializeCommand, type Snapshot } from "../src/protocol.js";
import { readouts } from "../src/stats.js";
import { fitToWorld, worldToScreen, type Viewport } from "../src/transform.js";

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;
const view: Viewport = { width: 1100, height: 780 };

let service: ChildProcess;

async function waitForService(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const r = await fetch(`${BASE}/scenarios`);
      if (r.ok) return;
    } catch {
      /* not up yet */
    }
    await new Promise((res) => setTimeout(res, 250));
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  service = spawn("python3", ["-m", "biamrrt.service", "--port", String(PORT),
                              "--cache-dir", "/tmp/biam-e2e-cache"],
                  { cwd: "..", stdio: "ignore" });
  await waitForService();
}, 40_000);

afterAll(() => {
  service?.kill();
});

interface Collected {
  socket: WebSocket;
  snapshots: Snapshot[];
  acks: { cmd: string; at: number }[];
  send: (text: string) => void;
  nextSnapshot: (after?: number) => Promise<Snapshot>;
}

function connect(sessionId: string): Promise<Collected> {
  return new Promise((resolve, reject) => {
    const socket = new WebSocket(`ws://127.0.0.1:${PORT}/sessions/${sessionId}/socket`);
    const snapshots: Snapshot[] = [];
    const acks: { cmd: string; at: number }[] = [];
    const waiters: ((s: Snapshot) => void)[] = [];
    socket.on("message", (data) => {
      const msg = parseServerMessage(String(data));
      if (!msg) return;
      if (msg.type === "snapshot") {
        snapshots.push(msg);
        waiters.splice(0).forEach((w) => w(msg));
      } else if (msg.type === "ack") {
        acks.push({ cmd: msg.cmd, at: Date.now() });
      }
    });
    socket.on("open", () =>
      resolve({
        socket,
        snapshots,
        acks,
        send: (text) => socket.send(text),
        nextSnapshot: () => new Promise((res) => waiters.push(res)),
      }),
    );
    socket.on("error", reject);
  });
}

describe("UI round-trip against the live service (A11)", () => {
  it("goal click and obstacle drag are acked fast and visible within 2 snapshots", async () => {
    const resp = await fetch(`${BASE}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        scenario: "bug_trap",
        planner: "bi-rt-rrt",
        overrides: { budget_mode: "deterministic", seed: 5, tick_rate_hz: 50.0 },
      }),
    });
    expect(resp.status).toBe(201);
    const info = await resp.json();
    const camera = fitToWorld(info.map.width_m, info.map.height_m, view);
    const conn = await connect(info.id);

    // goal click through the real gesture pipeline
    const goalPx = worldToScreen(camera, view, 50.5, 80.5);
    const goalCmd = gestureCommand("place-goal", { startPx: goalPx, endPx: goalPx }, camera, view, null);
    expect(goalCmd?.cmd).toBe("set_goal");
    const t0 = Date.now();
    conn.send(serializeCommand(goalCmd!));
    conn.send(JSON.stringify({ v: 1, cmd: "resume" }));

    const s1 = await conn.nextSnapshot();
    const s2 = s1.goal ? s1 : await conn.nextSnapshot();
    expect(conn.acks.find((a) => a.cmd === "set_goal")).toBeDefined();
    expect(conn.acks.find((a) => a.cmd === "set_goal")!.at - t0).toBeLessThan(200);
    expect(s2.goal?.[0]).toBeCloseTo(50.5, 3);
    expect(s2.goal?.[1]).toBeCloseTo(80.5, 3);

    // obstacle drag of 3 m through the same pipeline
    const dragStart = worldToScreen(camera, view, 20, 20);
    const dragEnd = worldToScreen(camera, view, 23, 20);
    const obsCmd = gestureCommand("place-obstacle", { startPx: dragStart, endPx: dragEnd }, camera, view, null);
    expect(obsCmd?.cmd).toBe("add_obstacle");
    if (obsCmd?.cmd === "add_obstacle") {
      expect(Math.abs(obsCmd.r - 3) / 3).toBeLessThan(0.01);
    }
    const t1 = Date.now();
    conn.send(serializeCommand(obsCmd!));
    const sA = await conn.nextSnapshot();
    const sB = sA.obstacles.length ? sA : await conn.nextSnapshot();
    const ack = conn.acks.find((a) => a.cmd === "add_obstacle");
    expect(ack).toBeDefined();
    expect(ack!.at - t1).toBeLessThan(200);
    expect(sB.obstacles.length).toBe(1);
    expect(sB.obstacles[0].r).toBeCloseTo(3, 1);

    // the stats panel readout reflects the snapshot payload exactly
    const r = readouts(sB);
    const c = sB.stats.cost_goal;
    expect(r.cost).toBe(c === null ? "∞" : `${c.toFixed(1)}m`);
    expect(r.nodesF).toBe(sB.stats.nodes_f);

    conn.socket.close();
  }, 60_000);
});
