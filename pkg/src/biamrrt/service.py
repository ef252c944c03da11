"""Live session service: one planner per session, commands over a JSON
websocket, snapshot streaming, and HTTP session management.

The service adds no planning behavior: a scripted headless session and a
direct library run with the same seed and command schedule produce the same
trajectory log. Commands are queued and applied only at tick boundaries;
snapshot fan-out always sends the latest state (intermediate snapshots may
be dropped under load, never reordered).
"""

import asyncio
import json
import math
import queue
import threading
import time
import uuid

from .bench import planner_by_id, planner_matrix, prepare_metric, scenario_sigma
from .errors import BiamError, PlannerError
from .planner import PlannerSession
from .world import BUILTIN_SCENARIOS

PROTOCOL_VERSION = 1
MAX_SNAPSHOT_EDGES = 5000

COMMANDS = ("set_goal", "add_obstacle", "remove_obstacle", "pause", "resume", "set_speed")


def validate_command(msg):
    """Check a client message against the protocol; returns an error string or None."""
    if not isinstance(msg, dict):
        return "message must be a JSON object"
    if "v" in msg and msg["v"] != PROTOCOL_VERSION:
        return f"unsupported protocol version {msg.get('v')!r}"
    cmd = msg.get("cmd")
    if cmd not in COMMANDS:
        return f"unknown command {cmd!r}"
    if cmd == "set_goal":
        if not _nums(msg, "x", "y"):
            return "set_goal needs numeric x and y"
    elif cmd == "add_obstacle":
        if not _nums(msg, "x", "y", "r"):
            return "add_obstacle needs numeric x, y and r"
        if msg["r"] <= 0:
            return "obstacle radius must be positive"
    elif cmd == "remove_obstacle":
        if not isinstance(msg.get("id"), str):
            return "remove_obstacle needs a string id"
    elif cmd == "set_speed":
        if not _nums(msg, "v_mps") or msg["v_mps"] <= 0:
            return "set_speed needs positive v_mps"
    return None


def _nums(msg, *keys):
    return all(isinstance(msg.get(k), (int, float)) and not isinstance(msg.get(k), bool) for k in keys)


class Session:
    """A live planner with a command queue applied at tick boundaries."""

    def __init__(self, scenario, planner_id, overrides=None, cache_dir=None):
        overrides = dict(overrides or {})
        if scenario not in BUILTIN_SCENARIOS:
            raise PlannerError(f"unknown scenario {scenario!r}")
        config = planner_by_id(planner_id)
        self.tick_rate_hz = float(overrides.pop("tick_rate_hz", 10.0))
        allowed = {"sigma", "seed", "budget_mode", "agent_speed", "t_exp",
                   "det_expansions_per_slice", "det_ops_per_second"}
        bad = set(overrides) - allowed
        if bad:
            raise PlannerError(f"unknown overrides: {sorted(bad)}")
        overrides.setdefault("sigma", scenario_sigma(scenario))
        config = config.copy_with(**overrides)
        self.world, self.metric = prepare_metric(scenario, config.metric_kind, cache_dir)
        self.id = uuid.uuid4().hex[:12]
        self.scenario = scenario
        self.planner_id = planner_id
        self.planner = PlannerSession(self.world, config, metric=self.metric)
        self.lifecycle = "created"
        self.tick_index = 0
        self._commands = queue.Queue()
        self._lock = threading.Lock()
        self.latest_snapshot = self._snapshot()
        self._worker = None
        self._stop = threading.Event()

    # -- commands ------------------------------------------------------------

    def submit(self, msg):
        """Validate and queue a command; returns the ack or error message."""
        err = validate_command(msg)
        if err is None and self.lifecycle == "finished":
            err = "session is finished"
        if err is None and msg["cmd"] == "set_goal":
            p = (msg["x"], msg["y"])
            if not self.world.in_bounds(p) or not self.world.is_free(p):
                err = f"goal ({p[0]:.2f}, {p[1]:.2f}) is not in free space"
        if err is None and msg["cmd"] == "remove_obstacle":
            if all(o.id != msg["id"] for o in self.world.dynamic_obstacles):
                err = f"unknown obstacle id {msg['id']!r}"
        if err is not None:
            return {"type": "error", "v": PROTOCOL_VERSION, "reason": err}
        self._commands.put(msg)
        return {
            "type": "ack",
            "v": PROTOCOL_VERSION,
            "cmd": msg["cmd"],
            "effective_tick": self.tick_index + 1,
        }

    def _apply(self, msg):
        cmd = msg["cmd"]
        try:
            if cmd == "set_goal":
                self.planner.set_goal((msg["x"], msg["y"]))
            elif cmd == "add_obstacle":
                obs = self.world.add_obstacle((msg["x"], msg["y"]), msg["r"], msg.get("id"))
                msg["id"] = obs.id
            elif cmd == "remove_obstacle":
                self.world.remove_obstacle(msg["id"])
            elif cmd == "pause":
                if self.lifecycle == "running":
                    self.lifecycle = "paused"
            elif cmd == "resume":
                if self.lifecycle in ("created", "paused"):
                    self.lifecycle = "running"
            elif cmd == "set_speed":
                self.planner.config.agent_speed = float(msg["v_mps"])
        except BiamError:
            pass  # raced with a later mutation; validated at submit time

    def step(self):
        """One tick boundary: apply queued commands, then plan if running."""
        with self._lock:
            while True:
                try:
                    msg = self._commands.get_nowait()
                except queue.Empty:
                    break
                self._apply(msg)
            if self.lifecycle == "running" and self.planner.goal is not None:
                self.planner.plan_tick()
                self.tick_index += 1
                self.latest_snapshot = self._snapshot()

    # -- snapshots -------------------------------------------------------------

    def _snapshot(self):
        p = self.planner
        edges = p.forward.edges()
        if p.reverse is not None:
            edges = edges + p.reverse.edges()
        if len(edges) > MAX_SNAPSHOT_EDGES:
            stride = math.ceil(len(edges) / MAX_SNAPSHOT_EDGES)
            edges = edges[::stride]
        cost = None
        if p.forward.goal_attached:
            c = p.forward.effective_cost(p.forward.goal_id)
            cost = None if math.isinf(c) else c
        n_forward = len(p.forward)
        return {
            "type": "snapshot",
            "v": PROTOCOL_VERSION,
            "tick": self.tick_index,
            "lifecycle": self.lifecycle,
            "phase": p.phase,
            "agent": [p.agent[0], p.agent[1]],
            "goal": list(p.goal) if p.goal is not None else None,
            "path": [[x, y] for x, y in p.current_path_positions],
            "edges": [[a[0], a[1], b[0], b[1]] for a, b in edges],
            "forward_edge_count": min(n_forward - 1, len(edges)) if n_forward > 1 else 0,
            "obstacles": [
                {"id": o.id, "x": o.center[0], "y": o.center[1], "r": o.radius}
                for o in self.world.dynamic_obstacles
            ],
            "stats": {
                "cost_goal": cost,
                "nodes_f": n_forward,
                "nodes_r": len(p.reverse) if p.reverse is not None else 0,
                "elapsed_s": p.sim_time,
                "search_time_s": p.search_time,
                "traveled_m": p.traveled_length,
            },
        }

    # -- worker -------------------------------------------------------------------

    def start_worker(self):
        if self._worker is not None:
            return
        self._worker = threading.Thread(target=self._run, daemon=True)
        self._worker.start()

    def _run(self):
        interval = 1.0 / self.tick_rate_hz
        while not self._stop.is_set():
            t0 = time.perf_counter()
            self.step()
            delay = interval - (time.perf_counter() - t0)
            if delay > 0:
                self._stop.wait(delay)

    def close(self):
        self.lifecycle = "finished"
        self._stop.set()
        if self._worker is not None:
            self._worker.join(timeout=2.0)


def run_scripted(scenario, planner_id, schedule, ticks, overrides=None, cache_dir=None):
    """Drive a session synchronously, applying commands at scheduled ticks.

    schedule maps tick index -> list of command messages; commands land at
    that tick's boundary, exactly like the live worker. Returns the session.
    """
    session = Session(scenario, planner_id, overrides=overrides, cache_dir=cache_dir)
    session.lifecycle = "running"
    for tick in range(ticks):
        for msg in schedule.get(tick, []):
            err = validate_command(msg)
            if err:
                raise PlannerError(f"bad scripted command at tick {tick}: {err}")
            session._commands.put(msg)
        session.step()
    return session


# -- HTTP / websocket app ----------------------------------------------------------


def create_app(cache_dir=None, frontend_dir=None):
    from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

    app = FastAPI(title="biamrrt live planner")
    sessions = {}
    app.state.sessions = sessions

    @app.get("/scenarios")
    def scenarios():
        return {"v": PROTOCOL_VERSION, "scenarios": list(BUILTIN_SCENARIOS)}

    @app.get("/planners")
    def planners():
        return {
            "v": PROTOCOL_VERSION,
            "planners": [
                {
                    "id": r.planner_id,
                    "label": r.label,
                    "metric": r.metric_kind,
                    "bidirectional": r.bidirectional,
                    "new_rewiring": r.new_rewiring,
                }
                for r in planner_matrix()
            ],
        }

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        scenario = body.get("scenario")
        planner_id = body.get("planner")
        try:
            session = Session(
                scenario, planner_id, overrides=body.get("overrides"), cache_dir=cache_dir
            )
        except BiamError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        sessions[session.id] = session
        session.start_worker()
        return {
            "v": PROTOCOL_VERSION,
            "id": session.id,
            "scenario": scenario,
            "planner": planner_id,
            "tick_rate_hz": session.tick_rate_hz,
            "map": {
                "width_m": session.world.width_m,
                "height_m": session.world.height_m,
                "cell_size_m": session.world.cell_size_m,
                "occupied": _occupied_cells(session.world),
                "start": list(session.world.start),
                "goal_hint": list(session.world.goal),
            },
        }

    @app.get("/sessions/{session_id}")
    def session_info(session_id: str):
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session.latest_snapshot

    @app.delete("/sessions/{session_id}")
    def close_session(session_id: str):
        session = sessions.pop(session_id, None)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        session.close()
        return {"v": PROTOCOL_VERSION, "closed": session_id}

    @app.websocket("/sessions/{session_id}/socket")
    async def socket(ws: WebSocket, session_id: str):
        session = sessions.get(session_id)
        if session is None:
            await ws.close(code=4404)
            return
        await ws.accept()
        await ws.send_text(json.dumps(session.latest_snapshot))
        last_tick = session.latest_snapshot["tick"]

        async def pump_snapshots():
            nonlocal last_tick
            poll = 1.0 / (session.tick_rate_hz * 4.0)
            while session.lifecycle != "finished":
                snap = session.latest_snapshot
                if snap["tick"] != last_tick:
                    last_tick = snap["tick"]
                    await ws.send_text(json.dumps(snap))
                await asyncio.sleep(poll)

        pump = asyncio.create_task(pump_snapshots())
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg = json.loads(text)
                except json.JSONDecodeError:
                    reply = {"type": "error", "v": PROTOCOL_VERSION, "reason": "invalid JSON"}
                else:
                    reply = session.submit(msg)
                await ws.send_text(json.dumps(reply))
        except WebSocketDisconnect:
            pass
        finally:
            pump.cancel()

    if frontend_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="ui")
    return app


def _occupied_cells(world):
    """Occupied static cells as [ix, iy] pairs (compact enough at desk scale)."""
    import numpy as np

    ys, xs = np.nonzero(world.static_cells)
    return [[int(x), int(y)] for x, y in zip(xs, ys)]


def main(argv=None):
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="run the live planner service")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8787)
    parser.add_argument("--cache-dir", default="metric-cache")
    parser.add_argument("--frontend", default=None, help="static bundle directory to serve at /")
    args = parser.parse_args(argv)
    app = create_app(cache_dir=args.cache_dir, frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":
    main()
