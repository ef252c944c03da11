import json
import time

import pytest
from fastapi.testclient import TestClient

from biamrrt.bench import planner_by_id, scenario_sigma
from biamrrt.planner import PlannerSession
from biamrrt.service import create_app, run_scripted, validate_command
from biamrrt.world import builtin_scenario

DET = {"budget_mode": "deterministic", "seed": 9, "tick_rate_hz": 200.0}


@pytest.fixture(scope="module")
def client():
    app = create_app(cache_dir=None)
    with TestClient(app) as c:
        yield c


def make_session(client, scenario="bug_trap", planner="bi-rt-rrt", overrides=DET):
    r = client.post("/sessions", json={"scenario": scenario, "planner": planner,
                                       "overrides": dict(overrides)})
    assert r.status_code == 201, r.text
    return r.json()


class TestValidation:
    @pytest.mark.parametrize("msg", [
        {"v": 1, "cmd": "set_goal", "x": 10.0, "y": 12.5},
        {"v": 1, "cmd": "add_obstacle", "x": 5.0, "y": 5.0, "r": 2.0},
        {"v": 1, "cmd": "remove_obstacle", "id": "obs-1"},
        {"v": 1, "cmd": "pause"},
        {"v": 1, "cmd": "resume"},
        {"v": 1, "cmd": "set_speed", "v_mps": 3.0},
    ])
    def test_roundtrip_identity(self, msg):
        assert json.loads(json.dumps(msg)) == msg
        assert validate_command(msg) is None

    @pytest.mark.parametrize("msg,fragment", [
        ({"cmd": "warp"}, "unknown command"),
        ({"cmd": "set_goal", "x": "a", "y": 1}, "numeric"),
        ({"cmd": "add_obstacle", "x": 1, "y": 1, "r": -2}, "positive"),
        ({"cmd": "remove_obstacle"}, "string id"),
        ({"v": 7, "cmd": "pause"}, "version"),
        ("nope", "JSON object"),
    ])
    def test_rejections(self, msg, fragment):
        assert fragment in validate_command(msg)


class TestHttp:
    def test_scenarios_and_planners(self, client):
        r = client.get("/scenarios")
        assert r.json()["scenarios"] == ["bug_trap", "maze", "office"]
        r = client.get("/planners")
        planners = r.json()["planners"]
        assert len(planners) == 20
        assert any(p["id"] == "bi-am-rrt-d" for p in planners)

    def test_create_unknown_planner(self, client):
        r = client.post("/sessions", json={"scenario": "maze", "planner": "warp-drive"})
        assert r.status_code == 400

    def test_create_unknown_scenario(self, client):
        r = client.post("/sessions", json={"scenario": "atrium", "planner": "rt-rrt"})
        assert r.status_code == 400

    def test_distinct_ids_and_defaults(self, client):
        a = make_session(client)
        b = make_session(client)
        assert a["id"] != b["id"]
        assert a["map"]["width_m"] == 100.0
        client.delete(f"/sessions/{a['id']}")
        client.delete(f"/sessions/{b['id']}")

    def test_office_sigma_default(self, client):
        info = make_session(client, scenario="office", planner="bi-am-rrt-e")
        app_sessions = client.app.state.sessions
        assert app_sessions[info["id"]].planner.config.sigma == 30.0
        client.delete(f"/sessions/{info['id']}")

    def test_session_info_and_delete(self, client):
        info = make_session(client)
        r = client.get(f"/sessions/{info['id']}")
        assert r.json()["type"] == "snapshot"
        r = client.delete(f"/sessions/{info['id']}")
        assert r.json()["closed"] == info["id"]
        assert client.get(f"/sessions/{info['id']}").status_code == 404


def recv_until(ws, predicate, limit=400):
    """Read messages until predicate matches; returns the matching message."""
    for _ in range(limit):
        msg = json.loads(ws.receive_text())
        if predicate(msg):
            return msg
    raise AssertionError("expected message not received")


class TestWebsocket:
    def test_fresh_session_snapshot(self, client):
        info = make_session(client)
        with client.websocket_connect(f"/sessions/{info['id']}/socket") as ws:
            snap = json.loads(ws.receive_text())
            assert snap["type"] == "snapshot"
            assert snap["tick"] == 0
            assert snap["phase"] == "idle"
            assert snap["path"] == []
            assert snap["stats"]["cost_goal"] is None
        client.delete(f"/sessions/{info['id']}")

    def test_goal_ack_and_progress(self, client):
        info = make_session(client)
        world_goal = [50.5, 80.5]
        with client.websocket_connect(f"/sessions/{info['id']}/socket") as ws:
            json.loads(ws.receive_text())
            ws.send_text(json.dumps({"v": 1, "cmd": "set_goal",
                                     "x": world_goal[0], "y": world_goal[1]}))
            ack = recv_until(ws, lambda m: m["type"] == "ack")
            assert ack["cmd"] == "set_goal"
            assert ack["effective_tick"] >= 0
            ws.send_text(json.dumps({"v": 1, "cmd": "resume"}))
            recv_until(ws, lambda m: m["type"] == "ack")
            snaps = []
            while len(snaps) < 12:
                m = json.loads(ws.receive_text())
                if m["type"] == "snapshot":
                    snaps.append(m)
            ticks = [s["tick"] for s in snaps]
            assert all(b > a for a, b in zip(ticks, ticks[1:]))  # strictly increasing
            assert all(len(s["edges"]) <= 5000 for s in snaps)
            assert snaps[-1]["stats"]["nodes_f"] > 1
        client.delete(f"/sessions/{info['id']}")

    def test_occupied_goal_rejected(self, client):
        info = make_session(client, scenario="maze")
        with client.websocket_connect(f"/sessions/{info['id']}/socket") as ws:
            json.loads(ws.receive_text())
            ws.send_text(json.dumps({"v": 1, "cmd": "set_goal", "x": 50.0, "y": 25.5}))
            reply = recv_until(ws, lambda m: m["type"] in ("ack", "error"))
            assert reply["type"] == "error"
            assert "free space" in reply["reason"]
        client.delete(f"/sessions/{info['id']}")

    def test_pause_resume_freezes_state(self, client):
        info = make_session(client)
        with client.websocket_connect(f"/sessions/{info['id']}/socket") as ws:
            json.loads(ws.receive_text())
            ws.send_text(json.dumps({"v": 1, "cmd": "set_goal", "x": 50.5, "y": 80.5}))
            recv_until(ws, lambda m: m["type"] == "ack")
            ws.send_text(json.dumps({"v": 1, "cmd": "resume"}))
            recv_until(ws, lambda m: m["type"] == "ack")
            recv_until(ws, lambda m: m["type"] == "snapshot" and m["tick"] >= 3)
            ws.send_text(json.dumps({"v": 1, "cmd": "pause"}))
            recv_until(ws, lambda m: m["type"] == "ack")
            time.sleep(0.1)
            session = client.app.state.sessions[info["id"]]
            tick_a = session.latest_snapshot["tick"]
            time.sleep(0.2)
            tick_b = session.latest_snapshot["tick"]
            assert tick_a == tick_b  # no state change while paused
            ws.send_text(json.dumps({"v": 1, "cmd": "resume"}))
            recv_until(ws, lambda m: m["type"] == "ack")
            recv_until(ws, lambda m: m["type"] == "snapshot" and m["tick"] > tick_b)
        client.delete(f"/sessions/{info['id']}")

    def test_obstacle_on_path_triggers_replanning(self, client):
        info = make_session(client, scenario="bug_trap", planner="bi-rt-rrt")
        sid = info["id"]
        with client.websocket_connect(f"/sessions/{sid}/socket") as ws:
            json.loads(ws.receive_text())
            ws.send_text(json.dumps({"v": 1, "cmd": "set_goal", "x": 50.5, "y": 80.5}))
            recv_until(ws, lambda m: m["type"] == "ack")
            ws.send_text(json.dumps({"v": 1, "cmd": "resume"}))
            recv_until(ws, lambda m: m["type"] == "ack")
            snap = recv_until(ws, lambda m: m["type"] == "snapshot" and m["phase"] == "tracking"
                              and len(m["path"]) > 3, limit=3000)
            # drop a disc on a path point a bit ahead of the agent
            target = snap["path"][3]
            ws.send_text(json.dumps({"v": 1, "cmd": "add_obstacle",
                                     "x": target[0], "y": target[1], "r": 2.0}))
            ack = recv_until(ws, lambda m: m["type"] == "ack")
            assert ack["cmd"] == "add_obstacle"
            snap2 = recv_until(ws, lambda m: m["type"] == "snapshot" and m["obstacles"],
                               limit=2000)
            assert snap2["obstacles"][0]["r"] == 2.0
            # a later snapshot shows a path that avoids the disc
            def path_clear(m):
                if m["type"] != "snapshot" or len(m["path"]) < 2 or m["phase"] == "idle":
                    return False
                ox, oy, orr = target[0], target[1], 2.0
                for (x1, y1), (x2, y2) in zip(m["path"], m["path"][1:]):
                    seg2 = (x2 - x1) ** 2 + (y2 - y1) ** 2
                    if seg2 == 0:
                        continue
                    t = max(0.0, min(1.0, ((ox - x1) * (x2 - x1) + (oy - y1) * (y2 - y1)) / seg2))
                    px, py = x1 + t * (x2 - x1), y1 + t * (y2 - y1)
                    if (px - ox) ** 2 + (py - oy) ** 2 < orr * orr:
                        return False
                return m["phase"] in ("tracking", "arrived")
            recv_until(ws, path_clear, limit=4000)
        client.delete(f"/sessions/{sid}")


class TestScriptedDeterminism:
    def test_headless_equals_direct_library_run(self, tmp_path):
        scenario = "bug_trap"
        seed = 21
        ticks = 120
        schedule = {
            0: [{"v": 1, "cmd": "set_goal", "x": 50.5, "y": 80.5}],
            30: [{"v": 1, "cmd": "add_obstacle", "x": 50.0, "y": 60.0, "r": 2.0}],
        }
        scripted = run_scripted(scenario, "bi-rt-rrt", schedule, ticks,
                                overrides={"budget_mode": "deterministic", "seed": seed})

        world = builtin_scenario(scenario)
        config = planner_by_id("bi-rt-rrt").copy_with(
            sigma=scenario_sigma(scenario), budget_mode="deterministic", seed=seed
        )
        direct = PlannerSession(world, config)
        direct.set_goal((50.5, 80.5))
        for i in range(ticks):
            if i == 30:
                world.add_obstacle((50.0, 60.0), 2.0)
            direct.plan_tick()

        assert scripted.planner.trajectory_log() == direct.trajectory_log()

    def test_scripted_full_run_arrives(self):
        schedule = {0: [{"v": 1, "cmd": "set_goal", "x": 50.5, "y": 80.5}]}
        session = run_scripted("bug_trap", "bi-am-rrt-e", schedule, 400,
                               overrides={"budget_mode": "deterministic", "seed": 3})
        assert session.planner.phase == "arrived"
        snap = session.latest_snapshot
        assert snap["phase"] == "arrived"
        assert snap["stats"]["cost_goal"] is not None
