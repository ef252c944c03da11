"""Benchmark harness: the 20-planner matrix, seeded suite runs, summary
statistics and the connection-distance sweep.

Planner rows are the cross of four schemes (original, bidirectional-only,
new-rewiring-only, both) with five base planners (two RT-RRT* bases, three
AM-RRT* bases differing in assisting metric and budget parameters). Every
run is a fresh seeded session driven to arrival or the 120 s cap; search
time, traveled length and an independent collision audit are recorded.
"""

import csv
import io
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .errors import SuiteError
from .gridastar import ObstacleTimeline, audit_trajectory
from .metrics import build_metric, load_metric_cache, save_metric_cache
from .planner import PHASE_ARRIVED, PlannerConfig, PlannerSession
from .world import BUILTIN_SCENARIOS, builtin_scenario

SUITE_MAGIC = "biam-suite v1"
RUN_CAP_S = 120.0
DEFAULT_REPETITIONS = 25

CSV_COLUMNS = [
    "planner_id", "scenario", "seed", "search_time_s", "traveled_length_m",
    "final_path_length_m", "arrived", "node_count_at_attach",
    "metric_prep_time_s", "audit_ok", "sigma",
]

_BASES = [
    ("rt-rrt", "RT-RRT*", "euclidean", 0.003, 0.003, 12),
    ("rt-rrt-d", "RT-RRT*(D)", "diffusion", 0.003, 0.003, 12),
    ("am-rrt-e", "AM-RRT*(E)", "euclidean", 0.002, 0.004, 20),
    ("am-rrt-d", "AM-RRT*(D)", "diffusion", 0.002, 0.004, 20),
    ("am-rrt-g", "AM-RRT*(G)", "geodesic", 0.002, 0.004, 20),
]

_SCHEMES = [
    ("original", False, False),
    ("bidirectional", True, False),
    ("new-rewiring", False, True),
    ("combined", True, True),
]


def _row_id(base_id, scheme):
    if scheme == "original":
        return base_id
    if scheme == "bidirectional":
        return f"{base_id}-1"
    if scheme == "new-rewiring":
        return f"{base_id}-2"
    return f"bi-{base_id}"


def _row_label(base_label, scheme):
    if scheme == "original":
        return base_label
    if scheme == "bidirectional":
        return f"{base_label}-1"
    if scheme == "new-rewiring":
        return f"{base_label}-2"
    return f"Bi-{base_label}"


def planner_matrix():
    """All 20 planner configurations (4 schemes x 5 base planners)."""
    rows = []
    for base_id, base_label, metric, t_root, t_goal, n_max in _BASES:
        for scheme, bidirectional, new_rewiring in _SCHEMES:
            rows.append(
                PlannerConfig(
                    planner_id=_row_id(base_id, scheme),
                    label=_row_label(base_label, scheme),
                    metric_kind=metric,
                    t_root=t_root,
                    t_goal=t_goal,
                    n_max=n_max,
                    bidirectional=bidirectional,
                    new_rewiring=new_rewiring,
                ).validate()
            )
    return rows


def planner_by_id(planner_id):
    for row in planner_matrix():
        if row.planner_id == planner_id:
            return row
    raise SuiteError(f"unknown planner id {planner_id!r}")


def base_of(planner_id):
    """Base planner id and scheme name for a matrix row id."""
    pid = planner_id
    if pid.startswith("bi-"):
        return pid[3:], "combined"
    if pid.endswith("-1"):
        return pid[:-2], "bidirectional"
    if pid.endswith("-2"):
        return pid[:-2], "new-rewiring"
    return pid, "original"


def scenario_sigma(scenario):
    """50 m in the bug trap, 30 m elsewhere."""
    return 50.0 if scenario == "bug_trap" else 30.0


# -- single runs --------------------------------------------------------------


@dataclass
class RunStats:
    planner_id: str
    scenario: str
    seed: int
    search_time_s: float | None
    traveled_length_m: float
    final_path_length_m: float | None
    arrived: bool
    node_count_at_attach: int | None
    metric_prep_time_s: float
    audit_ok: bool
    sigma: float


@dataclass
class ObstacleScript:
    """Deterministic mid-run obstacle injections on the active path.

    The disc lands on the path ahead of the agent, at a spot with static
    clearance around it (an obstacle dropped into a doorway wedges shut the
    whole corridor, which is the oversized-sigma failure regime rather than
    plain mid-route blocking).
    """

    start_after_tracking_ticks: int = 60
    interval_ticks: int = 40
    count: int = 1
    radius: float = 3.0
    lead_distance: float = 12.0
    wall_clearance: float = 1.5
    require_clearance: bool = True
    _injected: int = field(default=0, repr=False)
    _tracking_ticks: int = field(default=0, repr=False)

    def maybe_inject(self, session, world, timeline):
        if self._injected >= self.count or session.phase != "tracking":
            return
        self._tracking_ticks += 1
        due = self.start_after_tracking_ticks + self._injected * self.interval_ticks
        if self._tracking_ticks < due:
            return
        point = self._placement(session, world)
        if point is None:
            return
        obs = world.add_obstacle(point, self.radius)
        timeline.record_add(session.sim_time, obs)
        self._injected += 1

    def _placement(self, session, world):
        for extra in (0.0, 4.0, 8.0, 12.0):
            point = self._point_ahead(session, self.lead_distance + extra)
            if point is None:
                return None
            if math.dist(point, session.goal) < self.radius + 2.0:
                return None  # close to the goal; skip rather than wall it off
            if not self.require_clearance or self._clear_of_walls(world, point):
                return point
        return None

    def _point_ahead(self, session, lead):
        pts = [session.agent] + session.current_path_positions[1:]
        walked = 0.0
        for a, b in zip(pts, pts[1:]):
            seg = math.dist(a, b)
            if walked + seg >= lead and seg > 0:
                f = (lead - walked) / seg
                return (a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]))
            walked += seg
        return None

    def _clear_of_walls(self, world, point):
        margin = self.radius + self.wall_clearance
        cell = world.cell_size_m
        occ = world.static_cells
        ix0 = max(int((point[0] - margin) / cell), 0)
        ix1 = min(int((point[0] + margin) / cell), occ.shape[1] - 1)
        iy0 = max(int((point[1] - margin) / cell), 0)
        iy1 = min(int((point[1] + margin) / cell), occ.shape[0] - 1)
        return not occ[iy0 : iy1 + 1, ix0 : ix1 + 1].any()


def run_single(world, config, metric, seed, cap_s=RUN_CAP_S, script=None):
    """One seeded run to arrival or the cap; returns (RunStats, session)."""
    cfg = config.copy_with(seed=seed)
    timeline = ObstacleTimeline(world)
    session = PlannerSession(world, cfg, metric=metric)
    session.set_goal(world.goal)
    while session.phase != PHASE_ARRIVED and session.sim_time < cap_s:
        session.plan_tick()
        if script is not None:
            script.maybe_inject(session, world, timeline)
    arrived = session.phase == PHASE_ARRIVED
    violations = audit_trajectory(session.trajectory, world, timeline)
    prep = 0.0 if cfg.budget_mode == "deterministic" else metric.prep_time_s
    stats = RunStats(
        planner_id=cfg.planner_id,
        scenario=getattr(world, "scenario_name", "custom"),
        seed=seed,
        search_time_s=session.search_time,
        traveled_length_m=session.traveled_length,
        final_path_length_m=session.final_path_length,
        arrived=arrived,
        node_count_at_attach=session.counters.get("nodes_at_attach"),
        metric_prep_time_s=prep,
        audit_ok=not violations,
        sigma=cfg.sigma,
    )
    return stats, session


def prepare_metric(scenario, kind, cache_dir=None, rebuild=False):
    """Build (or load from the cache sidecar) the metric for a scenario."""
    world = builtin_scenario(scenario)
    world.scenario_name = scenario
    if kind == "euclidean":
        return world, build_metric(world, "euclidean")
    if cache_dir:
        os.makedirs(cache_dir, exist_ok=True)
        path = os.path.join(cache_dir, f"{scenario}.{kind}.npz")
        if not rebuild and os.path.exists(path):
            try:
                return world, load_metric_cache(path, world)
            except Exception:
                pass  # stale or corrupt cache: rebuild below
        metric = build_metric(world, kind)
        save_metric_cache(path, metric)
        return world, metric
    return world, build_metric(world, kind)


# -- suites -------------------------------------------------------------------


@dataclass
class SuiteConfig:
    planners: list
    scenarios: list
    repetitions: int = DEFAULT_REPETITIONS
    seeds: list | None = None
    budget_mode: str = "deterministic"
    sigma_override: float | None = None
    cap_s: float = RUN_CAP_S

    def validate(self):
        if self.repetitions < 1:
            raise SuiteError("repetitions must be >= 1")
        if self.seeds is None:
            self.seeds = list(range(1, self.repetitions + 1))
        if len(self.seeds) != self.repetitions:
            raise SuiteError("seeds length must equal repetitions")
        known = {row.planner_id for row in planner_matrix()}
        for pid in self.planners:
            if pid not in known:
                raise SuiteError(f"unknown planner id {pid!r}")
        for sc in self.scenarios:
            if sc not in BUILTIN_SCENARIOS:
                raise SuiteError(f"unknown scenario {sc!r}")
        return self


def parse_suite(text):
    """Parse the plain-text key/value suite document."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != SUITE_MAGIC:
        raise SuiteError(f"suite file must start with {SUITE_MAGIC!r}")
    kv = {}
    for ln in lines[1:]:
        parts = ln.split(None, 1)
        if len(parts) != 2:
            raise SuiteError(f"bad suite line {ln!r}")
        kv[parts[0]] = parts[1]
    if "planners" not in kv or "scenarios" not in kv:
        raise SuiteError("suite needs 'planners' and 'scenarios'")
    suite = SuiteConfig(
        planners=[p.strip() for p in kv["planners"].split(",") if p.strip()],
        scenarios=[s.strip() for s in kv["scenarios"].split(",") if s.strip()],
    )
    if "repetitions" in kv:
        suite.repetitions = int(kv["repetitions"])
    if "seeds" in kv:
        suite.seeds = [int(s) for s in kv["seeds"].split(",") if s.strip()]
        suite.repetitions = len(suite.seeds)
    if "budget" in kv:
        if kv["budget"] not in ("deterministic", "wall_clock"):
            raise SuiteError(f"unknown budget {kv['budget']!r}")
        suite.budget_mode = kv["budget"]
    if "sigma" in kv:
        suite.sigma_override = float(kv["sigma"])
    if "cap_s" in kv:
        suite.cap_s = float(kv["cap_s"])
    return suite.validate()


def _run_cell(args):
    """Worker: all seeded runs of one (planner, scenario) cell."""
    planner_id, scenario, seeds, budget_mode, sigma_override, cap_s, cache_dir, rebuild = args
    config = planner_by_id(planner_id)
    world, metric = prepare_metric(scenario, config.metric_kind, cache_dir, rebuild)
    sigma = sigma_override if sigma_override is not None else scenario_sigma(scenario)
    config = config.copy_with(sigma=sigma, budget_mode=budget_mode)
    out = []
    for seed in seeds:
        stats, _ = run_single(world, config, metric, seed, cap_s=cap_s)
        out.append(stats)
    return (planner_id, scenario), out


def run_suite(suite, workers=1, cache_dir=None, rebuild_metrics=False, progress=None):
    """Execute every (planner, scenario, seed) cell; returns sorted RunStats."""
    suite.validate()
    cells = [
        (pid, sc, list(suite.seeds), suite.budget_mode, suite.sigma_override,
         suite.cap_s, cache_dir, rebuild_metrics)
        for pid in suite.planners
        for sc in suite.scenarios
    ]
    results = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, (key, out) in enumerate(pool.map(_run_cell, cells)):
                results[key] = out
                if progress:
                    progress(i + 1, len(cells), key)
    else:
        for i, cell in enumerate(cells):
            key, out = _run_cell(cell)
            results[key] = out
            if progress:
                progress(i + 1, len(cells), key)
    stats = []
    for pid in suite.planners:
        for sc in suite.scenarios:
            stats.extend(results[(pid, sc)])
    return stats


# -- persistence ---------------------------------------------------------------


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def stats_to_csv(stats):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for s in stats:
        writer.writerow([_fmt(getattr(s, col)) for col in CSV_COLUMNS])
    return buf.getvalue()


def load_stats_csv(text):
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for row in reader:
        out.append(
            RunStats(
                planner_id=row["planner_id"],
                scenario=row["scenario"],
                seed=int(row["seed"]),
                search_time_s=float(row["search_time_s"]) if row["search_time_s"] else None,
                traveled_length_m=float(row["traveled_length_m"]),
                final_path_length_m=(
                    float(row["final_path_length_m"]) if row["final_path_length_m"] else None
                ),
                arrived=row["arrived"] == "true",
                node_count_at_attach=(
                    int(row["node_count_at_attach"]) if row["node_count_at_attach"] else None
                ),
                metric_prep_time_s=float(row["metric_prep_time_s"]),
                audit_ok=row["audit_ok"] == "true",
                sigma=float(row["sigma"]),
            )
        )
    return out


# -- summaries -----------------------------------------------------------------


def _cell_stats(values):
    if not values:
        return None
    return {
        "mean": statistics.fmean(values),
        "median": statistics.median(values),
        "n": len(values),
    }


def summarize(stats):
    """Per (scenario, base planner): metrics per scheme and % change vs original.

    Capped (non-arrived) runs count as failures: they contribute to the
    arrival rate but not to the time/length aggregates.
    """
    cells = {}
    for s in stats:
        base, scheme = base_of(s.planner_id)
        key = (s.scenario, base)
        cells.setdefault(key, {}).setdefault(scheme, []).append(s)
    summary = {}
    for (scenario, base), schemes in sorted(cells.items()):
        entry = {}
        for scheme, runs in schemes.items():
            arrived = [r for r in runs if r.arrived]
            entry[scheme] = {
                "runs": len(runs),
                "arrival_rate": len(arrived) / len(runs),
                "audit_pass_rate": sum(1 for r in runs if r.arrived and r.audit_ok) / len(runs),
                "search_time": _cell_stats([r.search_time_s for r in arrived if r.search_time_s is not None]),
                "traveled": _cell_stats([r.traveled_length_m for r in arrived]),
            }
        original = entry.get("original")
        for scheme, data in entry.items():
            if scheme == "original" or not original:
                continue
            changes = {}
            for metric_name in ("search_time", "traveled"):
                o, m = original.get(metric_name), data.get(metric_name)
                if not o or not m or not o["median"]:
                    changes[metric_name] = None  # flagged: empty baseline
                    continue
                changes[metric_name] = {
                    "median_pct": 100.0 * (m["median"] - o["median"]) / o["median"],
                    "mean_pct": 100.0 * (m["mean"] - o["mean"]) / o["mean"] if o["mean"] else None,
                }
            data["vs_original"] = changes
        summary[(scenario, base)] = entry
    return summary


def render_summary(summary):
    lines = []
    for (scenario, base), entry in sorted(summary.items()):
        lines.append(f"== {scenario} / {base}")
        for scheme in ("original", "bidirectional", "new-rewiring", "combined"):
            data = entry.get(scheme)
            if not data:
                continue
            line = f"  {scheme:13s} runs={data['runs']:3d} arrive={data['arrival_rate']:5.0%}"
            st = data["search_time"]
            tr = data["traveled"]
            if st:
                line += f" search[med={st['median']:.2f}s mean={st['mean']:.2f}s]"
            if tr:
                line += f" len[med={tr['median']:.1f}m mean={tr['mean']:.1f}m]"
            lines.append(line)
            for name, c in (data.get("vs_original") or {}).items():
                if c is None:
                    lines.append(f"      {name}: baseline empty (flagged)")
                else:
                    extra = f", mean {c['mean_pct']:+.1f}%" if c["mean_pct"] is not None else ""
                    lines.append(f"      {name} vs original: median {c['median_pct']:+.1f}%{extra}")
        lines.append("")
    return "\n".join(lines)


# -- sigma sweep -----------------------------------------------------------------


def sigma_sweep(scenario, planner_id, sigmas, repetitions=DEFAULT_REPETITIONS,
                budget_mode="deterministic", seeds=None, script_factory=None,
                cache_dir=None, workers=1):
    """Run a bidirectional planner across connection distances with scripted
    mid-run obstacles; reports arrival-plus-audit pass rates per sigma."""
    config = planner_by_id(planner_id)
    if not config.bidirectional:
        raise SuiteError(f"{planner_id} is not bidirectional; the sweep needs fused trees")
    seeds = seeds if seeds is not None else list(range(1, repetitions + 1))
    if script_factory is None:
        script_factory = default_sweep_script
    # the metric payload depends on static geometry only, so it is shared;
    # each run gets a fresh world because the script mutates obstacles
    _, metric = prepare_metric(scenario, config.metric_kind, cache_dir)
    all_stats = []
    rates = {}
    for sigma in sigmas:
        cfg = config.copy_with(sigma=float(sigma), budget_mode=budget_mode)
        passed = 0
        for seed in seeds:
            run_world = builtin_scenario(scenario)
            run_world.scenario_name = scenario
            stats, _ = run_single(run_world, cfg, metric, seed, script=script_factory())
            all_stats.append(stats)
            if stats.arrived and stats.audit_ok:
                passed += 1
        rates[float(sigma)] = passed / len(seeds)
    return all_stats, rates


def default_sweep_script():
    # blockings land deep along the fresh corridor right after connection,
    # which is exactly where an oversized connection distance has left too
    # few nodes to repair around in time
    return ObstacleScript(count=3, interval_ticks=30, start_after_tracking_ticks=1,
                          lead_distance=35.0, require_clearance=False)
