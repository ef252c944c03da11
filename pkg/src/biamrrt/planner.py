"""Real-time planning loop: simultaneous forward/reverse growth, tree
fusion, budgeted rewiring, agent motion with re-rooting, and replanning
around dynamic obstacles.

The forward tree is rooted at the agent and follows it; the reverse tree is
rooted at the goal and aims at the agent's position frozen at goal-set time.
Once any forward/reverse node pair comes within the connection distance with
a free line between them, the reverse trunk is grafted onto the forward tree
and the reverse tree is discarded.

The agent starts moving when the goal first attaches to the forward tree;
search time is the elapsed time between goal assignment and that attachment.
"""

import math
import random
import time
from dataclasses import dataclass

from .budget import OpBudget, WallClockBudget
from .errors import PlannerError
from .metrics import AssistingMetric, euclidean
from .rewiring import RewireQueues, rewire_goal, rewire_root
from .sampling import INSERTED, extend, sample_state
from .tree import Tree

PHASE_IDLE = "idle"
PHASE_SEARCHING = "searching"
PHASE_TRACKING = "tracking"
PHASE_ARRIVED = "arrived"


@dataclass
class PlannerConfig:
    planner_id: str = "bi-am-rrt-e"
    label: str = "Bi-AM-RRT*(E)"
    t_exp: float = 0.15
    t_root: float = 0.002
    t_goal: float = 0.004
    e_max: float = 5.0
    n_max: int = 20
    sigma: float = 30.0
    agent_speed: float = 5.0
    metric_kind: str = "euclidean"
    bidirectional: bool = True
    new_rewiring: bool = True
    seed: int = 0
    budget_mode: str = "wall_clock"  # wall_clock | deterministic
    det_expansions_per_slice: int = 16
    det_ops_per_second: float = 3000.0
    arrive_radius: float = 0.5

    def validate(self):
        for name in ("t_exp", "t_root", "t_goal", "e_max", "agent_speed", "sigma"):
            if getattr(self, name) <= 0:
                raise PlannerError(f"{name} must be positive")
        if self.n_max < 1 or self.det_expansions_per_slice < 1 or self.det_ops_per_second <= 0:
            raise PlannerError("counts must be positive")
        if self.sigma < self.e_max:
            raise PlannerError(f"sigma {self.sigma} must be >= e_max {self.e_max}")
        if self.metric_kind not in ("euclidean", "diffusion", "geodesic"):
            raise PlannerError(f"unknown metric kind {self.metric_kind!r}")
        if self.budget_mode not in ("wall_clock", "deterministic"):
            raise PlannerError(f"unknown budget mode {self.budget_mode!r}")
        return self

    def copy_with(self, **overrides):
        data = {**self.__dict__, **overrides}
        return PlannerConfig(**data).validate()


@dataclass
class TickReport:
    tick: int
    sim_time: float
    phase: str
    agent: tuple
    cost_goal: float
    planned_path_length: float
    path_ok: bool
    nodes_f: int
    nodes_r: int
    swapped: bool
    expansions: int


class CollisionCache:
    """World proxy that memoizes segment queries at a fixed revision.

    Node positions never move, so the same segments are re-checked by every
    rewiring wave; caching them is transparent as long as the cache is
    invalidated whenever the obstacle set changes (the planner does this at
    the top of each tick, and mutations never happen mid-tick).
    """

    def __init__(self, world):
        self.world = world
        self.width_m = world.width_m
        self.height_m = world.height_m
        self._seg = {}
        self._pt = {}

    def invalidate(self):
        self._seg.clear()
        self._pt.clear()

    def segment_free(self, a, b):
        key = (a, b) if a <= b else (b, a)
        cached = self._seg.get(key)
        if cached is None:
            if len(self._seg) > 400_000:
                self._seg.clear()
            cached = self._seg[key] = self.world.segment_free(a, b)
        return cached

    def is_free(self, p):
        cached = self._pt.get(p)
        if cached is None:
            if len(self._pt) > 400_000:
                self._pt.clear()
            cached = self._pt[p] = self.world.is_free(p)
        return cached

    def in_bounds(self, p):
        return self.world.in_bounds(p)

    def sample_free(self, rng):
        return self.world.sample_free(rng)


def meet(forward, reverse, sigma, world):
    """Closest forward/reverse pair under sigma with a free line, or None."""
    if len(forward) == 0 or len(reverse) == 0:
        return None
    small, large, flip = (
        (reverse, forward, True) if len(reverse) < len(forward) else (forward, reverse, False)
    )
    best = None
    for nid, node in small.nodes.items():
        for cand in sorted(
            large.nearby(node.position, sigma),
            key=lambda c: (euclidean(large.nodes[c].position, node.position), c),
        ):
            d = euclidean(large.nodes[cand].position, node.position)
            if d >= sigma:
                continue
            if best is not None and d >= best[0]:
                break
            if world.segment_free(node.position, large.nodes[cand].position):
                best = (d, cand, nid) if not flip else (d, nid, cand)
                break
    if best is None:
        return None
    return best[1], best[2]  # (forward id, reverse id)


class PlannerSession:
    """One agent, one world, one live planning loop."""

    def __init__(self, world, config, metric=None, agent=None, rng=None):
        config.validate()
        self.world = world
        self.config = config
        self.metric = metric if metric is not None else AssistingMetric("euclidean")
        if self.metric.kind != config.metric_kind:
            raise PlannerError(
                f"metric {self.metric.kind} does not match config {config.metric_kind}"
            )
        self.rng = rng if rng is not None else random.Random(config.seed)
        if agent is None:
            agent = world.start
        if agent is None:
            raise PlannerError("no agent position: map has no start and none was given")
        self.agent = (float(agent[0]), float(agent[1]))
        if not world.is_free(self.agent):
            raise PlannerError(f"agent position {self.agent} is not free")

        self.cworld = CollisionCache(world)
        self.forward = Tree(self.agent, bucket_size=config.e_max)
        self.reverse = None
        self.queues_f = RewireQueues()
        self.queues_r = RewireQueues()
        self.goal = None
        self.reverse_goal = None
        self.phase = PHASE_IDLE
        self.current_path = []           # node ids, root first
        self.current_path_positions = []
        self.tick_index = 0
        self.sim_time = 0.0
        self.search_time = None
        self.traveled_length = 0.0
        self.trajectory = []             # (t, x, y, phase, cost_goal, nodes_f, nodes_r)
        self.counters = {"expansions": 0, "goal_samples": 0, "swaps": 0, "stage2_calls": 0}
        self._seen_revision = world.revision
        self._unchecked_f = []
        self._unchecked_r = []
        self._goal_set_wall = None
        self._final_path_length = None   # planned length at attach time

    # -- configuration plumbing -------------------------------------------

    def _budget_factory(self):
        if self.config.budget_mode == "wall_clock":
            return WallClockBudget
        rate = self.config.det_ops_per_second
        return lambda seconds: OpBudget(max(1, round(seconds * rate)))

    # -- goal handling -----------------------------------------------------

    def set_goal(self, goal):
        goal = (float(goal[0]), float(goal[1]))
        if not self.world.in_bounds(goal) or not self.world.is_free(goal):
            raise PlannerError(f"goal {goal} is not in free space")
        self.goal = goal
        self.search_time = None
        self._final_path_length = None
        self._goal_set_wall = time.perf_counter()
        self.queues_f = RewireQueues()
        self.queues_r = RewireQueues()
        self.forward.goal_id = None
        for nid in self.forward.nearby(goal, 1e-9):
            if self.forward.nodes[nid].position == goal:
                self.forward.goal_id = nid
                break
        if euclidean(self.agent, goal) <= self.config.arrive_radius:
            self.phase = PHASE_ARRIVED
            self.reverse = None
            return
        self.phase = PHASE_SEARCHING
        if self.forward.goal_attached:
            self._record_attach()
        if self.config.bidirectional and not self.forward.goal_attached:
            self.reverse = Tree(goal, bucket_size=self.config.e_max)
            self.reverse_goal = self.agent  # frozen: does not follow the agent
            self._unchecked_f = list(self.forward.nodes)
            self._unchecked_r = [self.reverse.root_id]
        else:
            self.reverse = None

    def _record_attach(self):
        if self.search_time is None:
            if self.config.budget_mode == "wall_clock":
                self.search_time = time.perf_counter() - self._goal_set_wall
            else:
                self.search_time = self.sim_time + self.config.t_exp
            self.counters["nodes_at_attach"] = len(self.forward)
        if self.phase == PHASE_SEARCHING:
            self.phase = PHASE_TRACKING

    # -- expansion ----------------------------------------------------------

    def _expand_forward(self):
        make_budget = self._budget_factory()
        attached_before = self.forward.goal_attached
        bias = None if attached_before else self.goal
        sample = sample_state(self.forward, self.goal, self.rng, self.cworld)
        result = extend(
            self.forward, sample, self.cworld, self.config, self.queues_f,
            metric=self.metric, goal=bias,
        )
        if result.status == INSERTED:
            self._unchecked_f.append(result.node_id)
        self.counters["expansions"] += 1
        if sample.kind == "goal":
            self.counters["goal_samples"] += 1
        rewire_root(self.forward, self.queues_f, self.cworld, self.config, make_budget)
        if self.forward.goal_attached:
            if not attached_before:
                self._record_attach()
            if self.config.new_rewiring:
                self.counters["stage2_calls"] += 1
            rewire_goal(
                self.forward, self.queues_f, self.goal, self.cworld, self.config,
                self.metric, make_budget,
            )

    def _expand_reverse(self):
        make_budget = self._budget_factory()
        sample = sample_state(self.reverse, self.reverse_goal, self.rng, self.cworld)
        result = extend(
            self.reverse, sample, self.cworld, self.config, self.queues_r,
            metric=self.metric, goal=self.reverse_goal,
        )
        if result.status == INSERTED:
            self._unchecked_r.append(result.node_id)
        rewire_root(self.reverse, self.queues_r, self.cworld, self.config, make_budget)

    # -- fusion --------------------------------------------------------------

    def _meet_incremental(self):
        best = None
        for new_id in self._unchecked_f:
            if new_id not in self.forward.nodes:
                continue
            p = self.forward.nodes[new_id].position
            cand = self._closest_valid(self.reverse, p)
            if cand is not None and (best is None or cand[0] < best[0]):
                best = (cand[0], new_id, cand[1])
        for new_id in self._unchecked_r:
            if new_id not in self.reverse.nodes:
                continue
            p = self.reverse.nodes[new_id].position
            cand = self._closest_valid(self.forward, p)
            if cand is not None and (best is None or cand[0] < best[0]):
                best = (cand[0], cand[1], new_id)
        self._unchecked_f = []
        self._unchecked_r = []
        if best is None:
            return None
        return best[1], best[2]

    def _closest_valid(self, tree, p):
        sigma = self.config.sigma
        for cand in sorted(
            tree.nearby(p, sigma),
            key=lambda c: (euclidean(tree.nodes[c].position, p), c),
        ):
            d = euclidean(tree.nodes[cand].position, p)
            if d >= sigma:
                continue
            if self.cworld.segment_free(p, tree.nodes[cand].position):
                return d, cand
        return None

    def _swap(self, witness):
        """Graft the reverse trunk (witness up to the goal root) onto the forward tree."""
        f_id, r_id = witness
        if f_id not in self.forward.nodes or r_id not in self.reverse.nodes:
            return False
        f_pos = self.forward.nodes[f_id].position
        r_pos = self.reverse.nodes[r_id].position
        if not self.cworld.segment_free(f_pos, r_pos):
            return False  # stale witness; re-evaluated next tick
        chain = [r_id]
        cur = self.reverse.nodes[r_id]
        while cur.parent is not None:
            chain.append(cur.parent)
            cur = self.reverse.nodes[cur.parent]
        prev = f_id
        e_max = self.config.e_max
        for rid in chain:
            target = self.reverse.nodes[rid].position
            # subdivide the bridge (and any long trunk hop) so every grafted
            # edge stays within e_max, like ordinary tree edges
            prev_pos = self.forward.nodes[prev].position
            gap = euclidean(prev_pos, target)
            pieces = max(1, math.ceil(gap / e_max))
            for j in range(1, pieces):
                f = j / pieces
                mid = (prev_pos[0] + f * (target[0] - prev_pos[0]),
                       prev_pos[1] + f * (target[1] - prev_pos[1]))
                prev = self.forward.insert_node(mid, prev)
                self.queues_f.enqueue_root(prev)
                self._unchecked_f.append(prev)
            prev = self.forward.insert_node(target, prev)
            self.queues_f.enqueue_root(prev)
            self._unchecked_f.append(prev)
        self.forward.goal_id = prev  # reverse root sits at the goal
        self.reverse = None
        self.queues_r = RewireQueues()
        self._unchecked_r = []
        self.counters["swaps"] += 1
        self._record_attach()
        return True

    # -- dynamic obstacles ----------------------------------------------------

    def _handle_obstacle_change(self):
        changes = self.world.changes_since(self._seen_revision)
        self._seen_revision = self.world.revision
        self.cworld.invalidate()
        if not changes:
            return
        reach = self.config.e_max
        for tree, queues in ((self.forward, self.queues_f), (self.reverse, self.queues_r)):
            if tree is None:
                continue
            # blocked edges may clear, long edges can be hit from afar, and
            # any edge with an endpoint near the changed disc is suspect
            suspects = set(tree.blocked_children) | set(tree.long_children)
            for cx, cy, r in changes:
                suspects.update(tree.nearby((cx, cy), r + reach))
            for nid in suspects:
                node = tree.nodes.get(nid)
                if node is None or node.parent is None:
                    continue
                free = self.world.segment_free(tree.nodes[node.parent].position, node.position)
                tree.mark_edge_blocked(nid, not free)
            # seed the rewiring wave with the branches around the change so
            # detached subtrees reattach within the next budget slices
            self._seed_repair(tree, queues, extra=suspects)
        if self.reverse is not None:
            # a removal can open a connection without any new node appearing
            self._unchecked_f = list(self.forward.nodes)
            self._unchecked_r = list(self.reverse.nodes)

    def _seed_repair(self, tree, queues, extra=()):
        """Restart the rewire sweep from the branches around blocked edges.

        Second-stage pairs can bridge the cut with edges longer than e_max,
        and fresh samples join the frontier as they appear; reseeding on
        every drained sweep keeps repair pressure on until the region heals
        or the obstacle goes away.
        """
        seeds = set(extra)
        reach = 2.0 * self.config.e_max
        for child_id in tree.blocked_children:
            node = tree.nodes.get(child_id)
            if node is None:
                continue
            seeds.update(tree.nearby(node.position, reach))
            if node.parent is not None:
                seeds.update(tree.nearby(tree.nodes[node.parent].position, reach))
        queues.reset_root()
        for nid in sorted(seeds):
            if nid in tree.nodes:
                queues.enqueue_root(nid)
        queues.enqueue_root(tree.root_id)

    # -- path & motion -----------------------------------------------------------

    def _target_node(self):
        if self.goal is None:
            return None
        if self.forward.goal_attached and math.isfinite(self.forward.effective_cost(self.forward.goal_id)):
            return self.forward.goal_id
        nid = self.forward.nearest(self.goal, world=self.cworld)
        if nid is not None and math.isfinite(self.forward.effective_cost(nid)):
            return nid
        return None

    def _recompute_path(self):
        target = self._target_node()
        if target is None:
            self.current_path = []
            self.current_path_positions = []
            return
        _, ids = self.forward.cost_and_path(target)
        if self._refine_long_path_edges(ids):
            _, ids = self.forward.cost_and_path(target)
        self.current_path = ids
        self.current_path_positions = [self.forward.nodes[n].position for n in ids]

    def _refine_long_path_edges(self, ids):
        """Split path edges longer than e_max with collinear waypoint nodes.

        Grafted bridges (up to sigma) and second-stage shortcuts (up to two
        edge lengths) would otherwise let the agent drift farther than e_max
        from the root between hops. Splits preserve geometry and costs.
        """
        e_max = self.config.e_max
        tree = self.forward
        changed = False
        for u, v in zip(ids, ids[1:]):
            pu = tree.nodes[u].position
            pv = tree.nodes[v].position
            d = euclidean(pu, pv)
            if d <= e_max + 1e-9:
                continue
            pieces = math.ceil(d / e_max)
            prev = u
            for j in range(1, pieces):
                f = j / pieces
                mid = (pu[0] + f * (pv[0] - pu[0]), pu[1] + f * (pv[1] - pu[1]))
                prev = tree.insert_node(mid, prev)
            tree.update_edge(prev, v)
            changed = True
        return changed

    def _path_collision_free(self):
        if not self.current_path_positions:
            return False
        pts = [self.agent] + self.current_path_positions[1:]
        for a, b in zip(pts, pts[1:]):
            if not self.cworld.segment_free(a, b):
                return False
        return True

    def _move_agent(self, dt):
        """Walk the path polyline; returns (fraction-of-dt, position) rows
        for every waypoint passed so the trajectory log captures the exact
        motion, not just tick endpoints."""
        passages = []
        if self.phase != PHASE_TRACKING or not self.current_path_positions:
            return passages
        total_budget = self.config.agent_speed * dt
        remaining = total_budget
        pos = self.agent
        pts = self.current_path_positions
        # The agent normally sits on the root's first path edge, so it heads
        # straight for pts[1]; only when that line is blocked (it lagged
        # behind a just-hopped root at a corner) does it close on the root
        # first. Beyond that it follows the polyline exactly.
        idx = 0
        if len(pts) > 1 and self.cworld.segment_free(pos, pts[1]):
            idx = 1
        hop_idx = 0
        hop = self.config.e_max / 2.0
        while remaining > 1e-12 and idx < len(pts):
            target = pts[idx]
            seg = euclidean(pos, target)
            if seg <= 1e-9:
                if idx >= 1:
                    hop_idx = max(hop_idx, idx)
                idx += 1
                continue
            step = min(remaining, seg)
            nxt = (
                pos[0] + (target[0] - pos[0]) * step / seg,
                pos[1] + (target[1] - pos[1]) * step / seg,
            )
            if not self.cworld.segment_free(pos, nxt):
                break  # blocked mid-path: halt here, replan next ticks
            self.traveled_length += step
            pos = nxt
            remaining -= step
            if step == seg:  # landed exactly on a turn of the polyline
                passages.append((1.0 - remaining / total_budget, pos))
            if euclidean(pos, self.goal) <= self.config.arrive_radius:
                self.phase = PHASE_ARRIVED
                break
            if idx >= 1 and euclidean(pos, target) <= hop:
                hop_idx = max(hop_idx, idx)
        self.agent = pos
        if self.phase != PHASE_ARRIVED and euclidean(pos, self.goal) <= self.config.arrive_radius:
            self.phase = PHASE_ARRIVED
        if hop_idx > 0 and self.phase != PHASE_ARRIVED:
            new_root = self.current_path[hop_idx]
            if new_root in self.forward.nodes:
                self.forward.set_root(new_root)
        if passages and passages[-1][1] == pos:
            passages.pop()  # the tick-end row will carry this position
        return passages

    # -- the tick ------------------------------------------------------------------

    def plan_tick(self):
        if self.goal is None:
            raise PlannerError("plan_tick before set_goal")
        cfg = self.config
        swapped = False
        passages = []
        expansions_before = self.counters["expansions"]

        if self.world.revision != self._seen_revision:
            self._handle_obstacle_change()
        elif self.forward.blocked_children and self.queues_f.root_len() == 0:
            self._seed_repair(self.forward, self.queues_f)

        if self.phase in (PHASE_SEARCHING, PHASE_TRACKING):
            if cfg.budget_mode == "wall_clock":
                budget = WallClockBudget(cfg.t_exp)
                while budget.take():
                    self._expand_forward()
                    if self.reverse is not None and not self.forward.goal_attached:
                        self._expand_reverse()
            else:
                for _ in range(cfg.det_expansions_per_slice):
                    self._expand_forward()
                    if self.reverse is not None and not self.forward.goal_attached:
                        self._expand_reverse()

            if self.reverse is not None and not self.forward.goal_attached:
                witness = self._meet_incremental()
                if witness is not None:
                    swapped = self._swap(witness)

            self._recompute_path()
            passages = self._move_agent(cfg.t_exp)

        self.sim_time += cfg.t_exp
        self.tick_index += 1

        cost_goal = (
            self.forward.effective_cost(self.forward.goal_id)
            if self.forward.goal_attached
            else math.inf
        )
        if self._final_path_length is None and math.isfinite(cost_goal):
            self._final_path_length = cost_goal
        path_len = 0.0
        if self.current_path_positions:
            path_len = sum(
                euclidean(a, b)
                for a, b in zip(self.current_path_positions, self.current_path_positions[1:])
            )
        path_ok = self._path_collision_free() and (
            self.forward.goal_attached and self.current_path
            and self.current_path[-1] == self.forward.goal_id
        )
        nodes_r = len(self.reverse) if self.reverse is not None else 0
        tick_start = self.sim_time - cfg.t_exp
        for fraction, (px, py) in passages:
            # turns of the walked polyline, so audits see the exact motion
            self.trajectory.append(
                (tick_start + fraction * cfg.t_exp, px, py, self.phase,
                 cost_goal, len(self.forward), nodes_r)
            )
        self.trajectory.append(
            (self.sim_time, self.agent[0], self.agent[1], self.phase,
             cost_goal, len(self.forward), nodes_r)
        )
        return TickReport(
            tick=self.tick_index,
            sim_time=self.sim_time,
            phase=self.phase,
            agent=self.agent,
            cost_goal=cost_goal,
            planned_path_length=path_len,
            path_ok=bool(path_ok),
            nodes_f=len(self.forward),
            nodes_r=len(self.reverse) if self.reverse is not None else 0,
            swapped=swapped,
            expansions=self.counters["expansions"] - expansions_before,
        )

    # -- telemetry -------------------------------------------------------------

    def trajectory_log(self):
        """Line format: t x y phase cost_goal nodes_f nodes_r."""
        lines = []
        for t, x, y, phase, cost, nf, nr in self.trajectory:
            c = "inf" if math.isinf(cost) else f"{cost:.6f}"
            lines.append(f"{t:.6f} {x:.6f} {y:.6f} {phase} {c} {nf} {nr}")
        return "\n".join(lines) + ("\n" if lines else "")

    @property
    def final_path_length(self):
        """Planned root-to-goal length when the goal first attached."""
        return self._final_path_length
