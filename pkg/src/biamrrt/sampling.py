"""Sample distribution, informed rewire ellipse, and tree extension.

The sample distribution has three branches, first match wins:
goal point (p > 0.7 while the goal is not yet in the tree), uniform free
space (p < 0.5, or always while the goal is unfound), otherwise a uniform
point inside the rewire ellipse spanned by root, goal and the current best
path cost.
"""

import math
from dataclasses import dataclass

from .metrics import euclidean

_ELLIPSE_ATTEMPTS = 200


@dataclass
class SampleOutcome:
    kind: str           # goal | uniform | ellipse
    point: tuple
    fallback_uniform: bool = False  # ellipse branch degraded to uniform


@dataclass
class RewireEllipse:
    """Informed region: d(q, focus_a) + d(q, focus_b) <= c_best."""

    focus_a: tuple
    focus_b: tuple
    c_best: float

    def contains(self, q):
        return euclidean(q, self.focus_a) + euclidean(q, self.focus_b) <= self.c_best

    def bounding_box(self):
        cx = (self.focus_a[0] + self.focus_b[0]) / 2.0
        cy = (self.focus_a[1] + self.focus_b[1]) / 2.0
        c_min = euclidean(self.focus_a, self.focus_b)
        a = self.c_best / 2.0
        b = math.sqrt(max(self.c_best * self.c_best - c_min * c_min, 0.0)) / 2.0
        if c_min > 0:
            ux = (self.focus_b[0] - self.focus_a[0]) / c_min
            uy = (self.focus_b[1] - self.focus_a[1]) / c_min
        else:
            ux, uy = 1.0, 0.0
        hx = math.sqrt((a * ux) ** 2 + (b * uy) ** 2)
        hy = math.sqrt((a * uy) ** 2 + (b * ux) ** 2)
        return (cx - hx, cy - hy, cx + hx, cy + hy)


def current_ellipse(tree, goal):
    """Rewire ellipse for the current best root-to-goal cost, or None."""
    if not tree.goal_attached:
        return None
    c_best = tree.effective_cost(tree.goal_id)
    if not math.isfinite(c_best):
        return None
    root = tree.nodes[tree.root_id].position
    return RewireEllipse(root, goal, c_best)


def _sample_ellipse(ellipse, world, rng):
    x0, y0, x1, y1 = ellipse.bounding_box()
    x0 = max(x0, 0.0)
    y0 = max(y0, 0.0)
    x1 = min(x1, world.width_m)
    y1 = min(y1, world.height_m)
    if x1 <= x0 or y1 <= y0:
        return None
    for _ in range(_ELLIPSE_ATTEMPTS):
        q = (rng.uniform(x0, x1), rng.uniform(y0, y1))
        if ellipse.contains(q) and world.is_free(q):
            return q
    return None


def sample_state(tree, goal, rng, world):
    """Draw one sample from the goal / uniform / ellipse distribution."""
    p = rng.random()
    goal_found = tree.goal_attached
    if p > 0.7 and not goal_found:
        return SampleOutcome("goal", goal)
    if p < 0.5 or not goal_found:
        return SampleOutcome("uniform", world.sample_free(rng))
    ellipse = current_ellipse(tree, goal)
    if ellipse is None:
        return SampleOutcome("uniform", world.sample_free(rng), fallback_uniform=True)
    q = _sample_ellipse(ellipse, world, rng)
    if q is None:
        return SampleOutcome("uniform", world.sample_free(rng), fallback_uniform=True)
    return SampleOutcome("ellipse", q)


def steer(from_p, to_p, e_max):
    """to_p if within e_max of from_p, else the point e_max along the ray."""
    d = euclidean(from_p, to_p)
    if d <= e_max:
        return to_p
    f = e_max / d
    return (from_p[0] + f * (to_p[0] - from_p[0]), from_p[1] + f * (to_p[1] - from_p[1]))


INSERTED = "inserted"
REJECTED_DENSITY = "rejected_density"
REJECTED_BLOCKED = "rejected_blocked"


@dataclass
class ExtendResult:
    status: str
    node_id: int | None = None


def extend(tree, sample, world, config, queues, metric=None, goal=None):
    """Grow the tree toward a sample, honoring the density cap.

    Goal-directed samples start from the node with the smallest assisting
    distance to the goal, which is what routes growth around traps when the
    metric is topology-aware; with the Euclidean metric this reduces to
    classic goal bias. Saturated neighborhoods are not densified: the near
    node is queued for root rewiring instead.
    """
    if sample.kind == "goal" and metric is not None and goal is not None:
        near_id = tree_best_toward(tree, metric, goal)
    else:
        near_id = tree.nearest(sample.point, world=world)
    if near_id is None:
        return ExtendResult(REJECTED_BLOCKED)

    near = tree.nodes[near_id]
    x_new = steer(near.position, sample.point, config.e_max)
    if not world.in_bounds(x_new) or not world.is_free(x_new):
        return ExtendResult(REJECTED_BLOCKED)

    neighbors = tree.nearby(x_new, config.e_max)
    if len(neighbors) >= config.n_max:
        queues.enqueue_root(near_id)
        return ExtendResult(REJECTED_DENSITY)

    best_parent = None
    best_cost = math.inf
    for nid in neighbors:
        cand = tree.nodes[nid]
        c = tree.effective_cost(nid) + euclidean(cand.position, x_new)
        if c < best_cost and world.segment_free(cand.position, x_new):
            best_parent = nid
            best_cost = c
    if best_parent is None:
        return ExtendResult(REJECTED_BLOCKED)

    new_id = tree.insert_node(x_new, best_parent)
    queues.enqueue_root(new_id)
    if sample.kind == "goal" and x_new == tuple(sample.point):
        tree.goal_id = new_id
    if metric is not None and goal is not None:
        register_am_candidate(tree, metric, goal, new_id)
    return ExtendResult(INSERTED, new_id)


def tree_best_toward(tree, metric, goal):
    """Node minimizing d_A to the goal; tracked incrementally on insert."""
    cache = getattr(tree, "_am_cache", None)
    if cache is not None and cache[0] == goal and cache[1] in tree.nodes:
        return cache[1]
    best = None
    best_d = math.inf
    for nid, node in tree.nodes.items():
        d = metric.distance_or_inf(node.position, goal)
        if d < best_d:
            best_d = d
            best = nid
    if best is None:
        best = tree.root_id
        best_d = metric.distance_or_inf(tree.nodes[best].position, goal)
    tree._am_cache = (goal, best, best_d)
    return best


def register_am_candidate(tree, metric, goal, nid):
    """Keep the best-toward-goal cache fresh as nodes are inserted."""
    cache = getattr(tree, "_am_cache", None)
    d = metric.distance_or_inf(tree.nodes[nid].position, goal)
    if cache is None or cache[0] != goal or cache[1] not in tree.nodes:
        tree_best_toward(tree, metric, goal)
        cache = tree._am_cache
    if d < cache[2]:
        tree._am_cache = (goal, nid, d)
