"""Grid A* over the fine occupancy grid, and the trajectory collision audit.

Both are reference tools, deliberately independent of the planner: A* gives
the near-optimality yardstick for benchmark paths, and the audit replays a
recorded trajectory against the obstacle timeline using point sampling plus
closest-approach checks rather than the planner's own segment traversal.
"""

import heapq
import math

import numpy as np

from .errors import PlannerError

_SQRT2 = math.sqrt(2.0)


def astar_shortest_path(world, start=None, goal=None):
    """Length in meters of the shortest 8-connected grid path (static geometry).

    Diagonal moves are allowed only when both adjacent orthogonal cells are
    free, matching the conservative collision rule. Returns +inf when no
    path exists.
    """
    start = start if start is not None else world.start
    goal = goal if goal is not None else world.goal
    if start is None or goal is None:
        raise PlannerError("astar needs start and goal")
    occ = world.static_cells
    n_rows, n_cols = occ.shape
    cell = world.cell_size_m
    sx, sy = world.cell_index(start)
    gx, gy = world.cell_index(goal)
    if occ[sy, sx] or occ[gy, gx]:
        return math.inf

    dist = np.full((n_rows, n_cols), np.inf)
    dist[sy, sx] = 0.0
    heap = [(_octile(sx, sy, gx, gy), 0.0, sx, sy)]
    while heap:
        _, d, x, y = heapq.heappop(heap)
        if (x, y) == (gx, gy):
            return d * cell
        if d > dist[y, x]:
            continue
        for dx, dy, w in (
            (1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
            (1, 1, _SQRT2), (1, -1, _SQRT2), (-1, 1, _SQRT2), (-1, -1, _SQRT2),
        ):
            nx, ny = x + dx, y + dy
            if not (0 <= nx < n_cols and 0 <= ny < n_rows) or occ[ny, nx]:
                continue
            if dx and dy and (occ[y, nx] or occ[ny, x]):
                continue  # no corner cutting
            nd = d + w
            if nd < dist[ny, nx]:
                dist[ny, nx] = nd
                heapq.heappush(heap, (nd + _octile(nx, ny, gx, gy), nd, nx, ny))
    return math.inf


def _octile(x, y, gx, gy):
    dx = abs(x - gx)
    dy = abs(y - gy)
    return (dx + dy) + (_SQRT2 - 2.0) * min(dx, dy)


class ObstacleTimeline:
    """Obstacle set as a function of time, for auditing recorded runs."""

    def __init__(self, static_world):
        self.world = static_world
        self.events = []  # (t, op, id, cx, cy, r); op in {add, remove}

    def record_add(self, t, obstacle):
        self.events.append((t, "add", obstacle.id, obstacle.center[0], obstacle.center[1], obstacle.radius))

    def record_remove(self, t, obstacle_id):
        self.events.append((t, "remove", obstacle_id, 0.0, 0.0, 0.0))

    def discs_at(self, t):
        active = {}
        for et, op, oid, cx, cy, r in self.events:
            if et > t:
                break
            if op == "add":
                active[oid] = (cx, cy, r)
            else:
                active.pop(oid, None)
        return list(active.values())


def audit_trajectory(trajectory, world, timeline=None, samples_per_cell=8):
    """Check every traversed segment against obstacles active at traversal time.

    trajectory rows are (t, x, y, phase, ...) as recorded by the planner.
    Returns a list of violation strings; empty means the run is clean.
    """
    occ = world.static_cells
    n_rows, n_cols = occ.shape
    cell = world.cell_size_m
    step = cell / samples_per_cell
    violations = []
    for row_a, row_b in zip(trajectory, trajectory[1:]):
        t0, ax, ay = row_a[0], row_a[1], row_a[2]
        t1, bx, by = row_b[0], row_b[1], row_b[2]
        discs = timeline.discs_at(t0) if timeline is not None else []
        length = math.hypot(bx - ax, by - ay)
        n = max(1, math.ceil(length / step))
        for i in range(n + 1):
            f = i / n
            x = ax + f * (bx - ax)
            y = ay + f * (by - ay)
            ix = min(max(int(x / cell), 0), n_cols - 1)
            iy = min(max(int(y / cell), 0), n_rows - 1)
            if occ[iy, ix]:
                violations.append(f"t={t0:.2f}: static cell ({ix},{iy}) at ({x:.2f},{y:.2f})")
                break
            hit = False
            for cx, cy, r in discs:
                if (x - cx) ** 2 + (y - cy) ** 2 < r * r:
                    violations.append(f"t={t0:.2f}: inside disc ({cx:.1f},{cy:.1f},r={r:.1f})")
                    hit = True
                    break
            if hit:
                break
        if length > 0:
            # closest approach per disc catches sub-step grazing
            for cx, cy, r in discs:
                f = ((cx - ax) * (bx - ax) + (cy - ay) * (by - ay)) / (length * length)
                f = min(max(f, 0.0), 1.0)
                x = ax + f * (bx - ax)
                y = ay + f * (by - ay)
                if (x - cx) ** 2 + (y - cy) ** 2 < r * r:
                    violations.append(f"t={t0:.2f}: grazed disc ({cx:.1f},{cy:.1f},r={r:.1f})")
                    break
    return violations
