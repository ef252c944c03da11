"""Occupancy-grid world model with runtime disc obstacles and scenario files.

A map is a rectangle [0, width] x [0, height] in meters, discretized into
square cells. Static geometry is a boolean grid; dynamic obstacles are discs
that can be added or removed at any time. Every mutation bumps a revision
counter so readers can detect change.

Conventions: a point (x, y) falls in cell (floor(x/cell), floor(y/cell)),
clamped at the far edges. The first text row of a scenario document is the
top of the map (largest y).
"""

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .collision import point_obstructed, segment_blocked
from .errors import MapParseError, NoFreeSpaceError, ObstacleError, OutOfBoundsError

MAP_MAGIC = "biam-map v1"
_GLYPHS = {".", "#", "S", "G"}

Point = tuple


@dataclass
class DiscObstacle:
    """Dynamic solid disc; blocks every point strictly inside its radius."""

    id: str
    center: Point
    radius: float


_EMPTY = np.zeros(0, dtype=np.float64)


class WorldMap:
    """Static occupancy grid plus a mutable set of disc obstacles."""

    def __init__(self, static_cells, cell_size_m=1.0, start=None, goal=None):
        occ = np.ascontiguousarray(np.asarray(static_cells, dtype=bool))
        if occ.ndim != 2 or occ.shape[0] < 1 or occ.shape[1] < 1:
            raise MapParseError("static grid must be a non-empty 2-D array")
        if cell_size_m <= 0:
            raise MapParseError("cell size must be positive")
        self.static_cells = occ
        self.cell_size_m = float(cell_size_m)
        self.n_rows, self.n_cols = occ.shape
        self.width_m = self.n_cols * self.cell_size_m
        self.height_m = self.n_rows * self.cell_size_m
        self.start = start
        self.goal = goal
        self.dynamic_obstacles = []
        self.revision = 0
        self._next_obstacle = 1
        self._changes = []  # (revision, cx, cy, r) per add/remove
        self._disc_cx = _EMPTY
        self._disc_cy = _EMPTY
        self._disc_cr = _EMPTY
        self._occ_u8 = np.ascontiguousarray(occ.astype(np.uint8))

    # -- geometry queries ---------------------------------------------------

    def in_bounds(self, p):
        return 0.0 <= p[0] <= self.width_m and 0.0 <= p[1] <= self.height_m

    def _check_bounds(self, p):
        if not self.in_bounds(p):
            raise OutOfBoundsError(f"point {p} outside {self.width_m}x{self.height_m} map")

    def cell_index(self, p):
        """Containing cell (ix, iy), clamped at the far boundary."""
        ix = min(int(p[0] / self.cell_size_m), self.n_cols - 1)
        iy = min(int(p[1] / self.cell_size_m), self.n_rows - 1)
        return max(ix, 0), max(iy, 0)

    def is_free(self, p):
        x, y = p[0], p[1]
        if not (0.0 <= x <= self.width_m and 0.0 <= y <= self.height_m):
            raise OutOfBoundsError(f"point {p} outside {self.width_m}x{self.height_m} map")
        return not point_obstructed(
            self._occ_u8, self.n_cols, self.n_rows, self.cell_size_m,
            self._disc_cx, self._disc_cy, self._disc_cr, x, y,
        )

    def segment_free(self, a, b):
        """True iff every point of segment ab is free at the current revision."""
        ax, ay, bx, by = a[0], a[1], b[0], b[1]
        w, h = self.width_m, self.height_m
        if not (0.0 <= ax <= w and 0.0 <= ay <= h):
            raise OutOfBoundsError(f"point {a} outside {w}x{h} map")
        if not (0.0 <= bx <= w and 0.0 <= by <= h):
            raise OutOfBoundsError(f"point {b} outside {w}x{h} map")
        return not segment_blocked(
            self._occ_u8, self.n_cols, self.n_rows, self.cell_size_m,
            self._disc_cx, self._disc_cy, self._disc_cr, ax, ay, bx, by,
        )

    # -- dynamic obstacles --------------------------------------------------

    def _rebuild_disc_arrays(self):
        n = len(self.dynamic_obstacles)
        if n == 0:
            self._disc_cx = self._disc_cy = self._disc_cr = _EMPTY
            return
        self._disc_cx = np.array([o.center[0] for o in self.dynamic_obstacles])
        self._disc_cy = np.array([o.center[1] for o in self.dynamic_obstacles])
        self._disc_cr = np.array([o.radius for o in self.dynamic_obstacles])

    def add_obstacle(self, center, radius, obstacle_id=None):
        """Add a disc; returns the created DiscObstacle. Bumps revision by one."""
        if radius <= 0:
            raise ObstacleError(f"radius must be positive, got {radius}")
        self._check_bounds(center)
        if obstacle_id is None:
            obstacle_id = f"obs-{self._next_obstacle}"
            self._next_obstacle += 1
        elif any(o.id == obstacle_id for o in self.dynamic_obstacles):
            raise ObstacleError(f"duplicate obstacle id {obstacle_id!r}")
        obs = DiscObstacle(obstacle_id, (float(center[0]), float(center[1])), float(radius))
        self.dynamic_obstacles.append(obs)
        self._rebuild_disc_arrays()
        self.revision += 1
        self._changes.append((self.revision, obs.center[0], obs.center[1], obs.radius))
        return obs

    def remove_obstacle(self, obstacle_id):
        """Remove a disc by id; returns the new revision."""
        for i, o in enumerate(self.dynamic_obstacles):
            if o.id == obstacle_id:
                del self.dynamic_obstacles[i]
                self._rebuild_disc_arrays()
                self.revision += 1
                self._changes.append((self.revision, o.center[0], o.center[1], o.radius))
                return self.revision
        raise ObstacleError(f"unknown obstacle id {obstacle_id!r}")

    def changes_since(self, revision):
        """Affected (cx, cy, r) regions of every mutation after `revision`."""
        return [(cx, cy, r) for rev, cx, cy, r in self._changes if rev > revision]

    # -- sampling -----------------------------------------------------------

    def sample_free(self, rng, max_attempts=100_000):
        """Uniform point of free space via rejection from the bounding box."""
        if not (~self.static_cells).any():
            raise NoFreeSpaceError("map has no free cells")
        for _ in range(max_attempts):
            x = rng.uniform(0.0, self.width_m)
            y = rng.uniform(0.0, self.height_m)
            if self.is_free((x, y)):
                return (x, y)
        raise NoFreeSpaceError("rejection sampling exhausted; free space unreachable")

    # -- identity -----------------------------------------------------------

    def content_hash(self):
        """Hash of the static geometry (grid bytes + cell size); dynamic discs excluded."""
        h = hashlib.sha256()
        h.update(f"{self.n_cols}x{self.n_rows}@{self.cell_size_m!r}".encode())
        h.update(self.static_cells.tobytes())
        return h.hexdigest()


# -- scenario documents -----------------------------------------------------


def load_map(document):
    """Parse an ASCII scenario document into a WorldMap.

    Format: line 1 `biam-map v1`, line 2 `cell <size>`, then H rows of W
    glyphs from {., #, S, G}; exactly one S and one G, both on free cells.
    """
    lines = document.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].strip() != MAP_MAGIC:
        raise MapParseError(f"missing magic header {MAP_MAGIC!r}", line=1)
    if len(lines) < 3:
        raise MapParseError("document too short: need header, cell line and rows", line=len(lines))
    parts = lines[1].split()
    if len(parts) != 2 or parts[0] != "cell":
        raise MapParseError("second line must be 'cell <size_m>'", line=2)
    try:
        cell = float(parts[1])
    except ValueError:
        raise MapParseError(f"bad cell size {parts[1]!r}", line=2) from None
    if cell <= 0 or not math.isfinite(cell):
        raise MapParseError(f"cell size must be positive, got {cell}", line=2)

    rows = lines[2:]
    width = len(rows[0])
    if width == 0:
        raise MapParseError("empty grid row", line=3)
    n_rows = len(rows)
    occ = np.zeros((n_rows, width), dtype=bool)
    start = goal = None
    for r, row in enumerate(rows):
        line_no = r + 3
        if len(row) != width:
            raise MapParseError(f"ragged row: expected {width} glyphs, got {len(row)}", line=line_no)
        iy = n_rows - 1 - r  # first text row is the top of the map
        for c, glyph in enumerate(row):
            if glyph not in _GLYPHS:
                raise MapParseError(f"unknown glyph {glyph!r}", line=line_no, column=c + 1)
            if glyph == "#":
                occ[iy, c] = True
            elif glyph == "S":
                if start is not None:
                    raise MapParseError("multiple S markers", line=line_no, column=c + 1)
                start = ((c + 0.5) * cell, (iy + 0.5) * cell)
            elif glyph == "G":
                if goal is not None:
                    raise MapParseError("multiple G markers", line=line_no, column=c + 1)
                goal = ((c + 0.5) * cell, (iy + 0.5) * cell)
    if start is None:
        raise MapParseError("document has no S marker")
    if goal is None:
        raise MapParseError("document has no G marker")
    return WorldMap(occ, cell, start=start, goal=goal)


def dump_map(world):
    """Serialize a WorldMap back to the scenario-document format."""
    six, siy = world.cell_index(world.start) if world.start else (None, None)
    gix, giy = world.cell_index(world.goal) if world.goal else (None, None)
    out = [MAP_MAGIC, f"cell {world.cell_size_m:g}"]
    for r in range(world.n_rows):
        iy = world.n_rows - 1 - r
        row = []
        for c in range(world.n_cols):
            if world.static_cells[iy, c]:
                row.append("#")
            elif (c, iy) == (six, siy):
                row.append("S")
            elif (c, iy) == (gix, giy):
                row.append("G")
            else:
                row.append(".")
        out.append("".join(row))
    return "\n".join(out) + "\n"


BUILTIN_SCENARIOS = ("bug_trap", "maze", "office")


def builtin_scenario(name):
    """Load one of the bundled scenario documents (bug_trap, maze, office)."""
    if name not in BUILTIN_SCENARIOS:
        raise MapParseError(f"unknown scenario {name!r}; choose from {BUILTIN_SCENARIOS}")
    from importlib.resources import files

    text = files("biamrrt.scenarios").joinpath(f"{name}.map").read_text(encoding="utf-8")
    return load_map(text)
