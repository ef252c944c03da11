#!/usr/bin/env python3
"""Regenerate the bundled scenario documents (bug_trap, maze, office).

The wall layouts are drawn procedurally here once and committed as ASCII
documents under src/biamrrt/scenarios/. Run from the repository root:

    python scripts/gen_scenarios.py
"""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from biamrrt.world import WorldMap, dump_map, load_map  # noqa: E402

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "biamrrt" / "scenarios"


def rect(occ, x0, x1, y0, y1, value=True):
    """Fill cells with x in [x0, x1] and y in [y0, y1] (inclusive, cell units)."""
    occ[y0 : y1 + 1, x0 : x1 + 1] = value


def bug_trap():
    occ = np.zeros((100, 100), dtype=bool)
    # Cup around the start, opening downward through a mouth at the bottom.
    rect(occ, 30, 70, 40, 41)   # top wall
    rect(occ, 30, 31, 12, 41)   # left wall
    rect(occ, 69, 70, 12, 41)   # right wall
    rect(occ, 30, 44, 12, 13)   # bottom lip, left of mouth
    rect(occ, 56, 70, 12, 13)   # bottom lip, right of mouth
    return WorldMap(occ, 1.0, start=(50.5, 25.5), goal=(50.5, 80.5))


def maze():
    occ = np.zeros((100, 100), dtype=bool)
    # Serpentine: three long walls with alternating gaps.
    rect(occ, 0, 74, 25, 26)
    rect(occ, 25, 99, 50, 51)
    rect(occ, 0, 74, 75, 76)
    return WorldMap(occ, 1.0, start=(12.5, 8.5), goal=(12.5, 92.5))


def office():
    occ = np.zeros((200, 200), dtype=bool)
    vwalls = (48, 98, 148)
    hwalls = (48, 98, 148)
    for x in vwalls:
        rect(occ, x, x + 1, 0, 199)
    for y in hwalls:
        rect(occ, 0, 199, y, y + 1)
    # Doors: one opening per room-to-room boundary, offset so the S-G
    # diagonal stays blocked at every wall crossing.
    vdoors = {48: (10, 60, 110, 160), 98: (30, 80, 130, 180), 148: (10, 60, 110, 160)}
    hdoors = {48: (30, 80, 130, 180), 98: (10, 60, 110, 160), 148: (30, 80, 130, 180)}
    for x, ys in vdoors.items():
        for y in ys:
            rect(occ, x, x + 1, y, y + 11, value=False)
    for y, xs in hdoors.items():
        for x in xs:
            rect(occ, x, x + 11, y, y + 1, value=False)
    return WorldMap(occ, 1.0, start=(24.5, 24.5), goal=(176.5, 176.5))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, build in (("bug_trap", bug_trap), ("maze", maze), ("office", office)):
        world = build()
        assert world.is_free(world.start), name
        assert world.is_free(world.goal), name
        assert not world.segment_free(world.start, world.goal), f"{name}: S-G line must be blocked"
        text = dump_map(world)
        reloaded = load_map(text)
        assert (reloaded.static_cells == world.static_cells).all()
        (OUT / f"{name}.map").write_text(text, encoding="utf-8")
        print(f"{name}: {world.width_m:g}x{world.height_m:g} m, "
              f"{int(world.static_cells.sum())} occupied cells")


if __name__ == "__main__":
    main()
