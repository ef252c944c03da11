import random

import numpy as np
import pytest

from biamrrt.world import WorldMap


@pytest.fixture
def rng():
    return random.Random(20240613)


def make_map(rows, cell=1.0, start=None, goal=None):
    """Build a WorldMap from drawing rows (top row first), '#' = occupied."""
    n_rows = len(rows)
    width = len(rows[0])
    occ = np.zeros((n_rows, width), dtype=bool)
    for r, row in enumerate(rows):
        assert len(row) == width
        for c, glyph in enumerate(row):
            if glyph == "#":
                occ[n_rows - 1 - r, c] = True
    return WorldMap(occ, cell, start=start, goal=goal)


def random_map(rng, n_cols, n_rows, occupancy=0.25, cell=1.0):
    occ = np.zeros((n_rows, n_cols), dtype=bool)
    for iy in range(n_rows):
        for ix in range(n_cols):
            if rng.random() < occupancy:
                occ[iy, ix] = True
    return WorldMap(occ, cell)
