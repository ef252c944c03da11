"""Low-level collision kernels against an occupancy grid plus disc obstacles.

The grid test is a conservative supercover traversal: every cell the segment
touches is tested, including all four cells around a crossed lattice corner.
Over-reporting a collision is acceptable for the planner; under-reporting is
not. Disc tests use the exact point-to-segment distance (distance >= radius
counts as free).

The hot kernels are JIT-compiled with numba when available; set the
environment variable BIAMRRT_NO_NUMBA=1 to force the pure-Python versions
(used in tests to pin equivalence).
"""

import math
import os

_CORNER_EPS = 1e-12


def _point_blocked_py(occ, n_cols, n_rows, cell, x, y):
    ix = int(x / cell)
    iy = int(y / cell)
    if ix >= n_cols:
        ix = n_cols - 1
    if iy >= n_rows:
        iy = n_rows - 1
    if ix < 0:
        ix = 0
    if iy < 0:
        iy = 0
    return occ[iy, ix]


def _segment_blocked_grid_py(occ, n_cols, n_rows, cell, x0, y0, x1, y1):
    """Supercover walk from (x0,y0) to (x1,y1); True if any touched cell is occupied."""
    ix = min(max(int(x0 / cell), 0), n_cols - 1)
    iy = min(max(int(y0 / cell), 0), n_rows - 1)
    ix1 = min(max(int(x1 / cell), 0), n_cols - 1)
    iy1 = min(max(int(y1 / cell), 0), n_rows - 1)
    if occ[iy, ix] or occ[iy1, ix1]:
        return True

    dx = x1 - x0
    dy = y1 - y0
    step_x = 1 if dx > 0 else (-1 if dx < 0 else 0)
    step_y = 1 if dy > 0 else (-1 if dy < 0 else 0)

    if dx != 0.0:
        nxt = (ix + 1) * cell if step_x > 0 else ix * cell
        t_max_x = (nxt - x0) / dx
        t_dlt_x = cell / abs(dx)
    else:
        t_max_x = math.inf
        t_dlt_x = math.inf
    if dy != 0.0:
        nxt = (iy + 1) * cell if step_y > 0 else iy * cell
        t_max_y = (nxt - y0) / dy
        t_dlt_y = cell / abs(dy)
    else:
        t_max_y = math.inf
        t_dlt_y = math.inf

    guard = n_cols + n_rows + 4
    while (ix != ix1 or iy != iy1) and guard > 0:
        guard -= 1
        if t_max_x < t_max_y - _CORNER_EPS:
            if t_max_x > 1.0:
                break
            ix += step_x
            t_max_x += t_dlt_x
        elif t_max_y < t_max_x - _CORNER_EPS:
            if t_max_y > 1.0:
                break
            iy += step_y
            t_max_y += t_dlt_y
        else:
            # Corner crossing: conservatively test both side cells.
            if t_max_x > 1.0:
                break
            jx = ix + step_x
            jy = iy + step_y
            if 0 <= jx < n_cols and occ[iy, jx]:
                return True
            if 0 <= jy < n_rows and occ[jy, ix]:
                return True
            ix = jx
            iy = jy
            t_max_x += t_dlt_x
            t_max_y += t_dlt_y
        if ix < 0 or ix >= n_cols or iy < 0 or iy >= n_rows:
            break
        if occ[iy, ix]:
            return True
    return False


def _segment_blocked_discs_py(cx, cy, cr, x0, y0, x1, y1):
    """True if the segment comes strictly closer than r to any disc center."""
    dx = x1 - x0
    dy = y1 - y0
    seg2 = dx * dx + dy * dy
    for i in range(len(cx)):
        px = cx[i] - x0
        py = cy[i] - y0
        if seg2 > 0.0:
            t = (px * dx + py * dy) / seg2
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
        else:
            t = 0.0
        ex = px - t * dx
        ey = py - t * dy
        if ex * ex + ey * ey < cr[i] * cr[i]:
            return True
    return False


def _point_in_discs_py(cx, cy, cr, x, y):
    for i in range(len(cx)):
        ex = cx[i] - x
        ey = cy[i] - y
        if ex * ex + ey * ey < cr[i] * cr[i]:
            return True
    return False


def _make_combined(seg_grid, seg_discs, pt_grid, pt_discs):
    def segment_blocked(occ, n_cols, n_rows, cell, cx, cy, cr, x0, y0, x1, y1):
        if seg_grid(occ, n_cols, n_rows, cell, x0, y0, x1, y1):
            return True
        if len(cx) and seg_discs(cx, cy, cr, x0, y0, x1, y1):
            return True
        return False

    def point_obstructed(occ, n_cols, n_rows, cell, cx, cy, cr, x, y):
        if pt_grid(occ, n_cols, n_rows, cell, x, y):
            return True
        if len(cx) and pt_discs(cx, cy, cr, x, y):
            return True
        return False

    return segment_blocked, point_obstructed


if os.environ.get("BIAMRRT_NO_NUMBA"):
    point_blocked = _point_blocked_py
    segment_blocked_grid = _segment_blocked_grid_py
    segment_blocked_discs = _segment_blocked_discs_py
    point_in_discs = _point_in_discs_py
    segment_blocked, point_obstructed = _make_combined(
        _segment_blocked_grid_py, _segment_blocked_discs_py, _point_blocked_py, _point_in_discs_py
    )
    USING_NUMBA = False
else:
    from numba import njit

    point_blocked = njit(cache=True)(_point_blocked_py)
    segment_blocked_grid = njit(cache=True)(_segment_blocked_grid_py)
    segment_blocked_discs = njit(cache=True)(_segment_blocked_discs_py)
    point_in_discs = njit(cache=True)(_point_in_discs_py)
    _seg_combined, _pt_combined = _make_combined(
        segment_blocked_grid, segment_blocked_discs, point_blocked, point_in_discs
    )
    segment_blocked = njit(cache=True)(_seg_combined)
    point_obstructed = njit(cache=True)(_pt_combined)
    USING_NUMBA = True
