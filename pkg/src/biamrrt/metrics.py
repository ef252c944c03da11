"""Assisting metrics over a world: Euclidean, diffusion, geodesic.

The diffusion and geodesic metrics operate on a coarse grid graph built from
the map's static geometry only; dynamic discs are handled by the planner's
collision checks, never by metric rebuilds. Both payloads can be serialized
to a cache sidecar keyed by the map's content hash.
"""

import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path

from .errors import MetricBuildError, MetricCacheError, MetricMappingError

CACHE_MAGIC = "biam-metrics v1"

# Dense eigendecomposition below this node count, ARPACK above.
_DENSE_EIG_LIMIT = 400
_EIG_TOL = 1e-10
_EIG_MAXITER = 10_000


def euclidean(a, b):
    """Straight-line distance, the cost metric everywhere in the planner."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


class GridGraph:
    """8-connected graph over free coarse cells of a map's static grid.

    A coarse cell is free iff every fine cell it covers is free; diagonal
    edges exist only when both adjacent orthogonal cells are free, so paths
    cannot cut corners.
    """

    def __init__(self, world, metric_resolution_m):
        ratio = metric_resolution_m / world.cell_size_m
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise MetricBuildError(
                f"resolution {metric_resolution_m} must be an integer multiple "
                f"of cell size {world.cell_size_m}"
            )
        ratio = int(round(ratio))
        self.resolution_m = float(metric_resolution_m)
        self.source_revision = world.revision
        self.map_hash = world.content_hash()

        fine = world.static_cells
        gy = fine.shape[0] // ratio
        gx = fine.shape[1] // ratio
        if gy < 1 or gx < 1:
            raise MetricBuildError("resolution larger than the map")
        trimmed = fine[: gy * ratio, : gx * ratio]
        coarse_free = ~trimmed.reshape(gy, ratio, gx, ratio).any(axis=(1, 3))
        self.shape = (gx, gy)
        self.free = coarse_free  # [iy, ix]

        self.node_id = np.full((gy, gx), -1, dtype=np.int64)
        ys, xs = np.nonzero(coarse_free)
        self.node_id[ys, xs] = np.arange(len(xs))
        self.node_cells = np.stack([xs, ys], axis=1)  # node -> (ix, iy)
        self.n_nodes = len(xs)

        rows, cols, weights = [], [], []
        orth = self.resolution_m
        diag = math.sqrt(2.0) * self.resolution_m
        for i in range(self.n_nodes):
            ix, iy = self.node_cells[i]
            for dx, dy in ((1, 0), (0, 1)):
                jx, jy = ix + dx, iy + dy
                if jx < gx and jy < gy and coarse_free[jy, jx]:
                    rows.append(i)
                    cols.append(self.node_id[jy, jx])
                    weights.append(orth)
            for dx, dy in ((1, 1), (1, -1)):
                jx, jy = ix + dx, iy + dy
                if 0 <= jy < gy and jx < gx and coarse_free[jy, jx]:
                    # no corner cutting: both orthogonal steps must be free
                    if coarse_free[iy, jx] and coarse_free[jy, ix]:
                        rows.append(i)
                        cols.append(self.node_id[jy, jx])
                        weights.append(diag)
        rows = np.array(rows, dtype=np.int64)
        cols = np.array(cols, dtype=np.int64)
        weights = np.array(weights)
        self.adjacency = sp.coo_matrix(
            (np.concatenate([weights, weights]),
             (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
            shape=(self.n_nodes, self.n_nodes),
        ).tocsr()
        self.n_edges = len(rows)

    def cell_of(self, p):
        """Node id of the free coarse cell containing p, falling back to the
        nearest free cell within one resolution step."""
        res = self.resolution_m
        gx, gy = self.shape
        ix = min(max(int(p[0] / res), 0), gx - 1)
        iy = min(max(int(p[1] / res), 0), gy - 1)
        if self.free[iy, ix]:
            return int(self.node_id[iy, ix])
        best = -1
        best_d = math.inf
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                jx, jy = ix + dx, iy + dy
                if 0 <= jx < gx and 0 <= jy < gy and self.free[jy, jx]:
                    cx = (jx + 0.5) * res
                    cy = (jy + 0.5) * res
                    d = (cx - p[0]) ** 2 + (cy - p[1]) ** 2
                    if d < best_d:
                        best_d = d
                        best = int(self.node_id[jy, jx])
        if best < 0:
            raise MetricMappingError(f"no free grid cell within one step of {p}")
        return best

    def node_center(self, node):
        ix, iy = self.node_cells[node]
        return ((ix + 0.5) * self.resolution_m, (iy + 0.5) * self.resolution_m)


@dataclass
class DiffusionEmbedding:
    """Per-node diffusion coordinates: component i is lambda_i^t * psi_i."""

    coords: np.ndarray
    k: int
    t: int
    source_revision: int
    map_hash: str


@dataclass
class GeodesicTable:
    """Symmetric node-by-node shortest-path lengths; +inf when unreachable."""

    dist: np.ndarray
    source_revision: int
    map_hash: str


def _sign_fix(vecs):
    for i in range(vecs.shape[1]):
        j = np.argmax(np.abs(vecs[:, i]))
        if vecs[j, i] < 0:
            vecs[:, i] = -vecs[:, i]
    return vecs


def build_diffusion_embedding(graph, k=20, t=2):
    """Spectral embedding of the grid graph's unweighted adjacency.

    Affinity is 1 for adjacent nodes; the degree-normalized Markov operator
    is symmetrized for the eigensolve and the k leading nontrivial pairs give
    the coordinates. Deterministic for a fixed graph, k and t (fixed start
    vector, per-component sign pinned to the largest-magnitude entry).
    """
    n = graph.n_nodes
    if k >= n:
        raise MetricBuildError(f"k={k} must be smaller than the node count {n}")
    if k < 2 or t < 1:
        raise MetricBuildError("need k >= 2 and t >= 1")
    W = (graph.adjacency > 0).astype(float)
    deg = np.asarray(W.sum(axis=1)).ravel()
    if (deg == 0).any():
        # isolated free cells carry a self-loop so the operator stays defined
        W = W + sp.diags((deg == 0).astype(float))
        deg = np.asarray(W.sum(axis=1)).ravel()
    d_inv_sqrt = 1.0 / np.sqrt(deg)
    S = sp.diags(d_inv_sqrt) @ W @ sp.diags(d_inv_sqrt)

    if n <= _DENSE_EIG_LIMIT:
        vals, vecs = np.linalg.eigh(S.toarray())
        order = np.argsort(vals)[::-1][: k + 1]
        vals = vals[order]
        vecs = vecs[:, order]
    else:
        from scipy.sparse.linalg import ArpackNoConvergence, eigsh

        v0 = np.full(n, 1.0 / math.sqrt(n))
        try:
            vals, vecs = eigsh(S, k=k + 1, which="LA", v0=v0, tol=_EIG_TOL, maxiter=_EIG_MAXITER)
        except ArpackNoConvergence as exc:
            raise MetricBuildError(f"eigensolver did not converge: {exc}") from exc
        order = np.argsort(vals)[::-1]
        vals = vals[order]
        vecs = vecs[:, order]

    psi = d_inv_sqrt[:, None] * vecs
    psi = _sign_fix(psi)
    coords = psi[:, 1 : k + 1] * (vals[1 : k + 1] ** t)[None, :]
    if not np.isfinite(coords).all():
        raise MetricBuildError("embedding produced non-finite coordinates")
    return DiffusionEmbedding(
        coords=np.ascontiguousarray(coords),
        k=k,
        t=t,
        source_revision=graph.source_revision,
        map_hash=graph.map_hash,
    )


def diffusion_distance(emb, graph, a, b):
    ca = graph.cell_of(a)
    cb = graph.cell_of(b)
    if ca == cb:
        return 0.0
    return float(np.linalg.norm(emb.coords[ca] - emb.coords[cb]))


def build_geodesic_table(graph):
    """All-pairs shortest-path lengths over the grid graph."""
    dist = shortest_path(graph.adjacency, method="D", directed=False)
    return GeodesicTable(dist=dist, source_revision=graph.source_revision, map_hash=graph.map_hash)


def geodesic_distance(table, graph, a, b):
    ca = graph.cell_of(a)
    cb = graph.cell_of(b)
    return float(table.dist[ca, cb])


class AssistingMetric:
    """Tagged distance provider: euclidean, diffusion, or geodesic.

    Distances guide tree growth and rewiring order; they never replace the
    Euclidean cost that defines path lengths.
    """

    def __init__(self, kind, graph=None, payload=None, prep_time_s=0.0):
        if kind not in ("euclidean", "diffusion", "geodesic"):
            raise MetricBuildError(f"unknown metric kind {kind!r}")
        if kind != "euclidean" and (graph is None or payload is None):
            raise MetricBuildError(f"{kind} metric needs a graph and payload")
        self.kind = kind
        self.graph = graph
        self.payload = payload
        self.prep_time_s = prep_time_s

    @property
    def source_revision(self):
        return None if self.kind == "euclidean" else self.payload.source_revision

    def distance(self, a, b):
        """d_A(a, b); raises MetricMappingError for unmappable points."""
        if self.kind == "euclidean":
            return euclidean(a, b)
        if self.kind == "diffusion":
            return diffusion_distance(self.payload, self.graph, a, b)
        return geodesic_distance(self.payload, self.graph, a, b)

    def distance_or_inf(self, a, b):
        """d_A for ranking: unmappable points rank worse than everything."""
        try:
            return self.distance(a, b)
        except MetricMappingError:
            return math.inf


def default_resolution(world):
    """2 m for 100 m maps, 4 m for larger ones; keeps tables desk-scale."""
    return 2.0 if max(world.width_m, world.height_m) <= 100.0 else 4.0


def build_metric(world, kind, resolution_m=None, k=20, t=2):
    """Build an AssistingMetric from static geometry, timing the preparation."""
    if kind == "euclidean":
        return AssistingMetric("euclidean")
    if resolution_m is None:
        resolution_m = default_resolution(world)
    t0 = time.perf_counter()
    graph = GridGraph(world, resolution_m)
    if kind == "diffusion":
        payload = build_diffusion_embedding(graph, k=k, t=t)
    elif kind == "geodesic":
        payload = build_geodesic_table(graph)
    else:
        raise MetricBuildError(f"unknown metric kind {kind!r}")
    return AssistingMetric(kind, graph, payload, prep_time_s=time.perf_counter() - t0)


# -- cache sidecars ----------------------------------------------------------


def save_metric_cache(path, metric):
    """Write a diffusion/geodesic payload to a versioned .npz sidecar."""
    if metric.kind == "euclidean":
        raise MetricCacheError("euclidean metric has no payload to cache")
    payload = metric.payload
    meta = dict(
        magic=CACHE_MAGIC,
        kind=metric.kind,
        map_hash=payload.map_hash,
        resolution=metric.graph.resolution_m,
        source_revision=payload.source_revision,
    )
    if metric.kind == "diffusion":
        np.savez_compressed(
            path, coords=payload.coords, k=payload.k, t=payload.t, **meta
        )
    else:
        np.savez_compressed(path, dist=payload.dist, **meta)


def load_metric_cache(path, world, resolution_m=None):
    """Load a cached metric for this world; MetricCacheError on any mismatch."""
    if resolution_m is None:
        resolution_m = default_resolution(world)
    try:
        data = np.load(path, allow_pickle=False)
    except OSError as exc:
        raise MetricCacheError(f"cannot read cache {path}: {exc}") from exc
    if str(data.get("magic")) != CACHE_MAGIC:
        raise MetricCacheError(f"{path} is not a {CACHE_MAGIC} file")
    if str(data["map_hash"]) != world.content_hash():
        raise MetricCacheError(f"{path} was built for a different map")
    if abs(float(data["resolution"]) - resolution_m) > 1e-9:
        raise MetricCacheError(
            f"{path} resolution {float(data['resolution'])} != requested {resolution_m}"
        )
    t0 = time.perf_counter()
    graph = GridGraph(world, resolution_m)
    kind = str(data["kind"])
    rev = int(data["source_revision"])
    if kind == "diffusion":
        payload = DiffusionEmbedding(
            coords=data["coords"],
            k=int(data["k"]),
            t=int(data["t"]),
            source_revision=rev,
            map_hash=str(data["map_hash"]),
        )
    elif kind == "geodesic":
        payload = GeodesicTable(dist=data["dist"], source_revision=rev, map_hash=str(data["map_hash"]))
    else:
        raise MetricCacheError(f"unknown cached kind {kind!r}")
    return AssistingMetric(kind, graph, payload, prep_time_s=time.perf_counter() - t0)
