"""Rooted search tree with costs, a grid-bucket spatial index and re-rooting.

Costs are Euclidean path lengths from the root and are kept eagerly
consistent: every structural change recomputes the affected subtree, so a
cost can be trusted at any time inside a millisecond-budget rewiring pass.

Edges can be marked blocked when a dynamic obstacle lands on them; blocked
subtrees keep their nodes (for reconnection by rewiring) but report an
infinite effective cost.
"""

import math
from dataclasses import dataclass, field

from .errors import TreeError
from .metrics import euclidean


@dataclass(slots=True)
class Node:
    id: int
    position: tuple
    parent: int | None
    children: set = field(default_factory=set)
    cost_to_root: float = 0.0
    edge_blocked: bool = False   # edge to parent crosses an obstacle
    unreachable: bool = False    # some edge on the root path is blocked


class Tree:
    """Single-rooted tree over 2-D points, owned by one planner session."""

    def __init__(self, root_position, bucket_size=5.0):
        self.nodes = {}
        self.bucket_size = float(bucket_size)
        self._buckets = {}
        self._bmin = (0, 0)
        self._bmax = (0, 0)
        self._next_id = 0
        self.root_id = self._new_node(root_position, parent=None)
        self.goal_id = None
        self.blocked_children = set()  # ids whose parent edge is blocked
        self.long_children = set()     # ids whose parent edge exceeds bucket_size

    # -- construction ---------------------------------------------------

    def _bucket(self, p):
        return (int(p[0] // self.bucket_size), int(p[1] // self.bucket_size))

    def _new_node(self, position, parent):
        nid = self._next_id
        self._next_id += 1
        node = Node(nid, (float(position[0]), float(position[1])), parent)
        self.nodes[nid] = node
        key = self._bucket(node.position)
        if nid == 0:
            self._bmin = self._bmax = key
        else:
            self._bmin = (min(self._bmin[0], key[0]), min(self._bmin[1], key[1]))
            self._bmax = (max(self._bmax[0], key[0]), max(self._bmax[1], key[1]))
        self._buckets.setdefault(key, []).append(nid)
        return nid

    def __len__(self):
        return len(self.nodes)

    def __contains__(self, nid):
        return nid in self.nodes

    def node(self, nid):
        try:
            return self.nodes[nid]
        except KeyError:
            raise TreeError(f"unknown node id {nid}") from None

    @property
    def goal_attached(self):
        return self.goal_id is not None and self.goal_id in self.nodes

    def insert_node(self, position, parent_id, world=None):
        """Insert a leaf under parent_id; the edge must be collision-free."""
        parent = self.node(parent_id)
        if world is not None and not world.segment_free(parent.position, position):
            raise TreeError(f"edge from {parent.position} to {tuple(position)} is blocked")
        nid = self._new_node(position, parent_id)
        node = self.nodes[nid]
        parent.children.add(nid)
        edge = euclidean(parent.position, node.position)
        node.cost_to_root = parent.cost_to_root + edge
        node.unreachable = parent.unreachable
        if edge > self.bucket_size:
            self.long_children.add(nid)
        return nid

    # -- queries ----------------------------------------------------------

    def nearest(self, p, world=None):
        """d_E-nearest node id, or None when the straight line to it is blocked."""
        if not self.nodes:
            return None
        best = self._nearest_unconditional(p)
        if best is None:
            return None
        if world is not None and not world.segment_free(self.nodes[best].position, p):
            return None
        return best

    def _nearest_unconditional(self, p):
        bx, by = self._bucket(p)
        # farthest ring that can hold any node at all
        max_ring = max(
            abs(self._bmin[0] - bx), abs(self._bmax[0] - bx),
            abs(self._bmin[1] - by), abs(self._bmax[1] - by),
        )
        best = None
        best_d = math.inf
        ring = 0
        while ring <= max_ring:
            # a node in ring r is at least (r-1)*bucket_size away, so once the
            # incumbent beats that bound no farther ring can win
            if best is not None and (ring - 1) * self.bucket_size > best_d:
                break
            for key in self._ring_keys(bx, by, ring):
                ids = self._buckets.get(key)
                if not ids:
                    continue
                for nid in ids:
                    d = euclidean(self.nodes[nid].position, p)
                    if d < best_d or (d == best_d and best is not None and nid < best):
                        best_d = d
                        best = nid
            ring += 1
        return best

    @staticmethod
    def _ring_keys(bx, by, ring):
        if ring == 0:
            yield (bx, by)
            return
        for dx in range(-ring, ring + 1):
            yield (bx + dx, by - ring)
            yield (bx + dx, by + ring)
        for dy in range(-ring + 1, ring):
            yield (bx - ring, by + dy)
            yield (bx + ring, by + dy)

    def nearby(self, p, radius):
        """Ids of all nodes with d_E <= radius (closed ball)."""
        px, py = p[0], p[1]
        bs = self.bucket_size
        nodes = self.nodes
        get_bucket = self._buckets.get
        out = []
        b0x = int((px - radius) // bs)
        b1x = int((px + radius) // bs)
        b0y = int((py - radius) // bs)
        b1y = int((py + radius) // bs)
        r2 = radius * radius
        for kx in range(b0x, b1x + 1):
            for ky in range(b0y, b1y + 1):
                ids = get_bucket((kx, ky))
                if not ids:
                    continue
                for nid in ids:
                    qx, qy = nodes[nid].position
                    dx = qx - px
                    dy = qy - py
                    if dx * dx + dy * dy <= r2:
                        out.append(nid)
        return out

    def cost_and_path(self, nid):
        """(Euclidean length, node-id sequence) of the root-to-nid path."""
        node = self.node(nid)
        path = [nid]
        while node.parent is not None:
            path.append(node.parent)
            node = self.nodes[node.parent]
        path.reverse()
        return self.nodes[nid].cost_to_root, path

    def effective_cost(self, nid):
        """cost_to_root, or +inf when a blocked edge cuts the node off."""
        node = self.nodes[nid]
        return math.inf if node.unreachable else node.cost_to_root

    # -- structural updates ----------------------------------------------

    def _in_subtree(self, nid, ancestor):
        cur = self.nodes[nid]
        steps = len(self.nodes)
        while cur.parent is not None and steps > 0:
            if cur.id == ancestor:
                return True
            cur = self.nodes[cur.parent]
            steps -= 1
        return cur.id == ancestor

    def update_edge(self, new_parent_id, child_id, world=None):
        """Reparent child_id under new_parent_id and refresh subtree costs."""
        new_parent = self.node(new_parent_id)
        child = self.node(child_id)
        if new_parent_id == child_id or self._in_subtree(new_parent_id, child_id):
            raise TreeError(f"reparenting {child_id} under {new_parent_id} would create a cycle")
        if world is not None and not world.segment_free(new_parent.position, child.position):
            raise TreeError("new edge is blocked")
        if child.parent is not None:
            self.nodes[child.parent].children.discard(child_id)
        child.parent = new_parent_id
        new_parent.children.add(child_id)
        if child.edge_blocked:
            child.edge_blocked = False
            self.blocked_children.discard(child_id)
        if euclidean(new_parent.position, child.position) > self.bucket_size:
            self.long_children.add(child_id)
        else:
            self.long_children.discard(child_id)
        self._refresh_subtree(child_id)

    def _refresh_subtree(self, start_id):
        """Recompute cost and reachability for start_id and its descendants."""
        stack = [start_id]
        while stack:
            nid = stack.pop()
            node = self.nodes[nid]
            if node.parent is None:
                node.cost_to_root = 0.0
                node.unreachable = node.edge_blocked = False
            else:
                parent = self.nodes[node.parent]
                node.cost_to_root = parent.cost_to_root + euclidean(parent.position, node.position)
                node.unreachable = parent.unreachable or node.edge_blocked
            stack.extend(node.children)

    def set_root(self, new_root_id):
        """Re-root at new_root_id, reversing parent links along the old path."""
        self.node(new_root_id)
        if new_root_id == self.root_id:
            return
        chain = [new_root_id]
        cur = self.nodes[new_root_id]
        while cur.parent is not None:
            chain.append(cur.parent)
            cur = self.nodes[cur.parent]
        flags = [self.nodes[c].edge_blocked for c in chain]  # blocked-ness per flipped edge
        for child_id, parent_id in zip(chain, chain[1:]):
            child = self.nodes[child_id]
            parent = self.nodes[parent_id]
            parent.children.discard(child_id)
            parent.parent = child_id
            child.children.add(parent_id)
        self.nodes[new_root_id].parent = None
        # a blocked (or long) edge keeps its flag whichever way it points
        self.nodes[chain[0]].edge_blocked = False
        for i in range(1, len(chain)):
            self.nodes[chain[i]].edge_blocked = flags[i - 1]
        self.root_id = new_root_id
        self.blocked_children = {nid for nid, n in self.nodes.items() if n.edge_blocked}
        for nid in chain:
            node = self.nodes[nid]
            if node.parent is None:
                self.long_children.discard(nid)
            elif euclidean(node.position, self.nodes[node.parent].position) > self.bucket_size:
                self.long_children.add(nid)
            else:
                self.long_children.discard(nid)
        self._refresh_subtree(new_root_id)

    def mark_edge_blocked(self, child_id, blocked):
        node = self.node(child_id)
        if node.parent is None or node.edge_blocked == blocked:
            return
        node.edge_blocked = blocked
        if blocked:
            self.blocked_children.add(child_id)
        else:
            self.blocked_children.discard(child_id)
        self._refresh_subtree(child_id)

    # -- export ------------------------------------------------------------

    def edges(self):
        """(parent_position, child_position) pairs for rendering/telemetry."""
        return [
            (self.nodes[n.parent].position, n.position)
            for n in self.nodes.values()
            if n.parent is not None
        ]

    def dump(self):
        """Line-oriented debug text: `id parent_id x y cost` (root parent -1)."""
        lines = []
        for nid in sorted(self.nodes):
            n = self.nodes[nid]
            parent = -1 if n.parent is None else n.parent
            lines.append(f"{nid} {parent} {n.position[0]:.6f} {n.position[1]:.6f} {n.cost_to_root:.6f}")
        return "\n".join(lines) + "\n"
