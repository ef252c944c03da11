"""Time-budgeted root and goal rewiring, first and second stage.

Stage one is the classic neighborhood relaxation spreading as a wave from
the root (or along the root-goal corridor). Stage two pairs two consecutive
wave elements and re-searches for a cheaper attachment point near the
partner node, which shortcuts zig-zags left by tree growth and by
bidirectional grafts. The pairing only makes sense because a sweep dequeues
spatially adjacent nodes: queues dedup per sweep and are reset together
with their seen sets whenever they drain.

Published-pseudocode deviations, kept deliberately:

* The second-stage cost published for the root pass is
  c_new = Cost(x_r1) + d_E(x_r2, x_near) + d_E(x_r1, x_r2), which can never
  beat c_old = Cost(x_r1) because both added terms are positive. We use
  c_new = Cost(x_near) + d_E(x_near, x_r1), the cost the created edge
  actually realizes.
* Likewise for the goal pass: the published c_new routes through x_r1 while
  the edge update bypasses it; we use c_new = Cost(x_r2) + d_E(x_r2, x_near)
  to match the FreePath(x_near, x_r2) guard and the created edge.
* The published branch-discard test is ORed with len(S) > 1, which would
  clear the stack almost always; we apply the distance-domination test
  alone, guarded by len(S) > 1.

Every edge update is gated on a strict cost decrease, so no node's cost
ever increases across a rewiring call.
"""

import math

from .metrics import euclidean
from .sampling import current_ellipse


class RewireQueues:
    """Root FIFO plus goal FIFO/LIFO with one-visit-per-sweep dedup.

    A node enters a structure at most once per sweep; when a structure
    drains, the caller reseeds it with the current root and the seen set
    resets, starting the next sweep.
    """

    def __init__(self):
        self.q_root = []
        self._root_head = 0
        self._seen_root = set()
        self.q_goal = []
        self._goal_head = 0
        self.s_goal = []
        self._seen_goal = set()

    # root queue ---------------------------------------------------------

    def root_len(self):
        return len(self.q_root) - self._root_head

    def reset_root(self):
        self.q_root = []
        self._root_head = 0
        self._seen_root = set()

    def enqueue_root(self, nid):
        if nid not in self._seen_root:
            self._seen_root.add(nid)
            self.q_root.append(nid)

    def dequeue_root(self, tree):
        while self._root_head < len(self.q_root):
            nid = self.q_root[self._root_head]
            self._root_head += 1
            if nid in tree.nodes:
                return nid
        self.q_root = []
        self._root_head = 0
        return None

    # goal structures ------------------------------------------------------

    def goal_q_len(self):
        return len(self.q_goal) - self._goal_head

    def goal_s_len(self):
        return len(self.s_goal)

    def reset_goal(self):
        self.q_goal = []
        self._goal_head = 0
        self.s_goal = []
        self._seen_goal = set()

    def enqueue_goal(self, nid):
        if nid not in self._seen_goal:
            self._seen_goal.add(nid)
            self.q_goal.append(nid)

    def dequeue_goal(self, tree):
        while self._goal_head < len(self.q_goal):
            nid = self.q_goal[self._goal_head]
            self._goal_head += 1
            if nid in tree.nodes:
                return nid
        self.q_goal = []
        self._goal_head = 0
        return None

    def push_goal(self, nid):
        if nid not in self._seen_goal:
            self._seen_goal.add(nid)
            self.s_goal.append(nid)

    def push_and_enqueue_goal(self, nid):
        """Stage-two discovery: one seen mark, recorded in both structures."""
        if nid not in self._seen_goal:
            self._seen_goal.add(nid)
            self.s_goal.append(nid)
            self.q_goal.append(nid)

    def pop_goal(self, tree):
        while self.s_goal:
            nid = self.s_goal.pop()
            if nid in tree.nodes:
                return nid
        return None

    def second_goal(self):
        """Second item from the top of the goal stack, not removed."""
        return self.s_goal[-2] if len(self.s_goal) >= 2 else None

    def seen_goal(self, nid):
        return nid in self._seen_goal

    def clear_goal_stack(self):
        self.s_goal.clear()


def _relax_through(tree, world, x_id, near_id):
    """Reparent near under x when that strictly lowers near's cost."""
    nodes = tree.nodes
    x = nodes[x_id]
    if x.unreachable:
        return False
    near = nodes[near_id]
    c_near = math.inf if near.unreachable else near.cost_to_root
    xp = x.position
    np_ = near.position
    c_new = x.cost_to_root + math.hypot(xp[0] - np_[0], xp[1] - np_[1])
    if c_new < c_near and world.segment_free(xp, np_):
        tree.update_edge(x_id, near_id)
        return True
    return False


def rewire_root_first(tree, queues, world, config):
    """One stage-one step: relax the dequeued node's neighborhood.

    Improved neighbors re-enter the queue so a successful relaxation
    cascades outward; untouched neighbors do not, which keeps the queue
    short outside cascades (new nodes and the periodic root reseed provide
    the steady supply).
    """
    x_id = queues.dequeue_root(tree)
    if x_id is None:
        return
    nodes = tree.nodes
    x = nodes[x_id]
    xp = x.position
    if x.unreachable:
        return
    enqueue = queues.enqueue_root
    segment_free = world.segment_free
    for near_id in tree.nearby(xp, config.e_max):
        if near_id == x_id:
            continue
        near = nodes[near_id]
        np_ = near.position
        c_near = math.inf if near.unreachable else near.cost_to_root
        c_new = x.cost_to_root + math.hypot(xp[0] - np_[0], xp[1] - np_[1])
        if c_new < c_near and segment_free(xp, np_):
            tree.update_edge(x_id, near_id)
            enqueue(near_id)


def rewire_root_second(tree, queues, world, config):
    """One stage-two step: shortcut x_r1 via points near its cascade partner.

    The two dequeued ids come from the same improvement cascade, so x_r2's
    neighborhood reaches up to two edge lengths from x_r1; that is where the
    cheaper attachment point past a corner lives.
    """
    x_r1 = queues.dequeue_root(tree)
    x_r2 = queues.dequeue_root(tree)
    if x_r1 is None or x_r2 is None:
        return
    nodes = tree.nodes
    p1 = nodes[x_r1].position
    c_old = tree.effective_cost(x_r1)
    segment_free = world.segment_free
    improved = False
    for near_id in tree.nearby(nodes[x_r2].position, config.e_max):
        if near_id == x_r1:
            continue
        near = nodes[near_id]
        np_ = near.position
        if near.unreachable:
            continue
        # published: c_new = Cost(x_r1) + d_E(x_r2, x_near) + d_E(x_r1, x_r2)
        c_new = near.cost_to_root + math.hypot(np_[0] - p1[0], np_[1] - p1[1])
        if (
            c_new < c_old
            and segment_free(np_, p1)
            and not tree._in_subtree(near_id, x_r1)
        ):
            tree.update_edge(near_id, x_r1)
            c_old = tree.effective_cost(x_r1)
            improved = True
    if improved:
        queues.enqueue_root(x_r1)


def rewire_root(tree, queues, world, config, make_budget):
    """Root rewiring pass: reseed a drained sweep, then dispatch by queue length."""
    if queues.root_len() == 0:
        queues.reset_root()
        queues.enqueue_root(tree.root_id)
    budget = make_budget(config.t_root)
    while budget.take():
        n = queues.root_len()
        if n == 0:
            break
        if 0 < n <= 2 or not config.new_rewiring:
            rewire_root_first(tree, queues, world, config)
        else:
            rewire_root_second(tree, queues, world, config)


def rewire_goal_first(tree, queues, goal, world, config, metric):
    """One corridor step: relax around a node popped from the branch stack
    (falling back to the queue), routing improved neighbors toward the goal."""
    from_stack = queues.goal_s_len() > 0
    x_id = queues.pop_goal(tree) if from_stack else queues.dequeue_goal(tree)
    if x_id is None:
        return
    x = tree.nodes[x_id]
    d_x = metric.distance_or_inf(x.position, goal)
    for near_id in tree.nearby(x.position, config.e_max):
        if near_id == x_id:
            continue
        if _relax_through(tree, world, x_id, near_id):
            near = tree.nodes[near_id]
            if metric.distance_or_inf(near.position, goal) < d_x:
                queues.push_goal(near_id)
            else:
                queues.enqueue_goal(near_id)


def rewire_goal_second(tree, queues, goal, world, config, metric):
    """One stage-two step inside the rewire ellipse, with branch discard."""
    if queues.goal_s_len() > 2:
        x_r1 = queues.pop_goal(tree)
        x_r2 = queues.pop_goal(tree)
    else:
        x_r1 = queues.dequeue_goal(tree)
        x_r2 = queues.dequeue_goal(tree)
    if x_r1 is None or x_r2 is None:
        return
    ellipse = current_ellipse(tree, goal)
    p1 = tree.nodes[x_r1].position
    if ellipse is not None and ellipse.contains(p1):
        p2 = tree.nodes[x_r2].position
        c_r2 = tree.effective_cost(x_r2)
        for near_id in tree.nearby(p1, config.e_max):
            if near_id == x_r2:
                continue
            near = tree.nodes[near_id]
            if not world.segment_free(near.position, p2):
                continue
            # published: c_new = Cost(x_r2) + d_E(x_r1, x_near) + d_E(x_r1, x_r2)
            c_new = c_r2 + euclidean(p2, near.position)
            if c_new < tree.effective_cost(near_id) and not tree._in_subtree(x_r2, near_id):
                tree.update_edge(x_r2, near_id)
            queues.push_and_enqueue_goal(near_id)
    second = queues.second_goal()
    if second is not None and second in tree.nodes and queues.goal_s_len() > 1:
        # published guard: len(S) > 1 OR the domination test
        d_second = metric.distance_or_inf(tree.nodes[second].position, goal)
        d_r1 = metric.distance_or_inf(p1, goal)
        d_pair = metric.distance_or_inf(p1, tree.nodes[x_r2].position)
        if d_second > d_r1 + d_pair:
            queues.clear_goal_stack()


def rewire_goal(tree, queues, goal, world, config, metric, make_budget):
    """Goal rewiring pass: stage one for t_goal, then stage two until 2*t_goal."""
    if not tree.goal_attached:
        return
    if queues.goal_q_len() == 0 and queues.goal_s_len() == 0:
        queues.reset_goal()
        queues.push_goal(tree.root_id)
    budget = make_budget(config.t_goal)
    while budget.take():
        if queues.goal_q_len() == 0 and queues.goal_s_len() == 0:
            break
        rewire_goal_first(tree, queues, goal, world, config, metric)
    if not config.new_rewiring:
        return
    budget = make_budget(config.t_goal)
    while budget.take():
        if not (queues.goal_q_len() > 2 or queues.goal_s_len() > 2):
            break
        rewire_goal_second(tree, queues, goal, world, config, metric)
