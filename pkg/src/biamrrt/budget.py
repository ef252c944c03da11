"""Time budgets for the real-time loops.

Wall-clock budgets mirror deployment behavior; operation-count budgets make
runs reproducible bit-for-bit (each queue-element scan costs one unit).
"""

import time


class WallClockBudget:
    def __init__(self, seconds):
        self.seconds = seconds
        self.start = time.perf_counter()

    def take(self):
        """Permission for one more inner iteration."""
        return time.perf_counter() - self.start < self.seconds

    @property
    def elapsed(self):
        return time.perf_counter() - self.start


class OpBudget:
    def __init__(self, ops):
        self.remaining = int(ops)

    def take(self):
        if self.remaining <= 0:
            return False
        self.remaining -= 1
        return True
