"""Exception types shared across the planner stack."""


class BiamError(Exception):
    """Base class for all errors raised by this package."""


class MapParseError(BiamError):
    """Scenario document is malformed; message carries line/column."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class OutOfBoundsError(BiamError):
    """A query point lies outside the map rectangle."""


class NoFreeSpaceError(BiamError):
    """The map has no free space to sample from."""


class ObstacleError(BiamError):
    """Bad dynamic-obstacle mutation (unknown id, non-positive radius, out of bounds)."""


class MetricError(BiamError):
    """Base for assisting-metric failures."""


class MetricBuildError(MetricError):
    """Eigen-solver failure or invalid build parameters."""


class MetricMappingError(MetricError):
    """A point could not be mapped to a free grid cell."""


class MetricCacheError(MetricError):
    """Cache sidecar is missing, corrupt, or keyed to a different map."""


class TreeError(BiamError):
    """Structural tree violation (unknown node, cycle attempt, blocked edge)."""


class PlannerError(BiamError):
    """Planner misuse (occupied goal, missing goal, bad configuration)."""


class SuiteError(BiamError):
    """Benchmark suite file or configuration problem."""
