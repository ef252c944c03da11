"""Real-time bidirectional RRT* motion planning with assisting metrics."""

__version__ = "0.1.0"
