"""TTC-penalized double-quintic lane-change and overtaking planner."""

__version__ = "0.1.0"
