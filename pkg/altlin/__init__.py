"""
Alternating linearization methods for minimizing the sum of two convex functions

This package provides the splitting solvers, Nesterov smoothing tools,
problem generators and the benchmark harness that checks their
convergence behaviour.
"""

__version__ = "1.0.0"
