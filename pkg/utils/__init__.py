"""
Utility modules for the forking-paths engine.

This package holds the engine version, the exception hierarchy and the
hashing / atomic file helpers used by the run manager and report writers.
"""

__version__ = "1.0.0"
