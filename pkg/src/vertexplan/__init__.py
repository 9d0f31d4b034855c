"""Sampling-based path planning with vertex-guided non-uniform sampling.

Provides RRT* and its guided variants, an A* oracle with turning-point
extraction, guidance-map construction/masking/sampling, a procedural map
generator, dataset export, and a benchmark harness.
"""

__version__ = "0.1.0"
