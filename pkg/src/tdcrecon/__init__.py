"""Manifold reconstruction from random samples.

Local-PCA tangent estimation, iterative slab denoising, farthest-point
sparsification, and tangential Delaunay complexes, plus an experiment harness
that measures Hausdorff convergence rates and topology recovery on analytic
ground-truth manifolds (circle, sphere, torus).
"""

__version__ = "0.1.0"
