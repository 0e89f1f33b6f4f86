"""Farthest-point sparsification: greedy pruning of a dense cloud into an
(eps, 2*eps)-net, with deterministic lowest-index tie-breaking."""
from __future__ import annotations

import numpy as np


def farthest_point_sampling(points: np.ndarray, eps: float, start: int = 0) -> list[int]:
    """Greedy net extraction.

    Starting from ``start``, repeatedly add the point farthest from the
    current subset while that distance exceeds eps.  The result is eps-sparse
    and covers the input within eps.  Ties in the argmax go to the lowest
    index.  Returns indices in order of addition.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("need a nonempty 2-d point array")
    if eps <= 0:
        raise ValueError("need eps > 0")
    n = points.shape[0]
    if not 0 <= start < n:
        raise ValueError(f"start index {start} out of range")
    chosen = [start]
    dist = np.linalg.norm(points - points[start], axis=1)
    while True:
        far = int(np.argmax(dist))  # first occurrence wins ties
        if dist[far] <= eps:
            return chosen
        chosen.append(far)
        np.minimum(dist, np.linalg.norm(points - points[far], axis=1), out=dist)
