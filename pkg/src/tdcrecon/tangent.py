"""Tangent-space estimation by local PCA.

At each requested point the covariance of the neighbors inside the closed ball
of radius h (the point itself excluded, scaled by 1/(n-1)) is eigendecomposed
and the span of the top d eigenvectors is the tangent estimate.  Points with
fewer than ``min_neighbors`` neighbors are flagged and excluded from the
field; downstream users can fill them in by nearest-neighbor inheritance.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Subspace

_CHUNK = 256


@dataclass(frozen=True)
class TseParams:
    h: float
    d: int
    min_neighbors: int = 3

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("need bandwidth h > 0")
        if self.d < 1:
            raise ValueError("need intrinsic dimension d >= 1")


def default_bandwidth(n: int, d: int, c: float = 1.0) -> float:
    """(c * log(n) / (n - 1)) ** (1/d)."""
    if n < 3:
        raise ValueError("need n >= 3")
    if c <= 0:
        raise ValueError("need c > 0")
    return (c * math.log(n) / (n - 1)) ** (1.0 / d)


@dataclass
class TangentField:
    """Tangent estimates at a subset of cloud indices (parallel lists)."""

    indices: list[int]
    subspaces: list[Subspace]
    skipped: list[int] = field(default_factory=list)

    def __post_init__(self):
        if len(self.indices) != len(self.subspaces):
            raise ValueError("indices and subspaces must be parallel")
        self._by_index = {i: s for i, s in zip(self.indices, self.subspaces)}

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, index: int) -> bool:
        return index in self._by_index

    def subspace_at(self, index: int) -> Subspace:
        return self._by_index[index]

    def complete(self, points: np.ndarray) -> "TangentField":
        """Fill skipped indices with the nearest estimated neighbor's subspace."""
        if not self.skipped:
            return self
        if not self.indices:
            raise ValueError("cannot complete an empty tangent field")
        points = np.asarray(points, dtype=float)
        est_idx = np.asarray(self.indices)
        est_pts = points[est_idx]
        indices = list(self.indices)
        subspaces = list(self.subspaces)
        for j in self.skipped:
            nearest = int(np.argmin(np.linalg.norm(est_pts - points[j], axis=1)))
            indices.append(j)
            subspaces.append(self.subspaces[nearest])
        order = np.argsort(indices)
        return TangentField(
            indices=[indices[k] for k in order],
            subspaces=[subspaces[k] for k in order],
            skipped=[],
        )

    def restrict(self, subset: list[int]) -> "TangentField":
        """Field re-indexed to a sub-cloud: local index k maps to subset[k]."""
        return TangentField(
            indices=list(range(len(subset))),
            subspaces=[self.subspace_at(j) for j in subset],
            skipped=[],
        )

    def to_json(self) -> str:
        entries = [
            {"index": int(i), "basis": s.basis.T.tolist()}
            for i, s in zip(self.indices, self.subspaces)
        ]
        return json.dumps(entries)

    @classmethod
    def from_json(cls, text: str) -> "TangentField":
        entries = json.loads(text)
        return cls(
            indices=[int(e["index"]) for e in entries],
            subspaces=[Subspace(np.array(e["basis"], dtype=float).T) for e in entries],
        )


def local_covariance(points: np.ndarray, j: int, h: float) -> np.ndarray:
    """Covariance of the neighbors of point j inside the closed ball B(X_j, h).

    The point itself is excluded from both the barycenter and the scatter sum;
    the matrix is scaled by 1/(n-1) with n the cloud size.  No neighbors means
    the zero matrix.
    """
    points = np.asarray(points, dtype=float)
    n, big_d = points.shape
    if n < 2:
        raise ValueError("need at least 2 points")
    if h <= 0:
        raise ValueError("need h > 0")
    diff = points - points[j]
    # squared comparison, matching the vectorized path bit for bit at the
    # closed-ball boundary
    mask = np.einsum("nd,nd->n", diff, diff) <= h * h
    mask[j] = False
    if not np.any(mask):
        return np.zeros((big_d, big_d))
    nb = diff[mask]
    centered = nb - nb.mean(axis=0)
    return centered.T @ centered / (n - 1)


def estimate_tangents(
    points: np.ndarray, params: TseParams, subset: list[int] | None = None
) -> TangentField:
    """Local-PCA tangent field over the whole cloud or a subset of indices.

    The neighbor pool is always the full cloud; ``subset`` only selects where
    estimates are produced.
    """
    points = np.asarray(points, dtype=float)
    n, big_d = points.shape
    targets = np.arange(n) if subset is None else np.asarray(subset, dtype=int)
    indices: list[int] = []
    subspaces: list[Subspace] = []
    skipped: list[int] = []
    for lo in range(0, len(targets), _CHUNK):
        idx = targets[lo : lo + _CHUNK]
        diff = points[None, :, :] - points[idx][:, None, :]  # (c, n, D)
        dist2 = np.einsum("cnd,cnd->cn", diff, diff)
        mask = dist2 <= params.h * params.h
        mask[np.arange(len(idx)), idx] = False
        counts = mask.sum(axis=1)
        ok = counts >= params.min_neighbors
        skipped.extend(int(j) for j in idx[~ok])
        if not np.any(ok):
            continue
        w = np.where(mask[:, :, None], diff, 0.0)
        sums = w.sum(axis=1)
        means = np.zeros_like(sums)
        means[ok] = sums[ok] / counts[ok, None]
        # sum of outer products minus the rank-one mean correction
        scatter = np.matmul(w.transpose(0, 2, 1), diff)
        scatter -= counts[:, None, None] * np.einsum("ca,cb->cab", means, means)
        cov = scatter[ok] / (n - 1)
        cov = 0.5 * (cov + cov.transpose(0, 2, 1))
        eigvals, eigvecs = np.linalg.eigh(cov)
        for row, j in enumerate(idx[ok]):
            basis = eigvecs[row][:, ::-1][:, : params.d]
            indices.append(int(j))
            subspaces.append(Subspace(basis))
    return TangentField(indices=indices, subspaces=subspaces, skipped=skipped)
