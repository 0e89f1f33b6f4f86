"""Slab-counting outlier removal with an iterative bandwidth schedule.

A slab at x in direction T is the Minkowski sum of a tangential ball of radius
k1*h and a normal ball of radius k2*h^2.  A point survives one denoising step
when its slab holds at least t*log(n-1) sample points (itself included).  The
bandwidths shrink along the exponent recurrence
gamma_{k+1} = (2*gamma_k + 1) / (d + 2), gamma_0 = 1/(d+1), whose fixed point
is 1/d.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Subspace, random_subspace, tilt_subspace
from .models import LabeledCloud, ManifoldModel
from .tangent import TangentField, TseParams, estimate_tangents


@dataclass(frozen=True)
class SlabSpec:
    k1: float  # tangential half-width factor (times h)
    k2: float  # normal half-width factor (times h^2)
    t: float  # survival threshold factor (times log(n-1))

    def __post_init__(self):
        if self.k1 <= 0 or self.k2 <= 0 or self.t < 0:
            raise ValueError("need k1, k2 > 0 and t >= 0")


def lemma_slab_constants(
    d: int, ambient_dim: int, rho: float, angle_constant: float = 2.0
) -> tuple[float, float, float]:
    """(k1, k2, k3): admissible slab factors and the inclusion radius factor.

    k1 = 3 / (4 d + 8 K sqrt(d)),  k2 = 1 / (4 sqrt(D - d) max(rho, 1)),
    k3 = min(k2 rho / (2 K), k1 / 2, sqrt(rho k1), sqrt(rho k2)).
    """
    if ambient_dim <= d:
        raise ValueError("need ambient_dim > d")
    k = angle_constant
    k1 = 3.0 / (4.0 * d + 8.0 * k * math.sqrt(d))
    k2 = 1.0 / (4.0 * math.sqrt(ambient_dim - d) * max(rho, 1.0))
    k3 = min(k2 * rho / (2.0 * k), k1 / 2.0, math.sqrt(rho * k1), math.sqrt(rho * k2))
    return k1, k2, k3


def default_slab_spec(
    d: int, ambient_dim: int, rho: float, t: float, angle_constant: float = 2.0
) -> SlabSpec:
    k1, k2, _ = lemma_slab_constants(d, ambient_dim, rho, angle_constant)
    return SlabSpec(k1=k1, k2=k2, t=t)


def in_slab(x: np.ndarray, tangent: Subspace, h: float, spec: SlabSpec, y) -> bool:
    """Closed-condition membership of y in the slab at x with direction T."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = y - x
    tang = tangent.basis.T @ diff
    tang_norm2 = float(tang @ tang)
    normal_norm2 = float(diff @ diff) - tang_norm2
    return tang_norm2 <= (spec.k1 * h) ** 2 and max(normal_norm2, 0.0) <= (
        spec.k2 * h * h
    ) ** 2


def slab_counts(
    points: np.ndarray, field_: TangentField, h: float, spec: SlabSpec
) -> np.ndarray:
    """Number of cloud points inside each point's slab (self included)."""
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    counts = np.zeros(n, dtype=int)
    t1 = (spec.k1 * h) ** 2
    t2 = (spec.k2 * h * h) ** 2
    for j, sub in zip(field_.indices, field_.subspaces):
        diff = points - points[j]
        tang = diff @ sub.basis
        tang2 = np.einsum("ij,ij->i", tang, tang)
        norm2 = np.einsum("ij,ij->i", diff, diff) - tang2
        counts[j] = int(np.sum((tang2 <= t1) & (np.maximum(norm2, 0.0) <= t2)))
    return counts


def sd_step(
    points: np.ndarray,
    field_: TangentField,
    h: float,
    spec: SlabSpec,
    n_total: int,
) -> list[int]:
    """One denoising pass: keep index j iff its slab count >= t * log(n-1).

    ``n_total`` is the original sample size; the threshold does not shrink as
    points are removed across iterations.
    """
    if sorted(field_.indices) != list(range(len(points))):
        raise ValueError("tangent field must cover every point of the cloud")
    threshold = spec.t * math.log(n_total - 1)
    counts = slab_counts(points, field_, h, spec)
    return [j for j in range(len(points)) if counts[j] >= threshold]


# ---------------------------------------------------------------------------
# bandwidth schedule


@dataclass
class Schedule:
    """Exponents and bandwidths h_k = base ** gamma_k with
    base = kappa * log(n) / (beta * (n - 1))."""

    n: int
    d: int
    beta: float
    kappa: float
    gammas: list[float]
    hs: list[float]

    @property
    def base(self) -> float:
        return self.kappa * math.log(self.n) / (self.beta * (self.n - 1))

    @property
    def h_infinity(self) -> float:
        return self.base ** (1.0 / self.d)

    def gamma_at(self, k: int) -> float:
        g = self.gammas[-1] if k >= len(self.gammas) else self.gammas[k]
        for _ in range(len(self.gammas), k + 1):
            g = (2.0 * g + 1.0) / (self.d + 2.0)
        return g

    def h_at(self, k: int) -> float:
        if k < len(self.hs):
            return self.hs[k]
        return self.base ** self.gamma_at(k)


def schedule(n: int, d: int, beta: float, kappa: float, k_max: int) -> Schedule:
    if n < 3:
        raise ValueError("need n >= 3")
    if not 0 < beta <= 1 or kappa <= 0 or d < 1 or k_max < 0:
        raise ValueError("invalid schedule parameters")
    gammas = [1.0 / (d + 1)]
    for _ in range(k_max):
        gammas.append((2.0 * gammas[-1] + 1.0) / (d + 2.0))
    base = kappa * math.log(n) / (beta * (n - 1))
    hs = [base**g for g in gammas]
    return Schedule(n=n, d=d, beta=beta, kappa=kappa, gammas=gammas, hs=hs)


def k_delta(d: int, delta: float) -> int:
    """Smallest k with gamma_k >= 1/d - delta."""
    if not 0.0 < delta < 1.0 / (d * (d + 1)):
        raise ValueError(f"need 0 < delta < 1/(d(d+1)) = {1.0 / (d * (d + 1)):.6g}")
    target = 1.0 / d - delta
    g = 1.0 / (d + 1)
    k = 0
    while g < target:
        g = (2.0 * g + 1.0) / (d + 2.0)
        k += 1
    # closed-form sanity bound
    bound = (math.log(1.0 / delta) - math.log(d * (d + 1))) / (
        math.log(d + 2.0) - math.log(2.0)
    )
    assert k <= math.ceil(bound) + 1
    return k


def k_hat(distances_to_manifold: np.ndarray, sched: Schedule, rho: float) -> int:
    """Smallest k such that every distance above h_inf^2/rho exceeds h_k^2/rho.

    Oracle diagnostic (uses ground-truth distances).  Returns 0 when no point
    lies beyond h_inf^2/rho.
    """
    d = np.asarray(distances_to_manifold, dtype=float)
    cut = sched.h_infinity**2 / rho
    far = d[d > cut]
    if far.size == 0:
        return 0
    m = float(far.min())
    for k in range(100_000):
        if sched.h_at(k) ** 2 / rho < m:
            return k
    raise RuntimeError("k_hat did not converge; schedule base may be >= 1")


def calibrate_threshold(pilot_counts: np.ndarray, n: int) -> float:
    """Default threshold rule: half the 5th percentile of pilot on-slab counts,
    expressed in units of log(n-1)."""
    counts = np.asarray(pilot_counts, dtype=float)
    return 0.5 * float(np.percentile(counts, 5.0)) / math.log(n - 1)


# ---------------------------------------------------------------------------
# iterative procedure


@dataclass
class IterationDiagnostics:
    k: int
    h: float
    survivors: int
    true_positives: int | None = None  # signal points kept
    false_positives: int | None = None  # outliers kept


def diagnostics_to_json(diags: list[IterationDiagnostics]) -> str:
    return json.dumps(
        [
            {
                "k": d.k,
                "h_k": d.h,
                "survivors": d.survivors,
                "true_positives": d.true_positives,
                "false_positives": d.false_positives,
            }
            for d in diags
        ]
    )


def iterative_denoise(
    cloud: LabeledCloud,
    d: int,
    beta: float,
    kappa: float,
    spec: SlabSpec,
    k_iters: int,
    tse_params_factory=None,
) -> tuple[list[int], list[IterationDiagnostics]]:
    """Alternate tangent estimation and slab filtering for k = 0 .. k_iters.

    Returns surviving indices into the original cloud plus per-iteration
    diagnostics (confusion counts when labels are available).
    """
    if k_iters < 0:
        raise ValueError("need k_iters >= 0")
    if tse_params_factory is None:
        tse_params_factory = lambda h: TseParams(h=h, d=d)
    n_total = cloud.n
    sched = schedule(n_total, d, beta, kappa, k_iters)
    alive = np.arange(n_total)
    diags: list[IterationDiagnostics] = []
    for k in range(k_iters + 1):
        if alive.size == 0:
            break
        h = sched.hs[k]
        pts = cloud.points[alive]
        field_ = estimate_tangents(pts, tse_params_factory(h))
        if not field_.indices:
            break  # nothing estimable at this bandwidth; stop filtering
        field_ = field_.complete(pts)
        keep_local = sd_step(pts, field_, h, spec, n_total)
        alive = alive[keep_local]
        tp = fp = None
        if cloud.labels is not None:
            tp = int(np.sum(cloud.labels[alive] == 1))
            fp = int(np.sum(cloud.labels[alive] == 0))
        diags.append(
            IterationDiagnostics(
                k=k, h=h, survivors=int(alive.size), true_positives=tp, false_positives=fp
            )
        )
    return [int(j) for j in alive], diags


# ---------------------------------------------------------------------------
# Monte-Carlo checks of the slab geometry statements


@dataclass
class SlabCheckReport:
    trials: int
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _slab_mask(grid: np.ndarray, x: np.ndarray, basis: np.ndarray, h: float, spec: SlabSpec):
    diff = grid - x
    tang = diff @ basis
    tang2 = np.einsum("ij,ij->i", tang, tang)
    norm2 = np.einsum("ij,ij->i", diff, diff) - tang2
    return (tang2 <= (spec.k1 * h) ** 2) & (np.maximum(norm2, 0.0) <= (spec.k2 * h * h) ** 2)


def verify_slab_separation(
    model: ManifoldModel,
    trials: int,
    seed: int,
    angle_constant: float = 2.0,
    grid_resolution: float | None = None,
) -> SlabCheckReport:
    """Far points have manifold-free slabs: d(x, M) >= h/sqrt(2) with any
    direction, or d(x, M) >= h^2/rho with a direction within K h / rho of the
    true tangent."""
    from scipy.spatial import cKDTree

    rng = np.random.default_rng(seed)
    rho = model.reach
    d = model.intrinsic_dim
    big_d = model.ambient_dim
    k1, k2, _ = lemma_slab_constants(d, big_d, rho, angle_constant)
    spec = SlabSpec(k1=k1, k2=k2, t=0.0)
    h_max = min(1.0, rho / math.sqrt(3.0 * d), rho / (12.0 * (1.0 + 0.25 / math.sqrt(2.0))))
    res = grid_resolution if grid_resolution is not None else rho / 100.0
    grid = model.grid(res)
    tree = cKDTree(grid)
    violations = 0
    for trial in range(trials):
        h = rng.uniform(0.2, 1.0) * h_max
        p = model.sample_points(rng, 1)[0]
        normal = _unit_normal(model, p, rng)
        if trial % 2 == 0:
            # unconditional branch: distance at least h / sqrt(2)
            u = rng.uniform(h / math.sqrt(2.0), 0.9 * rho)
            tangent = random_subspace(rng, big_d, d)
        else:
            # near branch: distance in [h^2/rho, h/sqrt(2)), angle <= K h / rho
            u = rng.uniform(h * h / rho, h / math.sqrt(2.0))
            alpha = math.asin(min(1.0, angle_constant * h / rho)) * rng.uniform(0, 1)
            tangent = tilt_subspace(model.tangent(p), normal, alpha)
        x = p + u * normal
        # the slab sits inside the ball of radius k1 h + k2 h^2 around x
        near = tree.query_ball_point(x, spec.k1 * h + spec.k2 * h * h + res)
        if not near:
            continue
        violations += int(np.sum(_slab_mask(grid[near], x, tangent.basis, h, spec)))
    return SlabCheckReport(trials=trials, violations=violations)


def verify_slab_inclusion(
    model: ManifoldModel,
    trials: int,
    seed: int,
    angle_constant: float = 2.0,
    grid_resolution: float | None = None,
) -> SlabCheckReport:
    """Close manifold pairs fall inside each other's true-tangent slabs:
    x, y in M with ||x - y|| <= k3 h implies y in S(x, T_x M, h)."""
    from scipy.spatial import cKDTree

    rng = np.random.default_rng(seed)
    rho = model.reach
    d = model.intrinsic_dim
    k1, k2, k3 = lemma_slab_constants(d, model.ambient_dim, rho, angle_constant)
    spec = SlabSpec(k1=k1, k2=k2, t=0.0)
    h_max = min(1.0, rho / math.sqrt(3.0 * d))
    res = grid_resolution if grid_resolution is not None else rho / 100.0
    grid = model.grid(res)
    tree = cKDTree(grid)
    violations = 0
    for _ in range(trials):
        h = rng.uniform(0.2, 1.0) * h_max
        p = model.sample_points(rng, 1)[0]
        idx = tree.query_ball_point(p, k3 * h)
        if not idx:
            continue
        near = grid[idx]
        near = near[np.linalg.norm(near - p, axis=1) <= k3 * h]
        inside = _slab_mask(near, p, model.tangent(p).basis, h, spec)
        violations += int(np.sum(~inside))
    return SlabCheckReport(trials=trials, violations=violations)


def _unit_normal(model: ManifoldModel, p: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    basis = model.tangent(p).basis
    g = rng.standard_normal(model.ambient_dim)
    g -= basis @ (basis.T @ g)
    norm = np.linalg.norm(g)
    while norm < 1e-12:
        g = rng.standard_normal(model.ambient_dim)
        g -= basis @ (basis.T @ g)
        norm = np.linalg.norm(g)
    return g / norm
