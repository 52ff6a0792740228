"""Tolerances and tolerance-aware grouping of numerical values."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import ClusteringAmbiguityError


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds used across the pipeline.

    Attributes:
        structural: residual bound for closure, ad-invariance, involution checks.
        cluster: relative bound for grouping eigenvalues and root functionals.
        relation: residual bound for basis relations and isometry checks.
        invariance: residual bound for invariant subspaces and joint eigenvectors.
        phase: absolute bound for lattice membership of phases.
        vector: absolute bound when comparing curvature vectors.
        guard: ratio between the ambiguity window and the tolerance.
    """

    structural: float = 1e-9
    cluster: float = 1e-7
    relation: float = 1e-7
    invariance: float = 1e-8
    phase: float = 1e-9
    vector: float = 1e-8
    guard: float = 10.0

    def __post_init__(self):
        for name in ("structural", "cluster", "relation", "invariance", "phase", "vector"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name!r} must be positive")
        if self.guard < 1:
            raise ValueError("guard ratio must be at least 1")


DEFAULT_TOL = Tolerances()


def _as_real_points(points) -> np.ndarray:
    pts = np.asarray(points)
    if pts.ndim == 1:
        pts = pts[:, None]
    if np.iscomplexobj(pts):
        pts = np.concatenate([pts.real, pts.imag], axis=1)
    return np.ascontiguousarray(pts, dtype=float)


def cluster_labels(points, tol: float, guard: float | None = 10.0) -> np.ndarray:
    """Single-linkage group label per point; labels follow first appearance.

    Raises:
        ClusteringAmbiguityError: (when ``guard`` is given) points of
            different groups lie closer than ``guard * tol``.
    """
    pts = _as_real_points(points)
    n = len(pts)
    if n == 0:
        return np.zeros(0, dtype=int)
    tree = cKDTree(pts)
    pairs = tree.query_pairs(tol, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, raw = connected_components(graph, directed=False)
    if guard is not None and guard > 1:
        wide = tree.query_pairs(guard * tol, output_type="ndarray")
        bad = wide[raw[wide[:, 0]] != raw[wide[:, 1]]] if len(wide) else wide
        if len(bad):
            i, j = bad[0]
            dist = float(np.linalg.norm(pts[i] - pts[j]))
            raise ClusteringAmbiguityError(
                f"points {i} and {j} are {dist:.3e} apart: inside the guard band "
                f"({tol:.1e}, {guard * tol:.1e}]; refine the tolerance or inspect exactly"
            )
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inverse]


def cluster_points(points, tol: float, guard: float | None = 10.0) -> list[np.ndarray]:
    """Group points whose mutual distance is within ``tol`` (single linkage).

    Points may be real or complex, one row per point. When ``guard`` is given,
    any pair of points in different groups closer than ``guard * tol`` raises
    :class:`ClusteringAmbiguityError`.

    Returns:
        list of index arrays, one per group, ordered by smallest member index.
    """
    labels = cluster_labels(points, tol, guard)
    if not len(labels):
        return []
    return [np.flatnonzero(labels == g) for g in range(labels.max() + 1)]


def merge_weighted(points, weights, tol: float, guard: float | None = 10.0):
    """Merge coincident points, summing their integer weights.

    Returns:
        (representatives, weights) with one row per merged group; the
        representative is the weighted mean of the group.
    """
    pts = _as_real_points(points)
    w = np.asarray(weights, dtype=int)
    labels = cluster_labels(pts, tol, guard)
    k = int(labels.max()) + 1 if len(labels) else 0
    sums = np.zeros((k, pts.shape[1]))
    np.add.at(sums, labels, pts * w[:, None])
    tot = np.bincount(labels, weights=w, minlength=k)
    return sums / tot[:, None], tot.astype(int)


def circular_distance(a, b, period: float = np.pi):
    """Distance between angles on the circle of circumference ``period``."""
    d = np.mod(np.asarray(a) - np.asarray(b), period)
    return np.minimum(d, period - d)


def lattice_distance(x: float, step: float) -> float:
    """Distance from ``x`` to the nearest integer multiple of ``step``."""
    return float(abs(x - step * np.round(x / step)))


def clean_float(x: float, digits: int = 12) -> float:
    """Round to ``digits`` significant digits and normalise negative zero."""
    x = float(x)
    if not np.isfinite(x):
        return x
    y = float(f"{x:.{digits}g}")
    return 0.0 if y == 0 else y


def clean_array(a, digits: int = 12) -> list:
    return [clean_float(v, digits) for v in np.asarray(a, dtype=float).ravel()]
