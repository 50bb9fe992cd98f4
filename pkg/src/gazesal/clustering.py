"""DBSCAN over grid-unit fixation points and the count-adaptive clustering policy.

Distances are measured on the unit square (grid units / 1000); a point's
neighbourhood includes the point itself and is closed (``d <= eps``).
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .geometry import GRID_MAX

NOISE = -1


@dataclass
class ClusterResult:
    clusters: List[List[int]] = field(default_factory=list)
    noise: List[int] = field(default_factory=list)
    centroids: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    @property
    def labels(self) -> np.ndarray:
        n = sum(len(c) for c in self.clusters) + len(self.noise)
        out = np.full(n, NOISE, dtype=int)
        for k, members in enumerate(self.clusters):
            out[members] = k
        return out


@dataclass(frozen=True)
class ClusterPolicy:
    skip_below: int = 100
    eps: float = 0.04
    min_pts: int = 1
    strict_eps: float = 0.04
    strict_min_pts: int = 2
    strict_above: int = 200

    def __post_init__(self):
        if self.skip_below >= self.strict_above:
            raise ValueError("skip_below must be smaller than strict_above")
        if self.eps <= 0 or self.strict_eps <= 0:
            raise ValueError("eps must be positive")
        if self.min_pts < 1 or self.strict_min_pts < 1:
            raise ValueError("min_pts must be >= 1")


def as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return np.zeros((0, 2))
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) point array, got shape {arr.shape}")
    return arr


def _neighbourhoods(unit: np.ndarray, eps: float) -> List[List[int]]:
    """Closed eps-neighbourhoods via a uniform grid hash.

    The cell side is a hair above eps so float rounding in the cell index can
    never push a true neighbour two cells away.
    """
    eps2 = eps * eps
    cells: Dict[Tuple[int, int], List[int]] = defaultdict(list)
    keys = np.floor(unit / (eps * (1 + 1e-9))).astype(np.int64)
    for idx, (cx, cy) in enumerate(keys):
        cells[(int(cx), int(cy))].append(idx)
    out: List[List[int]] = []
    for idx, (cx, cy) in enumerate(keys):
        px, py = unit[idx]
        nbrs = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for j in cells.get((int(cx) + dx, int(cy) + dy), ()):
                    ddx = px - unit[j, 0]
                    ddy = py - unit[j, 1]
                    if ddx * ddx + ddy * ddy <= eps2:
                        nbrs.append(j)
        nbrs.sort()
        out.append(nbrs)
    return out


def dbscan(points, eps: float, min_pts: int) -> ClusterResult:
    """Classic DBSCAN in input order.

    Clusters are numbered in the order their first core point appears; a
    border point reachable from several clusters joins the earliest one.
    Cluster member lists are sorted ascending.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    pts = as_points(points)
    n = len(pts)
    if n == 0:
        return ClusterResult()
    unit = pts / GRID_MAX
    nbrs = _neighbourhoods(unit, eps)
    core = np.array([len(nb) >= min_pts for nb in nbrs])

    labels = np.full(n, NOISE, dtype=int)
    n_clusters = 0
    for start in range(n):
        if labels[start] != NOISE or not core[start]:
            continue
        cid = n_clusters
        n_clusters += 1
        labels[start] = cid
        queue = deque([start])
        while queue:
            p = queue.popleft()
            for q in nbrs[p]:
                if labels[q] == NOISE:
                    labels[q] = cid
                    if core[q]:
                        queue.append(q)

    clusters = [sorted(np.flatnonzero(labels == k).tolist()) for k in range(n_clusters)]
    noise = np.flatnonzero(labels == NOISE).tolist()
    centroids = np.array([pts[m].mean(axis=0) for m in clusters]) if clusters else np.zeros((0, 2))
    return ClusterResult(clusters, noise, centroids)


def adaptive_cluster(points, policy: ClusterPolicy = ClusterPolicy()) -> np.ndarray:
    """Consolidate a scene's fixations into at most a few hundred representatives.

    Small scenes pass through untouched. Otherwise the base configuration is
    run; if it still yields more than ``strict_above`` centroids, the strict
    configuration is run on the raw points and its noise discarded. No
    truncation happens after the strict pass.
    """
    pts = as_points(points)
    if len(pts) < policy.skip_below:
        return pts.copy()
    res = dbscan(pts, policy.eps, policy.min_pts)
    if len(res.centroids) > policy.strict_above:
        res = dbscan(pts, policy.strict_eps, policy.strict_min_pts)
    return res.centroids


def cluster_count_by_eps(points, eps_values: Sequence[float], min_pts: int = 1) -> List[int]:
    pts = as_points(points)
    return [len(dbscan(pts, e, min_pts).clusters) for e in eps_values]
