"""Scattered point sets, exact nearest-neighbor queries and neighbor graphs.

Points carry stable ids ``1..N`` (row order). Internally everything is
indexed ``0..N-1``; ``id = index + 1``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy.spatial import cKDTree


class DuplicatePointError(ValueError):
    def __init__(self, first: int, second: int, coords):
        self.pair = (first, second)
        super().__init__(
            f"points {first} and {second} coincide at {tuple(float(c) for c in coords)}"
        )


class Edge(NamedTuple):
    a: int
    b: int
    length: float


def _dist(coords: np.ndarray, q: np.ndarray) -> np.ndarray:
    diff = coords - q
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


@dataclass(frozen=True, eq=False)
class PointSet:
    """Immutable point cloud with a kd-tree index.

    Build through :func:`build_point_set`, which validates the input.
    """

    coords: np.ndarray
    tree: cKDTree = field(repr=False)

    def __len__(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @property
    def ids(self) -> np.ndarray:
        return np.arange(1, len(self) + 1)

    def knn_indices(self, query, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Exact k nearest neighbors of one query point as 0-based indices.

        Ties are broken by ascending index, so the answer never depends on
        the tree layout.
        """
        n = len(self)
        if not 1 <= k <= n:
            raise ValueError(f"k={k} must lie in [1, N={n}]")
        q = np.asarray(query, dtype=float)
        kk = min(k + 1, n)
        d, idx = self.tree.query(q, k=kk)
        d = np.atleast_1d(d)
        idx = np.atleast_1d(idx)
        if kk > k and d[k] > d[k - 1]:
            cand = idx[:k]
        else:
            # equal distances straddle the cut-off; collect every tie
            radius = d[k - 1] * (1.0 + 1e-12) + 1e-300
            cand = np.asarray(self.tree.query_ball_point(q, radius), dtype=int)
        dc = _dist(self.coords[cand], q)
        order = np.lexsort((cand, dc))[:k]
        return cand[order], dc[order]

    def k_nearest(self, query, k: int) -> list[tuple[int, float]]:
        """``k`` nearest sites to ``query`` as ``(id, distance)``, closest first."""
        n = len(self)
        if k > n:
            raise ValueError(f"k={k} exceeds the number of points N={n}")
        idx, d = self.knn_indices(query, k)
        return [(int(i) + 1, float(r)) for i, r in zip(idx, d)]

    def knn_table(self, k: int) -> np.ndarray:
        """Rows of 0-based neighbor indices for every site, the site itself first."""
        return np.array([self.knn_indices(c, k)[0] for c in self.coords], dtype=int)


def build_point_set(points: Sequence | np.ndarray) -> PointSet:
    coords = np.array(points, dtype=float)
    if coords.ndim == 1:
        coords = coords.reshape(1, -1)
    if coords.ndim != 2 or coords.shape[0] < 1:
        raise ValueError("need at least one point given as an (N, d) array")
    if not np.all(np.isfinite(coords)):
        raise ValueError("point coordinates must be finite")
    tree = cKDTree(coords)
    clashes = tree.query_pairs(0.0)
    if clashes:
        a, b = min(clashes)
        raise DuplicatePointError(a + 1, b + 1, coords[a])
    coords.setflags(write=False)
    return PointSet(coords=coords, tree=tree)


def fill_distance(ps: PointSet, lower, upper, probe_step: float) -> float:
    """Largest distance from a probe-grid point of the box to its nearest site.

    Underestimates the true fill distance by at most ``probe_step*sqrt(d)/2``.
    """
    if probe_step <= 0:
        raise ValueError("probe_step must be positive")
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != (ps.dim,) or upper.shape != (ps.dim,):
        raise ValueError("box bounds must match the point dimension")
    if np.any(upper <= lower):
        raise ValueError(f"empty domain box {lower.tolist()} .. {upper.tolist()}")
    axes = [
        np.linspace(lo, hi, int(math.ceil((hi - lo) / probe_step)) + 1)
        for lo, hi in zip(lower, upper)
    ]
    probes = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    d, _ = ps.tree.query(probes, k=1)
    return float(d.max())


def separation_distance(ps: PointSet) -> float:
    if len(ps) < 2:
        raise ValueError("separation distance needs at least two points")
    d, _ = ps.tree.query(ps.coords, k=2)
    return float(d[:, 1].min())


def neighbor_edge_list(ps: PointSet, n: int) -> list[Edge]:
    """Edges joining every site to its ``n-1`` nearest other sites.

    Each unordered pair appears once; the list is sorted by length, then ids.
    """
    if not 2 <= n <= len(ps):
        raise ValueError(f"n={n} must lie in [2, N={len(ps)}]")
    pairs: dict[tuple[int, int], float] = {}
    for i, row in enumerate(ps.knn_table(n)):
        for j in row:
            if j == i:
                continue
            key = (i + 1, int(j) + 1) if i < j else (int(j) + 1, i + 1)
            if key not in pairs:
                pairs[key] = float(np.linalg.norm(ps.coords[i] - ps.coords[j]))
    edges = [Edge(a, b, length) for (a, b), length in pairs.items()]
    edges.sort(key=lambda e: (e.length, e.a, e.b))
    return edges


def read_points_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray | None]:
    """Read ``x,y[,f]`` rows with a header line. Returns coordinates and values."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = [c.strip() for c in (reader.fieldnames or [])]
        if fields[:2] != ["x", "y"]:
            raise ValueError(f"{path}: expected header starting with x,y, got {fields}")
        rows = [{k.strip(): v for k, v in r.items()} for r in reader]
    coords = np.array([[float(r["x"]), float(r["y"])] for r in rows])
    values = None
    if "f" in fields:
        values = np.array([float(r["f"]) for r in rows])
    return coords, values


def write_points_csv(path: str | Path, coords: np.ndarray, values=None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y"] if values is None else ["x", "y", "f"])
        for i, (x, y) in enumerate(coords):
            row = [repr(float(x)), repr(float(y))]
            if values is not None:
                row.append(repr(float(values[i])))
            w.writerow(row)
