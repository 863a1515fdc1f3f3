"""Split the good points into connected groups of the filtered neighbor graph."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .geometry import Edge


class NoComponentError(RuntimeError):
    pass


class UnionFind:
    """Disjoint sets with path halving and union by size."""

    def __init__(self, items: Iterable[int]):
        self.parent = {x: x for x in items}
        self.size = {x: 1 for x in self.parent}

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


@dataclass(frozen=True, eq=False)
class ComponentLabeling:
    """Class label per point id (index ``id-1``); 0 marks unlabeled points."""

    labels: np.ndarray

    @property
    def J(self) -> int:
        return int(self.labels.max(initial=0))

    @property
    def sizes(self) -> list[int]:
        return [int(np.count_nonzero(self.labels == j)) for j in range(1, self.J + 1)]

    def members(self, j: int) -> np.ndarray:
        """0-based indices of component ``j``."""
        return np.flatnonzero(self.labels == j)


def filter_edges(edges: Sequence[Edge], good_mask) -> list[Edge]:
    good_mask = np.asarray(good_mask, dtype=bool)
    return [e for e in edges if good_mask[e.a - 1] and good_mask[e.b - 1]]


def _relabel(raw: np.ndarray) -> np.ndarray:
    """Renumber nonzero groups 1..J by their smallest member id."""
    out = np.zeros_like(raw)
    nxt = 1
    seen: dict[int, int] = {}
    for i, r in enumerate(raw):
        if r == 0:
            continue
        if r not in seen:
            seen[r] = nxt
            nxt += 1
        out[i] = seen[r]
    return out


def spanning_forest(edges: Sequence[Edge], good_ids, n_points: int | None = None) -> ComponentLabeling:
    """Kruskal sweep over length-sorted edges with a union-find forest.

    Only edges whose endpoints are both in ``good_ids`` take part; good points
    never touched by an edge stay singleton components.
    """
    good_ids = [int(i) for i in good_ids]
    if not good_ids:
        raise ValueError("no good points to split")
    if n_points is None:
        n_points = max(good_ids + [max((e.b for e in edges), default=0)])
    uf = UnionFind(good_ids)
    for e in edges:
        if e.a in uf.parent and e.b in uf.parent:
            uf.union(e.a, e.b)
    raw = np.zeros(n_points, dtype=int)
    for i in good_ids:
        raw[i - 1] = uf.find(i)
    return ComponentLabeling(_relabel(raw))


def select_major_components(cl: ComponentLabeling, min_size: int) -> tuple[ComponentLabeling, np.ndarray]:
    """Dissolve components smaller than ``min_size``.

    Returns the relabeled components and the 0-based indices of demoted points.
    """
    if min_size < 1:
        raise ValueError("min_size must be at least 1")
    labels = cl.labels.copy()
    demoted = []
    for j, size in enumerate(cl.sizes, start=1):
        if size < min_size:
            idx = np.flatnonzero(cl.labels == j)
            labels[idx] = 0
            demoted.append(idx)
    if not labels.any():
        raise NoComponentError(
            f"no component reaches {min_size} points (sizes {cl.sizes}); "
            "retry with a larger threshold factor or smaller min_size"
        )
    demoted_idx = np.sort(np.concatenate(demoted)) if demoted else np.zeros(0, dtype=int)
    return ComponentLabeling(_relabel(labels)), demoted_idx
