"""Piecewise and global approximants, safe zone and error metrics on a grid."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import PointSet
from .kernel import Interpolant, Kernel, fit_interpolant


def unit_grid(step: float = 0.01) -> np.ndarray:
    """Grid points of ``[0,1]^2`` with the given step, x varying fastest."""
    if step <= 0:
        raise ValueError("grid step must be positive")
    g = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    gx, gy = np.meshgrid(g, g, indexing="xy")
    return np.column_stack([gx.ravel(), gy.ravel()])


def fit_classes(kernel: Kernel, coords, values, labels) -> dict[int, Interpolant]:
    return {
        j: fit_interpolant(kernel, coords[labels == j], values[labels == j])
        for j in range(1, int(labels.max(initial=0)) + 1)
        if np.any(labels == j)
    }


def global_interpolant(ps: PointSet, f, kernel: Kernel | None = None) -> Interpolant:
    return fit_interpolant(kernel or Kernel(), ps.coords, f)


def nearest_label(coords, labels, query) -> np.ndarray:
    """Class of the nearest labeled site for every query point."""
    labeled = np.flatnonzero(labels > 0)
    if not labeled.size:
        raise ValueError("no labeled sites")
    tree = cKDTree(coords[labeled])
    _, idx = tree.query(np.atleast_2d(query), k=1)
    return labels[labeled[idx]]


def piecewise_evaluate(coords, labels, interpolants: dict, query) -> tuple[np.ndarray, np.ndarray]:
    """Values of the piecewise approximant and the class used at each query point."""
    query = np.atleast_2d(np.asarray(query, dtype=float))
    cls = nearest_label(coords, labels, query)
    out = np.empty(len(query))
    for j, s in interpolants.items():
        sel = cls == j
        if sel.any():
            out[sel] = s(query[sel])
    return out, cls


@dataclass(frozen=True, eq=False)
class SafeZone:
    q: float
    mask: np.ndarray
    pure_sites: np.ndarray  # sites whose 2q-ball holds no other class


def safe_sites(coords, labels, q: float) -> np.ndarray:
    tree = cKDTree(coords)
    pure = []
    for i in np.flatnonzero(labels > 0):
        nb = np.asarray(tree.query_ball_point(coords[i], 2.0 * q), dtype=int)
        other = labels[nb]
        if not np.any((other > 0) & (other != labels[i])):
            pure.append(i)
    return np.array(pure, dtype=int)


def safe_zone(coords, labels, q: float, grid: np.ndarray) -> SafeZone:
    """Grid points within ``q`` of a site whose closed ``2q``-ball is class-pure."""
    pure = safe_sites(coords, labels, q)
    if pure.size == 0:
        return SafeZone(q, np.zeros(len(grid), dtype=bool), pure)
    d, _ = cKDTree(coords[pure]).query(grid, k=1)
    return SafeZone(q, d <= q, pure)


def _linf(err, mask=None):
    if mask is not None:
        if not mask.any():
            return None
        err = err[mask]
    return float(np.max(err))


@dataclass
class ErrorReport:
    linf_safe_segmented: float | None
    linf_segmented: float
    linf_safe_global: float | None
    linf_global: float
    safe_fraction: float
    n_misclassified: int | None = None
    counts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def error_report(u_segmented, u_global, f_true, safe: SafeZone) -> ErrorReport:
    """Max errors of both approximants on the full grid and on the safe part.

    Safe-zone errors are ``None`` when the safe mask is empty.
    """
    es = np.abs(np.asarray(u_segmented) - f_true)
    eg = np.abs(np.asarray(u_global) - f_true)
    return ErrorReport(
        linf_safe_segmented=_linf(es, safe.mask),
        linf_segmented=_linf(es),
        linf_safe_global=_linf(eg, safe.mask),
        linf_global=_linf(eg),
        safe_fraction=float(safe.mask.mean()),
    )


def match_classes(labels, truth) -> dict[int, int]:
    """Map each found class to its majority true class."""
    mapping = {}
    for j in np.unique(labels[labels > 0]):
        vals, cnt = np.unique(truth[labels == j], return_counts=True)
        mapping[int(j)] = int(vals[np.argmax(cnt)])
    return mapping


def misclassified(labels, truth) -> np.ndarray:
    """Labeled sites whose class disagrees with the truth after majority matching."""
    mapping = match_classes(labels, truth)
    mapped = np.array([mapping.get(int(l), 0) for l in labels])
    return np.flatnonzero((labels > 0) & (mapped != truth))
