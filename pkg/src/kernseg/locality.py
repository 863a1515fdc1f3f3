"""Per-point locality indicators and median thresholding of good points."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import PointSet
from .kernel import Kernel, fit_interpolant


class LocalFitError(RuntimeError):
    def __init__(self, point_id: int, cause: Exception):
        self.point_id = point_id
        super().__init__(f"local fit around point {point_id} failed: {cause}")


@dataclass(frozen=True, eq=False)
class LocalityScores:
    sigma: np.ndarray
    median: float
    threshold: float
    good_mask: np.ndarray
    n_neighbors: int | None = None

    @property
    def n_good(self) -> int:
        return int(self.good_mask.sum())


def lower_median(values) -> float:
    v = np.sort(np.asarray(values, dtype=float))
    return float(v[(len(v) - 1) // 2])


def good_point_mask(sigma, factor: float = 2.0, n_neighbors: int | None = None) -> LocalityScores:
    """Mark points with ``sigma < factor * median(sigma)`` as good.

    The lower median is used for even counts. If the median is zero the
    strict test would reject everything, so good then means ``sigma == 0``.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.size == 0:
        raise ValueError("empty indicator vector")
    if np.any(sigma < 0):
        raise ValueError("indicators must be nonnegative")
    med = lower_median(sigma)
    thr = factor * med
    mask = sigma == 0 if med == 0 else sigma < thr
    return LocalityScores(sigma, med, thr, mask, n_neighbors)


def _norm_indicator(k, coords, f, nb):
    return fit_interpolant(k, coords[nb], f[nb]).native_norm


def _prediction_indicator(k, coords, f, nb):
    # nb[0] is the point itself; predict it from the others
    s = fit_interpolant(k, coords[nb[1:]], f[nb[1:]])
    return abs(float(s(coords[nb[:1]])[0]) - f[nb[0]])


def locality_indicator(
    ps: PointSet,
    f,
    n: int,
    k: Kernel,
    *,
    method: str = "norm",
    include_self: bool = True,
    workers: int = 1,
) -> np.ndarray:
    """Indicator per point from a kernel fit on its ``n`` nearest neighbors.

    ``method="norm"`` returns the native norm of the local interpolant (the
    neighborhood holds the point itself plus ``n-1`` others unless
    ``include_self`` is false, then ``n`` others). ``method="prediction"``
    returns the error of predicting ``f`` at the point from ``n`` others.
    """
    f = np.asarray(f, dtype=float)
    N = len(ps)
    if len(f) != N:
        raise ValueError(f"{len(f)} values for {N} points")
    if not np.all(np.isfinite(f)):
        raise ValueError("data values must be finite")
    if method not in ("norm", "prediction"):
        raise ValueError(f"unknown indicator method {method!r}")
    own = method == "norm" and include_self
    size = n if own else n + 1
    if not 1 <= n <= N or size > N:
        raise ValueError(f"n={n} neighbors not available among N={N} points")
    table = ps.knn_table(size)
    if method == "norm" and not include_self:
        table = table[:, 1:]
    one = _norm_indicator if method == "norm" else _prediction_indicator

    def task(i):
        try:
            return one(k, ps.coords, f, table[i])
        except Exception as exc:
            raise LocalFitError(i + 1, exc) from exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.fromiter(pool.map(task, range(N)), dtype=float, count=N)
    return np.fromiter((task(i) for i in range(N)), dtype=float, count=N)
