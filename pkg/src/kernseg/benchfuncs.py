"""Test functions with discontinuities and a jittered-grid site generator."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import PointSet, build_point_set, separation_distance


def sine_curve(y):
    return 0.2 * np.sin(2 * np.pi * np.asarray(y, dtype=float)) + 0.5


def f1(x, y):
    """Kink across the curve x = 0.2 sin(2 pi y) + 0.5."""
    x = np.asarray(x, dtype=float)
    return np.log(np.abs(x - sine_curve(y)) + 0.5)


def f2(x, y):
    """``f1`` plus a jump of 0.01 to the right of the curve."""
    x = np.asarray(x, dtype=float)
    return f1(x, y) + np.where(x > sine_curve(y), 0.01, 0.0)


def f3(x, y):
    """Steep arctan front on the circle of radius 0.7 around (-0.05, -0.05)."""
    r = np.hypot(np.asarray(x, dtype=float) + 0.05, np.asarray(y, dtype=float) + 0.05)
    return np.arctan(1e3 * (r - 0.7))


def f4(x, y):
    """Cone-like singularity at (0.5, 0.5) plus a 0.05 jump for x > 0.5."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    cone = ((x - 0.5) ** 2 + (y - 0.5) ** 2) ** 0.35
    return cone + np.where(x > 0.5, 0.05, 0.0)


def _class_sine(x, y):
    return np.where(np.asarray(x, dtype=float) > sine_curve(y), 2, 1)


def _class_f3(x, y):
    return np.where(f3(x, y) < 0, 1, 2)


def _class_f4(x, y):
    return np.where(np.asarray(x, dtype=float) > 0.5, 2, 1)


@dataclass(frozen=True)
class BenchCase:
    name: str
    f: Callable
    classifier: Callable
    domain_margin: float = 0.05

    def __call__(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.asarray(self.f(pts[:, 0], pts[:, 1]), dtype=float)

    def true_class(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.asarray(self.classifier(pts[:, 0], pts[:, 1]), dtype=int)


CASES: dict[str, BenchCase] = {
    "f1": BenchCase("f1", f1, _class_sine),
    "f2": BenchCase("f2", f2, _class_sine),
    "f3": BenchCase("f3", f3, _class_f3),
    "f4": BenchCase("f4", f4, _class_f4),
}


def get_case(name: str) -> BenchCase:
    try:
        return CASES[name]
    except KeyError:
        raise ValueError(f"unknown case {name!r}; choose from {sorted(CASES)}") from None


def eval_case(c: BenchCase, p) -> float:
    return float(c(p)[0])


def true_class(c: BenchCase, p) -> int:
    return int(c.true_class(p)[0])


class InfeasibleSpacingError(ValueError):
    pass


def synthesize_sites(
    N: int = 900,
    margin: float = 0.05,
    target_q: float = 0.04,
    seed: int = 1,
    jitter: float = 0.3,
    max_tries: int = 50,
) -> tuple[PointSet, float]:
    """Mildly scattered sites: a jittered sqrt(N) x sqrt(N) grid.

    The grid covers ``[-margin, 1+margin]^2``. Each site is displaced by a
    uniform offset in a box of side ``jitter * cell``; offsets bringing a site
    closer than ``0.8 * target_q`` to an already placed site are redrawn with a
    shrinking box. Returns the point set and its realized separation distance.
    """
    side = math.isqrt(N)
    if side * side != N:
        raise ValueError(f"N={N} is not a perfect square")
    if target_q <= 0:
        raise ValueError("target_q must be positive")
    lo, hi = -margin, 1.0 + margin
    floor = 0.8 * target_q
    if side == 1:
        pts = np.array([[0.5 * (lo + hi)] * 2])
        return build_point_set(pts), math.inf
    cell = (hi - lo) / (side - 1)
    if cell < floor:
        raise InfeasibleSpacingError(
            f"grid cell {cell:.4g} cannot honor separation floor {floor:.4g}; "
            f"need target_q <= {cell / 0.8:.4g} for N={N}, margin={margin}"
        )
    axis = np.linspace(lo, hi, side)
    gx, gy = np.meshgrid(axis, axis, indexing="xy")
    nodes = np.column_stack([gx.ravel(), gy.ravel()])
    rng = np.random.default_rng(seed)
    half = 0.5 * jitter * cell
    pts = nodes.copy()
    if half > 0:
        for i in range(N):
            # only earlier sites within a couple of cells can violate the floor
            near = np.flatnonzero(np.abs(nodes[:i] - nodes[i]).max(axis=1) <= 1.5 * cell)
            for t in range(max_tries + 1):
                amp = half * (1.0 - t / max_tries)
                cand = nodes[i] + rng.uniform(-amp, amp, size=2)
                if near.size == 0 or np.hypot(*(pts[near] - cand).T).min() >= floor:
                    pts[i] = cand
                    break
            else:
                raise InfeasibleSpacingError(
                    f"site {i + 1} cannot be placed {floor:.4g} away from its "
                    f"neighbors; lower jitter={jitter}"
                )
    ps = build_point_set(pts)
    return ps, separation_distance(ps)
