"""Grow the seed classes by absorbing unsure points (blow-up phase)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .kernel import Kernel, fit_interpolant


@dataclass(eq=False)
class ClassState:
    """Evolving partition of the sites.

    ``seed`` and ``grown`` hold a class label per site (0 = none). ``seed`` is
    frozen after splitting; ``grown`` only gains labels.
    """

    coords: np.ndarray
    values: np.ndarray
    sigma: np.ndarray
    seed: np.ndarray
    grown: np.ndarray
    kernel: Kernel
    n: int = 12
    m: int = 2
    _seed_idx: dict = field(default_factory=dict, repr=False)
    _seed_norms: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_seeds(cls, coords, values, sigma, seed_labels, kernel, n=12, m=2) -> "ClassState":
        seed = np.asarray(seed_labels, dtype=int).copy()
        seed.setflags(write=False)
        return cls(
            coords=np.asarray(coords, dtype=float),
            values=np.asarray(values, dtype=float),
            sigma=np.asarray(sigma, dtype=float),
            seed=seed,
            grown=seed.copy(),
            kernel=kernel,
            n=n,
            m=m,
        )

    @property
    def J(self) -> int:
        return int(self.seed.max(initial=0))

    @property
    def unsure(self) -> np.ndarray:
        """Unlabeled sites, best localized (smallest sigma) first."""
        idx = np.flatnonzero(self.grown == 0)
        return idx[np.lexsort((idx, self.sigma[idx]))]

    def copy(self) -> "ClassState":
        return replace(self, grown=self.grown.copy())

    def check(self) -> None:
        seeded = self.seed > 0
        if not np.array_equal(self.grown[seeded], self.seed[seeded]):
            raise AssertionError("a seed point left its class")
        if self.grown.min(initial=0) < 0 or self.grown.max(initial=0) > self.J:
            raise AssertionError("grown labels out of range")

    def _seed_members(self, j: int) -> np.ndarray:
        if j not in self._seed_idx:
            self._seed_idx[j] = np.flatnonzero(self.seed == j)
        return self._seed_idx[j]

    def _norm(self, idx) -> float:
        return fit_interpolant(self.kernel, self.coords[idx], self.values[idx]).native_norm

    def seed_norm(self, i: int, j: int) -> float:
        """Native norm of the fit on the ``n`` seed points of class ``j`` around
        the seed point nearest to site ``i``."""
        key = (i, j)
        if key not in self._seed_norms:
            members = self._seed_members(j)
            p = self.coords[i]
            d = np.hypot(*(self.coords[members] - p).T)
            y = members[np.lexsort((members, d))[0]]
            k = min(self.n, len(members))
            dy = np.hypot(*(self.coords[members] - self.coords[y]).T)
            near = members[np.lexsort((members, dy))[:k]]
            self._seed_norms[key] = self._norm(near)
        return self._seed_norms[key]

    def unsure_norm(self, i: int, j: int) -> float:
        """Native norm of the fit on site ``i`` and up to ``n-1`` nearest grown
        members of class ``j``."""
        members = np.flatnonzero(self.grown == j)
        d = np.hypot(*(self.coords[members] - self.coords[i]).T)
        near = members[np.lexsort((members, d))[: self.n - 1]]
        return self._norm(np.concatenate([[i], near]))

    def class_distances(self, i: int) -> np.ndarray:
        """Distance from site ``i`` to each grown class (index ``j-1``)."""
        d = np.hypot(*(self.coords - self.coords[i]).T)
        out = np.full(self.J, np.inf)
        for j in range(1, self.J + 1):
            sel = self.grown == j
            if sel.any():
                out[j - 1] = d[sel].min()
        return out

    def nearest_classes(self, i: int, m: int | None = None) -> list[int]:
        dist = self.class_distances(i)
        order = np.lexsort((np.arange(self.J), dist))
        m = min(self.m if m is None else m, self.J)
        return [int(j) + 1 for j in order[:m] if np.isfinite(dist[j])]


def candidate_quotient(state: ClassState, i: int, j: int) -> float:
    """How much adding site ``i`` to class ``j`` inflates the local norm."""
    s_g = state.seed_norm(i, j)
    s_u = state.unsure_norm(i, j)
    if s_g == 0:
        return math.inf if s_u > 0 else 1.0
    return s_u / s_g


def examine(state: ClassState, i: int) -> tuple[int | None, dict[int, float]]:
    """Decide one unsure site: the nearest class if its quotient is strictly smallest."""
    cands = state.nearest_classes(i)
    if not cands:
        return None, {}
    quot = {j: candidate_quotient(state, i, j) for j in cands}
    best = cands[0]
    if all(quot[best] < quot[k] for k in cands[1:]):
        return best, quot
    return None, quot


def blow_up(state: ClassState, mode: str = "fixpoint", trace: list | None = None) -> ClassState:
    """Sweep the unsure sites in ascending sigma order, moving accepted ones.

    ``mode="fixpoint"`` repeats sweeps until one moves nothing;
    ``mode="single-pass"`` stops after the first sweep.
    """
    if mode not in ("fixpoint", "single-pass"):
        raise ValueError(f"unknown blow-up mode {mode!r}")
    st = state.copy()
    sweep = 0
    while True:
        sweep += 1
        moved = 0
        for i in st.unsure:
            chosen, quot = examine(st, int(i))
            if trace is not None:
                trace.append({
                    "sweep": sweep,
                    "point": int(i) + 1,
                    "chosen_class": chosen,
                    "quotients": {str(j): _finite_or_none(q) for j, q in quot.items()},
                })
            if chosen is not None:
                st.grown[i] = chosen
                moved += 1
        st.check()
        if moved == 0 or mode == "single-pass" or not len(st.unsure):
            return st


def _finite_or_none(x: float):
    return float(x) if math.isfinite(x) else None
