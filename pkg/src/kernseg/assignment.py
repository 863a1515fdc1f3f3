"""Final assignment of the remaining unsure points by normalized prediction error."""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .blowup import ClassState
from .kernel import fit_interpolant


class Provenance(IntEnum):
    UNASSIGNED = 0
    SEED = 1
    BLOWUP = 2
    FINAL = 3

    def __str__(self) -> str:
        return self.name.lower()


@dataclass(frozen=True, eq=False)
class FinalPartition:
    labels: np.ndarray  # class per site, 0 only if phase 3 was skipped
    provenance: np.ndarray  # Provenance code per site

    @property
    def J(self) -> int:
        return int(self.labels.max(initial=0))

    def members(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.labels == j)

    def counts(self) -> dict[str, int]:
        return {str(p): int(np.count_nonzero(self.provenance == p)) for p in Provenance}


@dataclass(frozen=True, eq=False)
class NormalizedErrors:
    points: np.ndarray  # unsure site indices, row order
    raw: np.ndarray  # d_j per (point, class)
    lower: np.ndarray  # mu_j
    upper: np.ndarray  # M_j
    scaled: np.ndarray  # D_j per (point, class)
    degenerate: np.ndarray  # per class, True where M_j == mu_j


def normalize_columns(d: np.ndarray):
    """Min/max scale each column of raw errors over the rows.

    Columns with no spread scale to zero; columns with infinite errors
    (a class that could not be fitted) scale to +inf.
    """
    d = np.asarray(d, dtype=float)
    with np.errstate(invalid="ignore"):
        lo = d.min(axis=0)
        hi = d.max(axis=0)
    degenerate = hi == lo
    D = np.zeros_like(d)
    for j in range(d.shape[1]):
        if not np.all(np.isfinite(d[:, j])):
            D[:, j] = np.inf
        elif not degenerate[j]:
            D[:, j] = (d[:, j] - lo[j]) / (hi[j] - lo[j])
    return lo, hi, D, degenerate & np.isfinite(lo)


def class_interpolants(state: ClassState) -> dict:
    fits = {}
    for j in range(1, state.J + 1):
        idx = np.flatnonzero(state.grown == j)
        try:
            fits[j] = fit_interpolant(state.kernel, state.coords[idx], state.values[idx])
        except (ValueError, np.linalg.LinAlgError):
            fits[j] = None
    return fits


def normalized_errors(state: ClassState, f=None) -> NormalizedErrors:
    f = state.values if f is None else np.asarray(f, dtype=float)
    pts = state.unsure
    if not len(pts):
        raise ValueError("no unsure points to score")
    fits = class_interpolants(state)
    d = np.full((len(pts), state.J), np.inf)
    for j, s in fits.items():
        if s is not None:
            d[:, j - 1] = np.abs(f[pts] - s(state.coords[pts]))
    lo, hi, D, degenerate = normalize_columns(d)
    return NormalizedErrors(pts, d, lo, hi, D, degenerate)


def _choose(j: int, k: int, row_raw, row_scaled, degenerate) -> int:
    if degenerate[j - 1] and degenerate[k - 1]:
        a, b = row_raw[j - 1], row_raw[k - 1]
    else:
        a, b = row_scaled[j - 1], row_scaled[k - 1]
    return j if a <= b else k


def final_assign(state: ClassState, f=None) -> FinalPartition:
    """Place every unsure site into one of its two nearest classes."""
    base = partition_from_state(state)
    labels, prov = base.labels, base.provenance
    if not len(state.unsure):
        return FinalPartition(labels, prov)
    if state.J == 1:
        idx = state.unsure
        labels[idx] = 1
        prov[idx] = Provenance.FINAL
        return FinalPartition(labels, prov)
    ne = normalized_errors(state, f)
    # D is computed once beforehand; classes do not change during the loop
    for row, i in enumerate(ne.points):
        j, k = state.nearest_classes(int(i), m=2)
        labels[i] = _choose(j, k, ne.raw[row], ne.scaled[row], ne.degenerate)
        prov[i] = Provenance.FINAL
    return FinalPartition(labels, prov)


def partition_from_state(state: ClassState) -> FinalPartition:
    """Partition without phase 3: unsure sites stay unlabeled."""
    prov = np.full(len(state.grown), Provenance.UNASSIGNED, dtype=int)
    prov[state.seed > 0] = Provenance.SEED
    prov[(state.grown > 0) & (state.seed == 0)] = Provenance.BLOWUP
    return FinalPartition(state.grown.copy(), prov)
