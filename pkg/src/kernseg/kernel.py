"""Radial kernels and kernel interpolation in the Newton basis.

The Newton basis is obtained from a pivoted (P-greedy) Cholesky
factorization ``A[p, p] = L L^T`` of the kernel matrix. With Newton
coefficients ``beta`` solving ``L beta = f[p]`` the interpolant is

    s(x) = beta . L^{-1} K(X_p, x) = c . K(X_p, x),   c = L^{-T} beta,

and its native-space norm is simply ``||beta||_2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import solve_triangular
from scipy.spatial.distance import cdist


class KernelFamily(str, Enum):
    IMQ = "imq"
    GAUSSIAN = "gaussian"


class RankDeficientError(np.linalg.LinAlgError):
    def __init__(self, pivot: int, value: float, tol: float):
        self.pivot = pivot
        super().__init__(
            f"pivot {pivot} has residual diagonal {value:.3e} below tolerance {tol:.3e}"
        )


@dataclass(frozen=True)
class Kernel:
    family: KernelFamily = KernelFamily.IMQ
    delta: float = 0.35

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if not self.delta > 0:
            raise ValueError(f"shape parameter must be positive, got {self.delta}")

    def phi(self, r):
        """Radial profile; ``phi(0) == 1``."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ValueError("kernel radius must be nonnegative")
        return self._phi_sq(r * r)

    def _phi_sq(self, r2):
        t = r2 / (self.delta * self.delta)
        if self.family is KernelFamily.IMQ:
            return 1.0 / np.sqrt(1.0 + 2.0 * t)
        return np.exp(-t)

    def matrix(self, x, y) -> np.ndarray:
        """Kernel matrix ``K(x_i, y_j)``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = np.atleast_2d(np.asarray(y, dtype=float))
        return self._phi_sq(cdist(x, y, "sqeuclidean"))


def kernel_value(k: Kernel, r: float) -> float:
    if r < 0:
        raise ValueError(f"kernel radius must be nonnegative, got {r}")
    return float(k.phi(r))


def gram_matrix(k: Kernel, pts) -> np.ndarray:
    a = k.matrix(pts, pts)
    # cdist may leave tiny asymmetry
    return 0.5 * (a + a.T)


def default_tol_piv(n: int) -> float:
    return 1e-12 * n


def default_tol_res(values) -> float:
    values = np.asarray(values, dtype=float)
    return 1e-8 * (1.0 + (np.abs(values).max() if values.size else 0.0))


def pivoted_cholesky(a: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Greedy diagonally pivoted Cholesky with early stop.

    Returns ``(piv, L)`` with ``L`` of shape ``(N, r)`` so that
    ``L[piv] @ L[piv].T`` reproduces ``a[piv][:, piv]`` and rows ``L[piv]`` are
    lower triangular. Stops once the largest remaining diagonal is below ``tol``.
    """
    n = a.shape[0]
    diag = np.diag(a).astype(float).copy()
    L = np.zeros((n, n))
    piv: list[int] = []
    free = np.ones(n, dtype=bool)
    for k in range(n):
        cand = np.where(free, diag, -np.inf)
        p = int(np.argmax(cand))
        if cand[p] < tol:
            if k == 0:
                raise RankDeficientError(p + 1, float(cand[p]), tol)
            break
        col = a[:, p] - L[:, :k] @ L[p, :k]
        col /= np.sqrt(cand[p])
        col[~free] = 0.0
        L[:, k] = col
        diag -= col * col
        free[p] = False
        piv.append(p)
    r = len(piv)
    return np.array(piv, dtype=int), L[:, :r]


@dataclass(frozen=True, eq=False)
class Interpolant:
    kernel: Kernel
    centers: np.ndarray  # retained centers, pivot order
    pivot_order: np.ndarray  # indices of retained centers in the input
    chol: np.ndarray  # lower triangular r x r factor on the retained centers
    newton_coeffs: np.ndarray
    standard_coeffs: np.ndarray
    values: np.ndarray  # data at all input points
    residual: float  # max |s(x_i) - f_i| over all input points

    @property
    def n_dropped(self) -> int:
        return len(self.values) - len(self.pivot_order)

    def newton_basis(self, x) -> np.ndarray:
        """Newton basis values, shape ``(len(x), r)``."""
        kx = self.kernel.matrix(self.centers, x)
        return solve_triangular(self.chol, kx, lower=True, check_finite=False).T

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self.newton_basis(x) @ self.newton_coeffs

    def eval_standard(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self.kernel.matrix(x, self.centers) @ self.standard_coeffs

    @property
    def native_norm(self) -> float:
        return float(np.linalg.norm(self.newton_coeffs))


def fit_interpolant(k: Kernel, pts, vals, tol_piv: float | None = None) -> Interpolant:
    """Kernel interpolant of ``vals`` at ``pts`` in the Newton basis.

    Centers whose residual power falls under ``tol_piv`` are dropped
    (numerically dependent on the centers already chosen).
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    vals = np.asarray(vals, dtype=float).ravel()
    if len(pts) != len(vals) or len(vals) == 0:
        raise ValueError(f"need matching nonempty points/values, got {len(pts)} and {len(vals)}")
    if tol_piv is None:
        tol_piv = default_tol_piv(len(vals))
    a = gram_matrix(k, pts)
    piv, L = pivoted_cholesky(a, tol_piv)
    chol = L[piv]
    beta = solve_triangular(chol, vals[piv], lower=True, check_finite=False)
    c = solve_triangular(chol.T, beta, lower=False, check_finite=False)
    centers = pts[piv]
    # residual over all input points via the Newton form: K(X, X_p) L^{-T} = L
    fitted = L @ beta
    residual = float(np.abs(fitted - vals).max())
    return Interpolant(
        kernel=k,
        centers=centers,
        pivot_order=piv,
        chol=chol,
        newton_coeffs=beta,
        standard_coeffs=c,
        values=vals,
        residual=residual,
    )


def eval_interpolant(s: Interpolant, p) -> float:
    return float(s(np.asarray(p, dtype=float).reshape(1, -1))[0])


def native_norm(s: Interpolant) -> float:
    return s.native_norm
