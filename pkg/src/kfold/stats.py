"""Statistical comparisons used by the invariance and reduction checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import tensor as T
from .rng import as_generator


def conjugate_batch(samples, V) -> np.ndarray:
    """V H V^dag for every H in a stack."""
    V = np.asarray(V)
    return np.einsum("ij,njk,lk->nil", V, samples, V.conj(), optimize=True)


def row_space(X, tol: float = 1e-9, chunk: int = 256) -> np.ndarray:
    """Orthonormal rows spanning the rows of X, grown chunk by chunk."""
    X = np.asarray(X, dtype=float)
    scale = max(np.abs(X).max(initial=0.0), 1e-300)
    Q = np.zeros((0, X.shape[1]))
    for start in range(0, X.shape[0], chunk):
        R = X[start : start + chunk]
        R = R - (R @ Q.T) @ Q
        R = R - (R @ Q.T) @ Q
        if not R.size or np.abs(R).max() <= tol * scale:
            continue
        _, s, vh = np.linalg.svd(R, full_matrices=False)
        keep = s > tol * scale * np.sqrt(R.shape[0])
        if keep.any():
            Q = np.concatenate([Q, vh[keep]])
    return Q


def _cov(X):
    Xc = X - X.mean(axis=0)
    return Xc.T @ Xc / (X.shape[0] - 1)


@dataclass(frozen=True)
class InvarianceResult:
    distance: float
    fluctuation: float
    ratio: float
    passed: bool
    rank: int
    n_boot: int

    def as_dict(self):
        return {
            "distance": self.distance,
            "fluctuation": self.fluctuation,
            "ratio": self.ratio,
            "passed": self.passed,
            "rank": self.rank,
            "n_boot": self.n_boot,
        }


def covariance_invariance_test(X, Y, n_boot: int = 40, seed=0, factor: float = 3.0) -> InvarianceResult:
    """Paired bootstrap test that two coordinate batches share a covariance.

    D = C_X - C_Y; the fluctuation is the rms of ||D* - D|| over paired
    resamples.  Passes when ||D|| <= factor * fluctuation.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    Q = row_space(np.concatenate([X, Y]))
    Xr, Yr = X @ Q.T, Y @ Q.T
    D = _cov(Xr) - _cov(Yr)
    dist = float(np.linalg.norm(D))
    rng = as_generator(seed)
    n = X.shape[0]
    dev = []
    for _ in range(n_boot):
        idx = rng.integers(0, n, n)
        Db = _cov(Xr[idx]) - _cov(Yr[idx])
        dev.append(np.linalg.norm(Db - D) ** 2)
    fl = float(np.sqrt(np.mean(dev)))
    ratio = dist / fl if fl > 0 else (0.0 if dist == 0 else np.inf)
    return InvarianceResult(dist, fl, float(ratio), bool(dist <= factor * fl), Q.shape[0], n_boot)


@dataclass(frozen=True)
class MomentComparison:
    max_z_mean: float
    max_z_second: float
    n_second: int

    def passed(self, z: float = 5.0) -> bool:
        return self.max_z_mean < z and self.max_z_second < z


def compare_moments(X, Y) -> MomentComparison:
    """Largest z-scores between entrywise first and second moments of two samples."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    nx, ny = X.shape[0], Y.shape[0]
    zm = np.abs(X.mean(0) - Y.mean(0)) / np.sqrt(X.var(0, ddof=1) / nx + Y.var(0, ddof=1) / ny)
    zmax = 0.0
    m = X.shape[1]
    for i in range(m):
        px = X[:, i : i + 1] * X[:, i:]
        py = Y[:, i : i + 1] * Y[:, i:]
        se = np.sqrt(px.var(0, ddof=1) / nx + py.var(0, ddof=1) / ny)
        zmax = max(zmax, float(np.max(np.abs(px.mean(0) - py.mean(0)) / se)))
    return MomentComparison(float(zm.max()), zmax, m * (m + 1) // 2)


def ks_two_sample(a, b):
    res = stats.ks_2samp(np.asarray(a), np.asarray(b))
    return float(res.statistic), float(res.pvalue)


def coordinate_batch(samples) -> np.ndarray:
    return T.vec_h(samples, check=False)


def invariance_under(samples, V, n_boot: int = 40, seed=0, factor: float = 3.0) -> InvarianceResult:
    """Covariance test between a batch and its conjugate V H V^dag."""
    X = coordinate_batch(samples)
    Y = coordinate_batch(conjugate_batch(samples, V))
    return covariance_invariance_test(X, Y, n_boot, seed, factor)
