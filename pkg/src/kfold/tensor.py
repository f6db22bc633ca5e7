"""Dense operator algebra on V^{(x)k}.

Conventions
-----------
* Leg 0 is the slowest-varying tensor index: basis state |i_0 ... i_{k-1}>
  sits at flat position sum_m i_m d^{k-1-m}.
* Permutation operators act by S_sigma |i_0 ... i_{k-1}> = |i_sigma(0) ... i_sigma(k-1)>.
  With ``compose(s, t)[x] = t[s[x]]`` we get S_s S_t = S_compose(s, t).
* vec is column stacking, so vec(A X C) = (C^T (x) A) vec(X).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgumentError, ResourceLimitError

TOL_STRUCT = 1e-12
TOL_DECOMP = 1e-10
RANK_RTOL = 1e-8
MAX_ADJOINT_DIM = 64


class TensorOperator:
    """Square complex matrix on (C^d)^{(x)legs}."""

    __slots__ = ("entries", "d", "legs")

    def __init__(self, entries, d: int, legs: int):
        entries = np.asarray(entries, dtype=complex)
        n = d**legs
        if entries.shape != (n, n):
            raise InvalidArgumentError(f"expected shape {(n, n)} for d={d}, legs={legs}, got {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise InvalidArgumentError("operator entries must be finite")
        self.entries = entries
        self.d = int(d)
        self.legs = int(legs)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __matmul__(self, other):
        return TensorOperator(self.entries @ _arr(other), self.d, self.legs)

    def dag(self) -> "TensorOperator":
        return TensorOperator(self.entries.conj().T, self.d, self.legs)

    def __repr__(self):
        return f"TensorOperator(d={self.d}, legs={self.legs})"


def _arr(O) -> np.ndarray:
    return O.entries if isinstance(O, TensorOperator) else np.asarray(O)


def infer_legs(n: int, d: int) -> int:
    legs = round(math.log(n, d)) if d > 1 else 1
    if d**legs != n:
        raise InvalidArgumentError(f"size {n} is not a power of d={d}")
    return legs


def _check_perm(sigma) -> tuple:
    sigma = tuple(int(x) for x in sigma)
    if sorted(sigma) != list(range(len(sigma))) or not sigma:
        raise InvalidArgumentError(f"not a permutation of 0..k-1: {sigma}")
    return sigma


def compose(s, t) -> tuple:
    """Product with S_s S_t = S_compose(s, t)."""
    return tuple(t[x] for x in s)


def inverse(s) -> tuple:
    out = [0] * len(s)
    for i, x in enumerate(s):
        out[x] = i
    return tuple(out)


def all_permutations(k: int) -> list[tuple]:
    return list(permutations(range(k)))


@lru_cache(maxsize=256)
def _perm_index(sigma: tuple, d: int) -> np.ndarray:
    k = len(sigma)
    idx = np.arange(d**k).reshape((d,) * k)
    # output position j holds input i with i_sigma(m) = j_m
    return np.transpose(idx, sigma).reshape(-1)


def permutation_operator(sigma, d: int) -> TensorOperator:
    sigma = _check_perm(sigma)
    if d < 1:
        raise InvalidArgumentError(f"d must be positive, got {d}")
    n = d ** len(sigma)
    M = np.zeros((n, n), dtype=complex)
    M[np.arange(n), _perm_index(sigma, d)] = 1.0
    return TensorOperator(M, d, len(sigma))


def permute_legs(O, sigma, d: int) -> np.ndarray:
    """S_sigma O S_sigma^dagger, computed by index relabelling."""
    sigma = _check_perm(sigma)
    M = _arr(O)
    p = _perm_index(sigma, d)
    return M[np.ix_(p, p)]


def half_swap(k: int, d: int) -> TensorOperator:
    """Exchange of the first k and last k legs of V^{(x)2k}."""
    if k < 1:
        raise InvalidArgumentError(f"k must be positive, got {k}")
    return permutation_operator(tuple(range(k, 2 * k)) + tuple(range(k)), d)


def kron_power(U, k: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for _ in range(k):
        out = np.kron(out, U)
    return out


def kron_all(mats) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def _legs_arg(legs, total: int) -> list[int]:
    legs = sorted(set(int(x) for x in legs))
    if any(l < 0 or l >= total for l in legs):
        raise InvalidArgumentError(f"legs {legs} out of range for {total} legs")
    return legs


def partial_trace(O, keep, d: int, legs: int | None = None) -> TensorOperator:
    """Trace out every leg not listed in ``keep``."""
    M = _arr(O)
    legs = legs if legs is not None else infer_legs(M.shape[0], d)
    keep = _legs_arg(keep, legs)
    if not keep:
        raise InvalidArgumentError("kept leg set must be nonempty")
    T = M.reshape((d,) * (2 * legs))
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * legs > len(letters):
        raise ResourceLimitError("too many legs for partial_trace")
    row = list(letters[:legs])
    col = list(letters[legs : 2 * legs])
    for l in range(legs):
        if l not in keep:
            col[l] = row[l]
    out = "".join(row[l] for l in keep) + "".join(col[l] for l in keep)
    R = np.einsum("".join(row) + "".join(col) + "->" + out, T)
    m = d ** len(keep)
    return TensorOperator(R.reshape(m, m), d, len(keep))


def partial_transpose(O, legs_t, d: int, legs: int | None = None) -> TensorOperator:
    M = _arr(O)
    legs = legs if legs is not None else infer_legs(M.shape[0], d)
    legs_t = _legs_arg(legs_t, legs)
    axes = list(range(2 * legs))
    for l in legs_t:
        axes[l], axes[legs + l] = legs + l, l
    T = M.reshape((d,) * (2 * legs)).transpose(axes)
    return TensorOperator(T.reshape(M.shape), d, legs)


@dataclass(frozen=True)
class SchmidtDecomposition:
    values: np.ndarray
    left: np.ndarray  # (r, dA, dA)
    right: np.ndarray  # (r, dB, dB)

    def schmidt_number(self, rtol: float = RANK_RTOL) -> int:
        if self.values.size == 0 or self.values[0] == 0:
            return 0
        return int(np.sum(self.values > rtol * self.values[0]))

    def reconstruct(self) -> np.ndarray:
        return sum(p * np.kron(a, b) for p, a, b in zip(self.values, self.left, self.right))


def operator_schmidt(O, left_legs, d: int, legs: int | None = None) -> SchmidtDecomposition:
    """O = sum_l p_l A_l (x) B_l for the split (left_legs | rest).

    When ``left_legs`` is not a leading block the factors act on the legs
    in sorted order and the reconstruction is in the permuted leg order.
    """
    M = _arr(O)
    legs = legs if legs is not None else infer_legs(M.shape[0], d)
    left = _legs_arg(left_legs, legs)
    right = [l for l in range(legs) if l not in left]
    if not left or not right:
        raise InvalidArgumentError("split must leave both sides nonempty")
    order = left + right
    T = M.reshape((d,) * (2 * legs))
    nl, nr = len(left), len(right)
    axes = order[:nl] + [legs + l for l in order[:nl]] + order[nl:] + [legs + l for l in order[nl:]]
    dA, dB = d**nl, d**nr
    R = T.transpose(axes).reshape(dA * dA, dB * dB)
    u, s, vh = np.linalg.svd(R, full_matrices=False)
    return SchmidtDecomposition(s, u.T.reshape(-1, dA, dA), vh.reshape(-1, dB, dB))


# ---------------------------------------------------------------------------
# Hermitian coordinates


@lru_cache(maxsize=64)
def _pairs(n: int):
    iu, ju = np.triu_indices(n, 1)
    return iu, ju


def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal Hermitian basis, shape (n^2, n, n).

    Order: diagonal units, then (E_ij + E_ji)/sqrt2 for i<j, then
    i(E_ij - E_ji)/sqrt2 for i<j, pairs in row-major upper-triangle order.
    """
    if n < 1:
        raise InvalidArgumentError(f"n must be positive, got {n}")
    iu, ju = _pairs(n)
    m = len(iu)
    B = np.zeros((n * n, n, n), dtype=complex)
    B[np.arange(n), np.arange(n), np.arange(n)] = 1.0
    r = 1 / np.sqrt(2)
    B[n + np.arange(m), iu, ju] = r
    B[n + np.arange(m), ju, iu] = r
    B[n + m + np.arange(m), iu, ju] = 1j * r
    B[n + m + np.arange(m), ju, iu] = -1j * r
    return B


def is_hermitian(H, tol: float = TOL_DECOMP) -> bool:
    H = np.asarray(H)
    scale = max(1.0, float(np.max(np.abs(H)))) if H.size else 1.0
    return bool(np.max(np.abs(H - np.swapaxes(H, -1, -2).conj()), initial=0.0) <= tol * scale)


def vec_h(H, check: bool = True) -> np.ndarray:
    """Real coordinates Tr[E_a H]; accepts a stack (..., n, n)."""
    H = np.asarray(H)
    if H.shape[-1] != H.shape[-2]:
        raise InvalidArgumentError(f"expected square matrices, got {H.shape}")
    if check and not is_hermitian(H):
        raise InvalidArgumentError("matrix is not Hermitian")
    n = H.shape[-1]
    iu, ju = _pairs(n)
    up = H[..., iu, ju]
    s2 = np.sqrt(2)
    return np.concatenate([np.diagonal(H, axis1=-2, axis2=-1).real, s2 * up.real, s2 * up.imag], axis=-1)


def unvec_h(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    N = v.shape[-1]
    n = math.isqrt(N)
    if n * n != N:
        raise InvalidArgumentError(f"coordinate length {N} is not a square")
    iu, ju = _pairs(n)
    m = len(iu)
    H = np.zeros(v.shape[:-1] + (n, n), dtype=complex)
    idx = np.arange(n)
    H[..., idx, idx] = v[..., :n]
    z = (v[..., n : n + m] + 1j * v[..., n + m :]) / np.sqrt(2)
    H[..., iu, ju] = z
    H[..., ju, iu] = z.conj()
    return H


def complex_vec(H) -> np.ndarray:
    """Column-stacking vec; accepts a stack (..., n, n)."""
    H = np.asarray(H)
    return np.swapaxes(H, -1, -2).reshape(H.shape[:-2] + (-1,))


def complex_unvec(v) -> np.ndarray:
    v = np.asarray(v)
    n = math.isqrt(v.shape[-1])
    return np.swapaxes(v.reshape(v.shape[:-1] + (n, n)), -1, -2)


@lru_cache(maxsize=16)
def _coord_map(n: int) -> sp.csr_matrix:
    iu, ju = _pairs(n)
    m = len(iu)
    r = 1 / np.sqrt(2)
    diag = np.arange(n)
    sym = n + np.arange(m)
    anti = n + m + np.arange(m)
    # vec position of entry (i, j) under column stacking is i + n j
    rows = [diag * (n + 1), iu + n * ju, ju + n * iu, iu + n * ju, ju + n * iu]
    cols = [diag, sym, sym, anti, anti]
    vals = [np.ones(n), np.full(m, r), np.full(m, r), np.full(m, 1j * r), np.full(m, -1j * r)]
    M = sp.coo_matrix((np.concatenate(vals).astype(complex), (np.concatenate(rows), np.concatenate(cols))), shape=(n * n, n * n))
    return M.tocsr()


def coordinate_map(n: int) -> sp.csr_matrix:
    """Sparse unitary B with complex_vec(unvec_h(v)) = B v."""
    return _coord_map(n)


def check_unitary(U, tol: float = TOL_DECOMP) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got {U.shape}")
    if np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0])) > tol * max(1, U.shape[0]):
        raise InvalidArgumentError("matrix is not unitary")
    return U


def adjoint_action_matrix(U) -> np.ndarray:
    """Real orthogonal R with vec_h(U H U^dag) = R vec_h(H)."""
    U = check_unitary(U)
    n = U.shape[0]
    if n > MAX_ADJOINT_DIM:
        raise ResourceLimitError(f"adjoint action matrix for n={n} exceeds cap {MAX_ADJOINT_DIM}")
    N = n * n
    R = np.empty((N, N))
    Ud = U.conj().T
    step = max(1, 4096 // n)
    for start in range(0, N, step):
        idx = np.arange(start, min(N, start + step))
        E = unvec_h(np.eye(N)[idx])
        R[:, idx] = vec_h(U @ E @ Ud, check=False).T
    return R


def adjoint_apply(U, H) -> np.ndarray:
    U = np.asarray(U)
    return U @ H @ U.conj().T
