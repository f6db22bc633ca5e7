"""Invariant precision matrices for the k-fold Gaussian ensemble.

A Hermitian H on W = V^{(x)k} is vectorized by column stacking, so
vec(U H U^dag) = (conj(U) (x) U)^{(x)k} acting on the 2k legs of W (x) W
ordered (column legs, row legs).  The quadratic forms invariant under this
action are generated by the partial transposes (over the last k legs) of
the leg permutations S_pi, pi in S_2k.  Every such operator is a 0/1 matrix
with exactly d^{2k} nonzeros, so spans, ranks and singular values are
computed on the stacked supports without forming dense operators.

Symmetries act on the index pi:

* diagonal relabelling (sigma, sigma):  pi -> tau pi tau^{-1}
* half swap T (H -> H^T):                pi -> t pi^{-1} t
* adjoint:                               PT(S_pi)^dag = PT(S_{pi^{-1}})
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
import scipy.sparse as sp

from . import tensor as T
from .errors import (
    InvalidArgumentError,
    NotPositiveDefiniteError,
    NumericalDegeneracyError,
    ResourceLimitError,
)
from .rng import as_generator, haar_unitary

RANK_RTOL = 1e-8
CLUSTER_RTOL = 1e-7
BLOCK_TOL = 1e-8
MAX_VEC_DIM = 4096  # d^{2k}
DENSE_BUDGET_BYTES = 1 << 31

TRIVIAL = "trivial"
SIGN = "sign"


# ---------------------------------------------------------------------------
# generators


@lru_cache(maxsize=8)
def _perm_table(k2: int):
    perms = T.all_permutations(k2)
    index = {p: i for i, p in enumerate(perms)}
    return perms, index


def _check_size(k: int, d: int):
    if k < 1 or d < 1:
        raise InvalidArgumentError(f"need k >= 1 and d >= 1, got k={k}, d={d}")
    if d ** (2 * k) > MAX_VEC_DIM:
        raise ResourceLimitError(f"d^(2k) = {d ** (2 * k)} exceeds cap {MAX_VEC_DIM}")
    if k > 3:
        raise ResourceLimitError(f"k={k}: (2k)! generators exceed the supported range")


@lru_cache(maxsize=16)
def _supports(k: int, d: int):
    """Flat nonzero positions of each PT_last(S_pi) on the d^{2k} x d^{2k} matrix.

    Returns (perms, positions) where positions[i] is an int64 array of
    length d^{2k}.
    """
    k2 = 2 * k
    perms, _ = _perm_table(k2)
    n = d**k2
    digits = np.array(np.unravel_index(np.arange(n), (d,) * k2))  # (k2, n), leg 0 slowest
    weights = d ** np.arange(k2 - 1, -1, -1)
    out = []
    for p in perms:
        # S_pi maps input i to output j with j_m = i_p(m)
        rows = digits[list(p)]
        cols = digits.copy()
        # partial transpose on legs k..2k-1 exchanges row and column digits there
        r2, c2 = rows.copy(), cols.copy()
        r2[k:], c2[k:] = cols[k:], rows[k:]
        out.append((weights @ r2) * n + weights @ c2)
    return perms, out


@lru_cache(maxsize=16)
def _stacked(k: int, d: int):
    """Sparse 0/1 matrix A with row pi = vectorization of PT(S_pi) on the union support."""
    perms, pos = _supports(k, d)
    allpos = np.concatenate(pos)
    cols_u, inv = np.unique(allpos, return_inverse=True)
    rows = np.repeat(np.arange(len(perms)), len(pos[0]))
    A = sp.csr_matrix((np.ones(len(allpos)), (rows, inv)), shape=(len(perms), len(cols_u)))
    return A, cols_u


def mixed_commutant_sparse(k: int, d: int) -> list:
    """PT_last(S_pi) for pi in S_2k as scipy CSR matrices."""
    _check_size(k, d)
    _, pos = _supports(k, d)
    n = d ** (2 * k)
    out = []
    for p in pos:
        r, c = np.divmod(p, n)
        out.append(sp.csr_matrix((np.ones(n), (r, c)), shape=(n, n)))
    return out


def mixed_commutant_basis(k: int, d: int) -> list:
    """Dense TensorOperators PT_last(S_pi), pi in S_2k, in permutation order."""
    _check_size(k, d)
    n = d ** (2 * k)
    if math.factorial(2 * k) * n * n * 16 > DENSE_BUDGET_BYTES:
        raise ResourceLimitError("dense commutant basis exceeds memory budget; use mixed_commutant_sparse")
    return [T.TensorOperator(m.toarray(), d, 2 * k) for m in mixed_commutant_sparse(k, d)]


def commutant_permutations(k: int) -> list[tuple]:
    return list(_perm_table(2 * k)[0])


# ---------------------------------------------------------------------------
# group actions on coefficient vectors


@dataclass(frozen=True)
class ConstraintSet:
    k: int
    d: int
    include_permutation_symmetry: bool = True
    permutation_sign: str = TRIVIAL
    include_half_swap: bool = True

    def __post_init__(self):
        if self.permutation_sign not in (TRIVIAL, SIGN):
            raise InvalidArgumentError(f"permutation_sign must be '{TRIVIAL}' or '{SIGN}'")
        if self.permutation_sign == SIGN and not self.include_permutation_symmetry:
            raise InvalidArgumentError("sign twist requires include_permutation_symmetry")
        _check_size(self.k, self.d)

    def as_dict(self):
        return {
            "k": self.k,
            "d": self.d,
            "include_permutation_symmetry": self.include_permutation_symmetry,
            "permutation_sign": self.permutation_sign,
            "include_half_swap": self.include_half_swap,
        }


@lru_cache(maxsize=8)
def _index_maps(k: int):
    """(relabel maps per sigma in S_k, signs, half-swap map, adjoint map) on S_2k indices."""
    perms, index = _perm_table(2 * k)
    t = tuple(range(k, 2 * k)) + tuple(range(k))
    relabel, signs = [], []
    for s in T.all_permutations(k):
        tau = tuple(s) + tuple(x + k for x in s)
        tinv = T.inverse(tau)
        relabel.append(np.array([index[T.compose(T.compose(tau, p), tinv)] for p in perms]))
        signs.append(_perm_sign(s))
    swap = np.array([index[T.compose(T.compose(t, T.inverse(p)), t)] for p in perms])
    adj = np.array([index[T.inverse(p)] for p in perms])
    return relabel, np.array(signs), swap, adj


def _perm_sign(p) -> int:
    seen, sign = set(), 1
    for i in range(len(p)):
        if i in seen:
            continue
        j, n = i, 0
        while j not in seen:
            seen.add(j)
            j = p[j]
            n += 1
        sign *= -1 if n % 2 == 0 else 1
    return sign


def _act(c: np.ndarray, mapping: np.ndarray) -> np.ndarray:
    """Coefficients after relabelling each basis index pi -> mapping[pi]."""
    out = np.zeros_like(c)
    out[..., mapping] = c
    return out


def symmetrize(constraints: ConstraintSet, C, half_swap: bool | None = None) -> np.ndarray:
    """Exact group average of coefficient rows C (shape (m, (2k)!))."""
    C = np.atleast_2d(np.asarray(C, dtype=complex))
    relabel, signs, swap, _ = _index_maps(constraints.k)
    if constraints.include_permutation_symmetry:
        w = signs if constraints.permutation_sign == SIGN else np.ones(len(signs))
        C = sum(wi * _act(C, m) for wi, m in zip(w, relabel)) / len(relabel)
    use_t = constraints.include_half_swap if half_swap is None else half_swap
    if use_t:
        C = (C + _act(C, swap)) / 2
    return C


def adjoint_coefficients(k: int, C) -> np.ndarray:
    """Coefficients of X^dag given those of X."""
    _, _, _, adj = _index_maps(k)
    return _act(np.conj(C), adj)


def form_coefficients(k: int, C) -> np.ndarray:
    """Coefficients of (M + T conj(M) T)/2, the part of M seen by real quadratic forms."""
    _, _, swap, _ = _index_maps(k)
    C = np.asarray(C, dtype=complex)
    return (C + _act(np.conj(C), swap)) / 2


# ---------------------------------------------------------------------------
# rank and orthonormalisation on the stacked supports


@dataclass(frozen=True)
class SpanInfo:
    rank: int
    singular_values: np.ndarray
    gap: float  # smallest retained / largest discarded singular value (inf if none discarded)
    combination: np.ndarray  # (rank, m) real weights producing an orthonormal basis

    def as_dict(self):
        return {
            "rank": self.rank,
            "singular_values": [float(x) for x in self.singular_values],
            "gap": None if not np.isfinite(self.gap) else float(self.gap),
        }


def _span(k: int, d: int, C, real: bool) -> SpanInfo:
    A, _ = _stacked(k, d)
    V = np.asarray((A.T @ np.asarray(C).T).T)  # (m, ncols) complex
    if real:
        V = np.concatenate([V.real, V.imag], axis=1)
    u, s, _ = np.linalg.svd(V, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return SpanInfo(0, s, math.inf, np.zeros((0, V.shape[0])))
    r = int(np.sum(s > RANK_RTOL * s[0]))
    gap = s[r - 1] / s[r] if r < len(s) and s[r] > 0 else math.inf
    comb = (u[:, :r] / s[:r]).T
    if not real:
        comb = comb.conj()
    return SpanInfo(r, s, gap, comb)


def commutant_rank(k: int, d: int) -> SpanInfo:
    """Rank of span{PT(S_pi)}: (2k)! when d >= 2k."""
    _check_size(k, d)
    return _span(k, d, np.eye(math.factorial(2 * k)), real=False)


# ---------------------------------------------------------------------------
# families


def _materialize(k: int, d: int, c) -> sp.csr_matrix:
    A, cols = _stacked(k, d)
    n = d ** (2 * k)
    vals = np.asarray(A.T @ np.asarray(c)).ravel()
    keep = np.abs(vals) > 0
    r, cc = np.divmod(cols[keep], n)
    return sp.csr_matrix((vals[keep], (r, cc)), shape=(n, n))


@dataclass
class InvariantFamily:
    """Invariant Hermitian operators for one constraint set.

    ``operator_coefficients`` rows expand an orthonormal (Hilbert-Schmidt)
    basis of the self-adjoint invariant operators over PT(S_pi).
    ``coordinate_basis`` holds the independent real-symmetric precision forms
    these operators induce on Hermitian coordinates.
    """

    constraints: ConstraintSet
    complex_commutant_dim: int
    hermitian_dim: int
    form_dim: int
    operator_coefficients: np.ndarray
    form_coefficient_rows: np.ndarray
    complex_coefficients: np.ndarray
    spans: dict = field(default_factory=dict)

    @property
    def k(self):
        return self.constraints.k

    @property
    def d(self):
        return self.constraints.d

    @property
    def n(self) -> int:
        """Dimension of the matrices being sampled, d^k."""
        return self.d**self.k

    def operator(self, i: int) -> sp.csr_matrix:
        return _materialize(self.k, self.d, self.operator_coefficients[i])

    @cached_property
    def operators(self) -> list:
        return [self.operator(i) for i in range(self.hermitian_dim)]

    def combine(self, coefficients) -> sp.csr_matrix:
        c = np.asarray(coefficients, dtype=float) @ self.operator_coefficients
        return _materialize(self.k, self.d, c)

    def realize(self, M) -> np.ndarray:
        """Re(B^dag M B): the quadratic form of M on Hermitian coordinates."""
        B = T.coordinate_map(self.n)
        X = B.conj().T @ (M @ B)
        X = X.toarray() if sp.issparse(X) else np.asarray(X)
        X = X.real
        return (X + X.T) / 2

    @cached_property
    def coordinate_basis(self) -> list:
        return [self.realize(_materialize(self.k, self.d, c)) for c in self.form_coefficient_rows]

    def coefficients_of(self, M) -> np.ndarray:
        """Orthogonal projection of an operator on vec space onto the family operators."""
        M = M if sp.issparse(M) else sp.csr_matrix(np.asarray(M))
        return np.array([float(np.real((op.conj().multiply(M)).sum())) for op in self.operators])

    def identity_coefficients(self) -> np.ndarray:
        return self.coefficients_of(sp.identity(self.n**2, format="csr"))

    def summary(self) -> dict:
        return {
            "constraints": self.constraints.as_dict(),
            "complex_commutant_dim": self.complex_commutant_dim,
            "hermitian_dim": self.hermitian_dim,
            "form_dim": self.form_dim,
            "spans": {key: v.as_dict() for key, v in self.spans.items()},
        }


def symmetrized_family(constraints: ConstraintSet) -> InvariantFamily:
    k, d = constraints.k, constraints.d
    m = math.factorial(2 * k)
    eye = np.eye(m, dtype=complex)

    # complex commutant of the mixed action with the permutation constraint
    cplx_gen = symmetrize(constraints, eye, half_swap=False)
    cplx = _span(k, d, cplx_gen, real=False)

    # self-adjoint part, optionally fixed by the half swap
    P = symmetrize(constraints, eye)
    Pa = adjoint_coefficients(k, P)
    herm_gen = np.concatenate([P + Pa, 1j * (P - Pa)])
    herm = _span(k, d, herm_gen, real=True)
    ops = herm.combination @ herm_gen

    forms_gen = form_coefficients(k, ops)
    forms = _span(k, d, forms_gen, real=True)
    form_rows = forms.combination @ forms_gen

    return InvariantFamily(
        constraints=constraints,
        complex_commutant_dim=cplx.rank,
        hermitian_dim=herm.rank,
        form_dim=forms.rank,
        operator_coefficients=ops,
        form_coefficient_rows=form_rows,
        complex_coefficients=cplx.combination @ cplx_gen,
        spans={"complex": cplx, "hermitian": herm, "form": forms},
    )


def principal_angles(C1, C2, k: int, d: int) -> np.ndarray:
    """Principal angles between two real spans of coefficient rows."""
    A, _ = _stacked(k, d)

    def onb(C):
        V = np.asarray((A.T @ np.asarray(C).T).T)
        V = np.concatenate([V.real, V.imag], axis=1)
        u, s, vt = np.linalg.svd(V, full_matrices=False)
        r = int(np.sum(s > RANK_RTOL * s[0]))
        return vt[:r]

    Q1, Q2 = onb(C1), onb(C2)
    s = np.linalg.svd(Q1 @ Q2.T, compute_uv=False)
    return np.arccos(np.clip(s, -1, 1))


# ---------------------------------------------------------------------------
# verification helpers (coordinate picture)


def transpose_coordinates(n: int) -> np.ndarray:
    """Diagonal matrix J with vec_h(H^T) = J vec_h(H)."""
    m = n * (n - 1) // 2
    return np.diag(np.concatenate([np.ones(n + m), -np.ones(m)]))


def constraint_generators(constraints: ConstraintSet, n_haar: int = 10, seed=0) -> list:
    """(label, R, expected eigen-sign) triples acting on Hermitian coordinates."""
    k, d = constraints.k, constraints.d
    rng = as_generator(seed)
    out = []
    for i in range(n_haar):
        U = T.kron_power(haar_unitary(d, rng), k)
        out.append((f"haar[{i}]", T.adjoint_action_matrix(U), 1))
    if constraints.include_permutation_symmetry:
        for s in T.all_permutations(k):
            w = _perm_sign(s) if constraints.permutation_sign == SIGN else 1
            out.append((f"perm{s}", T.adjoint_action_matrix(T.permutation_operator(s, d).entries), w))
    if constraints.include_half_swap:
        out.append(("half_swap", transpose_coordinates(d**k), 1))
    return out


def max_commutator(family: InvariantFamily, generators) -> float:
    """max ||R E R^T - w E|| / ||E|| over the realized family basis."""
    worst = 0.0
    for E in family.coordinate_basis:
        nE = np.linalg.norm(E)
        for _, R, w in generators:
            worst = max(worst, np.linalg.norm(R @ E @ R.T - w * E) / nE)
    return worst


# ---------------------------------------------------------------------------
# audit


AUDIT_SUBSETS = (
    ("none", dict(include_permutation_symmetry=False, include_half_swap=False)),
    ("perm", dict(include_permutation_symmetry=True, include_half_swap=False)),
    ("half_swap", dict(include_permutation_symmetry=False, include_half_swap=True)),
    ("perm+half_swap", dict(include_permutation_symmetry=True, include_half_swap=True)),
    ("sign+half_swap", dict(include_permutation_symmetry=True, permutation_sign=SIGN, include_half_swap=True)),
)

REFERENCE_COUNTS = {2: (16, 13), 1: (2, 2)}


def dimension_audit(k: int, ds) -> dict:
    if k not in (1, 2):
        raise InvalidArgumentError("dimension_audit supports k in {1, 2}")
    rows = []
    ref = REFERENCE_COUNTS[k]
    for d in ds:
        entry = {"d": int(d), "subsets": {}}
        for name, kw in AUDIT_SUBSETS:
            fam = symmetrized_family(ConstraintSet(k, d, **kw))
            entry["subsets"][name] = fam.summary()
        full = entry["subsets"]["perm+half_swap"]
        got = (full["complex_commutant_dim"], full["hermitian_dim"])
        entry["matches_reference"] = got == ref
        if got != ref:
            entry["warning"] = (
                f"k={k}, d={d}: measured (complex, hermitian) = {got}, "
                f"expected d-independent {ref}; partitions with more than d rows vanish"
            )
        rows.append(entry)
    return {"k": k, "reference": {"complex": ref[0], "hermitian": ref[1]}, "rows": rows}


# ---------------------------------------------------------------------------
# block structure


@dataclass
class BlockStructure:
    change_of_basis: np.ndarray  # unitary W, columns grouped by block, copy, then irrep index
    blocks: list  # [(multiplicity, identity_dim)]
    reconstruction_error: float

    @property
    def multiplicities(self) -> list:
        return sorted(m for m, _ in self.blocks)


def _element(k, d, C, rng, hermitian=True):
    w = rng.standard_normal(C.shape[0])
    if not hermitian:
        w = w + 1j * rng.standard_normal(C.shape[0])
    return _materialize(k, d, w @ C).toarray()


def _block_error(W, blocks, X) -> float:
    Y = W.conj().T @ X @ W
    R = np.zeros_like(Y)
    off = 0
    for m, n in blocks:
        sub = Y[off : off + m * n, off : off + m * n].reshape(m, n, m, n)
        A = np.einsum("iaja->ij", sub) / n
        R[off : off + m * n, off : off + m * n] = np.kron(A, np.eye(n))
        off += m * n
    return float(np.linalg.norm(Y - R) / max(np.linalg.norm(X), 1e-300))


def block_decompose(family: InvariantFamily, include_half_swap: bool = False, seed=0) -> BlockStructure:
    """Simultaneous block form of the invariant algebra.

    By default the algebra is the complex commutant of the mixed action with
    the permutation constraint; ``include_half_swap`` restricts to its
    half-swap fixed subalgebra.
    """
    k, d = family.k, family.d
    if family.n**2 > 1024:
        raise ResourceLimitError("block_decompose needs dense eigendecompositions; d^{2k} must be <= 1024")
    rng = as_generator(seed)
    m = math.factorial(2 * k)
    eye = np.eye(m, dtype=complex)
    cons = family.constraints
    if include_half_swap:
        P = symmetrize(cons, eye, half_swap=True)
    else:
        P = symmetrize(cons, eye, half_swap=False)
    Pa = adjoint_coefficients(k, P)
    herm = np.concatenate([P + Pa, 1j * (P - Pa)])
    gen = _span(k, d, herm, real=True)
    C = gen.combination @ herm
    if C.shape[0] == 0:
        raise InvalidArgumentError("empty family")

    Y = _element(k, d, C, rng)
    evals, evecs = np.linalg.eigh(Y)
    spread = max(evals[-1] - evals[0], 1e-300)
    cuts = np.flatnonzero(np.diff(evals) > CLUSTER_RTOL * spread) + 1
    clusters = np.split(np.arange(len(evals)), cuts)
    Q = [evecs[:, c] for c in clusters]

    Z = _element(k, d, C, rng, hermitian=False)
    nc = len(Q)
    # clusters are linked when some algebra element maps one into the other
    link = np.zeros((nc, nc), dtype=bool)
    ZQ = [Z @ q for q in Q]
    for a in range(nc):
        for b in range(nc):
            link[a, b] = np.linalg.norm(Q[a].conj().T @ ZQ[b]) > 1e-8 * np.linalg.norm(Z)
    link |= link.T
    comp = -np.ones(nc, dtype=int)
    ncomp = 0
    for a in range(nc):
        if comp[a] >= 0:
            continue
        stack = [a]
        comp[a] = ncomp
        while stack:
            x = stack.pop()
            for y in np.flatnonzero(link[x]):
                if comp[y] < 0:
                    comp[y] = ncomp
                    stack.append(y)
        ncomp += 1

    cols, blocks = [], []
    for c in range(ncomp):
        members = list(np.flatnonzero(comp == c))
        sizes = {Q[a].shape[1] for a in members}
        if len(sizes) != 1:
            raise NumericalDegeneracyError(
                "linked eigen-clusters differ in dimension", {"sizes": sorted(sizes), "component": c}
            )
        ref = Q[members[0]]
        for a in members:
            K = Q[a].conj().T @ Z @ ref if a != members[0] else np.eye(ref.shape[1])
            if a != members[0] and np.linalg.norm(K) < 1e-8 * np.linalg.norm(Z):
                raise NumericalDegeneracyError("weak intertwiner between linked clusters", {"component": c})
            u, _, vh = np.linalg.svd(K)
            cols.append(Q[a] @ (u @ vh))
        blocks.append((len(members), sizes.pop()))
    W = np.concatenate(cols, axis=1)

    check = _element(k, d, C, rng)
    errs = [_block_error(W, blocks, check)] + [
        _block_error(W, blocks, _materialize(k, d, c).toarray()) for c in C
    ]
    err = max(errs)
    if err > BLOCK_TOL:
        raise NumericalDegeneracyError(
            f"block reconstruction error {err:.2e} exceeds {BLOCK_TOL}",
            {"blocks": blocks, "error": err},
        )
    return BlockStructure(W, blocks, err)


# ---------------------------------------------------------------------------
# precision forms


@dataclass(frozen=True)
class PrecisionForm:
    family: InvariantFamily
    coefficients: np.ndarray
    matrix: np.ndarray
    min_eigenvalue: float
    eigenvalue_floor: float

    @property
    def n(self) -> int:
        return self.family.n

    @cached_property
    def _eig(self):
        return np.linalg.eigh(self.matrix)

    def covariance(self) -> np.ndarray:
        w, V = self._eig
        return (V / w) @ V.T

    def sampling_factor(self) -> np.ndarray:
        """L with L L^T = Delta^{-1}."""
        w, V = self._eig
        return V / np.sqrt(w)


def build_precision(family: InvariantFamily, coefficients, eigenvalue_floor: float = 1e-10) -> PrecisionForm:
    c = np.asarray(coefficients, dtype=float).ravel()
    if c.shape != (family.hermitian_dim,):
        raise InvalidArgumentError(f"expected {family.hermitian_dim} coefficients, got {c.shape}")
    if not np.all(np.isfinite(c)):
        raise InvalidArgumentError("coefficients must be finite")
    Delta = family.realize(family.combine(c))
    w = np.linalg.eigvalsh(Delta)
    if w[0] < eigenvalue_floor:
        raise NotPositiveDefiniteError(w[0])
    return PrecisionForm(family, c, Delta, float(w[0]), eigenvalue_floor)


def precision_from_matrix(family: InvariantFamily, Delta, eigenvalue_floor: float = 1e-10) -> PrecisionForm:
    """Wrap an explicit coordinate-space matrix (e.g. a deliberately non-invariant control)."""
    Delta = np.asarray(Delta, dtype=float)
    Delta = (Delta + Delta.T) / 2
    w = np.linalg.eigvalsh(Delta)
    if w[0] < eigenvalue_floor:
        raise NotPositiveDefiniteError(w[0])
    return PrecisionForm(family, np.full(family.hermitian_dim, np.nan), Delta, float(w[0]), eigenvalue_floor)


def random_precision(family: InvariantFamily, seed, margin: float = 1.0) -> PrecisionForm:
    """Generic interior point: random coefficients shifted along the identity.

    The family operators are orthonormal and contain the identity, so
    ``identity_coefficients`` combine to exactly I and the shift moves the
    smallest eigenvalue to ``margin``.
    """
    rng = as_generator(seed)
    c = rng.standard_normal(family.hermitian_dim)
    lo = np.linalg.eigvalsh(family.realize(family.combine(c)))[0]
    return build_precision(family, c + (margin - lo) * family.identity_coefficients())


def corrupted_precision(family: InvariantFamily, strength: float = 0.9, seed=0) -> PrecisionForm:
    """I - strength * P with P a random rank n^2/4 coordinate projector.

    Positive definite for strength < 1 and not invariant for generic P;
    used as the negative control of the invariance suite.
    """
    if not 0 <= strength < 1:
        raise InvalidArgumentError("strength must lie in [0, 1)")
    m = family.n**2
    Q, _ = np.linalg.qr(as_generator(seed).normal(size=(m, max(m // 4, 1))))
    return precision_from_matrix(family, np.eye(m) - strength * Q @ Q.T)
