"""Spectral and entanglement diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy import special, stats

from . import tensor as T
from .errors import InvalidArgumentError, NumericalDegeneracyError
from .rng import as_generator, haar_unitary

DEGENERATE_RTOL = 1e-12
POISSON_MEAN_R = 2 * math.log(2) - 1


def _check_herm(H) -> np.ndarray:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got {H.shape}")
    if not T.is_hermitian(H, 1e-10):
        raise InvalidArgumentError("matrix is not Hermitian")
    return H


def _fix_phases(V: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(V) - 1e-12 * np.arange(V.shape[0])[:, None], axis=0)
    ph = V[idx, np.arange(V.shape[1])]
    return V * (np.abs(ph) / ph)


def eigh(H, deterministic: bool = True):
    """Ascending eigenvalues and orthonormal eigenvectors.

    With ``deterministic`` each degenerate eigenspace is rotated to diagonalize
    diag(0, 1, ..., n-1) restricted to it, and every eigenvector has its
    largest-modulus entry real and positive.
    """
    H = _check_herm(H)
    w, V = np.linalg.eigh(H)
    if not deterministic:
        return w, V
    n = len(w)
    scale = max(np.abs(w).max(initial=0.0), 1e-300)
    cuts = np.flatnonzero(np.diff(w) > 1e-10 * scale) + 1
    probe = np.arange(n, dtype=float)
    for block in np.split(np.arange(n), cuts):
        if len(block) < 2:
            continue
        Q = V[:, block]
        _, R = np.linalg.eigh((Q.conj().T * probe) @ Q)
        V[:, block] = Q @ R
        w[block] = w[block].mean()
    return w, _fix_phases(V)


@dataclass(frozen=True)
class SpacingRatios:
    ratios: np.ndarray
    mean: float
    merged: int


def spacing_ratios(eigenvalues) -> SpacingRatios:
    """r_i = min(s_i, s_i+1) / max(s_i, s_i+1) after merging degenerate levels."""
    e = np.sort(np.asarray(eigenvalues, dtype=float))
    if e.size < 3:
        raise InvalidArgumentError("need at least 3 eigenvalues")
    s = np.diff(e)
    width = e[-1] - e[0]
    tiny = s < DEGENERATE_RTOL * width if width > 0 else np.ones_like(s, dtype=bool)
    merged = int(tiny.sum())
    s = s[~tiny]
    if s.size < 2:
        raise InvalidArgumentError("fewer than two nondegenerate spacings")
    r = np.minimum(s[:-1], s[1:]) / np.maximum(s[:-1], s[1:])
    return SpacingRatios(r, float(r.mean()), merged)


def unfold(eigenvalues, poly_degree: int = 7, trim: float = 0.0) -> np.ndarray:
    """Spacings after mapping levels through a polynomial fit of the staircase.

    ``trim`` drops that fraction of spacings at each spectral edge; the
    monotonicity check only covers the retained interior, where the fit
    is meaningful.
    """
    e = np.sort(np.asarray(eigenvalues, dtype=float))
    if e.size < 10:
        raise InvalidArgumentError("need at least 10 eigenvalues")
    if not 3 <= poly_degree <= 15:
        raise InvalidArgumentError("poly_degree must be in [3, 15]")
    if not 0 <= trim < 0.5:
        raise InvalidArgumentError("trim must lie in [0, 0.5)")
    if e[-1] - e[0] <= 0:
        raise NumericalDegeneracyError("zero spectral width", {"width": 0.0})
    N = np.arange(1, e.size + 1, dtype=float)
    p = Polynomial.fit(e, N, poly_degree)
    s = np.diff(p(e))
    cut = int(trim * s.size)
    s = s[cut : s.size - cut]
    if np.any(s < 0):
        raise NumericalDegeneracyError("unfolding map is not monotone", {"negative": int((s < 0).sum())})
    return s


def unfold_batch(spectra, poly_degree: int = 7, trim: float = 0.1) -> np.ndarray:
    """Concatenated unfolded spacings of several spectra, dropping ``trim`` at each edge."""
    return np.concatenate([unfold(e, poly_degree, trim) for e in spectra])


def wigner_surmise(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return 32 / np.pi**2 * s**2 * np.exp(-4 * s**2 / np.pi)


def wigner_surmise_cdf(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    a = 4 / np.pi
    prim = np.sqrt(np.pi) / (4 * a**1.5) * special.erf(np.sqrt(a) * s) - s * np.exp(-a * s**2) / (2 * a)
    return 32 / np.pi**2 * prim


def poisson_spacing(s) -> np.ndarray:
    return np.exp(-np.asarray(s, dtype=float))


def poisson_ratio_density(r) -> np.ndarray:
    """Density of min/max spacing ratio for independent exponential spacings."""
    r = np.asarray(r, dtype=float)
    return 2 / (1 + r) ** 2


def gue_ratio_density(r) -> np.ndarray:
    """Wigner-like surmise for the spacing ratio at beta = 2, folded onto [0, 1]."""
    r = np.asarray(r, dtype=float)
    Z = 4 * np.pi / (81 * np.sqrt(3))
    f = lambda x: (x + x**2) ** 2 / (1 + x + x**2) ** 4 / Z
    return 2 * f(r)


@dataclass(frozen=True)
class GoodnessOfFit:
    statistic: float
    pvalue: float
    observed: np.ndarray
    expected: np.ndarray
    edges: np.ndarray


def surmise_chi2(spacings, bins: int = 20, s_max: float = 3.0) -> GoodnessOfFit:
    """Binned chi-square of unfolded spacings against the beta=2 Wigner surmise."""
    s = np.asarray(spacings, dtype=float)
    s = s / s.mean()
    edges = np.linspace(0, s_max, bins + 1)
    edges[-1] = np.inf
    obs, _ = np.histogram(s, bins=edges)
    cdf = wigner_surmise_cdf(np.minimum(edges, 50.0))
    cdf[-1] = 1.0
    exp = np.diff(cdf) * s.size
    # merge sparse bins so every expected count is at least 5
    o_m, e_m = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(obs, exp):
        acc_o += o
        acc_e += e
        if acc_e >= 5:
            o_m.append(acc_o)
            e_m.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0:
        o_m[-1] += acc_o
        e_m[-1] += acc_e
    o_m, e_m = np.array(o_m), np.array(e_m)
    e_m *= o_m.sum() / e_m.sum()
    # one extra degree of freedom lost to rescaling by the sample mean
    res = stats.chisquare(o_m, e_m, ddof=1)
    return GoodnessOfFit(float(res.statistic), float(res.pvalue), obs, exp, edges)


def entanglement_spectrum(psi, d_left: int, d_right: int) -> np.ndarray:
    psi = np.asarray(psi)
    if psi.ndim != 1 or psi.size != d_left * d_right:
        raise InvalidArgumentError(f"vector of length {psi.size} does not split as {d_left} x {d_right}")
    if abs(np.linalg.norm(psi) - 1) > 1e-10:
        raise InvalidArgumentError("vector is not normalized")
    return np.linalg.svd(psi.reshape(d_left, d_right), compute_uv=False)


# ---------------------------------------------------------------------------
# invariant words


@dataclass(frozen=True)
class WordSpec:
    factors: tuple  # ((sigma, power), ...)

    def __post_init__(self):
        if not self.factors:
            raise InvalidArgumentError("word must be nonempty")
        k = None
        for sigma, p in self.factors:
            if int(p) < 1:
                raise InvalidArgumentError("powers must be >= 1")
            if k is None:
                k = len(sigma)
            elif len(sigma) != k:
                raise InvalidArgumentError("all permutations in a word must act on the same k")

    @property
    def k(self) -> int:
        return len(self.factors[0][0])

    @property
    def degree(self) -> int:
        return sum(int(p) for _, p in self.factors)

    def __str__(self):
        return "*".join(f"H{''.join(map(str, s))}^{p}" for s, p in self.factors)


def as_word(obj) -> WordSpec:
    if isinstance(obj, WordSpec):
        return obj
    return WordSpec(tuple((tuple(int(x) for x in s), int(p)) for s, p in obj))


def invariant_word_trace(H, word, d: int) -> complex:
    """Tr prod_i (S_sigma_i H S_sigma_i^dag)^{p_i}."""
    w = as_word(word)
    H = np.asarray(H)
    if H.shape != (d**w.k, d**w.k):
        raise InvalidArgumentError(f"H has shape {H.shape}, expected d^k = {d ** w.k}")
    P = np.eye(H.shape[0], dtype=complex)
    for sigma, p in w.factors:
        Hs = T.permute_legs(H, sigma, d)
        P = P @ np.linalg.matrix_power(Hs, int(p))
    return complex(np.trace(P))


def words_up_to(k: int, degree: int) -> list:
    """All words over S_k with total degree <= ``degree`` (factors merged when adjacent equal)."""
    perms = T.all_permutations(k)
    out = []

    def rec(prefix, deg):
        if prefix:
            out.append(WordSpec(tuple(prefix)))
        for s in perms:
            if prefix and prefix[-1][0] == s:
                continue
            for p in range(1, degree - deg + 1):
                rec(prefix + [(s, p)], deg + p)

    rec([], 0)
    return out


def swap_trace_direct(H, d: int) -> float:
    """Tr[H_S^2 H^2] with H_S = S H S^dag on C^d (x) C^d."""
    return float(invariant_word_trace(H, [((1, 0), 2), ((0, 1), 2)], d).real)


def swap_trace_schmidt(H, d: int) -> float:
    """Tr[H_S^2 H^2] from eigenpairs and Schmidt data.

    With H = sum_m l_m |psi_m><psi_m| and psi_m = sum_k s_mk a_mk (x) b_mk,
    Tr[H_S^2 H^2] = sum_{m,m'} l_m^2 l_m'^2 |sum_{k,k'} s_mk s_m'k' <a_m'k'|b_mk><b_m'k'|a_mk>|^2.
    """
    w, V = eigh(H)
    n = d * d
    M = V.T.reshape(n, d, d)
    U, s, Vh = np.linalg.svd(M)  # psi_m = sum_k s_mk U[m,:,k] (x) Vh[m,k,:]
    A = U  # A[m, i, k] = (a_mk)_i
    B = np.swapaxes(Vh, 1, 2)  # B[m, i, k] = (b_mk)_i
    ab = np.einsum("pik,mil->pkml", A.conj(), B)  # <a_pk | b_ml>
    ba = np.einsum("pik,mil->pkml", B.conj(), A)  # <b_pk | a_ml>
    amp = np.einsum("pk,ml,pkml,pkml->pm", s, s, ab, ba)
    return float(np.einsum("p,m,pm->", w**2, w**2, np.abs(amp) ** 2))


def schmidt_overlap_stat(H, d: int, top_m: int) -> float:
    """Mean |<left_m | right_m'>|^2 of leading Schmidt vectors over the top_m eigenvectors."""
    H = _check_herm(H)
    if H.shape[0] != d * d:
        raise InvalidArgumentError(f"H must act on C^{d} (x) C^{d}")
    if not 1 <= top_m <= d * d:
        raise InvalidArgumentError("top_m must be in [1, d^2]")
    _, V = eigh(H)
    sel = V[:, -top_m:].T.reshape(top_m, d, d)
    U, _, Vh = np.linalg.svd(sel)
    left = U[:, :, 0]
    right = Vh[:, 0, :]
    ov = np.abs(left.conj() @ right.T) ** 2
    return float(ov.mean())


# ---------------------------------------------------------------------------
# Schur-Weyl projection


@dataclass(frozen=True)
class SchurWeylResult:
    k: int
    d: int
    residual: float
    commutant_dim: int
    twirl_defect: float


def schur_weyl_residual(k: int, d: int, n_twirl: int = 200, n_refine: int = 5, seed=0) -> SchurWeylResult:
    """Twirl a random operator over Haar U^{(x)k}, refine onto the exact common
    commutant of ``n_refine`` random V^{(x)k}, then measure the distance to
    span{S_sigma}."""
    rng = as_generator(seed)
    D = d**k
    X = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
    acc = np.zeros_like(X)
    for _ in range(n_twirl):
        U = T.kron_power(haar_unitary(d, rng), k)
        acc += U @ X @ U.conj().T
    X = acc / n_twirl
    I = np.eye(D)
    K = np.concatenate(
        [np.kron(I, V) - np.kron(V.T, I) for V in (T.kron_power(haar_unitary(d, rng), k) for _ in range(n_refine))]
    )
    _, s, vh = np.linalg.svd(K)
    null = vh[np.sum(s > 1e-8 * s[0]) :].conj().T
    x = T.complex_vec(X)
    defect = float(np.linalg.norm(x - null @ (null.conj().T @ x)) / np.linalg.norm(x))
    x = null @ (null.conj().T @ x)
    S = np.array([T.complex_vec(T.permutation_operator(p, d).entries) for p in T.all_permutations(k)]).T
    coef, *_ = np.linalg.lstsq(S, x, rcond=None)
    res = float(np.linalg.norm(x - S @ coef) / np.linalg.norm(x))
    return SchurWeylResult(k, d, res, int(null.shape[1]), defect)


# ---------------------------------------------------------------------------
# summaries


@dataclass
class SpectralSummary:
    eigenvalues: np.ndarray
    spacings: np.ndarray
    ratios: np.ndarray
    mean_ratio: float
    merged: int
    entanglement: np.ndarray | None = None
    word_traces: dict = field(default_factory=dict)

    def csv_rows(self):
        header = ["index", "eigenvalue", "spacing", "ratio"]
        rows = []
        for i, e in enumerate(self.eigenvalues):
            sp_ = self.spacings[i] if i < len(self.spacings) else ""
            r = self.ratios[i] if i < len(self.ratios) else ""
            rows.append([i, repr(float(e)), repr(float(sp_)) if sp_ != "" else "", repr(float(r)) if r != "" else ""])
        return header, rows

    def as_dict(self):
        out = {
            "n": int(len(self.eigenvalues)),
            "mean_ratio": self.mean_ratio,
            "merged_spacings": self.merged,
        }
        if self.entanglement is not None:
            out["mean_top_schmidt"] = float(self.entanglement[:, 0].mean())
        if self.word_traces:
            out["word_traces"] = {k: [v.real, v.imag] for k, v in self.word_traces.items()}
        return out


def summarize(H, split=None, words=(), d: int | None = None, window=None) -> SpectralSummary:
    """Spectral summary of one sample.

    ``split`` = (d_left, d_right) adds the entanglement spectrum of every
    eigenvector; ``window`` = (lo, hi) fractions restricts ratios to a slice
    of the ordered spectrum.
    """
    w, V = eigh(H)
    e = w
    if window is not None:
        lo, hi = window
        e = w[int(lo * len(w)) : max(int(hi * len(w)), int(lo * len(w)) + 3)]
    sr = spacing_ratios(e)
    ent = None
    if split is not None:
        dl, dr = split
        ent = np.array([entanglement_spectrum(V[:, i], dl, dr) for i in range(V.shape[1])])
    traces = {}
    for wd in words:
        wd = as_word(wd)
        traces[str(wd)] = invariant_word_trace(H, wd, d)
    return SpectralSummary(w, np.diff(w), sr.ratios, sr.mean, sr.merged, ent, traces)
