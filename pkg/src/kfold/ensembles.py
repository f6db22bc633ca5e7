"""Samplers: Gaussian baselines, the k-fold ensemble and the physical models.

Every sampler takes ``seed`` as an int or a ``numpy.random.Generator``.
Batches derive one 64-bit seed per sample from (master seed, index), so
serial and threaded generation give identical bytes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import tensor as T
from .commutant import PrecisionForm
from .errors import InvalidArgumentError, ResourceLimitError
from .rng import as_generator, haar_orthogonal, haar_unitaries, haar_unitary, sample_seed

MAX_DIM = 4096
MAX_HEISENBERG_SITES = 12
MAX_O3_SITES = 6

__all__ = [
    "haar_unitary",
    "sample_gue",
    "sample_goe",
    "sample_kfold",
    "sample_tensor_product",
    "sample_power_fold",
    "sample_heisenberg",
    "sample_o3",
    "quantum_double",
    "unitary_double_first_moment",
    "EnsembleSpec",
    "SampleBatch",
    "sample_batch",
]


def _scale(scale) -> float:
    scale = float(scale)
    if not scale > 0 or not math.isfinite(scale):
        raise InvalidArgumentError(f"scale must be positive, got {scale}")
    return scale


def sample_gue(n: int, scale: float = 1.0, seed=0) -> np.ndarray:
    """Diagonal N(0, s^2); off-diagonal real and imaginary parts N(0, s^2/2)."""
    if n < 1:
        raise InvalidArgumentError(f"n must be positive, got {n}")
    s = _scale(scale)
    rng = as_generator(seed)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return s * (A + A.conj().T) / 2


def sample_goe(n: int, scale: float = 1.0, seed=0) -> np.ndarray:
    """Real symmetric; diagonal N(0, s^2), off-diagonal N(0, s^2/2)."""
    if n < 1:
        raise InvalidArgumentError(f"n must be positive, got {n}")
    s = _scale(scale)
    rng = as_generator(seed)
    A = rng.standard_normal((n, n))
    return s * (A + A.T) / 2 + 0j


def sample_kfold(precision: PrecisionForm, seed=0) -> np.ndarray:
    """H with vec_h(H) ~ N(0, Delta^{-1})."""
    L = precision.sampling_factor()
    rng = as_generator(seed)
    return T.unvec_h(L @ rng.standard_normal(L.shape[0]))


def sample_tensor_product(dims, scale: float = 1.0, seed=0) -> np.ndarray:
    dims = [int(x) for x in dims]
    if not dims or any(x < 1 for x in dims):
        raise InvalidArgumentError(f"invalid factor dimensions {dims}")
    if math.prod(dims) > MAX_DIM:
        raise ResourceLimitError(f"product dimension {math.prod(dims)} exceeds cap {MAX_DIM}")
    rng = as_generator(seed)
    return T.kron_all(sample_gue(n, scale, rng) for n in dims)


def sample_power_fold(H=None, k: int = 2, n: int | None = None, scale: float = 1.0, seed=0) -> np.ndarray:
    """H^{(x)k}; draws H from the GUE when only ``n`` is given."""
    if k < 1:
        raise InvalidArgumentError(f"k must be positive, got {k}")
    if H is None:
        if n is None:
            raise InvalidArgumentError("give either H or n")
        H = sample_gue(n, scale, seed)
    H = np.asarray(H, dtype=complex)
    if H.shape[0] ** k > MAX_DIM:
        raise ResourceLimitError(f"dimension {H.shape[0] ** k} exceeds cap {MAX_DIM}")
    return T.kron_power(H, k)


# ---------------------------------------------------------------------------
# spin models

PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]],
    dtype=complex,
)
SPIN_HALF = PAULI / 2
# spin-1 in the real Cartesian basis: (S^a)_{bc} = -i eps_{abc}
_EPS = np.zeros((3, 3, 3))
for _a, _b, _c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPS[_a, _b, _c] = 1
    _EPS[_a, _c, _b] = -1
SPIN_ONE = -1j * _EPS


def site_operator(op, site: int, n_sites: int) -> np.ndarray:
    d = op.shape[0]
    return np.kron(np.kron(np.eye(d ** site), op), np.eye(d ** (n_sites - site - 1)))


def _edges(graph):
    out = []
    for e in graph:
        if len(e) == 2:
            i, j, J = e[0], e[1], 1.0
        else:
            i, j, J = e
        if i == j:
            raise InvalidArgumentError(f"self-loop at vertex {i}")
        out.append((int(i), int(j), float(J)))
    return out


def chain(n_sites: int, J: float = 1.0, periodic: bool = False) -> list:
    edges = [(i, i + 1, J) for i in range(n_sites - 1)]
    if periodic and n_sites > 2:
        edges.append((n_sites - 1, 0, J))
    return edges


def _n_sites(graph, n_sites):
    m = max(max(i, j) for i, j, _ in graph) + 1 if graph else 0
    return max(m, n_sites or 0)


@lru_cache(maxsize=16)
def _spin_half_ops(n: int) -> np.ndarray:
    return np.array([[site_operator(SPIN_HALF[a], i, n) for a in range(3)] for i in range(n)])


def heisenberg_terms(graph, n_sites: int | None = None):
    """(H0, site spin operators (n, 3, D, D)) for the noiseless Heisenberg model."""
    graph = tuple(_edges(graph))
    n = _n_sites(graph, n_sites)
    if n > MAX_HEISENBERG_SITES:
        raise ResourceLimitError(f"{n} sites exceeds cap {MAX_HEISENBERG_SITES}")
    return _heisenberg_h0(graph, n), _spin_half_ops(n)


@lru_cache(maxsize=8)
def _heisenberg_h0(graph: tuple, n: int) -> np.ndarray:
    S = _spin_half_ops(n)
    D = 2**n
    H0 = np.zeros((D, D), dtype=complex)
    for i, j, J in graph:
        for a in range(3):
            H0 += J * (S[i, a] @ S[j, a])
    H0.setflags(write=False)
    return H0


def sample_heisenberg(graph, noise_scale: float = 0.0, seed=0, n_sites: int | None = None) -> np.ndarray:
    """sum J_ij S_i.S_j + sum_i n_i.S_i with n_i ~ N(0, noise_scale^2 I_3)."""
    if noise_scale < 0:
        raise InvalidArgumentError("noise_scale must be nonnegative")
    H0, S = heisenberg_terms(graph, n_sites)
    rng = as_generator(seed)
    noise = noise_scale * rng.standard_normal((S.shape[0], 3))
    D = H0.shape[0]
    return H0 + (noise.reshape(-1) @ S.reshape(-1, D * D)).reshape(D, D)


def sample_o3(graph, seed=0, n_sites: int | None = None, orthogonal: str = "haar", kappa: float = 0.0) -> np.ndarray:
    """sum J_ij S_i^T O_ij S_j with spin-1 Cartesian operators (real matrix).

    ``orthogonal`` is 'haar' (O_ij Haar on O(3)) or 'identity'.  Only the
    uniform limit ``kappa = 0`` of a concentrated law is supported.
    """
    if kappa != 0:
        raise InvalidArgumentError("only kappa = 0 (Haar) is supported")
    if orthogonal not in ("haar", "identity"):
        raise InvalidArgumentError(f"unknown orthogonal mode {orthogonal!r}")
    graph = _edges(graph)
    n = _n_sites(graph, n_sites)
    if n > MAX_O3_SITES:
        raise ResourceLimitError(f"{n} sites exceeds cap {MAX_O3_SITES}")
    rng = as_generator(seed)
    S = _spin_one_ops(n)
    D = 3**n
    H = np.zeros((D, D))
    for i, j, J in graph:
        O = haar_orthogonal(3, rng) if orthogonal == "haar" else np.eye(3)
        # S^a (x) S^b is real because both factors are purely imaginary
        Si = np.tensordot(O.T, S[i], axes=1)  # sum_a O_ab S_i^a
        for b in range(3):
            H += J * (Si[b] @ S[j, b]).real
    return H


@lru_cache(maxsize=8)
def _spin_one_ops(n: int) -> np.ndarray:
    return np.array([[site_operator(SPIN_ONE[a], i, n) for a in range(3)] for i in range(n)])


# ---------------------------------------------------------------------------
# quantum double


def check_group(table) -> np.ndarray:
    M = np.asarray(table, dtype=int)
    g = M.shape[0]
    if M.ndim != 2 or M.shape != (g, g) or g < 1:
        raise InvalidArgumentError("multiplication table must be square")
    if M.min() < 0 or M.max() >= g:
        raise InvalidArgumentError("table entries must be element indices")
    ids = [e for e in range(g) if np.all(M[e] == np.arange(g)) and np.all(M[:, e] == np.arange(g))]
    if not ids:
        raise InvalidArgumentError("table has no identity element")
    e = ids[0]
    for a in range(g):
        if not np.any(M[a] == e) or not np.any(M[:, a] == e):
            raise InvalidArgumentError(f"element {a} has no inverse")
    r = np.arange(g)
    left = M[M[:, :, None], r[None, None, :]]  # (ab)c
    right = M[r[:, None, None], M[None, :, :]]  # a(bc)
    if not np.array_equal(left, right):
        raise InvalidArgumentError("table is not associative")
    return M


def cyclic_group(n: int) -> np.ndarray:
    a = np.arange(n)
    return (a[:, None] + a[None, :]) % n


def symmetric_group_table(k: int = 3) -> np.ndarray:
    perms = T.all_permutations(k)
    idx = {p: i for i, p in enumerate(perms)}
    return np.array([[idx[T.compose(b, a)] for b in perms] for a in perms])


@dataclass
class QuantumDouble:
    table: np.ndarray
    width: int
    height: int
    vertex_ops: list
    plaquette_ops: list
    hamiltonian: np.ndarray
    edges: list = field(default_factory=list)

    @property
    def order(self) -> int:
        return self.table.shape[0]

    def relabel_operator(self, q: int, mode: str = "left") -> np.ndarray:
        """Permutation implementing |z> -> |q z> (left) or |q z q^-1> (conjugate) on every edge."""
        M = self.table
        g = self.order
        inv = _inverses(M)
        if mode == "left":
            local = M[q]
        elif mode == "conjugate":
            local = np.array([M[M[q, z], inv[q]] for z in range(g)])
        else:
            raise InvalidArgumentError(f"unknown relabel mode {mode!r}")
        return _local_permutation(local, len(self.edges), g)


def _inverses(M) -> np.ndarray:
    g = M.shape[0]
    e = int(np.flatnonzero([np.all(M[a] == np.arange(g)) for a in range(g)])[0])
    return np.array([int(np.flatnonzero(M[a] == e)[0]) for a in range(g)])


def _configs(n_edges: int, g: int) -> np.ndarray:
    return np.array(np.unravel_index(np.arange(g**n_edges), (g,) * n_edges)).T


def _local_permutation(local_maps, n_edges: int, g: int) -> np.ndarray:
    """Permutation matrix applying local_maps[e] (or one shared map) to each edge label."""
    local_maps = np.asarray(local_maps)
    if local_maps.ndim == 1:
        local_maps = np.tile(local_maps, (n_edges, 1))
    cfg = _configs(n_edges, g)
    new = local_maps[np.arange(n_edges)[None, :], cfg]
    target = np.ravel_multi_index(new.T, (g,) * n_edges)
    N = g**n_edges
    P = np.zeros((N, N))
    P[target, np.arange(N)] = 1.0
    return P


def quantum_double(table, width: int = 2, height: int = 2) -> QuantumDouble:
    """Vertex and plaquette operators on a width x height torus.

    Edges point right (h) and up (v).  A_g(v) sends outgoing labels z -> g z
    and incoming labels z -> z g^-1; A(v) = sum_g A_g(v).  B(p) projects onto
    z_bottom z_right z_top^-1 z_left^-1 = e.
    """
    M = check_group(table)
    g = M.shape[0]
    if width < 2 or height < 2:
        raise InvalidArgumentError("torus needs width, height >= 2")
    edges = [("h", x, y) for y in range(height) for x in range(width)] + [
        ("v", x, y) for y in range(height) for x in range(width)
    ]
    ne = len(edges)
    if g**ne > MAX_DIM:
        raise ResourceLimitError(f"|G|^edges = {g ** ne} exceeds cap {MAX_DIM}")
    eid = {e: i for i, e in enumerate(edges)}
    inv = _inverses(M)
    e_id = int(np.flatnonzero([np.all(M[a] == np.arange(g)) for a in range(g)])[0])
    ident = np.arange(g)

    vertex_ops = []
    for y in range(height):
        for x in range(width):
            out_e = [eid[("h", x, y)], eid[("v", x, y)]]
            in_e = [eid[("h", (x - 1) % width, y)], eid[("v", x, (y - 1) % height)]]
            A = np.zeros((g**ne, g**ne))
            for h in range(g):
                maps = np.tile(ident, (ne, 1))
                for e in out_e:
                    maps[e] = M[h]
                for e in in_e:
                    maps[e] = M[:, inv[h]]
                A += _local_permutation(maps, ne, g)
            vertex_ops.append(A)

    cfg = _configs(ne, g)
    plaquette_ops = []
    for y in range(height):
        for x in range(width):
            b = cfg[:, eid[("h", x, y)]]
            r = cfg[:, eid[("v", (x + 1) % width, y)]]
            t = cfg[:, eid[("h", x, (y + 1) % height)]]
            l = cfg[:, eid[("v", x, y)]]
            hol = M[M[M[b, r], inv[t]], inv[l]]
            plaquette_ops.append(np.diag((hol == e_id).astype(float)))

    H = -sum(vertex_ops) - sum(plaquette_ops)
    return QuantumDouble(M, width, height, vertex_ops, plaquette_ops, H, edges)


# ---------------------------------------------------------------------------
# unitary double first moment


@dataclass
class FirstMoment:
    d: int
    estimate: np.ndarray
    alpha: float
    beta: float
    alpha_se: float
    beta_se: float
    residual: float
    samples: int

    def as_dict(self):
        return {k: getattr(self, k) for k in ("d", "alpha", "beta", "alpha_se", "beta_se", "residual", "samples")}


def swap_conjugate(d: int) -> np.ndarray:
    """Partial-transposed swap: d times the projector onto the maximally entangled vector."""
    phi = np.eye(d).reshape(-1)
    return np.outer(phi, phi).astype(complex)


def unitary_double_first_moment(d: int, mc_samples: int = 100_000, seed=0, chunk: int = 4096) -> FirstMoment:
    """Monte-Carlo E_U[T+(U) (x) T-(U)] on vec(V) (x) vec(V').

    T+(U) vec(V) = vec(UV) acts as U and T-(U) vec(V) = vec(V U^dag) acts as
    conj(U), so the estimated operator is E[U (x) conj(U)], fitted onto
    alpha I + beta PT(swap).
    """
    if d < 1 or d > 8:
        raise InvalidArgumentError("d must be in 1..8")
    if mc_samples < 1000:
        raise InvalidArgumentError("mc_samples must be at least 1000")
    if d == 1:
        return FirstMoment(1, np.ones((1, 1), dtype=complex), 0.0, 1.0, 0.0, 0.0, 0.0, mc_samples)
    rng = as_generator(seed)
    total = np.zeros((d * d, d * d), dtype=complex)
    tr2 = np.empty(mc_samples)
    done = 0
    while done < mc_samples:
        m = min(chunk, mc_samples - done)
        U = haar_unitaries(d, m, rng)
        total += np.einsum("nab,ncd->acbd", U, U.conj()).reshape(d * d, d * d)
        tr2[done : done + m] = np.abs(np.trace(U, axis1=1, axis2=2)) ** 2
        done += m
    est = total / mc_samples
    # per-sample normal equations: alpha d^2 + beta d = |Tr U|^2, alpha d + beta d^2 = d
    G = np.array([[d * d, d], [d, d * d]], dtype=float)
    rhs = np.stack([tr2, np.full(mc_samples, float(d))])
    coef = np.linalg.solve(G, rhs)
    a, b = coef.mean(axis=1)
    se = coef.std(axis=1, ddof=1) / np.sqrt(mc_samples)
    fit = a * np.eye(d * d) + b * swap_conjugate(d)
    res = np.linalg.norm(est - fit, 2) / np.linalg.norm(est, 2)
    return FirstMoment(d, est, float(a), float(b), float(se[0]), float(se[1]), float(res), mc_samples)


# ---------------------------------------------------------------------------
# batches


VARIANTS = ("GUE", "GOE", "KFold", "TensorProductGUE", "PowerFold", "Heisenberg", "O3Model", "QuantumDouble", "Poisson")


@dataclass
class EnsembleSpec:
    variant: str
    params: dict = field(default_factory=dict)
    precision: PrecisionForm | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidArgumentError(f"unknown variant {self.variant!r}")
        if self.variant == "KFold" and self.precision is None:
            raise InvalidArgumentError("KFold requires a PrecisionForm")

    def dimension(self) -> int:
        p = self.params
        v = self.variant
        if v in ("GUE", "GOE", "Poisson"):
            return int(p["n"])
        if v == "KFold":
            return self.precision.n
        if v == "TensorProductGUE":
            return math.prod(p["dims"])
        if v == "PowerFold":
            return int(p["n"]) ** int(p["k"])
        if v == "Heisenberg":
            return 2 ** _n_sites(_edges(p["graph"]), p.get("n_sites"))
        if v == "O3Model":
            return 3 ** _n_sites(_edges(p["graph"]), p.get("n_sites"))
        if v == "QuantumDouble":
            return len(p["table"]) ** (2 * p.get("width", 2) * p.get("height", 2))
        raise AssertionError(v)

    def draw(self, seed) -> np.ndarray:
        p = self.params
        v = self.variant
        if self.dimension() > MAX_DIM:
            raise ResourceLimitError(f"dimension {self.dimension()} exceeds cap {MAX_DIM}")
        if v == "GUE":
            return sample_gue(p["n"], p.get("scale", 1.0), seed)
        if v == "GOE":
            return sample_goe(p["n"], p.get("scale", 1.0), seed)
        if v == "Poisson":
            rng = as_generator(seed)
            return np.diag(rng.uniform(0, 1, int(p["n"]))).astype(complex)
        if v == "KFold":
            return sample_kfold(self.precision, seed)
        if v == "TensorProductGUE":
            return sample_tensor_product(p["dims"], p.get("scale", 1.0), seed)
        if v == "PowerFold":
            return sample_power_fold(k=p["k"], n=p["n"], scale=p.get("scale", 1.0), seed=seed)
        if v == "Heisenberg":
            return sample_heisenberg(p["graph"], p.get("noise_scale", 0.0), seed, p.get("n_sites"))
        if v == "O3Model":
            return sample_o3(p["graph"], seed, p.get("n_sites"), p.get("orthogonal", "haar")).astype(complex)
        if v == "QuantumDouble":
            return quantum_double(p["table"], p.get("width", 2), p.get("height", 2)).hamiltonian.astype(complex)
        raise AssertionError(v)


@dataclass
class SampleBatch:
    spec: EnsembleSpec
    master_seed: int
    seeds: np.ndarray
    samples: np.ndarray  # (count, n, n) complex

    def __len__(self):
        return len(self.samples)

    def coordinates(self) -> np.ndarray:
        return T.vec_h(self.samples, check=False)


def sample_batch(spec: EnsembleSpec, count: int, master_seed: int, threads: int = 1) -> SampleBatch:
    if count < 1:
        raise InvalidArgumentError("count must be positive")
    seeds = np.array([sample_seed(master_seed, i) for i in range(count)], dtype=np.uint64)
    draw = lambda s: spec.draw(int(s))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            out = list(ex.map(draw, seeds))
    else:
        out = [draw(s) for s in seeds]
    return SampleBatch(spec, int(master_seed), seeds, np.array(out))


def batch_to_json(batch: SampleBatch) -> dict:
    return {
        "schema_version": 1,
        "variant": batch.spec.variant,
        "params": batch.spec.params,
        "master_seed": batch.master_seed,
        "seeds": [int(s) for s in batch.seeds],
        "samples": [[[[float(z.real), float(z.imag)] for z in row] for row in H] for H in batch.samples],
    }


def samples_from_json(obj: dict) -> np.ndarray:
    arr = np.asarray(obj["samples"], dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def batch_csv_rows(batch: SampleBatch):
    """Header plus one row per sample; entry (i, j) as an re/im column pair."""
    n = batch.samples.shape[1]
    header = ["sample", "seed"]
    for i in range(n):
        for j in range(n):
            header += [f"h_{i}_{j}_re", f"h_{i}_{j}_im"]
    rows = []
    for idx, (s, H) in enumerate(zip(batch.seeds, batch.samples)):
        flat = H.reshape(-1)
        vals = np.empty(2 * flat.size)
        vals[0::2], vals[1::2] = flat.real, flat.imag
        rows.append([idx, int(s)] + [repr(float(v)) for v in vals])
    return header, rows
