"""Exact combinatorics of symmetric-group and U(d) representations.

Everything here is integer (or ``Fraction``) arithmetic.  Partitions are
ordered reverse-lexicographically, conjugacy classes (cycle types)
lexicographically ascending so the identity class comes first.

Characters use the Specht-module convention: ``(k,)`` is the trivial
representation and ``chi_(k-1,1)(g) = fix(g) - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

from .errors import InvalidArgumentError

PLUS = "+"
MINUS = "-"


class Partition(tuple):
    """Weakly decreasing tuple of positive integers."""

    def __new__(cls, parts=()):
        parts = tuple(int(p) for p in parts)
        if any(p <= 0 for p in parts):
            raise InvalidArgumentError(f"partition parts must be positive: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise InvalidArgumentError(f"partition parts must be weakly decreasing: {parts}")
        return super().__new__(cls, parts)

    @property
    def weight(self) -> int:
        return sum(self)

    @property
    def rows(self) -> int:
        return len(self)

    def conjugate(self) -> "Partition":
        if not self:
            return Partition()
        return Partition(sum(1 for p in self if p > j) for j in range(self[0]))

    def __repr__(self):
        return "(" + ",".join(str(p) for p in self) + ")"

    __str__ = __repr__


def as_partition(obj) -> Partition:
    if isinstance(obj, Partition):
        return obj
    if isinstance(obj, str):
        obj = [int(x) for x in obj.strip("()[] ").split(",") if x.strip()]
    return Partition(obj)


def _partitions(k, max_part, max_rows):
    if k == 0:
        yield ()
        return
    if max_rows == 0:
        return
    for first in range(min(k, max_part), 0, -1):
        for rest in _partitions(k - first, first, max_rows - 1):
            yield (first,) + rest


def enumerate_partitions(k: int, max_rows: int | None = None) -> list[Partition]:
    """All partitions of ``k`` with at most ``max_rows`` parts, reverse-lexicographic."""
    if not isinstance(k, int) or k < 1:
        raise InvalidArgumentError(f"k must be a positive integer, got {k!r}")
    if max_rows is not None and max_rows < 1:
        raise InvalidArgumentError(f"max_rows must be positive, got {max_rows!r}")
    cap = k if max_rows is None else max_rows
    return [Partition(p) for p in _partitions(k, k, cap)]


@dataclass(frozen=True)
class CycleType:
    lengths: Partition
    size: int

    @property
    def weight(self) -> int:
        return self.lengths.weight

    def __str__(self):
        return str(self.lengths)


def class_size(lengths) -> int:
    lengths = as_partition(lengths)
    k = lengths.weight
    denom = 1
    for part in set(lengths):
        m = lengths.count(part)
        denom *= part**m * math.factorial(m)
    return math.factorial(k) // denom


def cycle_types(k: int) -> list[CycleType]:
    """Conjugacy classes of S_k, identity first."""
    parts = sorted(enumerate_partitions(k))
    out = [CycleType(p, class_size(p)) for p in parts]
    assert sum(c.size for c in out) == math.factorial(k)
    return out


def cycle_type_of(perm) -> Partition:
    """Cycle type of a permutation given as a tuple of images of 0..k-1."""
    perm = tuple(perm)
    seen = [False] * len(perm)
    lengths = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        n = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            n += 1
        lengths.append(n)
    return Partition(sorted(lengths, reverse=True))


def count_cycles(perm) -> int:
    return len(cycle_type_of(perm))


def perm_sign(perm) -> int:
    return -1 if (len(perm) - count_cycles(perm)) % 2 else 1


def square_cycle_type(lengths) -> Partition:
    """Cycle type of g^2 for g of the given cycle type."""
    out = []
    for l in lengths:
        if l % 2:
            out.append(l)
        else:
            out.extend([l // 2, l // 2])
    return Partition(sorted(out, reverse=True))


def double_cycle_type(lengths) -> Partition:
    return Partition(2 * l for l in lengths)


# ---------------------------------------------------------------------------
# characters: Murnaghan-Nakayama on beta-sets


@lru_cache(maxsize=None)
def _mn(beta: tuple, cycles: tuple) -> int:
    if not cycles:
        return 1
    r = cycles[0]
    rest = cycles[1:]
    occupied = set(beta)
    total = 0
    for b in beta:
        t = b - r
        if t < 0 or t in occupied:
            continue
        # beads jumped over give the height of the removed rim hook
        height = sum(1 for x in beta if t < x < b)
        new_beta = tuple(sorted((occupied - {b}) | {t}, reverse=True))
        total += (-1) ** height * _mn(new_beta, rest)
    return total


def _beta_set(lam: Partition, length: int) -> tuple:
    parts = list(lam) + [0] * (length - len(lam))
    return tuple(p + length - 1 - i for i, p in enumerate(parts))


def character(lam, cycle) -> int:
    """chi_lam evaluated on the class with the given cycle type."""
    lam = as_partition(lam)
    lengths = cycle.lengths if isinstance(cycle, CycleType) else as_partition(cycle)
    if lam.weight != lengths.weight:
        raise InvalidArgumentError(f"weight mismatch: {lam} vs {lengths}")
    if lam.weight == 0:
        return 1
    beta = _beta_set(lam, lam.weight)
    # larger cycles first keeps the recursion shallow
    return _mn(beta, tuple(sorted(lengths, reverse=True)))


@dataclass(frozen=True)
class CharacterTable:
    k: int
    partitions: tuple
    classes: tuple
    values: tuple  # values[i][j] = chi_{partitions[i]}(classes[j])

    def row(self, lam) -> tuple:
        return self.values[self.partitions.index(as_partition(lam))]

    def as_dict(self):
        return {
            str(lam): {str(c.lengths): v for c, v in zip(self.classes, row)}
            for lam, row in zip(self.partitions, self.values)
        }


def character_table(k: int) -> CharacterTable:
    parts = tuple(enumerate_partitions(k))
    classes = tuple(cycle_types(k))
    values = tuple(tuple(character(lam, c) for c in classes) for lam in parts)
    return CharacterTable(k, parts, classes, values)


def hook_dimension(lam) -> int:
    """dim of the S_k irreducible via the hook length formula."""
    lam = as_partition(lam)
    conj = lam.conjugate()
    hooks = 1
    for i, row in enumerate(lam):
        for j in range(row):
            hooks *= (row - j - 1) + (conj[j] - i - 1) + 1
    return math.factorial(lam.weight) // hooks


def unitary_irrep_dim(lam, d: int) -> int:
    """dim of the U(d) irreducible with highest weight lam (hook-content formula)."""
    lam = as_partition(lam)
    if d < 1:
        raise InvalidArgumentError(f"d must be positive, got {d}")
    if lam.rows > d:
        return 0
    conj = lam.conjugate()
    num = 1
    den = 1
    for i, row in enumerate(lam):
        for j in range(row):
            num *= d + j - i
            den *= (row - j - 1) + (conj[j] - i - 1) + 1
    return num // den


def _class_sum(k, fn) -> Fraction:
    total = Fraction(0)
    for c in cycle_types(k):
        total += c.size * fn(c.lengths)
    return total / math.factorial(k)


def _as_int(x: Fraction, what: str) -> int:
    if x.denominator != 1:
        raise ArithmeticError(f"{what} is not an integer: {x}")
    return int(x)


def kronecker(lam, lam2, mu) -> int:
    """Multiplicity of mu in lam (x) lam2 as S_k representations."""
    lam, lam2, mu = as_partition(lam), as_partition(lam2), as_partition(mu)
    if not lam.weight == lam2.weight == mu.weight:
        raise InvalidArgumentError(f"weights differ: {lam}, {lam2}, {mu}")
    k = lam.weight
    val = _class_sum(k, lambda c: character(lam, c) * character(lam2, c) * character(mu, c))
    return _as_int(val, "Kronecker coefficient")


def branching(mu, k: int, k2: int) -> dict:
    """Restriction of S_{k+k2} irreducible mu to S_k x S_k2.

    Returns ``{(lam, lam2): multiplicity}`` with zero entries omitted.
    """
    mu = as_partition(mu)
    if mu.weight != k + k2 or k < 1 or k2 < 1:
        raise InvalidArgumentError(f"{mu} is not a partition of {k}+{k2}")
    out = {}
    cls1, cls2 = cycle_types(k), cycle_types(k2)
    order = math.factorial(k) * math.factorial(k2)
    for lam in enumerate_partitions(k):
        for lam2 in enumerate_partitions(k2):
            total = 0
            for a in cls1:
                for b in cls2:
                    joint = Partition(sorted(a.lengths + b.lengths, reverse=True))
                    total += a.size * b.size * character(lam, a) * character(lam2, b) * character(mu, joint)
            mult = _as_int(Fraction(total, order), "branching multiplicity")
            if mult:
                out[(lam, lam2)] = mult
    return out


def perm_rep_multiplicity(lam, d: int) -> int:
    """Multiplicity of lam in the permutation representation on (C^d)^{(x)k}.

    Uses Tr S_sigma = d^{cycles(sigma)} and the 1/k! normalisation.
    """
    lam = as_partition(lam)
    if d < 1:
        raise InvalidArgumentError(f"d must be positive, got {d}")
    val = _class_sum(lam.weight, lambda c: character(lam, c) * d ** len(c))
    return _as_int(val, "permutation multiplicity")


def sign_label(lam) -> str:
    """'+' / '-' shorthand for the two S_2 irreducibles."""
    lam = as_partition(lam)
    if lam == (2,):
        return PLUS
    if lam == (1, 1):
        return MINUS
    return str(lam)


# ---------------------------------------------------------------------------
# C-coefficients for the bipartite / k-fold unitary ensemble


def _sym_square_unitary(mu, lam, sign) -> int:
    """Multiplicity of V_mu in Sym^2 (sign=+1) or Alt^2 (sign=-1) of V_lam."""
    k = lam.weight
    lr = branching(mu, k, k).get((lam, lam), 0)
    # <s_lam[p_2], s_mu> = (1/k!) sum_rho |C_rho| chi_lam(rho) chi_mu(2 rho)
    twist = _class_sum(k, lambda c: character(lam, c) * character(mu, double_cycle_type(c)))
    return _as_int((lr + sign * twist) / 2, "plethysm multiplicity")


def _sym_square_symmetric(mu_s, lam, sign) -> int:
    """Multiplicity of the S_k irreducible mu_s in Sym^2 / Alt^2 of lam."""
    val = _class_sum(
        lam.weight,
        lambda c: character(mu_s, c)
        * Fraction(character(lam, c) ** 2 + sign * character(lam, square_cycle_type(c)), 2),
    )
    return _as_int(val, "symmetric-square multiplicity")


def c_coefficients(k: int, d: int) -> dict:
    """Sector multiplicities C[(mu, mu_s, s)] for mu |- 2k, mu_s |- k, s in {+,-}.

    Only lam, lam2 and mu with at most d rows contribute.  Summing over s
    gives the unsplit C^k_{mu mu'} = sum B^mu_{lam lam2} c^{mu'}_{lam lam2}
    (see :func:`collapse_sign`).  The split over s is the eigenvalue of the
    exchange of the two V^{(x)k} factors: for lam != lam2 the pair
    (lam, lam2), (lam2, lam) contributes one copy to each sign, for
    lam == lam2 the sign is the product of the symmetric/antisymmetric
    square parities of the U(d) and S_k factors.
    """
    if k < 1 or d < 1:
        raise InvalidArgumentError(f"need k >= 1 and d >= 1, got k={k}, d={d}")
    lams = enumerate_partitions(k, max_rows=d)
    mus = enumerate_partitions(2 * k, max_rows=d)
    mu_ss = enumerate_partitions(k)
    table = {}
    for mu in mus:
        br = branching(mu, k, k)
        for mu_s in mu_ss:
            plus = minus = 0
            for i, lam in enumerate(lams):
                for lam2 in lams[i:]:
                    if lam == lam2:
                        a_p = _sym_square_unitary(mu, lam, +1)
                        a_m = _sym_square_unitary(mu, lam, -1)
                        b_p = _sym_square_symmetric(mu_s, lam, +1)
                        b_m = _sym_square_symmetric(mu_s, lam, -1)
                        plus += a_p * b_p + a_m * b_m
                        minus += a_p * b_m + a_m * b_p
                    else:
                        n = br.get((lam, lam2), 0) * kronecker(lam, lam2, mu_s)
                        plus += n
                        minus += n
            for s, val in ((PLUS, plus), (MINUS, minus)):
                if val:
                    table[(mu, mu_s, s)] = val
    return table


def collapse_sign(table: dict) -> dict:
    """Sum a (mu, mu_s, s) table over s, giving {(mu, mu_s): C}."""
    out = {}
    for (mu, mu_s, _), v in table.items():
        out[(mu, mu_s)] = out.get((mu, mu_s), 0) + v
    return out


def c_coefficients_direct(k: int, d: int) -> dict:
    """Unsplit C^k_{mu mu'} straight from the defining sum over lam, lam2."""
    lams = enumerate_partitions(k, max_rows=d)
    out = {}
    for mu in enumerate_partitions(2 * k, max_rows=d):
        br = branching(mu, k, k)
        for mu_s in enumerate_partitions(k):
            val = sum(
                br.get((lam, lam2), 0) * kronecker(lam, lam2, mu_s)
                for lam, lam2 in product(lams, lams)
            )
            if val:
                out[(mu, mu_s)] = val
    return out


def sum_of_squares(table: dict) -> int:
    return sum(v * v for v in table.values())


# published bipartite values at k=2, keyed like collapse_sign output
REFERENCE_C_K2 = {
    ((4,), (2,)): 1,
    ((1, 1, 1, 1), (2,)): 1,
    ((2, 2), (2,)): 1,
    ((2, 1, 1), (2,)): 1,
    ((2, 1, 1), (1, 1)): 2,
    ((3, 1), (2,)): 1,
    ((3, 1), (1, 1)): 2,
}

# published S_4 character table, rows as labelled there, columns
# e, (12), (12)(34), (123), (1234)
REFERENCE_S4_TABLE = {
    (4,): (1, 1, 1, 1, 1),
    (1, 1, 1, 1): (1, -1, 1, -1, 1),
    (2, 2): (2, 0, 2, -1, 0),
    (2, 1, 1): (3, 1, -1, 0, -1),
    (3, 1): (3, -1, -1, 0, 1),
}
REFERENCE_S4_COLUMNS = ((1, 1, 1, 1), (2, 1, 1), (2, 2), (3, 1), (4,))

# published nonzero S_4 -> S_2 x S_2 branching rules
REFERENCE_S4_BRANCHING = {
    (4,): {("+", "+")},
    (1, 1, 1, 1): {("-", "-")},
    (2, 2): {("+", "+"), ("-", "-")},
    (3, 1): {("-", "-"), ("+", "-"), ("-", "+")},
    (2, 1, 1): {("+", "+"), ("+", "-"), ("-", "+")},
}

REFERENCE_S2_KRONECKER = {("+", "+", "+"): 1, ("+", "-", "-"): 1, ("-", "-", "+"): 1}


def compare_s4_table() -> list[dict]:
    """Entry-by-entry comparison of the computed S_4 table with the published one."""
    rows = []
    for lam, ref_row in REFERENCE_S4_TABLE.items():
        for col, ref_val in zip(REFERENCE_S4_COLUMNS, ref_row):
            val = character(lam, col)
            rows.append({"partition": str(Partition(lam)), "class": str(Partition(col)),
                         "computed": val, "published": ref_val, "match": val == ref_val})
    return rows


def compare_s4_branching() -> list[dict]:
    rows = []
    for mu, ref_set in REFERENCE_S4_BRANCHING.items():
        computed = {(sign_label(a), sign_label(b)) for (a, b) in branching(mu, 2, 2)}
        for pair in sorted(ref_set | computed):
            rows.append({"mu": str(Partition(mu)), "pair": "".join(pair),
                         "computed": int(pair in computed), "published": int(pair in ref_set),
                         "match": (pair in computed) == (pair in ref_set)})
    return rows


def compare_c_table(k: int = 2, d: int = 4) -> list[dict]:
    computed = collapse_sign(c_coefficients(k, d))
    rows = []
    keys = sorted(set(computed) | set(REFERENCE_C_K2), key=lambda t: (tuple(-x for x in t[0]), t[1]))
    for mu, mu_s in keys:
        c = computed.get((as_partition(mu), as_partition(mu_s)), 0)
        p = REFERENCE_C_K2.get((tuple(mu), tuple(mu_s)), 0)
        rows.append({"mu": str(as_partition(mu)), "mu_s": sign_label(mu_s),
                     "computed": c, "published": p, "match": c == p})
    return rows
