import math
from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kfold import repcore as R
from kfold.errors import InvalidArgumentError

# textbook S_3 and S_4 tables, columns ordered e, (12), (123) / e, (12), (12)(34), (123), (1234)
S3_TABLE = {(3,): (1, 1, 1), (2, 1): (2, 0, -1), (1, 1, 1): (1, -1, 1)}
S4_TABLE = {
    (4,): (1, 1, 1, 1, 1),
    (3, 1): (3, 1, -1, 0, -1),
    (2, 2): (2, 0, 2, -1, 0),
    (2, 1, 1): (3, -1, -1, 0, 1),
    (1, 1, 1, 1): (1, -1, 1, 1, -1),
}
S4_COLS = ((1, 1, 1, 1), (2, 1, 1), (2, 2), (3, 1), (4,))


def test_partition_counts_match_oeis():
    assert [len(R.enumerate_partitions(n)) for n in range(1, 9)] == [1, 2, 3, 5, 7, 11, 15, 22]


def test_partitions_reverse_lex_and_row_cap():
    parts = R.enumerate_partitions(4)
    assert [tuple(p) for p in parts] == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
    assert all(p.rows <= 2 for p in R.enumerate_partitions(6, max_rows=2))
    assert len(R.enumerate_partitions(6, max_rows=2)) == 4


def test_partition_parsing_and_validation():
    assert R.as_partition("3,1") == (3, 1)
    assert R.as_partition([2, 2]).conjugate() == (2, 2)
    assert R.as_partition((3, 1)).conjugate() == (2, 1, 1)
    with pytest.raises(InvalidArgumentError):
        R.as_partition((1, 2))
    with pytest.raises(InvalidArgumentError):
        R.as_partition((2, -1))


def test_class_sizes_sum_to_factorial():
    for k in range(1, 8):
        assert sum(c.size for c in R.cycle_types(k)) == math.factorial(k)


def test_cycle_type_and_sign_against_brute_force():
    for p in permutations(range(5)):
        seen, lengths = set(), []
        for i in range(5):
            if i in seen:
                continue
            n, j = 0, i
            while j not in seen:
                seen.add(j)
                j = p[j]
                n += 1
            lengths.append(n)
        assert R.cycle_type_of(p) == tuple(sorted(lengths, reverse=True))
        inversions = sum(p[i] > p[j] for i in range(5) for j in range(i + 1, 5))
        assert R.perm_sign(p) == (-1) ** inversions


def test_square_and_double_cycle_types():
    # squaring a 4-cycle splits it into two 2-cycles; a 3-cycle stays a 3-cycle
    assert R.square_cycle_type((4,)) == (2, 2)
    assert R.square_cycle_type((3, 1)) == (3, 1)
    # the power-sum plethysm p_2 doubles every cycle length
    assert R.double_cycle_type((2, 1)) == (4, 2)


def test_s3_and_s4_tables_match_textbook():
    for table, cols in ((S3_TABLE, ((1, 1, 1), (2, 1), (3,))), (S4_TABLE, S4_COLS)):
        for lam, row in table.items():
            assert tuple(R.character(lam, c) for c in cols) == row


@settings(max_examples=8, deadline=None)
@given(st.integers(min_value=1, max_value=7))
def test_row_orthogonality(k):
    ct = R.character_table(k)
    sizes = np.array([c.size for c in ct.classes])
    X = np.array(ct.values)
    G = (X * sizes) @ X.T
    assert np.array_equal(G, math.factorial(k) * np.eye(len(X), dtype=int))


@settings(max_examples=8, deadline=None)
@given(st.integers(min_value=1, max_value=7))
def test_identity_column_is_hook_dimension(k):
    ct = R.character_table(k)
    dims = [R.hook_dimension(lam) for lam in ct.partitions]
    assert [row[0] for row in ct.values] == dims
    assert sum(d * d for d in dims) == math.factorial(k)


def test_sign_character_times_lambda_is_conjugate():
    for k in range(2, 7):
        for lam in R.enumerate_partitions(k):
            for c in R.cycle_types(k):
                sign = (-1) ** (k - len(c.lengths))
                assert R.character(lam.conjugate(), c) == sign * R.character(lam, c)


def test_s2_kronecker():
    plus, minus = (2,), (1, 1)
    assert R.kronecker(plus, plus, plus) == 1
    assert R.kronecker(plus, minus, minus) == 1
    assert R.kronecker(minus, minus, plus) == 1
    assert R.kronecker(plus, plus, minus) == 0
    assert R.kronecker(minus, minus, minus) == 0


def test_kronecker_with_trivial_and_sign():
    for k in range(2, 6):
        parts = R.enumerate_partitions(k)
        for lam in parts:
            for mu in parts:
                assert R.kronecker(lam, (k,), mu) == int(lam == mu)
                assert R.kronecker(lam, (1,) * k, mu) == int(lam.conjugate() == mu)


def test_kronecker_rejects_mixed_weights():
    with pytest.raises(InvalidArgumentError):
        R.kronecker((2,), (2, 1), (3,))


def _remove_corner(mu):
    out = set()
    for i in range(len(mu)):
        if i == len(mu) - 1 or mu[i] > mu[i + 1]:
            nu = list(mu)
            nu[i] -= 1
            out.add(tuple(x for x in nu if x))
    return out


def test_branching_to_sk_times_s1_removes_corners():
    for n in range(2, 7):
        for mu in R.enumerate_partitions(n):
            br = R.branching(mu, n - 1, 1)
            assert {tuple(a) for (a, b) in br} == _remove_corner(mu)
            assert set(br.values()) == {1}


def test_branching_dimensions_add_up():
    for n in range(2, 7):
        for k in range(1, n):
            for mu in R.enumerate_partitions(n):
                total = sum(m * R.hook_dimension(a) * R.hook_dimension(b) for (a, b), m in R.branching(mu, k, n - k).items())
                assert total == R.hook_dimension(mu)


def test_s4_to_s2_s2_branching():
    expected = {
        (4,): {("+", "+")},
        (3, 1): {("+", "+"), ("+", "-"), ("-", "+")},
        (2, 2): {("+", "+"), ("-", "-")},
        (2, 1, 1): {("-", "-"), ("+", "-"), ("-", "+")},
        (1, 1, 1, 1): {("-", "-")},
    }
    for mu, pairs in expected.items():
        got = {(R.sign_label(a), R.sign_label(b)) for a, b in R.branching(mu, 2, 2)}
        assert got == pairs


def test_perm_rep_multiplicity_is_unitary_dimension():
    for k in range(1, 6):
        for d in range(1, 5):
            total = 0
            for lam in R.enumerate_partitions(k):
                m = R.perm_rep_multiplicity(lam, d)
                assert m == R.unitary_irrep_dim(lam, d)
                total += m * R.hook_dimension(lam)
            assert total == d**k


def test_unitary_dim_examples():
    assert R.unitary_irrep_dim((2,), 3) == 6
    assert R.unitary_irrep_dim((1, 1), 3) == 3
    assert R.unitary_irrep_dim((2, 1), 3) == 8
    assert R.unitary_irrep_dim((1, 1, 1), 2) == 0


@pytest.mark.parametrize("d,expected", [(2, 10), (3, 15), (4, 16), (5, 16)])
def test_c_coefficient_sum_of_squares(d, expected):
    table = R.c_coefficients(2, d)
    assert R.sum_of_squares(R.collapse_sign(table)) == expected
    assert R.collapse_sign(table) == R.c_coefficients_direct(2, d)


def test_c_coefficients_split_and_integrality():
    table = R.c_coefficients(2, 4)
    assert table[((2, 2), (2,), "+")] == 2
    assert R.sum_of_squares(table) == 12
    assert all(isinstance(v, int) and v > 0 for v in table.values())


def test_c_coefficients_k1():
    table = R.collapse_sign(R.c_coefficients(1, 3))
    assert R.sum_of_squares(table) == 2


def test_comparison_reports():
    c_rows = {(r["mu"], r["mu_s"]): r for r in R.compare_c_table(2, 4)}
    bad = c_rows[("(2,2)", "+")]
    assert (bad["computed"], bad["published"], bad["match"]) == (2, 1, False)
    assert sum(not r["match"] for r in c_rows.values()) == 1
    assert sum(not r["match"] for r in R.compare_s4_table()) == 6
    assert sum(not r["match"] for r in R.compare_s4_branching()) == 4


def test_class_sum_is_exact():
    # characters are integers, the class average is a Fraction, never a float
    val = R._class_sum(4, lambda c: R.character((3, 1), c))
    assert isinstance(val, Fraction) and val == 0
