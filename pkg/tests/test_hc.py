import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kfold import hc
from kfold.errors import InvalidArgumentError


def _n2_closed_form(a, b, t):
    num = math.exp(t * (a[0] * b[0] + a[1] * b[1])) - math.exp(t * (a[0] * b[1] + a[1] * b[0]))
    return num / (t * (a[0] - a[1]) * (b[0] - b[1]))


def _rank_one_oracle(b, t):
    # A = diag(0, .., 0, 1): |U_nj|^2 is uniform on the simplex, so the
    # integral is (n-1)! times the divided difference of exp over t*b
    n = len(b)
    x = [t * v for v in b]
    total = 0.0
    for j in range(n):
        den = math.prod(x[j] - x[k] for k in range(n) if k != j)
        total += math.exp(x[j]) / den
    return math.factorial(n - 1) * total


def test_reference_value():
    v = hc.hciz_exact(hc.HcizProblem((0, 1), (0, 1), 1.0))
    assert abs(v.value - (math.e - 1)) < 1e-10
    assert v.method == "determinant"


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=2, max_size=2, unique=True),
       st.lists(st.floats(-2, 2), min_size=2, max_size=2, unique=True),
       st.floats(0.1, 2.0))
def test_n2_matches_closed_form(a, b, t):
    if min(abs(a[0] - a[1]), abs(b[0] - b[1])) < 1e-3:
        return
    assert math.isclose(hc.hciz_exact(hc.HcizProblem(a, b, t)).value, _n2_closed_form(a, b, t), rel_tol=1e-10)


@pytest.mark.parametrize("b", [(0.3, -0.5, 1.2), (0.0, 1.0, 2.0), (-1.0, 0.2, 0.9, 1.5)])
def test_confluent_rank_one(b):
    n = len(b)
    a = (0.0,) * (n - 1) + (1.0,)
    v = hc.hciz_exact(hc.HcizProblem(a, b, 0.8))
    assert v.method == "richardson"
    assert math.isclose(v.value, _rank_one_oracle(b, 0.8), rel_tol=1e-8)


def test_confluent_exact_two():
    # 1 - |U_31|^2 with |U_31|^2 ~ Beta(1, 2) gives exactly 2
    v = hc.hciz_exact(hc.HcizProblem((0, 0, 1), (0, 1, 1), 1.0))
    assert math.isclose(v.value, 2.0, rel_tol=1e-9)


def test_special_cases():
    assert hc.hciz_exact(hc.HcizProblem((2.0,), (3.0,), 0.5)).value == pytest.approx(math.exp(3.0))
    assert hc.hciz_exact(hc.HcizProblem((1, 2), (3, 4), 0.0)).value == 1.0
    v = hc.hciz_exact(hc.HcizProblem((1.5, 1.5, 1.5), (1, 2, 4), 0.3))
    assert v.value == pytest.approx(math.exp(0.3 * 1.5 * 7))


def test_symmetry_in_a_and_b():
    p = hc.HcizProblem((0.1, 0.7, -0.4), (1.0, -0.3, 0.2), 1.1)
    q = hc.HcizProblem(p.b, p.a, p.t)
    assert math.isclose(hc.hciz_exact(p).value, hc.hciz_exact(q).value, rel_tol=1e-12)


def test_problem_validation():
    with pytest.raises(InvalidArgumentError):
        hc.HcizProblem((1, 2), (1,), 1.0)
    with pytest.raises(InvalidArgumentError):
        hc.HcizProblem((1, float("nan")), (1, 2), 1.0)
    with pytest.raises(InvalidArgumentError):
        hc.hciz_monte_carlo(hc.HcizProblem((1, 2), (1, 2), 1.0), samples=10)


def test_monte_carlo_agrees():
    p = hc.HcizProblem((0.2, -0.6, 0.9), (0.4, 1.0, -0.3), 1.0)
    mean, se = hc.hciz_monte_carlo(p, 50_000, seed=2)
    assert abs(mean - hc.hciz_exact(p).value) < 4 * se


def test_weyl_sum_ratio_is_vandermonde_factor():
    a, b, t = (0.1, 0.5, 1.3), (-0.2, 0.4, 0.7), 0.9
    r = hc.compare_with_weyl_sum(hc.HcizProblem(a, b, t))
    n = 3
    va = math.prod(a[j] - a[i] for i in range(n) for j in range(i + 1, n))
    vb = math.prod(b[j] - b[i] for i in range(n) for j in range(i + 1, n))
    expected = math.factorial(n) * math.prod(math.factorial(p) for p in range(n)) / (t ** 3 * va * vb)
    assert math.isclose(r["ratio"], expected, rel_tol=1e-9)


def test_weyl_sum_vanishes_when_confluent():
    r = hc.compare_with_weyl_sum(hc.HcizProblem((0, 0, 1), (0, 1, 2), 1.0))
    assert r["weyl_sum"] == 0.0 and r["ratio"] is None
