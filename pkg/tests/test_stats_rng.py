import xml.etree.ElementTree as ET

import numpy as np
import pytest

from kfold import rng as rngmod
from kfold import spectra as S
from kfold import stats as St
from kfold.errors import InvalidArgumentError
from kfold.svgplot import histogram_svg


def test_as_generator_requires_explicit_seed():
    with pytest.raises(InvalidArgumentError):
        rngmod.as_generator(None)
    g = np.random.default_rng(1)
    assert rngmod.as_generator(g) is g


def test_sample_seeds_are_stable_and_distinct():
    s = rngmod.sample_seeds(7, 100)
    assert len(set(int(x) for x in s)) == 100
    assert int(s[5]) == rngmod.sample_seed(7, 5)
    assert rngmod.sample_seed(7, 5) != rngmod.sample_seed(8, 5)


def test_haar_unitary_is_unitary_and_phase_uniform():
    U = rngmod.haar_unitaries(3, 4000, 0)
    assert np.allclose(np.einsum("nji,njk->nik", U.conj(), U), np.eye(3), atol=1e-12)
    # Haar: E[Tr U] = 0 and E|Tr U|^2 = 1
    tr = np.trace(U, axis1=1, axis2=2)
    assert abs(tr.mean()) < 0.05
    assert abs((np.abs(tr) ** 2).mean() - 1) < 0.08


def test_haar_orthogonal():
    O = rngmod.haar_orthogonal(4, 3)
    assert np.allclose(O.T @ O, np.eye(4))


def test_row_space_finds_rank():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(500, 3)) @ rng.normal(size=(3, 10))
    Q = St.row_space(X, chunk=64)
    assert Q.shape == (3, 10)
    assert np.allclose(Q @ Q.T, np.eye(3))
    assert np.allclose(X @ Q.T @ Q, X)


def test_covariance_test_accepts_identical_law_and_rejects_rescaled():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(4000, 5))
    Y = X @ np.linalg.qr(rng.normal(size=(5, 5)))[0]  # isotropic: same covariance
    assert St.covariance_invariance_test(X, Y, 30, 2).passed
    Z = X * np.array([1, 1, 1, 1, 1.5])
    assert not St.covariance_invariance_test(X, Z, 30, 2).passed


def test_compare_moments():
    rng = np.random.default_rng(2)
    X, Y = rng.normal(size=(20000, 4)), rng.normal(size=(20000, 4))
    mc = St.compare_moments(X, Y)
    assert mc.passed() and mc.n_second == 10
    assert not St.compare_moments(X, 1.2 * Y).passed()


def test_ks_two_sample():
    rng = np.random.default_rng(3)
    _, p = St.ks_two_sample(rng.normal(size=2000), rng.normal(size=2000))
    assert p > 0.01
    _, p = St.ks_two_sample(rng.normal(size=2000), rng.normal(0.3, size=2000))
    assert p < 1e-6


def test_svg_is_self_contained_xml():
    rng = np.random.default_rng(4)
    svg = histogram_svg(rng.exponential(size=500), np.linspace(0, 4, 21), "t<i>tle", "s",
                        [("Wigner", S.wigner_surmise), ("Poisson", S.poisson_spacing)])
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    assert "href" not in svg and "<image" not in svg
    assert svg.count("<polyline") == 2
    assert "t&lt;i&gt;tle" in svg


def test_svg_handles_empty_data():
    ET.fromstring(histogram_svg([], np.linspace(0, 1, 5)))
