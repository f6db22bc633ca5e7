import numpy as np
import pytest

from kfold import commutant as C
from kfold import repcore as R
from kfold import tensor as T
from kfold.errors import InvalidArgumentError, NotPositiveDefiniteError, ResourceLimitError
from kfold.rng import haar_unitary


def _schur_weyl_dim(k, d):
    return sum(R.hook_dimension(mu) ** 2 for mu in R.enumerate_partitions(2 * k, max_rows=d))


@pytest.mark.parametrize("k,d", [(1, 2), (1, 3), (2, 2), (2, 3), (2, 4)])
def test_raw_commutant_rank_is_schur_weyl_dimension(k, d):
    info = C.commutant_rank(k, d)
    assert info.rank == _schur_weyl_dim(k, d)
    assert info.gap is None or info.gap > 1e3


def test_mixed_generators_commute_with_mixed_action(rng):
    k, d = 1, 3
    U = haar_unitary(d, rng)
    W = np.kron(U, U.conj())
    for M in C.mixed_commutant_basis(k, d):
        M = np.asarray(M.toarray() if hasattr(M, "toarray") else M)
        assert np.allclose(W @ M, M @ W)


def test_commutant_permutations_count():
    assert len(C.commutant_permutations(2)) == 24


@pytest.mark.parametrize("d,complex_dim,herm_dim", [(2, 10, 8), (3, 15, 12), (4, 16, 13), (5, 16, 13)])
def test_full_constraint_dimensions(d, complex_dim, herm_dim):
    fam = C.symmetrized_family(C.ConstraintSet(2, d))
    assert (fam.complex_commutant_dim, fam.hermitian_dim) == (complex_dim, herm_dim)
    for info in fam.spans.values():
        assert info.gap is None or info.gap >= 1e3


def test_complex_dim_matches_c_coefficients():
    for d in (2, 3, 4):
        fam = C.symmetrized_family(C.ConstraintSet(2, d))
        assert fam.complex_commutant_dim == R.sum_of_squares(R.collapse_sign(R.c_coefficients(2, d)))


def test_k1_family_is_identity_and_trace():
    fam = C.symmetrized_family(C.ConstraintSet(1, 3))
    assert (fam.complex_commutant_dim, fam.hermitian_dim, fam.form_dim) == (2, 2, 2)


@pytest.mark.parametrize("kw", [dict(), dict(include_half_swap=False), dict(include_permutation_symmetry=False)])
def test_family_is_invariant_under_its_generators(kw):
    cons = C.ConstraintSet(2, 2, **kw)
    fam = C.symmetrized_family(cons)
    gens = C.constraint_generators(cons, n_haar=4, seed=3)
    assert C.max_commutator(fam, gens) < 1e-10


def test_realized_forms_are_symmetric_and_orthonormal():
    fam = C.symmetrized_family(C.ConstraintSet(2, 2))
    basis = fam.coordinate_basis
    for E in basis:
        assert np.allclose(E, E.T)
    G = np.array([[np.sum(a * b) for b in basis] for a in basis])
    assert np.linalg.matrix_rank(G) == fam.form_dim


def test_identity_coefficients_reproduce_identity():
    fam = C.symmetrized_family(C.ConstraintSet(2, 2))
    M = fam.realize(fam.combine(fam.identity_coefficients()))
    assert np.allclose(M, np.eye(fam.n**2))


def test_coefficients_of_roundtrip(rng):
    fam = C.symmetrized_family(C.ConstraintSet(2, 3))
    c = rng.normal(size=fam.hermitian_dim)
    assert np.allclose(fam.coefficients_of(fam.combine(c)), c)


def test_precision_builders(rng):
    fam = C.symmetrized_family(C.ConstraintSet(2, 2))
    P = C.random_precision(fam, seed=4, margin=0.5)
    assert np.isclose(P.min_eigenvalue, 0.5)
    L = P.sampling_factor()
    assert np.allclose(L @ L.T, P.covariance())
    assert np.allclose(P.covariance() @ P.matrix, np.eye(P.matrix.shape[0]))
    with pytest.raises(NotPositiveDefiniteError):
        C.build_precision(fam, -fam.identity_coefficients())
    with pytest.raises(InvalidArgumentError):
        C.build_precision(fam, np.ones(3))


def test_random_precision_is_invariant(rng):
    cons = C.ConstraintSet(2, 2)
    fam = C.symmetrized_family(cons)
    P = C.random_precision(fam, seed=1)
    for _, Rm, w in C.constraint_generators(cons, n_haar=3, seed=2):
        assert np.allclose(Rm @ P.matrix @ Rm.T, P.matrix, atol=1e-10)


def test_corrupted_precision_is_not_invariant():
    cons = C.ConstraintSet(2, 2)
    fam = C.symmetrized_family(cons)
    P = C.corrupted_precision(fam, 0.9, seed=1)
    Rm = C.constraint_generators(cons, n_haar=1, seed=2)[0][1]
    assert np.abs(Rm @ P.matrix @ Rm.T - P.matrix).max() > 1e-2
    assert P.min_eigenvalue > 0


def test_principal_angles_zero_for_same_span():
    fam = C.symmetrized_family(C.ConstraintSet(2, 2))
    ang = C.principal_angles(fam.operator_coefficients, fam.operator_coefficients, 2, 2)
    assert np.allclose(ang, 0, atol=1e-6)


def test_block_decomposition_multiplicities():
    fam = C.symmetrized_family(C.ConstraintSet(2, 2))
    bs = C.block_decompose(fam, include_half_swap=False, seed=0)
    assert bs.reconstruction_error < 1e-8
    assert sum(m * m for m in bs.multiplicities) == C.symmetrized_family(
        C.ConstraintSet(2, 2, include_half_swap=False)).complex_commutant_dim


def test_caps():
    with pytest.raises(ResourceLimitError):
        C.ConstraintSet(4, 2)
    with pytest.raises(ResourceLimitError):
        C.symmetrized_family(C.ConstraintSet(2, 9))


def test_dimension_audit_warns_below_threshold():
    rep = C.dimension_audit(2, [2])
    row = rep["rows"][0]
    assert not row["matches_reference"] and "warning" in row
    full = row["subsets"]["perm+half_swap"]
    assert (full["complex_commutant_dim"], full["hermitian_dim"]) == (10, 8)


def test_transpose_coordinates():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    H = A + A.conj().T
    assert np.allclose(C.transpose_coordinates(3) @ T.vec_h(H), T.vec_h(H.T))
