import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l2sheaf.chain import ChainError, adjoint_complex, build_cochain, build_cosheaf_chain, laplacian
from l2sheaf.complex import GammaComplex, NonFreeAction
from l2sheaf.fixtures import (
    circle_z,
    grid_plane_z2,
    hexagon_z2,
    octahedron_z2,
    point,
    random_free_complex,
    random_sheaf,
    random_trivial_complex,
)
from l2sheaf.group_algebra import GroupRingElement, GroupRingMatrix, GroupSpec
from l2sheaf.l2 import l2_betti
from l2sheaf.sheaf import constant_sheaf, descend, dual_cosheaf, skyscraper, subdivision_pullback
from oracles import simplicial_betti

Z = GroupSpec.free_abelian(1)


def el(group, coeffs):
    return GroupRingElement(group, coeffs)


def is_unit_times_one_minus_t(x):
    """x = c·t^a·(1 - t) for a non-zero scalar c and an integer a."""
    if len(x.coeffs) != 2:
        return False
    (a,), (b,) = sorted(x.coeffs)
    return b == a + 1 and x.coeffs[(a,)] == -x.coeffs[(b,)]


def test_circle_cochain_ranks_and_determinant():
    c = circle_z()
    K = build_cochain(c, constant_sheaf(c))
    assert K.subdivided
    assert (K.rank(0), K.rank(1)) == (2, 2)
    d = K.d(0)
    det = d[0, 0] * d[1, 1] - d[0, 1] * d[1, 0]
    assert is_unit_times_one_minus_t(det)


def test_point_complex():
    K = build_cochain(point(), constant_sheaf(point()))
    assert K.ranks == {0: 1} and K.diffs == {}
    assert laplacian(K, 0).is_zero()


def test_hexagon_cochain_entries():
    c = hexagon_z2()
    K = build_cochain(c, constant_sheaf(c))
    assert not K.subdivided and (K.rank(0), K.rank(1)) == (3, 3)
    d = K.d(0)
    t = c.group
    nontrivial = [(i, j) for i in range(3) for j in range(3) if d[i, j] and 1 in d[i, j].coeffs]
    # exactly one entry carries the generator t: the edge closing the loop back to vertex orbit 0
    assert len(nontrivial) == 1
    # every entry is ±g, and each row has one +1-type and one -1-type entry after augmentation
    aug = d.augmentation()
    for row in aug:
        assert sorted(v.re for v in row.values()) == [-1, 1]
    assert t.order == 2


def test_augmentation_is_quotient_complex():
    for c in (hexagon_z2(), octahedron_z2()):
        K = build_cochain(c, constant_sheaf(c))
        q = c.quotient_complex()
        Kq = build_cochain(q, descend(constant_sheaf(c), q))
        A = K.augmentation()
        assert A.ranks == Kq.ranks
        for k in A.diffs:
            assert A.d(k) == Kq.d(k)


def test_adjoint_example():
    A = GroupRingMatrix(Z, 1, 1, {(0, 0): el(Z, {(0,): 1, (1,): -1})})
    assert A.adjoint()[0, 0] == el(Z, {(0,): 1, (-1,): -1})
    assert GroupRingMatrix.zeros(Z, 2, 3).adjoint().is_zero()


def test_hexagon_adjoint_matches_hand_conjugate_transpose():
    c = hexagon_z2()
    K = build_cochain(c, constant_sheaf(c))
    d, ds = K.d(0), adjoint_complex(K)[0]
    assert ds.shape == (3, 3)
    for i in range(3):
        for j in range(3):
            assert ds[j, i] == d[i, j].star()
    assert ds.adjoint() == d


def test_laplacian_out_of_range():
    K = build_cochain(circle_z(), constant_sheaf(circle_z()))
    with pytest.raises(ChainError):
        laplacian(K, 2)


def test_circle_laplacian_determinant_vanishes_only_at_one():
    c = circle_z()
    L = laplacian(build_cochain(c, constant_sheaf(c)), 0)
    det = L[0, 0] * L[1, 1] - L[0, 1] * L[1, 0]
    # evaluate at roots of unity: zero exactly at t = 1
    import cmath

    for k in range(12):
        z = cmath.exp(2j * cmath.pi * k / 12)
        val = sum(complex(v) * z ** g[0] for g, v in det.coeffs.items())
        assert (abs(val) < 1e-12) == (k == 0)


def test_skyscraper_laplacian_zero_block():
    c = octahedron_z2()
    K = build_cochain(c, skyscraper(c, 2, 2))
    L = laplacian(K, 0)
    assert L.shape == (2, 2) and L.is_zero()


def test_cosheaf_chain_examples():
    K = build_cosheaf_chain(point(), dual_cosheaf(constant_sheaf(point())))
    assert K.ranks == {0: 1}
    c = circle_z()
    K = build_cosheaf_chain(c, dual_cosheaf(constant_sheaf(c)))
    assert K.ranks == {-1: 2, 0: 2} and K.subdivided
    Kc = build_cochain(c, constant_sheaf(c))
    # the boundary has the shape of the adjoint of the cochain differential
    assert K.d(-1).shape == Kc.d(0).adjoint().shape
    S = build_cosheaf_chain(octahedron_z2(), dual_cosheaf(skyscraper(octahedron_z2(), 0)))
    assert S.ranks == {-2: 0, -1: 0, 0: 1}


def test_non_free_rejected():
    c = GammaComplex(GroupSpec.cyclic(2), 1, [[[(0, 0), (0, 1)]]])
    with pytest.raises(NonFreeAction):
        build_cochain(c, constant_sheaf(c))


def test_export_json_shape():
    K = build_cochain(hexagon_z2(), constant_sheaf(hexagon_z2()))
    obj = K.to_json()
    assert obj["ranks"] == {"0": 3, "1": 3} and set(obj["differentials"]) == {"0"}


def test_trivial_group_matches_simplicial_oracle():
    for seed in range(8):
        c = random_trivial_complex(seed)
        top = [tuple(v for v, _ in r) for k in range(c.dim + 1) for r in c.reps[k]]
        got = [int(b) for b in l2_betti(build_cochain(c, constant_sheaf(c)), c.group).betti_list()]
        assert got == simplicial_betti(top)


def structural_checks(K):
    assert K.d_squared_violations() == []
    adj = adjoint_complex(K)
    for k, m in adj.items():
        assert m.shape == (K.rank(k), K.rank(k + 1))
        assert m.adjoint() == K.d(k)
    for k in K.degrees:
        L = laplacian(K, k)
        assert L.adjoint() == L


def test_structure_on_corpus():
    for c in (circle_z(), hexagon_z2(), octahedron_z2(), grid_plane_z2()):
        structural_checks(build_cochain(c, constant_sheaf(c)))
        structural_checks(build_cosheaf_chain(c, dual_cosheaf(constant_sheaf(c))))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_structure_random(seed):
    c = random_free_complex(seed)
    F = random_sheaf(c, seed)
    structural_checks(build_cochain(c, F))
    structural_checks(build_cosheaf_chain(c, dual_cosheaf(F)))


def test_subdivided_build_equals_explicit_pullback():
    c = circle_z()
    F = constant_sheaf(c)
    sub, G = subdivision_pullback(F)
    K1, K2 = build_cochain(c, F), build_cochain(sub.complex, G)
    assert K1.ranks == K2.ranks and K1.d(0) == K2.d(0)
