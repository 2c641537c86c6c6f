from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l2sheaf.chain import GroupRingComplex, build_cochain
from l2sheaf.fixtures import (
    circle_z,
    grid_plane_z2,
    hexagon_z2,
    octahedron_z2,
    point,
    random_free_complex,
    random_sheaf,
    simplex,
)
from l2sheaf.group_algebra import GroupRingMatrix, GroupSpec, Mode
from l2sheaf.l2 import L2Error, atiyah_check, hyper_l2, l2_betti, scalar_realization, total_complex, truncation_check
from l2sheaf.scalars import Mat
from l2sheaf.sheaf import SheafComplex, constant_sheaf, skyscraper, subdivision_pullback

H = Fraction(1, 2)


def betti(c, F=None, **kw):
    F = F if F is not None else constant_sheaf(c)
    return l2_betti(build_cochain(c, F), c.group, **kw).betti_list()


def test_corpus_betti():
    assert betti(circle_z()) == [0, 0]
    assert betti(hexagon_z2()) == [H, H]
    assert betti(octahedron_z2()) == [H, 0, H]
    assert betti(grid_plane_z2()) == [0, 0, 0]
    assert betti(point()) == [1]


def test_report_fields():
    r = l2_betti(build_cochain(octahedron_z2(), constant_sheaf(octahedron_z2())))
    assert r.text() == "b0=1/2 b1=0 b2=1/2"
    assert r.euler_l2 == 1 and r.euler_ranks == 3 - 6 + 4
    j = r.to_json()
    assert j["schema"] == "l2sheaf.report/1" and j["euler_l2"] == "1"
    assert [d["betti"] for d in j["degrees"]] == ["1/2", "0", "1/2"]
    for d in r.degrees:
        assert d.betti == d.betti_laplacian and d.method == "exact"


def test_quotient_mode_report_sequence():
    c = circle_z()
    r = l2_betti(build_cochain(c, constant_sheaf(c)), c.group, Mode.QUOTIENT_APPROX, n=[4, 16])
    assert [n for n, _ in r.degrees[0].sequence] == [4, 16]
    assert abs(r.degrees[0].betti_laplacian) <= Fraction(1, 16)


def test_atiyah_examples():
    a = atiyah_check(circle_z(), constant_sheaf(circle_z()))
    assert a.equal and a.euler_l2 == 0 and a.text() == "chi_l2 = 0 = chi_quotient OK"
    o = atiyah_check(octahedron_z2(), constant_sheaf(octahedron_z2()))
    assert o.equal and o.euler_l2 == 1 and o.text() == "chi_l2 = 1 = chi_quotient OK"
    t = atiyah_check(simplex(2), constant_sheaf(simplex(2)))
    assert t.equal and t.euler_l2 == 1


def test_hyper_single_sheaf_equals_l2_betti():
    c = octahedron_z2()
    F = constant_sheaf(c)
    assert hyper_l2(SheafComplex.single(F)).betti == l2_betti(build_cochain(c, F)).betti


def test_hyper_identity_two_term_is_acyclic():
    c = octahedron_z2()
    F = constant_sheaf(c)
    Fc = SheafComplex(c, {0: F, 1: F}, {0: {k: Mat.eye(1) for k in c.keys()}})
    rep = hyper_l2(Fc)
    assert all(b == 0 for b in rep.betti.values())


def test_hyper_skyscraper_placed_in_degree_two():
    c = octahedron_z2()
    S = skyscraper(c, 0)
    rep = hyper_l2(SheafComplex(c, {2: S}, {}))
    assert rep.betti[2] == 1 and all(b == 0 for k, b in rep.betti.items() if k != 2)


def test_hyper_shift():
    c = hexagon_z2()
    F = constant_sheaf(c)
    Fc = SheafComplex.single(F)
    b0 = hyper_l2(Fc).betti
    b1 = hyper_l2(Fc.shift(1)).betti
    assert {k - 1: v for k, v in b0.items()} == b1


def test_hyper_subdivides_when_needed():
    c = circle_z()
    K = total_complex(SheafComplex.single(constant_sheaf(c)))
    assert K.subdivided and K.ranks == {0: 2, 1: 2}


def test_hyper_rejects_non_commuting():
    c = simplex(1)
    F = constant_sheaf(c)
    Fc = SheafComplex(c, {0: F, 1: F}, {0: {(0, 0): Mat.eye(1)}})
    with pytest.raises(Exception):
        hyper_l2(Fc)


# truncation -------------------------------------------------------------------


@pytest.mark.parametrize("n", [16, 64])
def test_truncation_circle(n):
    c = circle_z()
    r = truncation_check(build_cochain(c, constant_sheaf(c)), c.group, n, 1.0)
    assert r.ok and r.residual <= 1e-9


def test_truncation_below_smallest_eigenvalue_gives_harmonic_projector():
    c = hexagon_z2()
    r = truncation_check(build_cochain(c, constant_sheaf(c)), c.group, 1, 1e-3)
    assert r.ok


def test_truncation_zero_laplacian():
    triv = GroupSpec.trivial()
    K = GroupRingComplex(triv, {0: 2}, {})
    r = truncation_check(K, triv, 1, 0.5)
    assert r.residual == 0 and r.commutator == 0


def test_truncation_collision_rule():
    c = circle_z()
    K = build_cochain(c, constant_sheaf(c))
    L = scalar_realization(K.d(0), c.group, 4)
    w = np.linalg.eigvalsh(L.conj().T @ L)
    lam = float(w[w > 1e-9][0])
    r = truncation_check(K, c.group, 4, lam)
    assert r.lam != lam and abs(r.lam - lam * (1 + 1e-6)) < 1e-9 and r.ok


def test_truncation_rejects_nonpositive_lambda():
    K = build_cochain(circle_z(), constant_sheaf(circle_z()))
    with pytest.raises(L2Error):
        truncation_check(K, circle_z().group, 8, 0.0)


# properties --------------------------------------------------------------------


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_refinement_invariance_random(seed):
    c = random_free_complex(seed)
    F = random_sheaf(c, seed)
    sub, G = subdivision_pullback(F)
    assert betti(c, F) == betti(sub.complex, G)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_atiyah_random(seed):
    c = random_free_complex(seed)
    assert atiyah_check(c, random_sheaf(c, seed)).equal


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_betti_nonnegative_and_bounded(seed):
    c = random_free_complex(seed)
    F = random_sheaf(c, seed)
    r = l2_betti(build_cochain(c, F))
    for d in r.degrees:
        assert 0 <= d.betti <= d.rank
        assert (d.betti * c.group.order).denominator == 1
    assert sum((-1) ** d.degree * d.betti for d in r.degrees) == r.euler_ranks


def test_generic_mode_seed_independent_on_grid():
    c = grid_plane_z2()
    K = build_cochain(c, constant_sheaf(c))
    assert {tuple(l2_betti(K, c.group, seed=s).betti_list()) for s in (0, 1, 7)} == {(0, 0, 0)}
    assert l2_betti(K, c.group, exact=True).betti_list() == [0, 0, 0]


def test_scalar_realization_shapes():
    c = grid_plane_z2()
    K = build_cochain(c, constant_sheaf(c))
    assert scalar_realization(K.d(0), c.group, 3).shape == (K.rank(1) * 9, K.rank(0) * 9)
    h = hexagon_z2()
    Kh = build_cochain(h, constant_sheaf(h))
    assert scalar_realization(Kh.d(0), h.group, 99).shape == (6, 6)
    assert isinstance(Kh.d(0), GroupRingMatrix)
