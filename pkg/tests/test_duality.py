from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l2sheaf.complex import GammaComplex, NonFreeAction
from l2sheaf.duality import comparison_mono, dualizing_complex, duality_check, verdier_dual, verdier_dual_complex
from l2sheaf.fixtures import (
    CORPUS,
    circle_z,
    hexagon_z2,
    octahedron_z2,
    point,
    random_free_complex,
    random_sheaf,
    random_trivial_complex,
    simplex,
)
from l2sheaf.group_algebra import GroupSpec
from l2sheaf.l2 import hyper_l2
from l2sheaf.scalars import Mat, Scalar
from l2sheaf.sheaf import ConstructibleSheaf, SheafComplex, constant_sheaf, skyscraper
from oracles import simplicial_betti

H = Fraction(1, 2)


def nonzero_terms(Fc):
    return {i: F for i, F in Fc.terms.items() if any(F.stalks.values())}


def test_skyscraper_dual_is_skyscraper():
    c = octahedron_z2()
    D = verdier_dual(skyscraper(c, 1))
    terms = nonzero_terms(D.complex)
    assert list(terms) == [0]
    assert {k: n for k, n in terms[0].stalks.items() if n} == {(0, 1): 1}


def test_constant_zero_dual_is_zero():
    D = verdier_dual(constant_sheaf(octahedron_z2(), 0))
    assert nonzero_terms(D.complex) == {}


def test_dual_degrees_and_d_squared():
    D = dualizing_complex(octahedron_z2())
    assert set(nonzero_terms(D.complex)) == {-2, -1, 0}
    assert D.complex.violations() == []


def test_dualizing_octahedron():
    b = hyper_l2(dualizing_complex(octahedron_z2()).complex).betti
    assert (b[-2], b[-1], b[0]) == (H, 0, H)


def test_dualizing_point_is_constant():
    D = dualizing_complex(point())
    terms = nonzero_terms(D.complex)
    assert list(terms) == [0] and terms[0].stalks == {(0, 0): 1}


def test_dualizing_circle():
    D = dualizing_complex(circle_z())
    assert D.subdivided
    b = hyper_l2(D.complex).betti
    assert all(v == 0 for v in b.values())


@pytest.mark.parametrize("n", [1, 2, 3])
def test_dualizing_simplex_against_homology_oracle(n):
    # on a compact complex the hypercohomology of ω in degree -i is the homology in degree i
    b = hyper_l2(dualizing_complex(simplex(n)).complex).betti
    expected = simplicial_betti([tuple(range(n + 1))])
    assert [b.get(-i, 0) for i in range(n + 1)] == expected


def test_dualizing_random_trivial_against_homology_oracle():
    for seed in range(6):
        c = random_trivial_complex(seed)
        b = hyper_l2(dualizing_complex(c).complex).betti
        top = [tuple(v for v, _ in r) for k in range(c.dim + 1) for r in c.reps[k]]
        assert [b.get(-i, 0) for i in range(c.dim + 1)] == simplicial_betti(top)


def test_duality_check_examples():
    o = duality_check(octahedron_z2(), constant_sheaf(octahedron_z2()))
    assert o.all_equal
    rows = {r.degree: (r.betti, r.dual_betti) for r in o.rows}
    assert rows[0] == (H, H) and rows[1] == (0, 0) and rows[2] == (H, H)
    s = duality_check(octahedron_z2(), skyscraper(octahedron_z2(), 0))
    assert s.all_equal and {r.degree: r.betti for r in s.rows}[0] == 1
    z = duality_check(octahedron_z2(), constant_sheaf(octahedron_z2(), 0))
    assert z.all_equal and all(r.betti == 0 and r.dual_betti == 0 for r in z.rows)
    circ = duality_check(circle_z(), constant_sheaf(circle_z()))
    assert circ.all_equal
    assert circ.text().splitlines()[0] == "i  b_i(F)  b_-i(DF)  equal"
    assert circ.to_json()["schema"] == "l2sheaf.duality/1"


def test_comparison_mono_skyscraper_identity():
    c = octahedron_z2()
    m = comparison_mono(c, skyscraper(c, 0))
    assert m.source.ranks.get(0) == 1 and m.target.rank(0) == 1
    assert m.maps[0].shape == (1, 1) and m.maps[0] == m.maps[0].identity(c.group, 1)
    assert all(n == 0 for n in m.quotient.ranks.values())


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_comparison_mono_corpus(name):
    c = CORPUS[name]()
    m = comparison_mono(c, constant_sheaf(c))
    assert m.chain_map_violations() == []
    assert all(v == 0 for v in m.kernel_dims().values())
    assert all(b == 0 for b in m.quotient_report().betti.values())
    assert m.quotient.d_squared_violations() == []


def test_comparison_mono_octahedron_ranks():
    c = octahedron_z2()
    m = comparison_mono(c, constant_sheaf(c))
    # each p-simplex orbit maps to its p+1 vertices in the degree -p term
    for k, M in m.maps.items():
        assert M.cols == m.source.rank(k)
        assert all(sum(1 for i in range(M.rows) if M[i, j]) == 1 - k for j in range(M.cols))


def test_double_duality_dimensions():
    for c, F in (
        (hexagon_z2(), constant_sheaf(hexagon_z2())),
        (octahedron_z2(), skyscraper(octahedron_z2(), 2)),
        (simplex(1), constant_sheaf(simplex(1))),
    ):
        bF = hyper_l2(SheafComplex.single(F)).betti
        DD = verdier_dual_complex(verdier_dual(F).complex)
        bDD = hyper_l2(DD.complex).betti
        for i in set(bF) | set(bDD):
            assert bF.get(i, 0) == bDD.get(i, 0)


def test_real_flag_preserved():
    c = octahedron_z2()
    F = random_sheaf(c, 11, complex_entries=False)
    assert F.real
    D = verdier_dual(F).complex
    assert all(T.real for T in D.terms.values())
    mats = [m for T in D.terms.values() for m in T.maps.values()]
    mats += [m for ms in D.maps.values() for m in ms.values()]
    assert mats and all(m.is_real() for m in mats)


def test_complex_entries_are_transposed_not_conjugated():
    c = simplex(1)
    F = constant_sheaf(c, 1, real=False)
    maps = dict(F.maps)
    maps[((1, 0), 0)] = Mat.from_rows([[Scalar(0, 1)]])
    G = ConstructibleSheaf(c, F.stalks, maps, False)
    assert G.violations() == []
    D = verdier_dual(G).complex
    entries = {m[i, j] for ms in D.maps.values() for m in ms.values() for i in range(m.rows) for j in range(m.cols)}
    # ρ enters the dual unconjugated (up to the boundary sign)
    assert entries & {Scalar(0, 1), Scalar(0, -1)}
    assert not D.terms[0].real
    assert duality_check(c, G).all_equal


def test_non_free_rejected():
    c = GammaComplex(GroupSpec.cyclic(2), 1, [[[(0, 0), (0, 1)]]])
    with pytest.raises(NonFreeAction):
        verdier_dual(constant_sheaf(c))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_duality_random(seed):
    c = random_free_complex(seed)
    F = random_sheaf(c, seed)
    assert duality_check(c, F).all_equal
    m = comparison_mono(c, F)
    assert m.chain_map_violations() == []
    assert all(b == 0 for b in m.quotient_report().betti.values())
