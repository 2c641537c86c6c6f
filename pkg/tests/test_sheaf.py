from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l2sheaf.chain import build_cochain
from l2sheaf.complex import ComplexError
from l2sheaf.fixtures import (
    circle_z,
    hexagon_z2,
    octahedron_z2,
    random_free_complex,
    random_sheaf,
    simplex,
)
from l2sheaf.l2 import l2_betti
from l2sheaf.scalars import Mat, Scalar
from l2sheaf.sheaf import (
    ConstructibleSheaf,
    SheafComplex,
    SheafError,
    constant_sheaf,
    direct_sum,
    dual_cosheaf,
    skyscraper,
    subdivision_pullback,
)


def betti(c, F):
    return l2_betti(build_cochain(c, F), c.group).betti_list()


def same_sheaf(F, G):
    c = F.base
    if any(F.stalk(k) != G.stalk(k) for k in c.keys()):
        return False
    return all(F.rho(k, nu) == G.rho(k, nu) for k in c.keys() if k[0] for nu in range(k[0] + 1))


def test_constant_sheaf_identity_maps():
    c = octahedron_z2()
    F = constant_sheaf(c, 1)
    assert all(F.stalk(k) == 1 for k in c.keys())
    assert all(m == Mat.eye(1) for m in F.maps.values())
    assert F.violations() == []


def test_constant_rank_zero_and_two():
    c = circle_z()
    assert betti(c, constant_sheaf(c, 0)) == [0, 0]
    F = constant_sheaf(c, 2)
    assert all(F.stalk(k) == 2 for k in c.keys())
    with pytest.raises(SheafError):
        constant_sheaf(c, -1)


def test_skyscraper_examples():
    c = circle_z()
    F = skyscraper(c, 0)
    assert F.stalk((0, 0)) == 1 and F.stalk((1, 0)) == 0 and F.violations() == []
    assert betti(c, F) == [1, 0]
    assert betti(c, skyscraper(c, 0, 0)) == [0, 0]
    assert betti(octahedron_z2(), skyscraper(octahedron_z2(), 1, 3)) == [3, 0, 0]
    with pytest.raises(ComplexError):
        skyscraper(c, 4)


def test_functoriality_violation_detected():
    c = simplex(2)
    F = constant_sheaf(c, 1)
    maps = dict(F.maps)
    maps[((2, 0), 0)] = Mat.from_rows([[2]])
    bad = ConstructibleSheaf(c, F.stalks, maps, True)
    probs = bad.violations()
    assert probs and all(p.startswith("functoriality:") for p in probs)


def test_shape_and_real_violations():
    c = simplex(1)
    F = ConstructibleSheaf(c, {(0, 0): 1, (1, 0): 1}, {((1, 0), 0): Mat.from_rows([[1, 2]])})
    assert F.violations()[0].startswith("map: wrong shape")
    G = ConstructibleSheaf(c, {(0, 1): 1, (1, 0): 1}, {((1, 0), 0): Mat.from_rows([[Scalar(0, 1)]])}, real=True)
    assert G.violations() == ["real: non-real corestriction at 1:0@0"]


def test_dual_cosheaf_transposes():
    c = simplex(1)
    rho = Mat.from_rows([[1, 0]])
    F = ConstructibleSheaf(c, {(0, 0): 2, (1, 0): 1}, {((1, 0), 1): rho})
    assert F.violations() == []
    Fv = dual_cosheaf(F)
    assert Fv.extension((1, 0), 1) == Mat.from_rows([[1], [0]])
    assert Fv.costalk((0, 0)) == 2
    # double dual gives back the matrices
    assert same_sheaf(Fv.dual_sheaf(), F)


def test_dual_of_constant_and_skyscraper():
    c = octahedron_z2()
    Fv = dual_cosheaf(constant_sheaf(c, 2))
    assert all(Fv.costalk(k) == 2 for k in c.keys())
    assert all(m == Mat.eye(2) for m in Fv.ext.values())
    S = dual_cosheaf(skyscraper(c, 0))
    assert S.costalk((0, 0)) == 1 and sum(S.costalks.values()) == 1


def test_json_round_trip_and_nu_suffix():
    # both ends of the circle edge lie in one vertex orbit, so the names need "@nu"
    c = circle_z()
    F = constant_sheaf(c, 1)
    obj = F.to_json()
    assert set(obj["maps"]) == {"0:0->1:0@0", "0:0->1:0@1"}
    G = ConstructibleSheaf.from_json(c, obj)
    assert same_sheaf(F, G)
    # an ambiguous name applies to both incidences
    H = ConstructibleSheaf.from_json(c, {"stalks": {"0:0": 1, "1:0": 1}, "maps": {"0:0->1:0": [["2"]]}})
    assert H.rho((1, 0), 0) == H.rho((1, 0), 1) == Mat.from_rows([[2]])
    h = hexagon_z2()
    assert set(constant_sheaf(h).to_json()["maps"]) == {"0:0->1:0", "0:1->1:0", "0:1->1:1", "0:2->1:1", "0:2->1:2", "0:0->1:2"}


def test_json_bad_names():
    c = simplex(1)
    with pytest.raises(SheafError):
        ConstructibleSheaf.from_json(c, {"stalks": {"0:0": 1}, "maps": {"garbage": [[1]]}})
    with pytest.raises(SheafError):
        ConstructibleSheaf.from_json(c, {"stalks": {"0:0": 1, "1:0": 1}, "maps": {"0:0->1:5": [[1]]}})


def test_pullback_constant_is_constant():
    c = octahedron_z2()
    sub, G = subdivision_pullback(constant_sheaf(c, 1))
    assert same_sheaf(G, constant_sheaf(sub.complex, 1))


def test_pullback_skyscraper_is_skyscraper():
    c = simplex(1)
    sub, G = subdivision_pullback(skyscraper(c, 0))
    support = [k for k in sub.complex.keys() if G.stalk(k)]
    assert len(support) == 1 and support[0][0] == 0
    assert sub.barycentres[support[0][1]] == (0, 0)


def test_pullback_betti_circle():
    c = circle_z()
    sub, G = subdivision_pullback(constant_sheaf(c))
    assert betti(sub.complex, G) == betti(c, constant_sheaf(c)) == [0, 0]


def test_pullback_base_mismatch():
    with pytest.raises(SheafError):
        subdivision_pullback(constant_sheaf(circle_z()), octahedron_z2().barycentric_subdivision())


def test_direct_sum_examples():
    c = octahedron_z2()
    zero = constant_sheaf(c, 0)
    F = random_sheaf(c, 3)
    assert same_sheaf(direct_sum(F, zero), F)
    assert same_sheaf(direct_sum(skyscraper(c, 0), skyscraper(c, 0)), skyscraper(c, 0, 2))
    assert same_sheaf(direct_sum(constant_sheaf(c, 1), constant_sheaf(c, 2)), constant_sheaf(c, 3))
    with pytest.raises(SheafError):
        direct_sum(F, constant_sheaf(circle_z()))


def test_sheaf_complex_shift_and_json():
    c = octahedron_z2()
    F = constant_sheaf(c)
    Fc = SheafComplex(c, {0: F, 1: F}, {0: {k: Mat.eye(1) for k in c.keys()}})
    assert Fc.violations() == []
    S = Fc.shift(1)
    assert S.degrees == [-1, 0] and S.phi(-1, (0, 0)) == Mat.from_rows([[-1]])
    back = SheafComplex.from_json(c, Fc.to_json())
    assert back.degrees == [0, 1] and back.phi(0, (2, 3)) == Mat.eye(1)


def test_sheaf_complex_non_commuting_morphism():
    c = simplex(1)
    F = constant_sheaf(c)
    Fc = SheafComplex(c, {0: F, 1: F}, {0: {(0, 0): Mat.eye(1)}})
    assert any("does not commute" in v for v in Fc.violations())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_random_sheaves_functorial(seed):
    c = random_free_complex(seed)
    F = random_sheaf(c, seed)
    assert F.violations() == []
    assert all(0 <= F.stalk(k) <= 3 for k in c.keys())
    # and their pullback to the subdivision stays functorial
    assert subdivision_pullback(F)[1].violations() == []


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000))
def test_direct_sum_additive(s1, s2):
    c = random_free_complex(s1)
    F, G = random_sheaf(c, s1), random_sheaf(c, s2)
    bF, bG, bS = betti(c, F), betti(c, G), betti(c, direct_sum(F, G))
    assert [Fraction(a + b) for a, b in zip(bF, bG)] == bS
