"""Standard test complexes and seeded random generators."""

from __future__ import annotations

import itertools
import random

from .complex import GammaComplex, Key
from .group_algebra import GroupSpec
from .scalars import Mat, Scalar
from .sheaf import ConstructibleSheaf, constant_sheaf, direct_sum

__all__ = [
    "point",
    "circle_z",
    "hexagon_z2",
    "octahedron_z2",
    "grid_plane_z2",
    "simplex",
    "random_free_complex",
    "random_trivial_complex",
    "random_sheaf",
    "locally_closed_sheaf",
    "CORPUS",
]


def point() -> GammaComplex:
    return GammaComplex(GroupSpec.trivial(), 1, [])


def simplex(n: int) -> GammaComplex:
    """The closed n-simplex with all faces, trivial group."""
    layers = []
    for k in range(1, n + 1):
        layers.append([[(v, 0) for v in s] for s in itertools.combinations(range(n + 1), k + 1)])
    return GammaComplex(GroupSpec.trivial(), n + 1, layers)


def circle_z() -> GammaComplex:
    """The real line with Z acting by translation: one vertex, one edge orbit."""
    return GammaComplex(GroupSpec.free_abelian(1), 1, [[[(0, 0), (0, 1)]]])


def hexagon_z2() -> GammaComplex:
    """Hexagon with the antipodal Z/2 action (rotation by three steps)."""
    edges = [[(0, 0), (1, 0)], [(1, 0), (2, 0)], [(2, 0), (0, 1)]]
    return GammaComplex(GroupSpec.cyclic(2), 3, [edges])


def octahedron_z2() -> GammaComplex:
    """Boundary of the octahedron with the antipodal Z/2 action (quotient RP²)."""
    edges = [[(i, 0), (j, a)] for i, j in ((0, 1), (0, 2), (1, 2)) for a in (0, 1)]
    tris = [[(0, 0), (1, a), (2, b)] for a in (0, 1) for b in (0, 1)]
    return GammaComplex(GroupSpec.cyclic(2), 3, [edges, tris])


def grid_plane_z2() -> GammaComplex:
    """Plane triangulated by the unit grid and its diagonals, Z² by translation."""
    o = (0, 0)
    edges = [[(0, o), (0, (1, 0))], [(0, o), (0, (0, 1))], [(0, o), (0, (1, 1))]]
    tris = [[(0, o), (0, (1, 0)), (0, (1, 1))], [(0, o), (0, (0, 1)), (0, (1, 1))]]
    return GammaComplex(GroupSpec.free_abelian(2), 1, [edges, tris])


CORPUS = {
    "circle": circle_z,
    "hexagon": hexagon_z2,
    "octahedron": octahedron_z2,
    "grid": grid_plane_z2,
}


# ---------------------------------------------------------------------------
# random generators


def _close(group: GroupSpec, nverts: int, tops: list[tuple]) -> GammaComplex:
    """Complex generated by the given simplices (lists of (orbit, g)) and all their faces."""
    probe = GammaComplex(group, nverts, [])
    layers: dict[int, dict] = {}
    for top in tops:
        for r in range(2, len(top) + 1):
            for face in itertools.combinations(top, r):
                canon, _ = probe._canonical(face)
                layers.setdefault(r - 1, {}).setdefault(canon, None)
    dim = max(layers, default=0)
    return GammaComplex(group, nverts, [list(layers.get(k, {})) for k in range(1, dim + 1)])


def random_free_complex(seed: int, *, max_k: int = 6, max_simplices: int = 40) -> GammaComplex:
    """A free Z/k-complex (2 ≤ k ≤ max_k) with at most ``max_simplices`` orbits.

    Top simplices use distinct vertex orbits with random translates, so the
    action is free and the complex separated.
    """
    rng = random.Random(seed)
    while True:
        k = rng.randint(2, max_k)
        G = GroupSpec.cyclic(k)
        nverts = rng.randint(2, 5)
        tops = []
        for _ in range(rng.randint(1, 5)):
            dim = rng.randint(1, min(3, nverts - 1))
            orbits = rng.sample(range(nverts), dim + 1)
            tops.append(tuple((v, rng.randrange(k)) for v in orbits))
        c = _close(G, nverts, tops)
        if sum(c.orbit_counts()) <= max_simplices:
            return c


def random_trivial_complex(seed: int, *, max_vertices: int = 7) -> GammaComplex:
    rng = random.Random(seed)
    n = rng.randint(1, max_vertices)
    tops = []
    for _ in range(rng.randint(1, 6)):
        dim = rng.randint(0, min(3, n - 1))
        tops.append(tuple((v, 0) for v in sorted(rng.sample(range(n), dim + 1))))
    return _close(GroupSpec.trivial(), n, tops)


def _faces_closure(c: GammaComplex, keys) -> set:
    out = set()
    stack = list(keys)
    while stack:
        key = stack.pop()
        if key in out:
            continue
        out.add(key)
        for _, fk, _ in c.incidences(key):
            stack.append(fk)
    return out


def _cofaces_closure(c: GammaComplex, keys) -> set:
    up: dict = {}
    for key in c.keys():
        for _, fk, _ in c.incidences(key):
            up.setdefault(fk, set()).add(key)
    out = set()
    stack = list(keys)
    while stack:
        key = stack.pop()
        if key in out:
            continue
        out.add(key)
        stack.extend(up.get(key, ()))
    return out


def locally_closed_sheaf(c: GammaComplex, support: set) -> ConstructibleSheaf:
    """Rank-one sheaf, constant on a convex set of orbits, zero elsewhere."""
    stalks = {key: 1 for key in support}
    maps = {}
    for key in support:
        for nu, fk, _ in c.incidences(key):
            if fk in support:
                maps[(key, nu)] = Mat.eye(1)
    return ConstructibleSheaf(c, stalks, maps, True)


def _random_invertible(rng: random.Random, n: int, complex_entries: bool) -> tuple[Mat, Mat]:
    while True:
        rows = []
        for _ in range(n):
            row = []
            for _ in range(n):
                re = rng.randint(-2, 2)
                im = rng.randint(-1, 1) if complex_entries else 0
                row.append(Scalar(re, im))
            rows.append(row)
        M = Mat(n, n, rows)
        if M.rank() == n:
            return M, _inverse(M)


def _inverse(M: Mat) -> Mat:
    n = M.rows
    aug = [list(M.data[i]) + [Scalar(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = Scalar(1) / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return Mat(n, n, [row[n:] for row in aug])


def random_sheaf(c: GammaComplex, seed: int, *, max_stalk: int = 3, complex_entries: bool | None = None) -> ConstructibleSheaf:
    """Sum of up to ``max_stalk`` locally closed rank-one sheaves, then random stalkwise basis changes."""
    rng = random.Random(seed)
    if complex_entries is None:
        complex_entries = rng.random() < 0.3
    keys = c.keys()
    F = ConstructibleSheaf(c, {}, {}, True)
    for _ in range(rng.randint(1, max_stalk)):
        opens = _cofaces_closure(c, rng.sample(keys, rng.randint(1, min(3, len(keys)))))
        closed = _faces_closure(c, rng.sample(keys, rng.randint(1, len(keys))))
        u = rng.random()
        support = set(keys) if u < 0.25 else (opens if u < 0.4 else opens & closed)
        if not support:
            support = opens
        F = direct_sum(F, locally_closed_sheaf(c, support))
    bases = {key: _random_invertible(rng, F.stalk(key), complex_entries) for key in keys if F.stalk(key)}
    maps = {}
    for key in keys:
        for nu, fk, _ in c.incidences(key):
            if F.stalk(key) and F.stalk(fk):
                B, _ = bases[key]
                _, Binv = bases[fk]
                maps[(key, nu)] = B @ F.rho(key, nu) @ Binv
    return ConstructibleSheaf(c, dict(F.stalks), maps, not complex_entries)

