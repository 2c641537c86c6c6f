"""Cocompact Γ-simplicial complexes stored as quotient data.

Vertices of the cover are pairs ``(v, g)``: vertex orbit ``v`` translated by
the group element ``g``; Γ acts by ``h.(v, g) = (v, h g)``.  A simplex orbit
is stored through a representative, a sorted tuple of such vertices, picked
as the lexicographically smallest translate.  Simplex orbits are addressed
by keys ``(k, i)``: dimension ``k``, position ``i`` in the input list.
Vertex orbits are the implicit 0-simplex orbits ``(0, v)``.

For every representative and every vertex position ``nu`` the face obtained
by dropping that vertex is resolved to ``(j, g)``, meaning the face equals
``g . rep(k-1, j)``.  Quotient complexes carry these incidences explicitly,
since several orbits may share a vertex set downstairs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .group_algebra import GroupError, GroupSpec

__all__ = [
    "GammaComplex",
    "VertexOrdering",
    "NonFreeAction",
    "NotSeparated",
    "ComplexError",
    "dim_name",
]

Vertex = tuple  # (orbit, group element)
Key = tuple  # (dim, index)


class ComplexError(ValueError):
    pass


class NonFreeAction(ComplexError):
    pass


class NotSeparated(ComplexError):
    pass


_NAMES = {0: "vertex", 1: "edge", 2: "triangle", 3: "tetrahedron"}


def dim_name(k: int) -> str:
    return _NAMES.get(k, f"{k}-simplex")


@dataclass(frozen=True)
class VertexOrdering:
    """Total order on vertex orbits and the induced incidence signs.

    ``signs[(k, i, nu)]`` is ε for the face of ``rep(k, i)`` obtained by
    dropping its vertex at position ``nu``, namely ``(-1)**nu``.
    """

    order: tuple[int, ...]
    signs: Mapping[tuple[int, int, int], int]

    def sign(self, key: Key, nu: int) -> int:
        return self.signs[(key[0], key[1], nu)]


class GammaComplex:
    __slots__ = (
        "group",
        "vertex_orbits",
        "reps",
        "faces",
        "explicit_faces",
        "problems",
        "_index",
        "_free",
    )

    def __init__(
        self,
        group: GroupSpec,
        vertex_orbits: int,
        simplices: Sequence[Sequence[Sequence[Vertex]]],
        faces: Sequence[Sequence[Sequence[tuple]]] | None = None,
    ):
        """``simplices[k-1]`` lists the representatives of dimension k >= 1.

        ``faces``, if given, mirrors ``simplices`` and lists for each
        representative the (orbit, g) of the face dropping each vertex, in
        the order the vertices were supplied.
        """
        self.group = group
        self.vertex_orbits = int(vertex_orbits)
        self.problems: list[str] = []
        self._free = True
        e = group.identity
        reps: list[list[tuple]] = [[((v, e),) for v in range(self.vertex_orbits)]]
        face_table: list[list[tuple]] = [[() for _ in range(self.vertex_orbits)]]
        explicit: list[list] = []
        for k, layer in enumerate(simplices, start=1):
            rlayer, elayer = [], []
            for i, verts in enumerate(layer):
                verts = tuple((int(v), group.normalize(g)) for v, g in verts)
                if len(verts) != k + 1:
                    self.problems.append(
                        f"dimension: {dim_name(k)} orbit {i} has {len(verts)} vertices, expected {k + 1}"
                    )
                canon, h = self._canonical(verts)
                given = faces[k - 1][i] if faces is not None else None
                if given is not None:
                    # re-express supplied faces in the canonical representative's order
                    order = sorted(range(len(verts)), key=lambda a: (verts[a][0], verts[a][1]))
                    given = tuple(
                        (int(given[a][0]), group.mul(h, group.normalize(given[a][1]))) for a in order
                    )
                rlayer.append(canon)
                elayer.append(given)
            reps.append(rlayer)
            explicit.append(elayer)
        self.reps = tuple(tuple(layer) for layer in reps)
        self.explicit_faces = faces is not None
        self._index = []
        for k, layer in enumerate(self.reps):
            idx: dict = {}
            for i, r in enumerate(layer):
                if k > 0 and r in idx and not self.explicit_faces:
                    self.problems.append(f"duplicate-orbit: {dim_name(k)} orbits {idx[r]} and {i} coincide")
                idx.setdefault(r, i)
            self._index.append(idx)
        for k in range(1, len(self.reps)):
            layer_faces = []
            for i, r in enumerate(self.reps[k]):
                if self.explicit_faces:
                    f = explicit[k - 1][i]
                    ok = self._check_explicit(k, i, f)
                else:
                    f, ok = self._derive_faces(k, r)
                if not ok:
                    self.problems.append(f"face-closure: {dim_name(k)} orbit {i}")
                layer_faces.append(tuple(f) if f is not None else None)
            face_table.append(layer_faces)
        self.faces = tuple(tuple(layer) for layer in face_table)
        for k, layer in enumerate(self.reps):
            for i, r in enumerate(layer):
                if any(not 0 <= v < self.vertex_orbits for v, _ in r):
                    self.problems.append(f"face-closure: {dim_name(k)} orbit {i}")
                elif len(set(r)) != len(r):
                    self.problems.append(f"degenerate: {dim_name(k)} orbit {i} repeats a vertex")
        # drop duplicate messages while keeping order
        self.problems = list(dict.fromkeys(self.problems))

    # canonical forms ----------------------------------------------------
    def _canonical(self, verts: Sequence[Vertex]) -> tuple[tuple, object]:
        """Smallest translate of a vertex set and the h with canonical = h . verts."""
        G = self.group
        if not verts:
            return (), G.identity
        best = None
        for _, g in verts:
            h = G.inv(g)
            cand = tuple(sorted((v, G.mul(h, x)) for v, x in verts))
            if best is None or cand < best[0]:
                best = (cand, h)
            elif cand == best[0] and h != best[1]:
                self._free = False
        return best

    def translate(self, g, verts: Iterable[Vertex]) -> tuple:
        G = self.group
        return tuple(sorted((v, G.mul(g, x)) for v, x in verts))

    def resolve(self, k: int, verts: Iterable[Vertex]) -> tuple[int, object] | None:
        """(j, g) with ``g . rep(k, j)`` equal to the vertex set, or None."""
        verts = tuple(verts)
        canon, h = self._canonical(verts)
        j = self._index[k].get(canon) if k < len(self._index) else None
        if j is None:
            return None
        return j, self.group.inv(h)

    def _derive_faces(self, k: int, rep: tuple):
        out, ok = [], True
        for nu in range(len(rep)):
            face = rep[:nu] + rep[nu + 1 :]
            if k - 1 == 0:
                v, g = face[0] if face else (-1, None)
                if 0 <= v < self.vertex_orbits:
                    out.append((v, g))
                else:
                    out.append(None)
                    ok = False
                continue
            res = self.resolve(k - 1, face)
            if res is None:
                ok = False
            out.append(res)
        return out, ok

    def _check_explicit(self, k: int, i: int, f) -> bool:
        rep = self.reps[k][i]
        if f is None or len(f) != len(rep):
            return False
        for nu, (j, g) in enumerate(f):
            if not 0 <= j < len(self.reps[k - 1]):
                return False
            face = set(rep[:nu] + rep[nu + 1 :])
            if set(self.translate(g, self.reps[k - 1][j])) != face:
                return False
        return True

    # basic queries -------------------------------------------------------
    @property
    def dim(self) -> int:
        k = len(self.reps) - 1
        while k > 0 and not self.reps[k]:
            k -= 1
        return k

    def orbit_counts(self) -> list[int]:
        return [len(self.reps[k]) for k in range(self.dim + 1)]

    def keys(self, k: int | None = None) -> list[Key]:
        if k is not None:
            return [(k, i) for i in range(len(self.reps[k]))] if k < len(self.reps) else []
        return [(k, i) for k in range(len(self.reps)) for i in range(len(self.reps[k]))]

    def rep(self, key: Key) -> tuple:
        return self.reps[key[0]][key[1]]

    def face(self, key: Key, nu: int) -> tuple[int, object]:
        return self.faces[key[0]][key[1]][nu]

    def incidences(self, key: Key):
        """Yield ``(nu, face_key, g)`` for every codimension-1 face of ``rep(key)``."""
        k, i = key
        if k == 0:
            return
        for nu, (j, g) in enumerate(self.faces[k][i]):
            yield nu, (k - 1, j), g

    def euler_orbits(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.orbit_counts()))

    def has_key(self, key: Key) -> bool:
        k, i = key
        return 0 <= k < len(self.reps) and 0 <= i < len(self.reps[k])

    # axioms ------------------------------------------------------------------
    def validate(self) -> list[str]:
        return [f"group: {p}" for p in self.group.validate()] + list(self.problems)

    def is_free(self) -> bool:
        return self._free

    def require_free(self) -> None:
        if not self._free:
            raise NonFreeAction("some simplex is fixed setwise by a non-trivial group element")

    def separated(self) -> bool:
        if len(self.reps) < 2:
            return True
        return all(r[0][0] != r[1][0] for r in self.reps[1])

    def order_and_sign(self) -> VertexOrdering:
        if not self.separated():
            raise NotSeparated("adjacent vertices share an orbit; subdivide first")
        signs = {}
        for k in range(1, len(self.reps)):
            for i, r in enumerate(self.reps[k]):
                for nu in range(len(r)):
                    signs[(k, i, nu)] = -1 if nu % 2 else 1
        return VertexOrdering(tuple(range(self.vertex_orbits)), signs)

    # face paths ----------------------------------------------------------
    def sub_face(self, key: Key, keep: Sequence[int]) -> tuple[Key, object, list]:
        """Resolve the face of ``rep(key)`` spanned by the vertex positions ``keep``.

        Returns ``(face_key, g, steps)`` where the face is ``g . rep(face_key)``
        and ``steps`` lists ``(key, nu)`` codimension-1 incidences from the
        face up to ``key`` (innermost first), each expressed on orbit
        representatives.
        """
        keep = sorted(set(keep))
        if not keep:
            raise ComplexError("empty face")
        G = self.group
        cur, g_total = key, G.identity
        steps = []
        # original position -> position inside the current representative
        mapping = {p: p for p in range(len(self.rep(key)))}
        while len(mapping) > len(keep):
            drop = max(p for p in mapping if p not in keep)
            nu = mapping[drop]
            j, g = self.face(cur, nu)
            new_key = (cur[0] - 1, j)
            steps.append((cur, nu))
            rep_cur, rep_new = self.rep(cur), self.rep(new_key)
            g_inv = G.inv(g)
            where = {vx: a for a, vx in enumerate(rep_new)}
            mapping = {
                p: where[(rep_cur[a][0], G.mul(g_inv, rep_cur[a][1]))] for p, a in mapping.items() if p != drop
            }
            g_total = G.mul(g_total, g)
            cur = new_key
        steps.reverse()
        return cur, g_total, steps

    def positions_of(self, key: Key, g, sub_verts: Iterable[Vertex]) -> list[int]:
        """Positions inside ``g . rep(key)`` of the given concrete vertices."""
        conc = self.translate(g, self.rep(key))
        where = {vx: a for a, vx in enumerate(conc)}
        return [where[v] for v in sub_verts]

    def concrete(self, key: Key, g) -> tuple:
        return self.translate(g, self.rep(key))

    def star(self, key: Key) -> set[tuple[Key, object]]:
        """All ``(orbit, h)`` with ``h . rep(orbit)`` containing ``rep(key)``."""
        if not self.has_key(key):
            raise ComplexError(f"unknown orbit {key}")
        k = key[0]
        G = self.group
        out = set()
        for kk in range(k, len(self.reps)):
            for i, r in enumerate(self.reps[kk]):
                for keep in itertools.combinations(range(len(r)), k + 1):
                    fkey, g, _ = self.sub_face((kk, i), keep)
                    if fkey == key:
                        out.add(((kk, i), G.inv(g)))
        return out

    # constructions -------------------------------------------------------
    def barycentric_subdivision(self) -> "Subdivision":
        """Barycentric subdivision, with the flag behind every new simplex orbit.

        New vertex orbits are the old simplex orbits, numbered in
        ``self.keys()`` order.  For a free action each flag orbit has exactly
        one representative whose largest simplex is an orbit representative,
        so flags are enumerated inside each representative.
        """
        self.require_free()
        G = self.group
        keys = self.keys()
        new_id = {key: n for n, key in enumerate(keys)}
        layers: list[list[tuple]] = []
        chains: list[list[tuple]] = []
        for top in keys:
            full = tuple(range(top[0] + 1))
            for chain in _chains(full):
                if len(chain) == 1:
                    continue
                resolved = []
                for subset in chain:
                    if subset == full:
                        resolved.append((top, G.identity))
                    else:
                        fkey, g, _ = self.sub_face(top, subset)
                        resolved.append((fkey, g))
                k = len(chain) - 1
                while len(layers) < k:
                    layers.append([])
                    chains.append([])
                layers[k - 1].append(tuple((new_id[fk], g) for fk, g in resolved))
                chains[k - 1].append(resolved)
        new = GammaComplex(G, len(keys), layers)
        flags = []
        for k, layer in enumerate(chains, start=1):
            out = []
            for verts, resolved in zip(layers[k - 1], layer):
                _, h = new._canonical(verts)
                out.append(tuple((fk, G.mul(h, g)) for fk, g in resolved))
            flags.append(tuple(out))
        return Subdivision(self, new, tuple(keys), tuple(flags))

    def _canon_verts(self, verts):
        return self._canonical(tuple(verts))

    def quotient_complex(self) -> "GammaComplex":
        """Γ\\S as a complex over the trivial group, with explicit face incidences."""
        self.require_free()
        if not self.separated():
            raise NotSeparated("quotient of a non-separated complex is not simplicial; subdivide first")
        triv = GroupSpec.trivial()
        simplices = [[[(v, 0) for v, _ in r] for r in self.reps[k]] for k in range(1, len(self.reps))]
        faces = [[[(j, 0) for j, _ in self.faces[k][i]] for i in range(len(self.reps[k]))] for k in range(1, len(self.reps))]
        return GammaComplex(triv, self.vertex_orbits, simplices, faces)

    # serialisation ---------------------------------------------------------
    def to_json(self) -> dict:
        out = []
        for k in range(1, len(self.reps)):
            for i, r in enumerate(self.reps[k]):
                item = {"dim": k, "verts": [[v, self.group.element_to_json(g)] for v, g in r]}
                if self.explicit_faces:
                    item["faces"] = [[j, self.group.element_to_json(g)] for j, g in self.faces[k][i]]
                out.append(item)
        return {"group": self.group.to_json(), "vertex_orbits": self.vertex_orbits, "simplices": out}

    @classmethod
    def from_json(cls, obj: Mapping) -> "GammaComplex":
        try:
            group = GroupSpec.from_json(obj["group"])
            nverts = obj["vertex_orbits"]
            if isinstance(nverts, list):
                nverts = len(nverts)
            items = obj.get("simplices", [])
            top = max((int(s["dim"]) for s in items), default=0)
            layers: list[list] = [[] for _ in range(top)]
            face_layers: list[list] = [[] for _ in range(top)]
            any_faces = any("faces" in s for s in items)
            for s in items:
                k = int(s["dim"])
                if k == 0:
                    continue
                layers[k - 1].append([(v, g) for v, g in s["verts"]])
                face_layers[k - 1].append([(j, g) for j, g in s["faces"]] if "faces" in s else None)
        except (KeyError, TypeError, ValueError) as exc:
            raise ComplexError(f"malformed complex description: {exc}") from exc
        if any_faces:
            return cls(group, int(nverts), layers, face_layers)
        return cls(group, int(nverts), layers)

    def __eq__(self, other):
        return (
            isinstance(other, GammaComplex)
            and self.group == other.group
            and self.vertex_orbits == other.vertex_orbits
            and self.reps == other.reps
            and self.faces == other.faces
        )

    def __hash__(self):
        return hash((self.group, self.vertex_orbits, self.reps))

    def __repr__(self):
        return f"GammaComplex({self.group!r}, orbits={self.orbit_counts()})"


def _chains(full: tuple) -> list[tuple]:
    """All strictly increasing chains of non-empty subsets ending at ``full``."""
    out = [(full,)]
    for r in range(1, len(full)):
        for sub in itertools.combinations(full, r):
            out.extend(c + (full,) for c in _chains(sub))
    return out


@dataclass(frozen=True)
class Subdivision:
    """A barycentric subdivision together with the flag behind each new orbit.

    ``flags[k-1][i]`` lists, smallest first, the concrete simplices
    ``(orbit, g)`` of the original complex whose barycentres are the
    vertices of ``rep(k, i)`` in the new complex.
    """

    original: GammaComplex
    complex: GammaComplex
    barycentres: tuple  # new vertex orbit -> original orbit key
    flags: tuple

    def flag(self, key: Key) -> tuple:
        k, i = key
        if k == 0:
            return ((self.barycentres[i], self.original.group.identity),)
        return self.flags[k - 1][i]

    def top(self, key: Key) -> tuple[Key, object]:
        """Largest simplex of the flag behind ``rep(key)``, as (orbit, g)."""
        return self.flag(key)[-1]
