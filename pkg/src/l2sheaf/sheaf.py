"""Equivariant constructible sheaves as functors on the face poset.

For a free action a sheaf is determined by orbit data: a stalk dimension
``F_σ`` (sections over the open star of σ) for every simplex orbit and, for
every codimension-1 incidence ``(σ, nu)`` of an orbit representative, the
corestriction ``ρ: F_τ -> F_σ`` where τ is the face of ``rep(σ)`` opposite
its vertex at position ``nu``.  Translates carry the same matrices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

from .complex import ComplexError, GammaComplex, Key, Subdivision
from .scalars import Mat

__all__ = [
    "ConstructibleSheaf",
    "Cosheaf",
    "SheafComplex",
    "SheafError",
    "constant_sheaf",
    "skyscraper",
    "direct_sum",
    "dual_cosheaf",
    "subdivision_pullback",
    "descend",
    "key_str",
    "parse_key",
]


class SheafError(ValueError):
    pass


def key_str(key: Key) -> str:
    return f"{key[0]}:{key[1]}"


def parse_key(s: str) -> Key:
    try:
        k, i = s.split(":")
        return int(k), int(i)
    except ValueError as exc:
        raise SheafError(f"bad orbit id {s!r}, expected 'dim:index'") from exc


@dataclass(frozen=True, eq=False)
class ConstructibleSheaf:
    base: GammaComplex
    stalks: Mapping[Key, int]
    maps: Mapping[tuple[Key, int], Mat] = field(default_factory=dict)
    real: bool = False

    def stalk(self, key: Key) -> int:
        return self.stalks.get(key, 0)

    def rho(self, key: Key, nu: int) -> Mat:
        """Corestriction from the face opposite position ``nu`` into ``rep(key)``."""
        m = self.maps.get((key, nu))
        if m is not None:
            return m
        j, _ = self.base.face(key, nu)
        return Mat.zero(self.stalk(key), self.stalk((key[0] - 1, j)))

    def corestriction(self, sub: tuple[Key, object], sup: tuple[Key, object]) -> Mat:
        """Map ``F_sub -> F_sup`` for concrete simplices ``g . rep(key)`` with sub ⊆ sup."""
        c = self.base
        G = c.group
        (skey, sg), (tkey, tg) = sub, sup
        rel = G.mul(G.inv(tg), sg)
        if skey == tkey:
            if rel != G.identity:
                raise SheafError("distinct translates of one simplex are not nested")
            return Mat.eye(self.stalk(skey))
        positions = c.positions_of(tkey, G.identity, c.concrete(skey, rel))
        fkey, g, steps = c.sub_face(tkey, positions)
        if fkey != skey or g != rel:
            raise SheafError("face resolution mismatch")
        m = Mat.eye(self.stalk(skey))
        for key, nu in steps:
            m = self.rho(key, nu) @ m
        return m

    def violations(self) -> list[str]:
        """Shape, realness and functoriality problems."""
        c = self.base
        out = []
        for key, n in self.stalks.items():
            if not c.has_key(key):
                out.append(f"stalk: unknown orbit {key_str(key)}")
            elif n < 0:
                out.append(f"stalk: negative dimension at {key_str(key)}")
        for (key, nu), m in self.maps.items():
            if not c.has_key(key) or key[0] == 0 or not 0 <= nu <= key[0]:
                out.append(f"map: unknown incidence {key_str(key)}@{nu}")
                continue
            j, _ = c.face(key, nu)
            if m.shape != (self.stalk(key), self.stalk((key[0] - 1, j))):
                out.append(f"map: wrong shape at {key_str((key[0] - 1, j))}->{key_str(key)}@{nu}")
            elif self.real and not m.is_real():
                out.append(f"real: non-real corestriction at {key_str(key)}@{nu}")
        if out:
            return out
        G = c.group
        for key in c.keys():
            k = key[0]
            if k < 2:
                continue
            rep = c.rep(key)
            for a, b in itertools.combinations(range(k + 1), 2):
                paths = []
                for first, second in ((a, b), (b, a)):
                    j, g = c.face(key, first)
                    face_key = (k - 1, j)
                    # position of the second dropped vertex inside the face representative
                    v, x = rep[second]
                    pos = c.rep(face_key).index((v, G.mul(G.inv(g), x)))
                    paths.append(self.rho(key, first) @ self.rho(face_key, pos))
                if paths[0] != paths[1]:
                    out.append(f"functoriality: {key_str(key)} dropping positions {a},{b}")
        return out

    def direct_sum_with(self, other: "ConstructibleSheaf") -> "ConstructibleSheaf":
        return direct_sum(self, other)

    def to_json(self) -> dict:
        c = self.base
        maps = {}
        for (key, nu), m in sorted(self.maps.items()):
            if m.rows == 0 or m.cols == 0:
                continue
            j, _ = c.face(key, nu)
            name = f"{key_str((key[0] - 1, j))}->{key_str(key)}"
            if sum(1 for _, fk, _ in c.incidences(key) if fk == (key[0] - 1, j)) > 1:
                name += f"@{nu}"
            maps[name] = m.to_json()
        return {
            "stalks": {key_str(k): n for k, n in sorted(self.stalks.items()) if n},
            "maps": maps,
            "real": self.real,
        }

    @classmethod
    def from_json(cls, base: GammaComplex, obj: Mapping) -> "ConstructibleSheaf":
        stalks = {parse_key(k): int(v) for k, v in obj.get("stalks", {}).items()}
        maps = {}
        for name, data in obj.get("maps", {}).items():
            try:
                src, dst = name.split("->")
                nu = None
                if "@" in dst:
                    dst, nu_s = dst.split("@")
                    nu = int(nu_s)
                tau, sigma = parse_key(src), parse_key(dst)
            except ValueError as exc:
                raise SheafError(f"bad map name {name!r}") from exc
            if not base.has_key(sigma) or sigma[0] == 0:
                raise SheafError(f"map {name!r}: unknown orbit {key_str(sigma)}")
            m = Mat.from_json(data, stalks.get(sigma, 0), stalks.get(tau, 0))
            slots = [n for n, fk, _ in base.incidences(sigma) if fk == tau and (nu is None or n == nu)]
            if not slots:
                raise SheafError(f"map {name!r}: {key_str(tau)} is not a face of {key_str(sigma)}")
            # an ambiguous name applies to every incidence between the two orbits
            for n in slots:
                maps[(sigma, n)] = m
        return cls(base, stalks, maps, bool(obj.get("real", False)))


@dataclass(frozen=True, eq=False)
class Cosheaf:
    """Contravariant functor on the face poset; ``ext[(σ, nu)]: F_σ^∨ -> F_τ^∨``."""

    base: GammaComplex
    costalks: Mapping[Key, int]
    ext: Mapping[tuple[Key, int], Mat] = field(default_factory=dict)

    def costalk(self, key: Key) -> int:
        return self.costalks.get(key, 0)

    def extension(self, key: Key, nu: int) -> Mat:
        m = self.ext.get((key, nu))
        if m is not None:
            return m
        j, _ = self.base.face(key, nu)
        return Mat.zero(self.costalk((key[0] - 1, j)), self.costalk(key))

    def dual_sheaf(self) -> ConstructibleSheaf:
        return ConstructibleSheaf(self.base, dict(self.costalks), {k: m.T for k, m in self.ext.items()})


# ---------------------------------------------------------------------------
# constructors


def constant_sheaf(c: GammaComplex, n: int = 1, real: bool = True) -> ConstructibleSheaf:
    if n < 0:
        raise SheafError("rank must be non-negative")
    stalks = {key: n for key in c.keys()}
    maps = {(key, nu): Mat.eye(n) for key in c.keys() if key[0] > 0 for nu in range(key[0] + 1)}
    return ConstructibleSheaf(c, stalks, maps, real)


def skyscraper(c: GammaComplex, v: int, n: int = 1) -> ConstructibleSheaf:
    """Stalk ``K^n`` on the open star of vertex orbit ``v`` only at the vertex itself."""
    if not 0 <= v < c.vertex_orbits:
        raise ComplexError(f"unknown vertex orbit {v}")
    return ConstructibleSheaf(c, {(0, v): n} if n else {}, {}, True)


def direct_sum(F: ConstructibleSheaf, G: ConstructibleSheaf) -> ConstructibleSheaf:
    if F.base is not G.base and F.base != G.base:
        raise SheafError("direct sum of sheaves on different complexes")
    c = F.base
    stalks = {key: F.stalk(key) + G.stalk(key) for key in c.keys() if F.stalk(key) + G.stalk(key)}
    maps = {}
    for key in c.keys():
        for nu, _, _ in c.incidences(key):
            m = _block_diag2(F.rho(key, nu), G.rho(key, nu))
            if m.rows and m.cols:
                maps[(key, nu)] = m
    return ConstructibleSheaf(c, stalks, maps, F.real and G.real)


def _block_diag2(a: Mat, b: Mat) -> Mat:
    from .scalars import block_diag

    return block_diag(a, b)


def dual_cosheaf(F: ConstructibleSheaf) -> Cosheaf:
    return Cosheaf(F.base, dict(F.stalks), {k: m.T for k, m in F.maps.items()})


def subdivision_pullback(F: ConstructibleSheaf, sub: Subdivision | None = None) -> tuple[Subdivision, ConstructibleSheaf]:
    """Pull F back to the barycentric subdivision.

    The stalk at a flag σ_0 ⊂ ... ⊂ σ_k is F at σ_k.  Dropping any
    barycentre other than the top's keeps the stalk (identity map); dropping
    the top's barycentre corestricts from the next largest simplex.
    """
    if sub is None:
        sub = F.base.barycentric_subdivision()
    elif sub.original is not F.base and sub.original != F.base:
        raise SheafError("subdivision of a different complex")
    new = sub.complex
    stalks = {}
    for key in new.keys():
        top_key, _ = sub.top(key)
        n = F.stalk(top_key)
        if n:
            stalks[key] = n
    maps = {}
    for key in new.keys():
        if key[0] == 0:
            continue
        flag = sub.flag(key)
        rep = new.rep(key)
        top_id = sub.barycentres.index(flag[-1][0])
        for nu, _, _ in new.incidences(key):
            dropped_orbit = rep[nu][0]
            n_top = F.stalk(flag[-1][0])
            if dropped_orbit == top_id:
                m = F.corestriction(flag[-2], flag[-1])
            else:
                m = Mat.eye(n_top)
            if m.rows and m.cols:
                maps[(key, nu)] = m
    return sub, ConstructibleSheaf(new, stalks, maps, F.real)


def descend(F: ConstructibleSheaf, quotient: GammaComplex) -> ConstructibleSheaf:
    """The same orbit data viewed on the quotient complex (trivial group)."""
    return ConstructibleSheaf(quotient, dict(F.stalks), dict(F.maps), F.real)


# ---------------------------------------------------------------------------
# bounded complexes of sheaves


@dataclass(frozen=True, eq=False)
class SheafComplex:
    """Bounded complex of sheaves ``F^i`` with morphisms ``φ^i: F^i -> F^{i+1}``.

    ``maps[i][key]`` is the matrix of φ^i on the stalk of ``rep(key)``;
    missing entries are zero.
    """

    base: GammaComplex
    terms: Mapping[int, ConstructibleSheaf]
    maps: Mapping[int, Mapping[Key, Mat]] = field(default_factory=dict)

    @classmethod
    def single(cls, F: ConstructibleSheaf, degree: int = 0) -> "SheafComplex":
        return cls(F.base, {degree: F}, {})

    @property
    def degrees(self) -> list[int]:
        return sorted(self.terms)

    def term(self, i: int) -> ConstructibleSheaf:
        t = self.terms.get(i)
        if t is None:
            return ConstructibleSheaf(self.base, {}, {}, True)
        return t

    def phi(self, i: int, key: Key) -> Mat:
        m = self.maps.get(i, {}).get(key)
        if m is not None:
            return m
        return Mat.zero(self.term(i + 1).stalk(key), self.term(i).stalk(key))

    def shift(self, n: int = 1) -> "SheafComplex":
        """``F[n]``: degree i holds F^{i+n}, differentials multiplied by (-1)^n."""
        sign = -1 if n % 2 else 1
        return SheafComplex(
            self.base,
            {i - n: F for i, F in self.terms.items()},
            {i - n: {k: m.scale(sign) for k, m in ms.items()} for i, ms in self.maps.items()},
        )

    def violations(self) -> list[str]:
        c = self.base
        out = []
        for i, F in self.terms.items():
            if F.base is not c and F.base != c:
                out.append(f"term {i}: different base complex")
                continue
            out.extend(f"term {i}: {v}" for v in F.violations())
        if out:
            return out
        for i in self.degrees:
            for key in c.keys():
                m = self.phi(i, key)
                if m.shape != (self.term(i + 1).stalk(key), self.term(i).stalk(key)):
                    out.append(f"morphism {i}: wrong shape at {key_str(key)}")
        if out:
            return out
        for i in self.degrees:
            A, B = self.term(i), self.term(i + 1)
            for key in c.keys():
                for nu, fkey, _ in c.incidences(key):
                    if self.phi(i, key) @ A.rho(key, nu) != B.rho(key, nu) @ self.phi(i, fkey):
                        out.append(f"morphism {i}: does not commute with corestriction at {key_str(key)}@{nu}")
                if not (self.phi(i + 1, key) @ self.phi(i, key)).is_zero():
                    out.append(f"morphism {i}: d^2 != 0 at {key_str(key)}")
        return out

    def pullback(self, sub: Subdivision) -> "SheafComplex":
        terms = {i: subdivision_pullback(F, sub)[1] for i, F in self.terms.items()}
        maps = {}
        for i, ms in self.maps.items():
            out = {}
            for key in sub.complex.keys():
                top_key, _ = sub.top(key)
                m = ms.get(top_key)
                if m is not None and m.rows and m.cols:
                    out[key] = m
            maps[i] = out
        return SheafComplex(sub.complex, terms, maps)

    def to_json(self) -> dict:
        return {
            "terms": {str(i): F.to_json() for i, F in sorted(self.terms.items())},
            "differentials": {
                str(i): {key_str(k): m.to_json() for k, m in sorted(ms.items()) if m.rows and m.cols}
                for i, ms in sorted(self.maps.items())
            },
        }

    @classmethod
    def from_json(cls, base: GammaComplex, obj: Mapping) -> "SheafComplex":
        terms = {int(i): ConstructibleSheaf.from_json(base, t) for i, t in obj.get("terms", {}).items()}
        maps = {}
        for i, ms in obj.get("differentials", {}).items():
            i = int(i)
            out = {}
            for k, data in ms.items():
                key = parse_key(k)
                rows = terms.get(i + 1).stalk(key) if i + 1 in terms else 0
                cols = terms.get(i).stalk(key) if i in terms else 0
                out[key] = Mat.from_json(data, rows, cols)
            maps[i] = out
        return cls(base, terms, maps)
