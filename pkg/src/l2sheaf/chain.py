"""Cochain complexes of sheaves and chain complexes of cosheaves over CΓ.

Module convention.  A compactly supported cochain ``f`` on the orbit of σ
(values ``f(x) ∈ F_σ`` on the translate ``x.rep(σ)``) is identified with
the vector ``Σ_x f(x) x^-1`` of ``CΓ ⊗ F_σ``.  With this identification the
coboundary acts by *left* multiplication: the block from τ to σ is
``Σ ε ρ g`` over incidences ``face_nu(rep σ) = g.rep τ``.  Left
multiplication matrices commute with the right regular action, which is the
right CΓ-module structure that is tensored with l²Γ.  The cosheaf chain
boundary dual to it has blocks ``Σ ε ρ^T g^-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .complex import GammaComplex, Key, Subdivision
from .group_algebra import GroupRingElement, GroupRingMatrix, GroupSpec
from .scalars import Mat
from .sheaf import ConstructibleSheaf, Cosheaf, SheafError, subdivision_pullback

__all__ = [
    "GroupRingComplex",
    "ChainError",
    "build_cochain",
    "build_cosheaf_chain",
    "adjoint_complex",
    "laplacian",
    "separate",
]


class ChainError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GroupRingComplex:
    """Cochain complex of free CΓ-modules; ``diffs[k]`` maps degree k to k+1."""

    group: GroupSpec
    ranks: Mapping[int, int]
    diffs: Mapping[int, GroupRingMatrix]
    labels: Mapping[int, Sequence[tuple]] = field(default_factory=dict)
    subdivided: bool = False
    base: GammaComplex | None = None

    def __post_init__(self):
        for k, d in self.diffs.items():
            if d.shape != (self.rank(k + 1), self.rank(k)):
                raise ChainError(f"d_{k} has shape {d.shape}, expected {(self.rank(k + 1), self.rank(k))}")

    @property
    def degrees(self) -> list[int]:
        return sorted(k for k, n in self.ranks.items())

    @property
    def lo(self) -> int:
        return min(self.ranks) if self.ranks else 0

    @property
    def hi(self) -> int:
        return max(self.ranks) if self.ranks else -1

    def rank(self, k: int) -> int:
        return self.ranks.get(k, 0)

    def d(self, k: int) -> GroupRingMatrix:
        m = self.diffs.get(k)
        if m is None:
            return GroupRingMatrix.zeros(self.group, self.rank(k + 1), self.rank(k))
        return m

    def d_squared_violations(self) -> list[int]:
        """Degrees k with d_{k+1} d_k != 0."""
        return [k for k in range(self.lo, self.hi) if not (self.d(k + 1) @ self.d(k)).is_zero()]

    def augmentation(self) -> "GroupRingComplex":
        """The complex over the trivial group obtained by g -> 1."""
        from .scalars import ZERO

        triv = GroupSpec.trivial()
        diffs = {}
        for k, m in self.diffs.items():
            entries = {}
            for i, row in enumerate(m.augmentation()):
                for j, s in row.items():
                    if s != ZERO:
                        entries[(i, j)] = GroupRingElement.monomial(triv, 0, s)
            diffs[k] = GroupRingMatrix(triv, m.rows, m.cols, entries)
        return GroupRingComplex(triv, dict(self.ranks), diffs, dict(self.labels), self.subdivided, None)

    def to_json(self) -> dict:
        return {
            "group": self.group.to_json(),
            "ranks": {str(k): n for k, n in sorted(self.ranks.items())},
            "differentials": {str(k): m.to_json() for k, m in sorted(self.diffs.items())},
            "subdivided": self.subdivided,
        }


def separate(c: GammaComplex, F: ConstructibleSheaf | None = None):
    """Return ``(complex, sheaf, subdivision-or-None)`` on a separated model."""
    c.require_free()
    if c.separated():
        return c, F, None
    sub = c.barycentric_subdivision()
    if F is None:
        return sub.complex, None, sub
    _, G = subdivision_pullback(F, sub)
    return sub.complex, G, sub


def _check_base(c: GammaComplex, F) -> None:
    if F.base is not c and F.base != c:
        raise SheafError("sheaf lives on a different complex")


def _offsets(c: GammaComplex, dims: Mapping[Key, int]):
    """Column layout (orbit, basis index) per degree, lexicographic."""
    offsets, ranks, labels = {}, {}, {}
    for k in range(c.dim + 1):
        pos = 0
        lab = []
        for key in c.keys(k):
            offsets[key] = pos
            n = dims(key)
            lab.extend((key, b) for b in range(n))
            pos += n
        ranks[k] = pos
        labels[k] = lab
    return offsets, ranks, labels


def _mat_entries(entries: dict, G: GroupSpec, r0: int, c0: int, m: Mat, g, sign: int) -> None:
    for a in range(m.rows):
        for b in range(m.cols):
            s = m[a, b]
            if s:
                term = GroupRingElement.monomial(G, g, s * sign)
                ij = (r0 + a, c0 + b)
                entries[ij] = entries[ij] + term if ij in entries else term


def cochain_differentials(c: GammaComplex, F: ConstructibleSheaf):
    """Differentials of C_c^•(c, F) on an already separated complex."""
    G = c.group
    offsets, ranks, labels = _offsets(c, F.stalk)
    diffs = {}
    for k in range(c.dim):
        entries: dict = {}
        for key in c.keys(k + 1):
            for nu, fkey, g in c.incidences(key):
                _mat_entries(entries, G, offsets[key], offsets[fkey], F.rho(key, nu), g, -1 if nu % 2 else 1)
        diffs[k] = GroupRingMatrix(G, ranks[k + 1], ranks[k], entries)
    return ranks, diffs, labels


def build_cochain(c: GammaComplex, F: ConstructibleSheaf, *, check: bool = True) -> GroupRingComplex:
    """The compactly supported cochain complex, subdividing first if ``c`` is not separated."""
    _check_base(c, F)
    c.require_free()
    cs, Fs, sub = separate(c, F)
    cs.order_and_sign()
    ranks, diffs, labels = cochain_differentials(cs, Fs)
    K = GroupRingComplex(c.group, ranks, diffs, labels, sub is not None, cs)
    if check and K.d_squared_violations():
        raise ChainError(f"d∘d != 0 in degrees {K.d_squared_violations()}")
    return K


def build_cosheaf_chain(c: GammaComplex, Fv: Cosheaf, *, check: bool = True) -> GroupRingComplex:
    """Homology chain complex of a cosheaf, as a cochain complex in degrees -dim..0."""
    _check_base(c, Fv)
    c.require_free()
    if not c.separated():
        sub = c.barycentric_subdivision()
        _, Fs = subdivision_pullback(Fv.dual_sheaf(), sub)
        cs = sub.complex
        Fv = Cosheaf(cs, dict(Fs.stalks), {k: m.T for k, m in Fs.maps.items()})
        subdivided = True
    else:
        cs, subdivided = c, False
    cs.order_and_sign()
    G = cs.group
    offsets, ranks_pos, labels_pos = _offsets(cs, Fv.costalk)
    diffs = {}
    for p in range(1, cs.dim + 1):
        entries: dict = {}
        for key in cs.keys(p):
            for nu, fkey, g in cs.incidences(key):
                _mat_entries(entries, G, offsets[fkey], offsets[key], Fv.extension(key, nu), G.inv(g), -1 if nu % 2 else 1)
        diffs[-p] = GroupRingMatrix(G, ranks_pos[p - 1], ranks_pos[p], entries)
    ranks = {-p: n for p, n in ranks_pos.items()}
    labels = {-p: lab for p, lab in labels_pos.items()}
    K = GroupRingComplex(G, ranks, diffs, labels, subdivided, cs)
    if check and K.d_squared_violations():
        raise ChainError(f"∂∘∂ != 0 in degrees {K.d_squared_violations()}")
    return K


def adjoint_complex(K: GroupRingComplex) -> dict[int, GroupRingMatrix]:
    """``d_k^*`` for every k, shape n_k x n_{k+1}."""
    return {k: K.d(k).adjoint() for k in range(K.lo, K.hi)}


def laplacian(K: GroupRingComplex, k: int) -> GroupRingMatrix:
    """Δ_k = d_{k-1} d_{k-1}^* + d_k^* d_k."""
    if k not in K.ranks:
        raise ChainError(f"degree {k} outside [{K.lo}, {K.hi}]")
    n = K.rank(k)
    out = GroupRingMatrix.zeros(K.group, n, n)
    if k - 1 in K.ranks:
        d = K.d(k - 1)
        out = out + d @ d.adjoint()
    if k + 1 in K.ranks:
        d = K.d(k)
        out = out + d.adjoint() @ d
    return out
