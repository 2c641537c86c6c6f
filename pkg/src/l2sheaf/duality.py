"""Combinatorial Verdier duality on the face poset.

The dual of a sheaf F is the complex whose term in degree -j is
``⊕_{dim s = j} ι_{s̄*}K ⊗ F_s^∨`` summed over all translates of s.  In the
poset model ``ι_{s̄*}K`` has stalk K exactly at the faces of s̄, with
identity corestrictions among them.  So the stalk of the degree -j term at
a simplex β has one component ``(m, s, h, b)`` for every translate ``h.s``
of a j-simplex orbit containing β and every basis vector b of F_s^∨; ``m``
records the term of the input complex (0 for a single sheaf).

The differential is the transposed corestriction on ``F^∨`` tensored with
the restriction ``ι_{s̄*}K -> ι_{t̄*}K`` to a facet, with the sign
``(-1)^ν`` of the facet; for an input complex the transposed morphisms are
added with the sign ``(-1)^j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .chain import GroupRingComplex, build_cochain, build_cosheaf_chain, separate
from .complex import GammaComplex, Key
from .group_algebra import GroupRingElement, GroupRingMatrix, Mode, vn_kernel_dim
from .l2 import L2Report, hyper_l2, l2_betti, total_complex
from .scalars import Mat, Scalar, format_rational
from .sheaf import ConstructibleSheaf, SheafComplex, constant_sheaf, dual_cosheaf

__all__ = [
    "DualComplex",
    "verdier_dual",
    "verdier_dual_complex",
    "dualizing_complex",
    "ComparisonMono",
    "comparison_mono",
    "DualityResult",
    "duality_check",
]


def _gkey(g):
    return g if isinstance(g, tuple) else (g,)


@dataclass(frozen=True, eq=False)
class DualComplex:
    """𝔻(F) as a complex of sheaves, with the component labels of every stalk."""

    complex: SheafComplex
    components: Mapping[int, Mapping[Key, tuple]]
    source: SheafComplex
    subdivided: bool

    @property
    def base(self) -> GammaComplex:
        return self.complex.base

    def to_json(self) -> dict:
        return {"complex": self.base.to_json(), "sheaf_complex": self.complex.to_json(), "subdivided": self.subdivided}


def verdier_dual_complex(Fc: SheafComplex) -> DualComplex:
    """Verdier dual of a bounded complex of sheaves (subdividing first if needed)."""
    c0 = Fc.base
    c0.require_free()
    subdivided = not c0.separated()
    if subdivided:
        Fc = Fc.pullback(c0.barycentric_subdivision())
    c = Fc.base
    c.order_and_sign()
    G = c.group
    stars = {key: c.star(key) for key in c.keys()}
    degrees = set()
    comps: dict[int, dict[Key, list]] = {}
    for m, F in Fc.terms.items():
        for s in c.keys():
            if F.stalk(s):
                degrees.add(-s[0] - m)
    for n in degrees:
        comps[n] = {}
    for beta in c.keys():
        for s, h in stars[beta]:
            for m, F in Fc.terms.items():
                for b in range(F.stalk(s)):
                    comps[-s[0] - m].setdefault(beta, []).append((m, s, h, b))
    for n in comps:
        for beta in comps[n]:
            comps[n][beta].sort(key=lambda x: (x[0], x[1], _gkey(x[2]), x[3]))
    index = {n: {beta: {x: a for a, x in enumerate(lst)} for beta, lst in comps[n].items()} for n in comps}

    terms = {}
    for n, per in comps.items():
        stalks = {beta: len(lst) for beta, lst in per.items()}
        maps = {}
        for beta in c.keys():
            if beta not in per:
                continue
            for nu, alpha, g in c.incidences(beta):
                src = per.get(alpha, [])
                if not src:
                    continue
                data = [[Scalar(0)] * len(src) for _ in per[beta]]
                for col, (m, s, hp, b) in enumerate(src):
                    row = index[n][beta].get((m, s, G.mul(g, hp), b))
                    if row is not None:
                        data[row][col] = Scalar(1)
                maps[(beta, nu)] = Mat(len(per[beta]), len(src), data)
        terms[n] = ConstructibleSheaf(c, stalks, maps, all(F.real for F in Fc.terms.values()))

    diffs: dict[int, dict] = {}
    for n, per in comps.items():
        if n + 1 not in comps:
            continue
        out = {}
        for beta, lst in per.items():
            targets = comps[n + 1].get(beta, [])
            if not targets:
                continue
            tindex = index[n + 1][beta]
            data = [[Scalar(0)] * len(lst) for _ in targets]
            for col, (m, s, h, b) in enumerate(lst):
                F = Fc.terms[m]
                j = s[0]
                # transposed corestriction to each facet of h.s containing beta
                for nu, t, g in c.incidences(s):
                    rho = F.rho(s, nu)
                    eps = -1 if nu % 2 else 1
                    for cidx in range(F.stalk(t)):
                        v = rho[b, cidx]
                        if not v:
                            continue
                        row = tindex.get((m, t, G.mul(h, g), cidx))
                        if row is not None:
                            data[row][col] = data[row][col] + v * eps
                # transposed morphism of the input complex
                if m - 1 in Fc.terms:
                    phi = Fc.phi(m - 1, s)
                    sign = -1 if j % 2 else 1
                    for cidx in range(Fc.terms[m - 1].stalk(s)):
                        v = phi[b, cidx]
                        if not v:
                            continue
                        row = tindex.get((m - 1, s, h, cidx))
                        if row is not None:
                            data[row][col] = data[row][col] + v * sign
            out[beta] = Mat(len(targets), len(lst), data)
        diffs[n] = out
    for n in comps:
        terms.setdefault(n, ConstructibleSheaf(c, {}, {}, True))
    dual = SheafComplex(c, terms, diffs)
    return DualComplex(dual, {n: {k: tuple(v) for k, v in per.items()} for n, per in comps.items()}, Fc, subdivided)


def verdier_dual(F: ConstructibleSheaf) -> DualComplex:
    return verdier_dual_complex(SheafComplex.single(F))


def dualizing_complex(c: GammaComplex) -> DualComplex:
    return verdier_dual(constant_sheaf(c, 1))


# ---------------------------------------------------------------------------
# comparison with the cosheaf chain complex


@dataclass(frozen=True, eq=False)
class ComparisonMono:
    source: GroupRingComplex
    target: GroupRingComplex
    maps: Mapping[int, GroupRingMatrix]
    quotient: GroupRingComplex

    def chain_map_violations(self) -> list[int]:
        bad = []
        for k in self.source.degrees:
            if k + 1 not in self.source.ranks:
                continue
            lhs = self.target.d(k) @ self.maps[k]
            rhs = self.maps[k + 1] @ self.source.d(k)
            if lhs != rhs:
                bad.append(k)
        return bad

    def kernel_dims(self, mode: Mode | str = Mode.AUTO) -> dict[int, Fraction]:
        return {k: vn_kernel_dim(m, self.source.group, mode).value for k, m in self.maps.items()}

    def quotient_report(self, mode: Mode | str = Mode.AUTO) -> L2Report:
        return l2_betti(self.quotient, self.source.group, mode)


def comparison_mono(c: GammaComplex, F: ConstructibleSheaf) -> ComparisonMono:
    """Monomorphism from the chain complex of F^∨ into the cochains of 𝔻(F).

    On the closed simplex s̄ the map is the coaugmentation K -> C^•(s̄),
    sending 1 to the sum of the vertices of s̄.
    """
    cs, Fs, _ = separate(c, F)
    D = verdier_dual(Fs)
    src = build_cosheaf_chain(cs, dual_cosheaf(Fs))
    tgt = total_complex(D.complex)
    G = cs.group
    row_of = {n: {lab: r for r, lab in enumerate(labels)} for n, labels in tgt.labels.items()}
    maps = {}
    pivots = {}
    for k in src.degrees:
        entries = {}
        piv = []
        for col, (sigma, b) in enumerate(src.labels.get(k, [])):
            p = sigma[0]
            for mu, (w, x) in enumerate(cs.rep(sigma)):
                comp_list = D.components[-p][(0, w)]
                bidx = comp_list.index((0, sigma, G.inv(x), b))
                r = row_of[k][(0, -p, (0, w), bidx)]
                entries[(r, col)] = GroupRingElement.monomial(G, G.inv(x))
                if mu == 0:
                    piv.append((r, x))
        maps[k] = GroupRingMatrix(G, tgt.rank(k), src.rank(k), entries)
        pivots[k] = piv
    quotient = _quotient(tgt, maps, pivots)
    return ComparisonMono(src, tgt, maps, quotient)


def _quotient(tgt: GroupRingComplex, maps, pivots) -> GroupRingComplex:
    """Quotient of ``tgt`` by the image of ``maps``, on the non-pivot basis rows."""
    G = tgt.group
    keep = {}
    proj = {}
    for n in tgt.degrees:
        piv = pivots.get(n, [])
        prow = {r for r, _ in piv}
        keep[n] = [r for r in range(tgt.rank(n)) if r not in prow]
        N = tgt.rank(n)
        if not piv:
            proj[n] = GroupRingMatrix.identity(G, N)
            continue
        # P = I - M U^-1 S_piv, with U^-1 S_piv sending pivot row r_j to column j with coefficient x_j
        inv_sel = GroupRingMatrix(
            G, len(piv), N, {(j, r): GroupRingElement.monomial(G, x) for j, (r, x) in enumerate(piv)}
        )
        proj[n] = GroupRingMatrix.identity(G, N) - maps[n] @ inv_sel
    diffs = {}
    for n in tgt.degrees:
        if n + 1 not in tgt.ranks:
            continue
        D = proj[n + 1] @ tgt.d(n)
        diffs[n] = D.submatrix(keep[n + 1], keep[n])
    ranks = {n: len(keep[n]) for n in tgt.degrees}
    return GroupRingComplex(G, ranks, diffs, {}, tgt.subdivided, tgt.base)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DualityRow:
    degree: int
    betti: Fraction
    dual_betti: Fraction

    @property
    def equal(self) -> bool:
        return self.betti == self.dual_betti


@dataclass(frozen=True)
class DualityResult:
    rows: tuple[DualityRow, ...]

    @property
    def all_equal(self) -> bool:
        return all(r.equal for r in self.rows)

    def text(self) -> str:
        lines = ["i  b_i(F)  b_-i(DF)  equal"]
        for r in self.rows:
            lines.append(
                f"{r.degree}  {format_rational(r.betti)}  {format_rational(r.dual_betti)}  {'yes' if r.equal else 'NO'}"
            )
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "schema": "l2sheaf.duality/1",
            "rows": [
                {
                    "i": r.degree,
                    "betti": format_rational(r.betti),
                    "dual_betti": format_rational(r.dual_betti),
                    "equal": r.equal,
                }
                for r in self.rows
            ],
            "all_equal": self.all_equal,
        }


def duality_check(c: GammaComplex, F: ConstructibleSheaf, mode: Mode | str = Mode.AUTO, *, seed: int = 0) -> DualityResult:
    """Compare b_i(F) with b_{-i}(𝔻F) for every i with either side possibly non-zero."""
    cs, Fs, _ = separate(c, F)
    bF = l2_betti(build_cochain(cs, Fs), cs.group, mode, seed=seed).betti
    bD = hyper_l2(verdier_dual(Fs).complex, mode, seed=seed).betti
    dim = cs.dim
    rows = tuple(
        DualityRow(i, bF.get(i, Fraction(0)), bD.get(-i, Fraction(0))) for i in range(-dim, dim + 1)
    )
    return DualityResult(rows)
