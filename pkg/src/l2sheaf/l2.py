"""L² Betti numbers, Euler characteristics, the Atiyah check, hypercohomology
of complexes of sheaves and the spectral-truncation homotopy check."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .chain import ChainError, GroupRingComplex, build_cochain, cochain_differentials, laplacian, separate
from .complex import GammaComplex
from .group_algebra import (
    GroupRingElement,
    GroupRingMatrix,
    GroupSpec,
    Mode,
    NSProbe,
    _resolve_mode,
    ns_probe,
    spectral_samples,
    vn_kernel_dim,
    vn_rank,
)
from .scalars import format_rational
from .sheaf import ConstructibleSheaf, SheafComplex, SheafError, descend

__all__ = [
    "L2Report",
    "DegreeReport",
    "L2Error",
    "l2_betti",
    "atiyah_check",
    "AtiyahResult",
    "hyper_l2",
    "total_complex",
    "truncation_check",
    "TruncationResult",
    "scalar_realization",
    "REPORT_SCHEMA",
]

REPORT_SCHEMA = "l2sheaf.report/1"


class L2Error(ValueError):
    pass


@dataclass(frozen=True)
class DegreeReport:
    degree: int
    rank: int
    rank_d: Fraction  # vn_rank of d_k (out of this degree)
    betti: Fraction
    betti_laplacian: Fraction
    method: str
    sequence: tuple = ()

    def to_json(self) -> dict:
        out = {
            "degree": self.degree,
            "rank": self.rank,
            "rank_d": format_rational(self.rank_d),
            "betti": format_rational(self.betti),
            "betti_laplacian": format_rational(self.betti_laplacian),
            "method": self.method,
        }
        if self.sequence:
            out["sequence"] = [[n, format_rational(v)] for n, v in self.sequence]
        return out


@dataclass(frozen=True)
class L2Report:
    degrees: tuple[DegreeReport, ...]
    subdivided: bool = False
    ns: Mapping[int, NSProbe] = field(default_factory=dict)

    @property
    def betti(self) -> dict[int, Fraction]:
        return {r.degree: r.betti for r in self.degrees}

    @property
    def euler_l2(self) -> Fraction:
        return sum((Fraction((-1) ** (r.degree % 2)) * r.betti for r in self.degrees), Fraction(0))

    @property
    def euler_ranks(self) -> int:
        return sum((-1) ** (r.degree % 2) * r.rank for r in self.degrees)

    def betti_list(self) -> list[Fraction]:
        return [r.betti for r in self.degrees]

    def text(self) -> str:
        return " ".join(f"b{r.degree}={format_rational(r.betti)}" for r in self.degrees)

    def to_json(self) -> dict:
        out = {
            "schema": REPORT_SCHEMA,
            "degrees": [r.to_json() for r in self.degrees],
            "euler_l2": format_rational(self.euler_l2),
            "subdivided": self.subdivided,
        }
        if self.ns:
            out["ns_probe"] = {str(k): p.to_json() for k, p in sorted(self.ns.items())}
        return out


def l2_betti(
    K: GroupRingComplex,
    spec: GroupSpec | None = None,
    mode: Mode | str = Mode.AUTO,
    *,
    n: int | Sequence[int] | None = None,
    seed: int = 0,
    exact: bool = False,
    check: bool = True,
) -> L2Report:
    """b_k = dim_Γ ker Δ_k, cross-checked against n_k - rk d_k - rk d_{k-1}.

    In exact modes the two values must coincide; in quotient mode both are
    approximations and are reported side by side.
    """
    spec = spec or K.group
    mode = _resolve_mode(mode, spec)
    kw = dict(n=n, seed=seed, exact=exact)
    ranks_d = {k: vn_rank(K.d(k), spec, mode, **kw) for k in range(K.lo, K.hi)}
    degs = []
    for k in K.degrees:
        out_rank = ranks_d[k].value if k in ranks_d else Fraction(0)
        in_rank = ranks_d[k - 1].value if k - 1 in ranks_d else Fraction(0)
        b_rn = K.rank(k) - out_rank - in_rank
        lap = vn_kernel_dim(laplacian(K, k), spec, mode, **kw)
        if check and mode is not Mode.QUOTIENT_APPROX and lap.value != b_rn:
            raise L2Error(f"degree {k}: Laplacian kernel {lap.value} != rank-nullity value {b_rn}")
        if b_rn < 0:
            raise L2Error(f"degree {k}: negative Betti number {b_rn}")
        degs.append(DegreeReport(k, K.rank(k), out_rank, b_rn, lap.value, mode.value, lap.sequence))
    return L2Report(tuple(degs), K.subdivided)


@dataclass(frozen=True)
class AtiyahResult:
    euler_l2: Fraction
    euler_quotient: Fraction
    report: L2Report
    quotient_report: L2Report

    @property
    def equal(self) -> bool:
        return self.euler_l2 == self.euler_quotient

    def text(self) -> str:
        if self.equal:
            return f"chi_l2 = {format_rational(self.euler_l2)} = chi_quotient OK"
        return (
            f"chi_l2 = {format_rational(self.euler_l2)} != "
            f"chi_quotient = {format_rational(self.euler_quotient)} FAIL"
        )

    def to_json(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "euler_l2": format_rational(self.euler_l2),
            "euler_quotient": format_rational(self.euler_quotient),
            "equal": self.equal,
            "betti": self.report.to_json(),
            "quotient_betti": self.quotient_report.to_json(),
        }


def atiyah_check(c: GammaComplex, F: ConstructibleSheaf, mode: Mode | str = Mode.AUTO, *, seed: int = 0) -> AtiyahResult:
    """Alternating sum of L² Betti numbers versus ordinary Euler characteristic downstairs."""
    K = build_cochain(c, F)
    rep = l2_betti(K, c.group, mode, seed=seed)
    cs, Fs, _ = separate(c, F)
    q = cs.quotient_complex()
    Kq = build_cochain(q, descend(Fs, q))
    rq = l2_betti(Kq, q.group)
    return AtiyahResult(rep.euler_l2, rq.euler_l2, rep, rq)


# ---------------------------------------------------------------------------
# complexes of sheaves


def _sheaf_complex_on_separated(Fc: SheafComplex) -> SheafComplex:
    c = Fc.base
    c.require_free()
    if c.separated():
        return Fc
    return Fc.pullback(c.barycentric_subdivision())


def total_complex(Fc: SheafComplex, *, check: bool = True) -> GroupRingComplex:
    """Totalisation of C^p(F^i): total degree p+i, D = d + (-1)^p φ."""
    viol = Fc.violations()
    if viol:
        raise SheafError("; ".join(viol))
    subdivided = not Fc.base.separated()
    Fc = _sheaf_complex_on_separated(Fc)
    c = Fc.base
    c.order_and_sign()
    G = c.group
    per_term = {i: cochain_differentials(c, F) for i, F in Fc.terms.items()}
    # layout: total degree n collects (p, i) with p + i = n, ordered by i then p's own labels
    layout: dict[int, list[tuple[int, int, int]]] = {}  # n -> [(i, p, offset)]
    ranks: dict[int, int] = {}
    labels: dict[int, list] = {}
    for i in sorted(per_term):
        pranks, _, plabels = per_term[i]
        for p in sorted(pranks):
            n = p + i
            off = ranks.get(n, 0)
            layout.setdefault(n, []).append((i, p, off))
            ranks[n] = off + pranks[p]
            labels.setdefault(n, []).extend((p, i) + lab for lab in plabels[p])
    for n in list(ranks):
        ranks.setdefault(n, 0)
    block = {(i, p): off for n, items in layout.items() for i, p, off in items}
    # key offsets inside each C^p(F^i)
    key_off = {}
    for i, F in Fc.terms.items():
        for p in range(c.dim + 1):
            pos = 0
            for key in c.keys(p):
                key_off[(i, key)] = pos
                pos += F.stalk(key)
    diffs: dict[int, dict] = {n: {} for n in ranks}
    for i, (pranks, pdiffs, _) in per_term.items():
        for p, m in pdiffs.items():
            r0, c0 = block[(i, p + 1)], block[(i, p)]
            ent = diffs[p + i]
            for (a, b), x in m.entries.items():
                ent[(r0 + a, c0 + b)] = x
    for i in Fc.degrees:
        if i + 1 not in Fc.terms:
            continue
        for p in range(c.dim + 1):
            sign = -1 if p % 2 else 1
            r0, c0 = block[(i + 1, p)], block[(i, p)]
            ent = diffs[p + i]
            for key in c.keys(p):
                m = Fc.phi(i, key)
                ro, co = r0 + key_off[(i + 1, key)], c0 + key_off[(i, key)]
                for a in range(m.rows):
                    for b in range(m.cols):
                        s = m[a, b]
                        if s:
                            term = GroupRingElement.monomial(G, G.identity, s * sign)
                            ij = (ro + a, co + b)
                            ent[ij] = ent[ij] + term if ij in ent else term
    mats = {
        n: GroupRingMatrix(G, ranks.get(n + 1, 0), ranks[n], ent) for n, ent in diffs.items() if n + 1 in ranks
    }
    K = GroupRingComplex(G, ranks, mats, labels, subdivided, c)
    if check and K.d_squared_violations():
        raise ChainError(f"total differential squares to non-zero in degrees {K.d_squared_violations()}")
    return K


def hyper_l2(Fc: SheafComplex, mode: Mode | str = Mode.AUTO, **kw) -> L2Report:
    """L² hypercohomology of a bounded complex of sheaves."""
    return l2_betti(total_complex(Fc), Fc.base.group, mode, **kw)


# ---------------------------------------------------------------------------
# spectral truncation


def scalar_realization(M: GroupRingMatrix, spec: GroupSpec, n: int) -> np.ndarray:
    """Dense scalar matrix of M on the finite model (Γ itself, or (Z/n)^d)."""
    if spec.is_finite:
        return M.regular_dense()
    return M.quotient_dense(n)


@dataclass(frozen=True)
class TruncationResult:
    lam: float
    residual: float
    commutator: float
    tol: float = 1e-9

    @property
    def ok(self) -> bool:
        return self.residual <= self.tol and self.commutator <= self.tol

    def to_json(self) -> dict:
        return {"lambda": self.lam, "residual": self.residual, "commutator": self.commutator, "ok": self.ok}


def truncation_check(K: GroupRingComplex, spec: GroupSpec | None = None, n: int = 1, lam: float = 1.0) -> TruncationResult:
    """Verify [D, h] = Id - E_λ on the finite quotient model of K.

    E_λ is the spectral projector of the Laplacian onto eigenvalues ≤ λ,
    g = Σ_{μ>λ} μ^-1 P_μ and h = d^* g.  If λ is within 1e-12 of an
    eigenvalue it is multiplied by (1 + 1e-6) until it is not.
    """
    if not lam > 0:
        raise L2Error("λ must be positive")
    spec = spec or K.group
    if not spec.is_finite and n < 1:
        raise L2Error("quotient size must be positive")
    degs = K.degrees
    scale = spec.order if spec.is_finite else n ** spec.rank
    size = {k: K.rank(k) * scale for k in degs}
    d = {k: scalar_realization(K.d(k), spec, n) for k in degs if k + 1 in K.ranks}

    def dk(k):
        m = d.get(k)
        return m if m is not None else np.zeros((size.get(k + 1, 0), size.get(k, 0)), dtype=complex)

    eig = {}
    for k in degs:
        a, b = dk(k - 1), dk(k)
        lap = a @ a.conj().T + b.conj().T @ b
        eig[k] = np.linalg.eigh(lap) if size[k] else (np.zeros(0), np.zeros((0, 0)))
    allw = np.concatenate([w for w, _ in eig.values()]) if eig else np.zeros(0)
    while allw.size and np.min(np.abs(allw - lam)) < 1e-12:
        lam *= 1 + 1e-6
    E, g = {}, {}
    for k, (w, V) in eig.items():
        low = w <= lam
        Vl, Vh = V[:, low], V[:, ~low]
        E[k] = Vl @ Vl.conj().T
        g[k] = (Vh / w[~low]) @ Vh.conj().T
    # h_k = d_{k-1}^* g_k : C^k -> C^{k-1}
    h = {k: dk(k - 1).conj().T @ g[k] for k in degs}
    r = cm = 0.0
    for k in degs:
        lhs = np.zeros((size[k], size[k]), dtype=complex)
        if k - 1 in size:
            lhs += dk(k - 1) @ h[k]
        if k + 1 in size:
            lhs += h[k + 1] @ dk(k)
            cm = max(cm, float(np.abs(E[k + 1] @ dk(k) - dk(k) @ E[k]).max(initial=0.0)))
        r = max(r, float(np.abs(lhs - (np.eye(size[k]) - E[k])).max(initial=0.0)))
    return TruncationResult(lam, r, cm)


def ns_for_degree(K: GroupRingComplex, k: int, sizes: Sequence[int]) -> NSProbe:
    """Novikov–Shubin density probe of Δ_k over the quotient sizes."""
    L = laplacian(K, k)
    return ns_probe({n: spectral_samples(L, K.group, n) for n in sizes})
