"""Group rings CΓ, group-ring matrices and Von Neumann dimensions.

Conventions
-----------
A column of a :class:`GroupRingMatrix` is a free CΓ summand.  Matrices act
on column vectors by *left* multiplication, ``(A x)_i = sum_j A_ij x_j``;
these maps commute with the right regular action of Γ on l²Γ, which is the
Γ-module structure of every cochain group built in this package.  The Von
Neumann trace is the coefficient of the identity, and ``dim_Γ ker A`` is
computed without ever materialising l²Γ:

* finite Γ: realise A through the regular representation and divide the
  scalar kernel dimension by |Γ|;
* Γ = Z^d: ``cols - rank`` of A as a matrix of Laurent polynomials over the
  fraction field (evaluation at random points of F_p, with an exact
  symbolic fallback);
* quotient approximation: replace Z^d by (Z/n)^d and average the kernel
  dimension over the n^d characters.
"""

from __future__ import annotations

import enum
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .scalars import (
    MERSENNE61,
    ONE,
    ZERO,
    Scalar,
    as_scalar,
    complex_rank,
    format_rational,
    rank_mod_p,
    rank_q,
)

__all__ = [
    "GroupSpec",
    "GroupRingElement",
    "GroupRingMatrix",
    "Mode",
    "VNDimension",
    "NSProbe",
    "trace_vn",
    "vn_kernel_dim",
    "vn_rank",
    "generic_rank",
    "quotient_error_bound",
    "spectral_samples",
    "ns_probe",
    "GroupError",
    "ModeError",
]

# Eigenvalues / singular values below this (relative to max(1, ||A||)) count as zero.
SPECTRAL_TOL = 1e-9


class GroupError(ValueError):
    pass


class ModeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# groups


class GroupSpec:
    """A deck group: finite (multiplication table) or free abelian Z^d.

    Finite group elements are indices ``0..order-1`` with the identity at 0.
    Elements of Z^d are integer tuples of length d.
    """

    __slots__ = ("kind", "mul_table", "inverse_table", "rank", "_hash")

    def __init__(self, kind: str, mul_table=None, rank: int | None = None):
        if kind == "finite":
            table = tuple(tuple(int(x) for x in row) for row in mul_table)
            n = len(table)
            if n == 0 or any(len(row) != n for row in table):
                raise GroupError("multiplication table must be square and non-empty")
            if any(not 0 <= x < n for row in table for x in row):
                raise GroupError("multiplication table entries out of range")
            inv = []
            for a in range(n):
                cands = [b for b in range(n) if table[a][b] == 0]
                inv.append(cands[0] if cands else -1)
            self.mul_table = table
            self.inverse_table = tuple(inv)
            self.rank = None
        elif kind == "free_abelian":
            if rank is None or int(rank) < 1:
                raise GroupError("free abelian rank must be a positive integer")
            self.mul_table = None
            self.inverse_table = None
            self.rank = int(rank)
        else:
            raise GroupError(f"unknown group kind {kind!r}")
        self.kind = kind
        self._hash = hash((kind, self.mul_table, self.rank))

    # constructors ------------------------------------------------------
    @classmethod
    def trivial(cls) -> "GroupSpec":
        return cls("finite", [[0]])

    @classmethod
    def cyclic(cls, k: int) -> "GroupSpec":
        if k < 1:
            raise GroupError("cyclic order must be positive")
        return cls("finite", [[(a + b) % k for b in range(k)] for a in range(k)])

    @classmethod
    def free_abelian(cls, d: int) -> "GroupSpec":
        return cls("free_abelian", rank=d)

    @classmethod
    def symmetric3(cls) -> "GroupSpec":
        perms = list(itertools.permutations(range(3)))
        index = {p: i for i, p in enumerate(perms)}
        table = [[index[tuple(p[q[i]] for i in range(3))] for q in perms] for p in perms]
        return cls("finite", table)

    @classmethod
    def from_json(cls, obj: Mapping) -> "GroupSpec":
        kind = obj.get("kind")
        if kind == "finite":
            return cls("finite", obj["mul_table"])
        if kind == "cyclic":
            return cls.cyclic(int(obj["order"]))
        if kind == "trivial":
            return cls.trivial()
        if kind == "free_abelian":
            return cls.free_abelian(int(obj["rank"]))
        raise GroupError(f"unknown group kind {kind!r}")

    def to_json(self) -> dict:
        if self.kind == "free_abelian":
            return {"kind": "free_abelian", "rank": self.rank}
        n = self.order
        if all(self.mul_table[a][b] == (a + b) % n for a in range(n) for b in range(n)):
            return {"kind": "cyclic", "order": n}
        return {"kind": "finite", "mul_table": [list(r) for r in self.mul_table]}

    # structure -----------------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def order(self) -> int:
        if not self.is_finite:
            raise GroupError("Z^d has infinite order")
        return len(self.mul_table)

    @property
    def identity(self):
        return 0 if self.is_finite else (0,) * self.rank

    def elements(self) -> range:
        return range(self.order)

    def mul(self, a, b):
        if self.is_finite:
            return self.mul_table[a][b]
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        if self.is_finite:
            return self.inverse_table[a]
        return tuple(-x for x in a)

    def normalize(self, g):
        """Coerce a JSON-ish element (int, list) to the canonical representation."""
        if self.is_finite:
            if isinstance(g, (list, tuple)):
                if len(g) != 1:
                    raise GroupError(f"bad finite group element {g!r}")
                g = g[0]
            g = int(g)
            if not 0 <= g < self.order:
                raise GroupError(f"group element {g} out of range")
            return g
        if isinstance(g, int):
            g = (g,)
        g = tuple(int(x) for x in g)
        if len(g) != self.rank:
            raise GroupError(f"element {g} is not in Z^{self.rank}")
        return g

    def element_to_json(self, g):
        return g if self.is_finite else list(g)

    def validate(self) -> list[str]:
        """Group axioms, checked exhaustively for finite groups."""
        if not self.is_finite:
            return []
        problems = []
        t = self.mul_table
        n = len(t)
        if any(t[0][a] != a or t[a][0] != a for a in range(n)):
            problems.append("identity: index 0 is not a two-sided identity")
        for a in range(n):
            b = self.inverse_table[a]
            if b < 0 or t[b][a] != 0:
                problems.append(f"inverse: element {a} has no two-sided inverse")
        for a, b, c in itertools.product(range(n), repeat=3):
            if t[t[a][b]][c] != t[a][t[b][c]]:
                problems.append(f"associativity: ({a}*{b})*{c} != {a}*({b}*{c})")
                break
        return problems

    def __eq__(self, other):
        return (
            isinstance(other, GroupSpec)
            and self.kind == other.kind
            and self.mul_table == other.mul_table
            and self.rank == other.rank
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if self.is_finite:
            return f"GroupSpec(finite, order={self.order})"
        return f"GroupSpec(Z^{self.rank})"


# ---------------------------------------------------------------------------
# group ring


class GroupRingElement:
    """Finitely supported map Γ -> Q(i).  Zero coefficients are never stored."""

    __slots__ = ("group", "coeffs")

    def __init__(self, group: GroupSpec, coeffs: Mapping | None = None):
        self.group = group
        clean = {}
        for g, c in (coeffs or {}).items():
            c = as_scalar(c)
            if c:
                clean[g] = c
        self.coeffs = clean

    @classmethod
    def monomial(cls, group, g, c=1) -> "GroupRingElement":
        return cls(group, {g: c})

    @classmethod
    def one(cls, group) -> "GroupRingElement":
        return cls(group, {group.identity: ONE})

    @classmethod
    def zero(cls, group) -> "GroupRingElement":
        return cls(group, {})

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, GroupRingElement):
            return self.group == other.group and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __add__(self, other: "GroupRingElement") -> "GroupRingElement":
        out = dict(self.coeffs)
        for g, c in other.coeffs.items():
            out[g] = out.get(g, ZERO) + c
        return GroupRingElement(self.group, out)

    def __neg__(self):
        return GroupRingElement(self.group, {g: -c for g, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, GroupRingElement):
            s = as_scalar(other)
            return GroupRingElement(self.group, {g: c * s for g, c in self.coeffs.items()})
        out: dict = {}
        mul = self.group.mul
        for g, a in self.coeffs.items():
            for h, b in other.coeffs.items():
                k = mul(g, h)
                out[k] = out.get(k, ZERO) + a * b
        return GroupRingElement(self.group, out)

    def __rmul__(self, other):
        return self * other

    def star(self) -> "GroupRingElement":
        """star(a)(γ) = conj(a(γ^-1))."""
        inv = self.group.inv
        return GroupRingElement(self.group, {inv(g): c.conj() for g, c in self.coeffs.items()})

    def reverse(self) -> "GroupRingElement":
        """The linear anti-involution g -> g^-1 (no conjugation)."""
        inv = self.group.inv
        return GroupRingElement(self.group, dict((inv(g), c) for g, c in self.coeffs.items()))

    def augmentation(self) -> Scalar:
        total = ZERO
        for c in self.coeffs.values():
            total = total + c
        return total

    def is_real(self) -> bool:
        return all(c.is_real() for c in self.coeffs.values())

    def to_json(self) -> list:
        out = []
        for g in sorted(self.coeffs):
            c = self.coeffs[g]
            out.append(
                {
                    "g": self.group.element_to_json(g),
                    "re": format_rational(c.re),
                    "im": format_rational(c.im),
                }
            )
        return out

    @classmethod
    def from_json(cls, group: GroupSpec, obj: Iterable[Mapping]) -> "GroupRingElement":
        coeffs: dict = {}
        for term in obj:
            g = group.normalize(term["g"])
            c = Scalar(term.get("re", 0), term.get("im", 0))
            coeffs[g] = coeffs.get(g, ZERO) + c
        return cls(group, coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for g in sorted(self.coeffs):
            c = self.coeffs[g]
            parts.append(f"{c!r}*{g}")
        return " + ".join(parts)


def trace_vn(a: GroupRingElement) -> Scalar:
    """Von Neumann trace: the coefficient of the identity."""
    return a.coeffs.get(a.group.identity, ZERO)


class GroupRingMatrix:
    """Sparse rows x cols matrix over CΓ."""

    __slots__ = ("group", "rows", "cols", "entries")

    def __init__(self, group: GroupSpec, rows: int, cols: int, entries: Mapping | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("negative shape")
        self.group = group
        self.rows = rows
        self.cols = cols
        clean = {}
        for (i, j), a in (entries or {}).items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise IndexError(f"entry ({i},{j}) outside {rows}x{cols}")
            if not isinstance(a, GroupRingElement):
                raise TypeError(f"entry ({i},{j}) is not a group ring element")
            if a:
                clean[(i, j)] = a
        self.entries = clean

    @classmethod
    def zeros(cls, group, rows, cols) -> "GroupRingMatrix":
        return cls(group, rows, cols)

    @classmethod
    def identity(cls, group, n) -> "GroupRingMatrix":
        one = GroupRingElement.one(group)
        return cls(group, n, n, {(i, i): one for i in range(n)})

    @classmethod
    def from_dense(cls, group, rows: Sequence[Sequence[GroupRingElement]]) -> "GroupRingMatrix":
        nr = len(rows)
        nc = len(rows[0]) if nr else 0
        return cls(group, nr, nc, {(i, j): a for i, row in enumerate(rows) for j, a in enumerate(row)})

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij) -> GroupRingElement:
        return self.entries.get(ij) or GroupRingElement.zero(self.group)

    def __eq__(self, other):
        if not isinstance(other, GroupRingMatrix):
            return NotImplemented
        return self.shape == other.shape and self.group == other.group and self.entries == other.entries

    def __hash__(self):
        return hash((self.shape, frozenset(self.entries.items())))

    def __add__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        out = dict(self.entries)
        for ij, a in other.entries.items():
            out[ij] = out[ij] + a if ij in out else a
        return GroupRingMatrix(self.group, self.rows, self.cols, out)

    def __neg__(self):
        return GroupRingMatrix(self.group, self.rows, self.cols, {ij: -a for ij, a in self.entries.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "GroupRingMatrix":
        return GroupRingMatrix(self.group, self.rows, self.cols, {ij: a * s for ij, a in self.entries.items()})

    def __matmul__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        by_row: dict = {}
        for (k, j), b in other.entries.items():
            by_row.setdefault(k, []).append((j, b))
        out: dict = {}
        for (i, k), a in self.entries.items():
            for j, b in by_row.get(k, ()):
                p = a * b
                out[(i, j)] = out[(i, j)] + p if (i, j) in out else p
        return GroupRingMatrix(self.group, self.rows, other.cols, out)

    def adjoint(self) -> "GroupRingMatrix":
        """Transpose composed with entrywise star."""
        return GroupRingMatrix(
            self.group, self.cols, self.rows, {(j, i): a.star() for (i, j), a in self.entries.items()}
        )

    def reversed_transpose(self) -> "GroupRingMatrix":
        """Transpose composed with g -> g^-1, no conjugation (used by cosheaf chains)."""
        return GroupRingMatrix(
            self.group, self.cols, self.rows, {(j, i): a.reverse() for (i, j), a in self.entries.items()}
        )

    def is_self_adjoint(self) -> bool:
        return self.rows == self.cols and self.adjoint() == self

    def is_zero(self) -> bool:
        return not self.entries

    def is_real(self) -> bool:
        return all(a.is_real() for a in self.entries.values())

    def augmentation(self) -> list[dict]:
        """Scalar matrix obtained from g -> 1, as sparse rows."""
        rows: list[dict] = [dict() for _ in range(self.rows)]
        for (i, j), a in self.entries.items():
            s = a.augmentation()
            if s:
                rows[i][j] = s
        return rows

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "GroupRingMatrix":
        rpos = {r: a for a, r in enumerate(row_idx)}
        cpos = {c: b for b, c in enumerate(col_idx)}
        out = {}
        for (i, j), a in self.entries.items():
            if i in rpos and j in cpos:
                out[(rpos[i], cpos[j])] = a
        return GroupRingMatrix(self.group, len(row_idx), len(col_idx), out)

    # realisations ------------------------------------------------------
    def regular_rows(self) -> list[dict]:
        """Sparse Scalar rows of the left-multiplication matrix for finite Γ.

        Row ``i*N + h``, column ``j*N + k`` carries ``A_ij(h k^-1)``.
        """
        G = self.group
        N = G.order
        rows: list[dict] = [dict() for _ in range(self.rows * N)]
        for (i, j), a in self.entries.items():
            for g, c in a.coeffs.items():
                for h in range(N):
                    k = G.mul(G.inv(g), h)
                    r = rows[i * N + h]
                    col = j * N + k
                    r[col] = r.get(col, ZERO) + c
        return rows

    def regular_dense(self) -> np.ndarray:
        G = self.group
        N = G.order
        M = np.zeros((self.rows * N, self.cols * N), dtype=complex)
        for (i, j), a in self.entries.items():
            for g, c in a.coeffs.items():
                cz = complex(c)
                for h in range(N):
                    M[i * N + h, j * N + G.mul(G.inv(g), h)] += cz
        return M

    def character_stack(self, n: int) -> np.ndarray:
        """Evaluate a Z^d matrix at every character of (Z/n)^d: shape (n^d, rows, cols).

        Character k sends the generator t_i to exp(2πi k_i / n).
        """
        d = self.group.rank
        ks = np.array(list(itertools.product(range(n), repeat=d)), dtype=float).reshape(-1, d)
        out = np.zeros((ks.shape[0], self.rows, self.cols), dtype=complex)
        for (i, j), a in self.entries.items():
            for g, c in a.coeffs.items():
                phase = np.exp(2j * np.pi * (ks @ np.asarray(g, dtype=float)) / n)
                out[:, i, j] += complex(c) * phase
        return out

    def quotient_dense(self, n: int) -> np.ndarray:
        """Scalar matrix of A on l²((Z/n)^d): blocks are circulant (left multiplication)."""
        d = self.group.rank
        elems = list(itertools.product(range(n), repeat=d))
        index = {e: k for k, e in enumerate(elems)}
        N = len(elems)
        M = np.zeros((self.rows * N, self.cols * N), dtype=complex)
        for (i, j), a in self.entries.items():
            for g, c in a.coeffs.items():
                cz = complex(c)
                for h, e in enumerate(elems):
                    k = index[tuple((x - y) % n for x, y in zip(e, g))]
                    M[i * N + h, j * N + k] += cz
        return M

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [
                {"i": i, "j": j, "value": self.entries[(i, j)].to_json()} for (i, j) in sorted(self.entries)
            ],
        }

    @classmethod
    def from_json(cls, group: GroupSpec, obj: Mapping) -> "GroupRingMatrix":
        return cls(
            group,
            int(obj["rows"]),
            int(obj["cols"]),
            {(e["i"], e["j"]): GroupRingElement.from_json(group, e["value"]) for e in obj.get("entries", [])},
        )

    def __repr__(self):
        return f"GroupRingMatrix({self.rows}x{self.cols}, nnz={len(self.entries)}, {self.group!r})"


# ---------------------------------------------------------------------------
# Von Neumann dimension


class Mode(enum.Enum):
    AUTO = "auto"
    EXACT_FINITE = "exact"
    GENERIC_RANK = "generic"
    QUOTIENT_APPROX = "quotient"


@dataclass(frozen=True)
class VNDimension:
    value: Fraction
    method: Mode
    sequence: tuple[tuple[int, Fraction], ...] = ()

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("negative Von Neumann dimension")

    def to_json(self) -> dict:
        out = {"value": format_rational(self.value), "method": self.method.value}
        if self.sequence:
            out["sequence"] = [[n, format_rational(v)] for n, v in self.sequence]
        return out


def _resolve_mode(mode: Mode | str, spec: GroupSpec) -> Mode:
    mode = Mode(mode)
    if mode is Mode.AUTO:
        return Mode.EXACT_FINITE if spec.is_finite else Mode.GENERIC_RANK
    if mode is Mode.EXACT_FINITE and not spec.is_finite:
        raise ModeError("exact mode needs a finite group")
    if mode in (Mode.GENERIC_RANK, Mode.QUOTIENT_APPROX) and spec.is_finite:
        raise ModeError(f"{mode.value} mode needs a free abelian group")
    return mode


def _to_mod_p(q: Fraction, p: int) -> int:
    den = q.denominator % p
    if den == 0:
        raise ZeroDivisionError("denominator vanishes mod p")
    return q.numerator * pow(den, -1, p) % p


def _eval_rows_mod_p(A: GroupRingMatrix, point: Sequence[int], p: int) -> list[dict]:
    """Realified evaluation of a Laurent matrix at a point of (F_p^*)^d."""
    complex_entries = not A.is_real()
    nc = A.cols
    rows: list[dict] = [dict() for _ in range(A.rows * (2 if complex_entries else 1))]
    cache: dict = {}
    for (i, j), a in A.entries.items():
        re = im = 0
        for g, c in a.coeffs.items():
            mono = cache.get(g)
            if mono is None:
                mono = 1
                for z, e in zip(point, g):
                    mono = mono * pow(z, e, p) % p
                cache[g] = mono
            if c.re:
                re = (re + _to_mod_p(c.re, p) * mono) % p
            if c.im:
                im = (im + _to_mod_p(c.im, p) * mono) % p
        if not complex_entries:
            if re:
                rows[i][j] = re
            continue
        top, bottom = rows[2 * i], rows[2 * i + 1]
        if re:
            top[j] = re
            bottom[j + nc] = re
        if im:
            top[j + nc] = (-im) % p
            bottom[j] = im
    return rows


def _generic_rank_symbolic(A: GroupRingMatrix) -> int:
    """Exact rank over Q(i)(z_1..z_d) with sympy fraction-field elimination."""
    from sympy import QQ, symbols
    from sympy.polys.matrices import DomainMatrix

    d = A.group.rank
    zs = symbols(f"z0:{d}")
    P = QQ[zs]
    K = QQ.frac_field(*zs)
    # multiply each column by a monomial so every entry is a polynomial
    shift = [[0] * d for _ in range(A.cols)]
    for (i, j), a in A.entries.items():
        for g in a.coeffs:
            shift[j] = [min(s, e) for s, e in zip(shift[j], g)]
    complex_entries = not A.is_real()
    m = 2 if complex_entries else 1
    grid = [[K.zero] * (A.cols * m) for _ in range(A.rows * m)]
    for (i, j), a in A.entries.items():
        re, im = {}, {}
        for g, c in a.coeffs.items():
            e = tuple(x - s for x, s in zip(g, shift[j]))
            if c.re:
                re[e] = QQ(c.re.numerator, c.re.denominator)
            if c.im:
                im[e] = QQ(c.im.numerator, c.im.denominator)
        pr = K.convert_from(P.ring.from_dict(re), P) if re else K.zero
        pi = K.convert_from(P.ring.from_dict(im), P) if im else K.zero
        if complex_entries:
            grid[i][j] = pr
            grid[i + A.rows][j + A.cols] = pr
            grid[i][j + A.cols] = -pi
            grid[i + A.rows][j] = pi
        else:
            grid[i][j] = pr
    if not grid or not grid[0]:
        return 0
    r = DomainMatrix(grid, (A.rows * m, A.cols * m), K).rank()
    return r // m


def generic_rank(A: GroupRingMatrix, *, seed: int = 0, points: int = 2, exact: bool = False) -> int:
    """Rank of a Z^d matrix over the fraction field of the Laurent polynomial ring.

    Each evaluation at a random point of (F_p^*)^d, p = 2^61 - 1, gives a
    lower bound which is sharp outside a hypersurface (Schwartz-Zippel).
    ``points`` independent evaluations must agree; otherwise, or when
    ``exact`` is set, the rank is recomputed symbolically.
    """
    if A.group.is_finite:
        raise ModeError("generic rank is defined for free abelian groups")
    if not A.entries:
        return 0
    if exact:
        return _generic_rank_symbolic(A)
    rng = random.Random(seed)
    p = MERSENNE61
    doubled = not A.is_real()
    ranks = []
    for _ in range(max(2, points)):
        pt = [rng.randrange(2, p - 1) for _ in range(A.group.rank)]
        try:
            r = rank_mod_p(_eval_rows_mod_p(A, pt, p), p)
        except ZeroDivisionError:
            return _generic_rank_symbolic(A)
        ranks.append(r // 2 if doubled else r)
    if len(set(ranks)) != 1:
        return _generic_rank_symbolic(A)
    return ranks[0]


def _quotient_kernel(A: GroupRingMatrix, n: int) -> Fraction:
    stack = A.character_stack(n)
    N = stack.shape[0]
    if A.rows == 0:
        return Fraction(A.cols)
    s = np.linalg.svd(stack, compute_uv=False)
    scale = max(1.0, float(s.max()) if s.size else 0.0)
    ranks = (s > SPECTRAL_TOL * scale).sum(axis=1)
    return Fraction(int(A.cols * N - ranks.sum()), N)


def vn_kernel_dim(
    A: GroupRingMatrix,
    spec: GroupSpec | None = None,
    mode: Mode | str = Mode.AUTO,
    *,
    n: int | Sequence[int] | None = None,
    seed: int = 0,
    exact: bool = False,
) -> VNDimension:
    """dim_Γ of the kernel of A acting on (l²Γ)^cols."""
    spec = spec or A.group
    if spec != A.group:
        raise GroupError("matrix entries live over a different group")
    mode = _resolve_mode(mode, spec)
    if mode is Mode.EXACT_FINITE:
        N = spec.order
        r = complex_rank(A.regular_rows(), A.cols * N)
        return VNDimension(Fraction(A.cols * N - r, N), mode)
    if mode is Mode.GENERIC_RANK:
        r = generic_rank(A, seed=seed, exact=exact)
        return VNDimension(Fraction(A.cols - r), mode)
    if n is None:
        raise ModeError("quotient mode needs a quotient size n")
    sizes = [n] if isinstance(n, int) else list(n)
    if not sizes or any(int(k) <= 0 for k in sizes):
        raise ModeError("quotient sizes must be positive")
    seq = tuple((int(k), _quotient_kernel(A, int(k))) for k in sizes)
    return VNDimension(seq[-1][1], mode, seq)


def vn_rank(A: GroupRingMatrix, spec: GroupSpec | None = None, mode: Mode | str = Mode.AUTO, **kw) -> VNDimension:
    """dim_Γ of the closure of the image, i.e. cols - dim_Γ ker A."""
    k = vn_kernel_dim(A, spec, mode, **kw)
    seq = tuple((m, Fraction(A.cols) - v) for m, v in k.sequence)
    return VNDimension(Fraction(A.cols) - k.value, k.method, seq)


def _row_degree_bound(A: GroupRingMatrix) -> int:
    total = 0
    for i in range(A.rows):
        exps = [g for (r, _), a in A.entries.items() if r == i for g in a.coeffs]
        if not exps:
            continue
        lo = [min(e[k] for e in exps) for k in range(A.group.rank)]
        total += max(sum(x - m for x, m in zip(e, lo)) for e in exps)
    return total


def quotient_error_bound(A: GroupRingMatrix, n: int) -> Fraction:
    """Upper bound on |QuotientApprox(n) - GenericRank| for the kernel dimension.

    A rank drop at a character needs a fixed non-vanishing maximal minor to
    vanish there.  After clearing denominators row by row, that minor has
    total degree at most D = sum of row degree spans, so it vanishes on at
    most D n^(d-1) of the n^d characters.  Hence the bound cols * min(1, D/n).
    """
    D = _row_degree_bound(A)
    return Fraction(A.cols) * min(Fraction(1), Fraction(D, n))


# ---------------------------------------------------------------------------
# spectra


def spectral_samples(A: GroupRingMatrix, spec: GroupSpec | None = None, n: int = 1) -> np.ndarray:
    """Sorted eigenvalues (with multiplicity) of a self-adjoint A on a finite quotient.

    For finite Γ the regular representation is used and ``n`` is ignored;
    for Z^d the quotient is (Z/n)^d, diagonalised character by character.
    Values within ``SPECTRAL_TOL * max(1, ||A||)`` of zero are snapped to 0.
    """
    spec = spec or A.group
    if not A.is_self_adjoint():
        raise ValueError("spectral_samples needs a self-adjoint matrix")
    if spec.is_finite:
        vals = np.linalg.eigvalsh(A.regular_dense()) if A.rows else np.zeros(0)
    else:
        if n < 1:
            raise ValueError("quotient size must be >= 1")
        stack = A.character_stack(n)
        vals = np.linalg.eigvalsh(stack).ravel() if A.rows else np.zeros(0)
    vals = np.sort(np.real(vals))
    scale = max(1.0, float(np.abs(vals).max()) if vals.size else 0.0)
    vals[np.abs(vals) <= SPECTRAL_TOL * scale] = 0.0
    return vals


@dataclass(frozen=True)
class NSProbe:
    """Log-log slope of the normalised eigenvalue counting function near 0.

    ``gap`` is True when zero is isolated in the spectrum (no density to fit);
    ``slope`` is then None.
    """

    slope: float | None
    window: tuple[float, float] | None
    points: int
    gap: bool
    kernel_fraction: float
    sizes: tuple[int, ...] = field(default=())

    def to_json(self) -> dict:
        return {
            "slope": self.slope,
            "window": list(self.window) if self.window else None,
            "points": self.points,
            "gap": self.gap,
            "kernel_fraction": self.kernel_fraction,
            "sizes": list(self.sizes),
        }


MIN_NS_POINTS = 5


def ns_probe(samples: Mapping[int, Sequence[float]], tol: float = SPECTRAL_TOL) -> NSProbe:
    """Fit F(λ) ≈ c λ^b, F = fraction of eigenvalues in (0, λ].

    Window: from the smallest positive eigenvalue at the largest quotient
    size to the median eigenvalue there.  All sizes contribute points at
    their distinct eigenvalues inside the window.  Zero counts as isolated
    (``gap``) if the window holds fewer than 5 points or the smallest
    positive eigenvalue does not at least halve from the smallest to the
    largest quotient size.
    """
    if len(samples) < 2:
        raise ValueError("ns_probe needs at least two quotient sizes")
    sizes = tuple(sorted(samples))
    arrs = {k: np.sort(np.asarray(samples[k], dtype=float)) for k in sizes}
    big = arrs[sizes[-1]]
    kernel_fraction = float((big <= tol).sum()) / max(1, big.size)
    pos_big = big[big > tol]
    pos_small = arrs[sizes[0]][arrs[sizes[0]] > tol]
    if pos_big.size == 0:
        return NSProbe(None, None, 0, True, kernel_fraction, sizes)
    lo = float(pos_big.min())
    hi = float(np.median(big))
    if pos_small.size and lo > 0.5 * float(pos_small.min()):
        return NSProbe(None, (lo, hi), 0, True, kernel_fraction, sizes)
    xs, ys = [], []
    for k in sizes:
        s = arrs[k]
        pos = s[s > tol]
        u = np.unique(np.round(pos, 12))
        u = u[(u >= lo) & (u <= hi)]
        if u.size == 0:
            continue
        F = np.searchsorted(pos, u * (1 + 1e-12), side="right") / s.size
        xs.extend(np.log(u))
        ys.extend(np.log(F))
    if len(xs) < MIN_NS_POINTS or hi <= lo:
        return NSProbe(None, (lo, hi), len(xs), True, kernel_fraction, sizes)
    slope = float(np.polyfit(np.asarray(xs), np.asarray(ys), 1)[0])
    return NSProbe(slope, (lo, hi), len(xs), False, kernel_fraction, sizes)
