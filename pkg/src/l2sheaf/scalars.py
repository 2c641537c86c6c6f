"""Exact complex-rational scalars and exact rank computations.

Everything that feeds a Betti number goes through :func:`rank_q` (exact
Gaussian elimination over ``Fraction``) or :func:`rank_mod_p`.  Complex
matrices are reduced to real ones with the standard realification
``M = A + iB  ->  [[A, -B], [B, A]]``, whose rank is twice the complex rank.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "Scalar",
    "as_scalar",
    "parse_rational",
    "format_rational",
    "rank_q",
    "rank_mod_p",
    "complex_rank",
    "MERSENNE61",
    "Mat",
    "block_diag",
]

MERSENNE61 = (1 << 61) - 1

try:  # GMP rationals make exact elimination several times faster
    from gmpy2 import mpq as _mpq

    def _q(v):
        v = Fraction(v)
        return _mpq(v.numerator, v.denominator)

except ImportError:  # pragma: no cover - exercised only without gmpy2
    _q = Fraction

try:  # FLINT's integer matrix rank is far faster than Python elimination
    from flint import fmpz_mat as _fmpz_mat
except ImportError:  # pragma: no cover - exercised only without python-flint
    _fmpz_mat = None


def parse_rational(x) -> Fraction:
    """Accept ints, Fractions, ``"p/q"`` strings and finite floats given as text."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    raise TypeError(f"cannot read {x!r} as a rational")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class Scalar:
    """Exact element of Q(i), stored as a pair of Fractions."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = parse_rational(re)
        self.im = parse_rational(im)

    # arithmetic ------------------------------------------------------
    def __add__(self, other):
        o = as_scalar(other)
        return Scalar(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.re, -self.im)

    def __sub__(self, other):
        o = as_scalar(other)
        return Scalar(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return as_scalar(other) - self

    def __mul__(self, other):
        o = as_scalar(other)
        if not self.im and not o.im:
            return Scalar(self.re * o.re)
        return Scalar(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = as_scalar(other)
        n = o.re * o.re + o.im * o.im
        if not n:
            raise ZeroDivisionError("division by zero scalar")
        return self * Scalar(o.re / n, -o.im / n)

    def conj(self) -> "Scalar":
        return Scalar(self.re, -self.im)

    def is_real(self) -> bool:
        return self.im == 0

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            o = as_scalar(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if not self.im:
            return f"Scalar({format_rational(self.re)})"
        return f"Scalar({format_rational(self.re)}, {format_rational(self.im)})"

    def to_json(self):
        if not self.im:
            return format_rational(self.re)
        return {"re": format_rational(self.re), "im": format_rational(self.im)}

    @classmethod
    def from_json(cls, obj) -> "Scalar":
        if isinstance(obj, dict):
            return cls(obj.get("re", 0), obj.get("im", 0))
        return cls(obj)


ZERO = Scalar(0)
ONE = Scalar(1)


def as_scalar(x) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, complex):
        return Scalar(parse_rational(x.real), parse_rational(x.imag))
    return Scalar(parse_rational(x))


# ---------------------------------------------------------------------------
# exact rank


def rank_q(rows: Iterable[dict]) -> int:
    """Rank over Q of a sparse matrix given as row dicts ``{col: Fraction}``.

    With python-flint available each row is scaled to integers and the rank
    is taken by FLINT's multimodular ``fmpz_mat.rank``; otherwise rows are
    eliminated one at a time against a growing echelon basis.
    """
    if _fmpz_mat is not None:
        return _rank_flint(rows)
    return _rank_q_python(rows)


def _rank_flint(rows: Iterable[dict]) -> int:
    int_rows = []
    ncols = 0
    for row in rows:
        entries = {c: Fraction(v) for c, v in row.items() if v}
        if not entries:
            continue
        den = math.lcm(*(v.denominator for v in entries.values()))
        int_rows.append({c: int(v * den) for c, v in entries.items()})
        ncols = max(ncols, max(entries) + 1)
    if not int_rows:
        return 0
    M = _fmpz_mat(len(int_rows), ncols)
    for i, row in enumerate(int_rows):
        for c, v in row.items():
            M[i, c] = v
    return M.rank()


def _rank_q_python(rows: Iterable[dict]) -> int:
    pivots: dict = {}
    rank = 0
    for row in rows:
        r = {c: _q(v) for c, v in row.items() if v}
        while r:
            c = min(r)
            if c not in pivots:
                inv = 1 / r[c]
                pivots[c] = {k: v * inv for k, v in r.items()}
                rank += 1
                break
            prow = pivots[c]
            f = r[c]
            for k, v in prow.items():
                nv = r.get(k, 0) - f * v
                if nv:
                    r[k] = nv
                else:
                    r.pop(k, None)
    return rank


def rank_mod_p(rows: Iterable[dict], p: int = MERSENNE61) -> int:
    """Rank over F_p of a sparse matrix with integer (already reduced) entries."""
    pivots: dict = {}
    rank = 0
    for row in rows:
        r = {c: v % p for c, v in row.items() if v % p}
        while r:
            c = min(r)
            if c not in pivots:
                inv = pow(r[c], -1, p)
                pivots[c] = {k: v * inv % p for k, v in r.items()}
                rank += 1
                break
            prow = pivots[c]
            f = r[c]
            for k, v in prow.items():
                nv = (r.get(k, 0) - f * v) % p
                if nv:
                    r[k] = nv
                else:
                    r.pop(k, None)
    return rank


def realify_rows(rows: Sequence[dict], ncols: int) -> tuple[list[dict], bool]:
    """Return real rows of the realification and whether any imaginary part occurred."""
    if all(isinstance(v, Fraction) or as_scalar(v).is_real() for row in rows for v in row.values()):
        return [{c: as_scalar(v).re for c, v in row.items()} for row in rows], False
    out = []
    for row in rows:
        top, bottom = {}, {}
        for c, v in row.items():
            s = as_scalar(v)
            if s.re:
                top[c] = s.re
                bottom[c + ncols] = s.re
            if s.im:
                top[c + ncols] = -s.im
                bottom[c] = s.im
        out.append(top)
        out.append(bottom)
    return out, True


def complex_rank(rows: Sequence[dict], ncols: int) -> int:
    """Exact rank over Q(i) of a sparse matrix with Scalar entries."""
    real_rows, doubled = realify_rows(rows, ncols)
    r = rank_q(real_rows)
    return r // 2 if doubled else r


# ---------------------------------------------------------------------------
# small dense matrices: tuples of tuples of Scalar, shape given explicitly
# so that 0 x n and n x 0 matrices keep their shape.


class Mat:
    """Immutable dense matrix over Q(i)."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data=None):
        self.rows = rows
        self.cols = cols
        if data is None:
            data = [[ZERO] * cols for _ in range(rows)]
        self.data = tuple(tuple(as_scalar(x) for x in row) for row in data)
        if len(self.data) != rows or any(len(r) != cols for r in self.data):
            raise ValueError(f"matrix data does not have shape {rows}x{cols}")

    @classmethod
    def zero(cls, rows, cols) -> "Mat":
        return cls(rows, cols)

    @classmethod
    def eye(cls, n) -> "Mat":
        return cls(n, n, [[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def from_rows(cls, rows, cols: int | None = None) -> "Mat":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        return cls(len(rows), cols, rows)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def __matmul__(self, other: "Mat") -> "Mat":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        out = []
        for i in range(self.rows):
            row = self.data[i]
            acc = [ZERO] * other.cols
            for k, a in enumerate(row):
                if not a:
                    continue
                orow = other.data[k]
                for j in range(other.cols):
                    b = orow[j]
                    if b:
                        acc[j] = acc[j] + a * b
            out.append(acc)
        return Mat(self.rows, other.cols, out)

    def __add__(self, other: "Mat") -> "Mat":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Mat(self.rows, self.cols, [[a + b for a, b in zip(r, s)] for r, s in zip(self.data, other.data)])

    def __neg__(self):
        return Mat(self.rows, self.cols, [[-a for a in r] for r in self.data])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "Mat":
        s = as_scalar(s)
        return Mat(self.rows, self.cols, [[a * s for a in r] for r in self.data])

    @property
    def T(self) -> "Mat":
        return Mat(self.cols, self.rows, [[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def conj(self) -> "Mat":
        return Mat(self.rows, self.cols, [[a.conj() for a in r] for r in self.data])

    def is_zero(self) -> bool:
        return not any(a for r in self.data for a in r)

    def is_real(self) -> bool:
        return all(a.is_real() for r in self.data for a in r)

    def is_identity(self) -> bool:
        return self.rows == self.cols and self == Mat.eye(self.rows)

    def rank(self) -> int:
        return complex_rank([{j: a for j, a in enumerate(r) if a} for r in self.data], self.cols)

    def __eq__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        return self.shape == other.shape and self.data == other.data

    def __hash__(self):
        return hash((self.shape, self.data))

    def to_json(self):
        return [[a.to_json() for a in r] for r in self.data]

    @classmethod
    def from_json(cls, obj, rows: int | None = None, cols: int | None = None) -> "Mat":
        data = [[Scalar.from_json(x) for x in r] for r in obj]
        if rows is None:
            rows = len(data)
        if cols is None:
            cols = len(data[0]) if data else 0
        if rows == 0 and not data:
            return cls(0, cols)
        return cls(rows, cols, data)

    def __repr__(self):
        return f"Mat({self.rows}x{self.cols}, {[[repr(a) for a in r] for r in self.data]})"


def block_diag(*mats: Mat) -> Mat:
    rows = sum(m.rows for m in mats)
    cols = sum(m.cols for m in mats)
    data = [[ZERO] * cols for _ in range(rows)]
    r0 = c0 = 0
    for m in mats:
        for i in range(m.rows):
            for j in range(m.cols):
                data[r0 + i][c0 + j] = m.data[i][j]
        r0 += m.rows
        c0 += m.cols
    return Mat(rows, cols, data)
