"""Exact scalars and dense matrices.

Rationals are :class:`fractions.Fraction`.  Elements of a real quadratic
field Q(sqrt d) are :class:`QuadExt`.  :class:`Matrix` is an immutable
row-major matrix whose entries may be either kind; elimination is
fraction-free (Bareiss) so intermediate growth stays polynomial.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Iterable, Sequence

from .errors import (
    DimensionMismatch,
    FactorizationLimit,
    MismatchedField,
    ParseError,
)

TRIAL_DIVISION_BOUND = 10**6


# --------------------------------------------------------------------------
# rationals
# --------------------------------------------------------------------------

def rat(x: Any) -> Fraction:
    """Coerce ints, strings like ``"-3/2"`` and Fractions to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ParseError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational: {x!r}") from exc
    raise ParseError(f"not a rational: {x!r}")


def rat_str(x: Fraction | int) -> str:
    """Canonical string: ``"p/q"`` with q > 0, or ``"p"`` when q = 1."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def is_rational_square(x: Fraction) -> bool:
    return rational_sqrt(x) is not None


def rational_sqrt(x: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None."""
    x = Fraction(x)
    if x < 0:
        return None
    p, q = x.numerator, x.denominator
    rp, rq = math.isqrt(p), math.isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    return None


# --------------------------------------------------------------------------
# integer factorization
# --------------------------------------------------------------------------

@lru_cache(maxsize=4096)
def _factorize_positive(n: int) -> tuple[tuple[int, int], ...]:
    out: list[tuple[int, int]] = []
    for p in (2, 3):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
    p, step = 5, 2
    while p * p <= n:
        if p > TRIAL_DIVISION_BOUND:
            raise FactorizationLimit(
                f"cofactor {n} has no prime factor <= {TRIAL_DIVISION_BOUND}"
            )
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
        p += step
        step = 6 - step
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of |n| by trial division.

    Raises FactorizationLimit when a cofactor cannot be certified prime
    within the trial-division bound.
    """
    n = abs(int(n))
    if n == 0:
        raise ValueError("cannot factor 0")
    return dict(_factorize_positive(n))


def squarefree_decompose(n: int) -> tuple[int, int]:
    """Write n = m**2 * d0 with d0 squarefree (sign kept on d0)."""
    if n == 0:
        raise ValueError("0 has no squarefree part")
    m, d0 = 1, (1 if n > 0 else -1)
    for p, e in factorize(n).items():
        m *= p ** (e // 2)
        if e % 2:
            d0 *= p
    return m, d0


def squarefree_part(x: Fraction | int) -> int:
    """Squarefree integer representing x in Q*/Q*^2, carrying the sign of x."""
    x = Fraction(x)
    return squarefree_decompose(x.numerator * x.denominator)[1]


# --------------------------------------------------------------------------
# Q(sqrt d)
# --------------------------------------------------------------------------

@lru_cache(maxsize=256)
def _require_squarefree(d: int) -> None:
    if d < 2 or squarefree_decompose(d)[1] != d:
        raise ValueError(f"d must be a squarefree integer >= 2, got {d}")


class QuadExt:
    """The element a + b*sqrt(d) of the real quadratic field Q(sqrt d).

    ``d`` must already be squarefree; use :meth:`from_radicand` to
    normalize an arbitrary radicand.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a: Any, b: Any, d: int) -> None:
        _require_squarefree(d)
        object.__setattr__(self, "a", rat(a))
        object.__setattr__(self, "b", rat(b))
        object.__setattr__(self, "d", d)

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("QuadExt is immutable")

    @classmethod
    def from_radicand(cls, a: Any, b: Any, d: int) -> tuple["QuadExt", int]:
        """Build a + b*sqrt(d) for any non-square d >= 2.

        Returns the element over the squarefree part d0 of d together with
        the scale m where d = m**2 * d0.
        """
        m, d0 = squarefree_decompose(d)
        if d0 == 1:
            raise ValueError(f"{d} is a perfect square")
        return cls(a, rat(b) * m, d0), m

    @classmethod
    def sqrt(cls, d: int) -> "QuadExt":
        return cls(0, 1, d)

    # -- coercion ---------------------------------------------------------
    def _coerce(self, other: Any) -> "QuadExt | None":
        if isinstance(other, QuadExt):
            if other.d != self.d:
                raise MismatchedField(f"Q(sqrt {self.d}) vs Q(sqrt {other.d})")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QuadExt(other, 0, self.d)
        return None

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other: Any) -> "QuadExt":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadExt(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self) -> "QuadExt":
        return QuadExt(-self.a, -self.b, self.d)

    def __sub__(self, other: Any) -> "QuadExt":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadExt(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other: Any) -> "QuadExt":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other: Any) -> "QuadExt":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadExt(
            self.a * o.a + self.d * self.b * o.b,
            self.a * o.b + self.b * o.a,
            self.d,
        )

    __rmul__ = __mul__

    def conj(self) -> "QuadExt":
        return QuadExt(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.d * self.b * self.b

    def inv(self) -> "QuadExt":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt d)")
        return QuadExt(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other: Any) -> "QuadExt":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inv()

    def __rtruediv__(self, other: Any) -> "QuadExt":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inv()

    def __pow__(self, k: int) -> "QuadExt":
        if k < 0:
            return self.inv() ** (-k)
        out = QuadExt(1, 0, self.d)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- comparison -------------------------------------------------------
    def __eq__(self, other: Any) -> bool:
        if isinstance(other, QuadExt):
            return self.d == other.d and self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self) -> bool:
        return bool(self.a) or bool(self.b)

    def sign(self) -> int:
        return quadext_sign(self)

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def is_rational(self) -> bool:
        return self.b == 0

    def __repr__(self) -> str:
        return f"QuadExt({rat_str(self.a)!r}, {rat_str(self.b)!r}, d={self.d})"

    def __str__(self) -> str:
        if self.b == 0:
            return rat_str(self.a)
        sb = rat_str(abs(self.b))
        sign = "-" if self.b < 0 else "+"
        if self.a == 0:
            return f"{'-' if self.b < 0 else ''}{sb}√{self.d}"
        return f"{rat_str(self.a)}{sign}{sb}√{self.d}"

    def to_json(self) -> dict[str, str]:
        return {"a": rat_str(self.a), "b": rat_str(self.b)}


def quadext_sign(x: QuadExt) -> int:
    """Sign of a + b*sqrt(d) under the embedding with sqrt(d) > 0."""
    sa = (x.a > 0) - (x.a < 0)
    sb = (x.b > 0) - (x.b < 0)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    # opposite signs: the larger of a^2 and d*b^2 wins (never equal, d nonsquare)
    return sa if x.a * x.a > x.d * x.b * x.b else sb


def sign(x: Any) -> int:
    if isinstance(x, QuadExt):
        return quadext_sign(x)
    return (x > 0) - (x < 0)


# --------------------------------------------------------------------------
# matrices
# --------------------------------------------------------------------------

def _coerce_entry(x: Any) -> Any:
    if isinstance(x, QuadExt):
        return x
    return rat(x)


class Matrix:
    """Immutable dense matrix over Q or Q(sqrt d)."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Iterable[Iterable[Any]], ncols: int | None = None) -> None:
        data = tuple(tuple(_coerce_entry(x) for x in r) for r in rows)
        if data:
            widths = {len(r) for r in data}
            if len(widths) != 1:
                raise DimensionMismatch("ragged rows")
            width = widths.pop()
        else:
            width = ncols or 0
        object.__setattr__(self, "rows", data)
        object.__setattr__(self, "nrows", len(data))
        object.__setattr__(self, "ncols", width)

    @classmethod
    def _raw(cls, rows: tuple[tuple[Any, ...], ...], ncols: int) -> "Matrix":
        m = object.__new__(cls)
        object.__setattr__(m, "rows", rows)
        object.__setattr__(m, "nrows", len(rows))
        object.__setattr__(m, "ncols", ncols)
        return m

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("Matrix is immutable")

    # -- constructors -----------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "Matrix":
        one, zero = Fraction(1), Fraction(0)
        return cls._raw(
            tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n)), n
        )

    @classmethod
    def zeros(cls, r: int, c: int) -> "Matrix":
        z = Fraction(0)
        return cls._raw(tuple((z,) * c for _ in range(r)), c)

    @classmethod
    def diag(cls, entries: Sequence[Any]) -> "Matrix":
        n = len(entries)
        z = Fraction(0)
        es = [_coerce_entry(e) for e in entries]
        return cls._raw(
            tuple(tuple(es[i] if i == j else z for j in range(n)) for i in range(n)), n
        )

    @classmethod
    def column(cls, v: Sequence[Any]) -> "Matrix":
        return cls([[x] for x in v], ncols=1)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence[Any]], nrows: int | None = None) -> "Matrix":
        if not cols:
            return cls._raw(tuple(() for _ in range(nrows or 0)), 0)
        return cls(zip(*cols))

    @classmethod
    def block_diag(cls, blocks: Sequence["Matrix"]) -> "Matrix":
        n = sum(b.nrows for b in blocks)
        m = sum(b.ncols for b in blocks)
        z = Fraction(0)
        out: list[list[Any]] = [[z] * m for _ in range(n)]
        r0 = c0 = 0
        for b in blocks:
            for i, row in enumerate(b.rows):
                out[r0 + i][c0:c0 + b.ncols] = row
            r0 += b.nrows
            c0 += b.ncols
        return cls._raw(tuple(map(tuple, out)), m)

    # -- basic protocol ---------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def __getitem__(self, ij: tuple[int, int]) -> Any:
        i, j = ij
        return self.rows[i][j]

    def col(self, j: int) -> tuple[Any, ...]:
        return tuple(r[j] for r in self.rows)

    def columns(self) -> list[tuple[Any, ...]]:
        return [self.col(j) for j in range(self.ncols)]

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(x) if isinstance(x, QuadExt) else rat_str(x) for x in r)
                         for r in self.rows)
        return f"Matrix[{body}]"

    # -- arithmetic -------------------------------------------------------
    @property
    def T(self) -> "Matrix":
        if not self.rows:
            return Matrix._raw(tuple(() for _ in range(self.ncols)), 0)
        return Matrix._raw(tuple(zip(*self.rows)), self.nrows)

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} + {other.shape}")
        return Matrix._raw(
            tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(self.rows, other.rows)),
            self.ncols,
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} - {other.shape}")
        return Matrix._raw(
            tuple(tuple(x - y for x, y in zip(r, s)) for r, s in zip(self.rows, other.rows)),
            self.ncols,
        )

    def __neg__(self) -> "Matrix":
        return Matrix._raw(tuple(tuple(-x for x in r) for r in self.rows), self.ncols)

    def scale(self, c: Any) -> "Matrix":
        return Matrix._raw(tuple(tuple(c * x for x in r) for r in self.rows), self.ncols)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise DimensionMismatch(f"{self.shape} @ {other.shape}")
        cols = list(zip(*other.rows)) if other.rows else []
        if _all_fractions(self.rows) and _all_fractions(other.rows):
            return Matrix._raw(tuple(tuple(_dot_q(r, c) for c in cols) for r in self.rows),
                               other.ncols)
        out = []
        for r in self.rows:
            row = []
            for c in cols:
                acc = 0
                for x, y in zip(r, c):
                    if x and y:
                        acc = acc + x * y
                row.append(acc if not isinstance(acc, int) else Fraction(acc))
            out.append(tuple(row))
        return Matrix._raw(tuple(out), other.ncols)

    def apply(self, v: Sequence[Any]) -> tuple[Any, ...]:
        if len(v) != self.ncols:
            raise DimensionMismatch(f"{self.shape} applied to length {len(v)}")
        out = []
        for r in self.rows:
            acc: Any = Fraction(0)
            for x, y in zip(r, v):
                if x and y:
                    acc = acc + x * y
            out.append(acc)
        return tuple(out)

    def integral(self) -> tuple[list[list[int]], int] | None:
        """(A, m) with self = A / m and A integral, or None over Q(sqrt d)."""
        if not _all_fractions(self.rows):
            return None
        m = math.lcm(*(x.denominator for r in self.rows for x in r)) if self.nrows and self.ncols else 1
        return [[x.numerator * (m // x.denominator) for x in r] for r in self.rows], m

    def map(self, f: Callable[[Any], Any]) -> "Matrix":
        return Matrix._raw(tuple(tuple(f(x) for x in r) for r in self.rows), self.ncols)

    def is_symmetric(self) -> bool:
        return self.is_square() and all(
            self.rows[i][j] == self.rows[j][i]
            for i in range(self.nrows) for j in range(i + 1, self.ncols)
        )

    def is_diagonal(self) -> bool:
        return self.is_square() and all(
            not self.rows[i][j]
            for i in range(self.nrows) for j in range(self.ncols) if i != j
        )

    def diagonal(self) -> tuple[Any, ...]:
        return tuple(self.rows[i][i] for i in range(min(self.nrows, self.ncols)))

    def trace(self) -> Any:
        return sum(self.diagonal(), Fraction(0))

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix._raw(tuple(tuple(self.rows[i][j] for j in cols) for i in rows), len(cols))

    # -- elimination ------------------------------------------------------
    def det(self) -> Any:
        if not self.is_square():
            raise DimensionMismatch("determinant of a non-square matrix")
        if self.nrows == 0:
            return Fraction(1)
        work, scale = _prepare(self.rows)
        ech = _bareiss(work, _exact_div_for(work))
        if ech.rank < self.nrows:
            return Fraction(0)
        d = ech.rows[-1][-1] * ech.sign
        return _finish(d) / scale if scale != 1 else _finish(d)

    def rank(self) -> int:
        if not self.nrows or not self.ncols:
            return 0
        work, _ = _prepare(self.rows)
        return _bareiss(work, _exact_div_for(work)).rank

    def kernel(self) -> list[tuple[Any, ...]]:
        """Basis of the right null space, one free variable set to 1 each."""
        return kernel_basis(self)

    def inverse(self) -> "Matrix":
        from .errors import Singular

        n = self.nrows
        if not self.is_square():
            raise DimensionMismatch("inverse of a non-square matrix")
        sol = solve_linear(self, Matrix.identity(n))
        if sol is None or self.rank() < n:
            raise Singular("matrix is not invertible")
        return sol


class _Echelon:
    __slots__ = ("rows", "pivots", "rank", "sign")

    def __init__(self, rows: list[list[Any]], pivots: list[int], sign: int) -> None:
        self.rows = rows
        self.pivots = pivots
        self.rank = len(pivots)
        self.sign = sign


def _all_fractions(rows: Sequence[Sequence[Any]]) -> bool:
    return all(type(x) is Fraction for r in rows for x in r)


def _dot_q(r: Sequence[Fraction], c: Sequence[Fraction]) -> Fraction:
    """Dot product of Fraction vectors with one normalisation at the end."""
    num, den = 0, 1
    for x, y in zip(r, c):
        if x and y:
            d = x.denominator * y.denominator
            num = num * d + x.numerator * y.numerator * den
            den *= d
    return Fraction(num, den)


def int_matmul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> list[list[int]]:
    cols = list(zip(*B))
    return [[sum(x * y for x, y in zip(r, c)) for c in cols] for r in A]


def int_transpose(A: Sequence[Sequence[int]]) -> list[list[int]]:
    return [list(c) for c in zip(*A)]


def _prepare(rows: Sequence[Sequence[Any]]) -> tuple[list[list[Any]], Fraction]:
    """Clear denominators row by row when all entries are rational.

    Returns integer rows plus the product of the row multipliers, so that
    det(original) = det(returned) / multiplier.  QuadExt rows pass through.
    """
    if any(isinstance(x, QuadExt) for r in rows for x in r):
        return [list(r) for r in rows], Fraction(1)
    out = []
    scale = 1
    for r in rows:
        r = [x if isinstance(x, Fraction) else Fraction(x) for x in r]
        l = math.lcm(*(x.denominator for x in r)) if r else 1
        out.append([x.numerator * (l // x.denominator) for x in r])
        scale *= l
    return out, Fraction(scale)


def _exact_div_for(rows: list[list[Any]]) -> Callable[[Any, Any], Any]:
    if all(isinstance(x, int) for r in rows for x in r):
        def div(x: int, y: int) -> int:
            q, rem = divmod(x, y)
            assert rem == 0, "Bareiss division must be exact"
            return q
        return div
    return lambda x, y: x / y


def _finish(x: Any) -> Any:
    return Fraction(x) if isinstance(x, int) else x


def _bareiss(rows: list[list[Any]], div: Callable[[Any, Any], Any]) -> _Echelon:
    """Fraction-free row echelon form (rows are modified in place)."""
    m = len(rows)
    n = len(rows[0]) if rows else 0
    prev: Any = 1
    r = 0
    pivots: list[int] = []
    sgn = 1
    for c in range(n):
        if r >= m:
            break
        p = next((i for i in range(r, m) if rows[i][c]), None)
        if p is None:
            continue
        if p != r:
            rows[r], rows[p] = rows[p], rows[r]
            sgn = -sgn
        piv = rows[r][c]
        pr = rows[r]
        for i in range(r + 1, m):
            ri = rows[i]
            f = ri[c]
            for j in range(c + 1, n):
                ri[j] = div(piv * ri[j] - f * pr[j], prev)
            ri[c] = 0 * piv
        # entries left of c below the pivot are already zero
        pivots.append(c)
        prev = piv
        r += 1
    return _Echelon(rows, pivots, sgn)


def _back_substitute(ech: _Echelon, ncols: int, rhs_cols: int) -> tuple[list[list[Any]], list[int]]:
    """Reduce a fraction-free echelon form to field-valued RREF rows."""
    rows = [[_finish(x) for x in ech.rows[i]] for i in range(ech.rank)]
    for i in range(ech.rank - 1, -1, -1):
        c = ech.pivots[i]
        piv = rows[i][c]
        rows[i] = [x / piv for x in rows[i]]
        for k in range(i):
            f = rows[k][c]
            if f:
                rows[k] = [a - f * b for a, b in zip(rows[k], rows[i])]
    return rows, ech.pivots


def kernel_basis(A: Matrix) -> list[tuple[Any, ...]]:
    """Right null space of A over its entry field."""
    n = A.ncols
    if A.nrows == 0:
        return [tuple(Fraction(int(i == j)) for i in range(n)) for j in range(n)]
    work, _ = _prepare(A.rows)
    ech = _bareiss(work, _exact_div_for(work))
    rref, pivots = _back_substitute(ech, n, 0)
    free = [j for j in range(n) if j not in pivots]
    zero = _zero_like(A)
    one = zero + 1
    basis = []
    for f in free:
        v = [zero] * n
        v[f] = one
        for row, p in zip(rref, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return basis


def _zero_like(A: Matrix) -> Any:
    for r in A.rows:
        for x in r:
            if isinstance(x, QuadExt):
                return QuadExt(0, 0, x.d)
    return Fraction(0)


def solve_linear(A: Matrix, b: Matrix) -> Matrix | None:
    """One exact solution X of A X = b, or None if the system is inconsistent.

    Free variables are set to zero.  Use :func:`kernel_basis` for the
    homogeneous part.
    """
    if A.nrows != b.nrows:
        raise DimensionMismatch(f"A is {A.shape}, b is {b.shape}")
    n, k = A.ncols, b.ncols
    aug_rows = [list(ra) + list(rb) for ra, rb in zip(A.rows, b.rows)]
    if not aug_rows:
        return Matrix.zeros(n, k)
    work, _ = _prepare(aug_rows)
    ech = _bareiss(work, _exact_div_for(work))
    if any(p >= n for p in ech.pivots):
        return None
    rref, pivots = _back_substitute(ech, n + k, k)
    zero = _zero_like(A) if not isinstance(_zero_like(b), QuadExt) else _zero_like(b)
    X = [[zero] * k for _ in range(n)]
    for row, p in zip(rref, pivots):
        X[p] = row[n:]
    return Matrix(X)


def matrix_from_json(data: Sequence[Sequence[Any]]) -> Matrix:
    try:
        return Matrix([[rat(x) for x in row] for row in data])
    except (TypeError, DimensionMismatch) as exc:
        raise ParseError(f"bad matrix payload: {exc}") from exc


def matrix_to_json(M: Matrix) -> list[list[Any]]:
    return [[x.to_json() if isinstance(x, QuadExt) else rat_str(x) for x in r] for r in M.rows]
