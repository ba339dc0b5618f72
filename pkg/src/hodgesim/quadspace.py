"""Rational quadratic spaces and their Hasse–Minkowski classification."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from .errors import DegenerateForm, DimensionMismatch, ParseError, ZeroScale
from .exact import (
    Matrix,
    factorize,
    matrix_from_json,
    rat,
    rat_str,
    sign,
    squarefree_part,
)
from .report import VerificationReport

INF = "inf"


@dataclass(frozen=True)
class QuadSpace:
    """A nondegenerate rational quadratic space given by its Gram matrix."""

    gram: Matrix
    label: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not self.gram.is_square():
            raise DimensionMismatch(f"Gram matrix is {self.gram.shape}")
        if not self.gram.is_symmetric():
            i, j = _first_asymmetry(self.gram)
            raise ParseError(f"Gram matrix not symmetric at ({i}, {j})")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Any]], label: str | None = None) -> "QuadSpace":
        return cls(Matrix(rows), label)

    @classmethod
    def diagonal(cls, entries: Sequence[Any], label: str | None = None) -> "QuadSpace":
        return cls(Matrix.diag(entries), label)

    @property
    def dim(self) -> int:
        return self.gram.nrows

    def bilinear(self, v: Sequence[Any], w: Sequence[Any]) -> Any:
        gw = self.gram.apply(w)
        acc: Any = Fraction(0)
        for x, y in zip(v, gw):
            if x and y:
                acc = acc + x * y
        return acc

    def q(self, v: Sequence[Any]) -> Any:
        return self.bilinear(v, v)

    def det(self) -> Fraction:
        return self.gram.det()

    def require_nondegenerate(self) -> None:
        if self.dim and self.det() == 0:
            raise DegenerateForm(f"{self.label or 'space'} has determinant 0")

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"dim": self.dim,
                               "gram": [[rat_str(x) for x in r] for r in self.gram.rows]}
        if self.label is not None:
            out["label"] = self.label
        return out

    @classmethod
    def from_json(cls, data: Mapping[str, Any] | str) -> "QuadSpace":
        if isinstance(data, str):
            data = json.loads(data)
        if "gram" not in data:
            raise ParseError("QuadSpace JSON needs a 'gram' field")
        gram = matrix_from_json(data["gram"])
        if "dim" in data and data["dim"] != gram.nrows:
            raise ParseError(f"dim {data['dim']} disagrees with a {gram.nrows}-row Gram")
        return cls(gram, data.get("label"))

    def __repr__(self) -> str:
        name = f" {self.label}" if self.label else ""
        return f"<QuadSpace{name} dim={self.dim}>"


def _first_asymmetry(G: Matrix) -> tuple[int, int]:
    for i in range(G.nrows):
        for j in range(i + 1, G.ncols):
            if G[i, j] != G[j, i]:
                return i, j
    raise AssertionError("matrix is symmetric")


@dataclass(frozen=True)
class Diagonalization:
    """Invertible B with B^T G B = diag(entries)."""

    base_change: Matrix
    diag: tuple[Any, ...]


@dataclass(frozen=True)
class RationalInvariants:
    dim: int
    signature: tuple[int, int]
    det_class: int
    hasse: dict[Any, int]

    def to_json(self) -> dict[str, Any]:
        return {
            "dim": self.dim,
            "signature": list(self.signature),
            "det_class": self.det_class,
            "hasse": {str(p): s for p, s in sorted(self.hasse.items(), key=_place_key)},
        }


def _place_key(item: tuple[Any, int]) -> tuple[int, int]:
    p = item[0]
    return (1, 0) if p == INF else (0, p)


# --------------------------------------------------------------------------
# diagonalization
# --------------------------------------------------------------------------

def gram_schmidt(gram: Matrix) -> tuple[Matrix, tuple[Any, ...]]:
    """Symmetric Gram–Schmidt over the entry field of ``gram``.

    Works for rational Gram matrices and for Gram matrices over Q(sqrt d).
    When every remaining vector is isotropic, v_i is replaced by
    v_i + v_j / (2 b(v_i, v_j)), which has norm exactly 1.
    """
    n = gram.nrows
    G = [list(r) for r in gram.rows]
    zero = 0 * G[0][0] if n else Fraction(0)
    one = zero + 1
    # columns of B, stored as rows for convenience
    vecs = [[one if i == j else zero for i in range(n)] for j in range(n)]

    def b(u: list[Any], w: list[Any]) -> Any:
        acc = zero
        for i, ui in enumerate(u):
            if not ui:
                continue
            row = G[i]
            for j, wj in enumerate(w):
                if wj and row[j]:
                    acc = acc + ui * row[j] * wj
        return acc

    diag: list[Any] = []
    for i in range(n):
        qi = b(vecs[i], vecs[i])
        if not qi:
            k = next((k for k in range(i + 1, n) if b(vecs[k], vecs[k])), None)
            if k is not None:
                vecs[i], vecs[k] = vecs[k], vecs[i]
            else:
                k = next((k for k in range(i + 1, n) if b(vecs[i], vecs[k])), None)
                if k is None:
                    raise DegenerateForm("form is degenerate")
                t = one / (2 * b(vecs[i], vecs[k]))
                vecs[i] = [x + t * y for x, y in zip(vecs[i], vecs[k])]
            qi = b(vecs[i], vecs[i])
        diag.append(qi)
        vi = vecs[i]
        for k in range(i + 1, n):
            c = b(vecs[k], vi)
            if c:
                f = c / qi
                vecs[k] = [x - f * y for x, y in zip(vecs[k], vi)]
    return Matrix.from_columns(vecs, n), tuple(diag)


def diagonalize(Q: QuadSpace) -> Diagonalization:
    if Q.dim == 0:
        return Diagonalization(Matrix.identity(0), ())
    Q.require_nondegenerate()
    B, d = gram_schmidt(Q.gram)
    return Diagonalization(B, d)


def signature(Q: QuadSpace) -> tuple[int, int]:
    return signature_of(diagonalize(Q).diag)


def signature_of(entries: Iterable[Any]) -> tuple[int, int]:
    pos = neg = 0
    for x in entries:
        s = sign(x)
        if s > 0:
            pos += 1
        elif s < 0:
            neg += 1
        else:
            raise DegenerateForm("zero diagonal entry")
    return pos, neg


def rescale(Q: QuadSpace, lam: Any) -> QuadSpace:
    lam = rat(lam)
    if lam == 0:
        raise ZeroScale("cannot rescale a form by 0")
    label = f"{Q.label}({rat_str(lam)})" if Q.label else None
    return QuadSpace(Q.gram.scale(lam), label)


def orthogonal_sum(*spaces: QuadSpace, label: str | None = None) -> QuadSpace:
    parts = [s for s in spaces if s.dim]
    if not parts:
        return QuadSpace(Matrix.zeros(0, 0), label)
    if label is None and all(s.label for s in parts):
        label = " + ".join(s.label for s in parts)  # type: ignore[misc]
    return QuadSpace(Matrix.block_diag([s.gram for s in parts]), label)


def det_square_class(Q: QuadSpace) -> int:
    Q.require_nondegenerate()
    return squarefree_part(Q.det())


# --------------------------------------------------------------------------
# local invariants
# --------------------------------------------------------------------------

def _legendre(a: int, p: int) -> int:
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def _split(x: int, p: int) -> tuple[int, int]:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v, x


def hilbert_symbol(a: Any, b: Any, p: int | str) -> int:
    """Hilbert symbol (a, b)_p for nonzero rationals; p a prime or ``"inf"``."""
    a, b = rat(a), rat(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol needs nonzero arguments")
    if p == INF:
        return -1 if (a < 0 and b < 0) else 1
    # same square class, integral
    ai = a.numerator * a.denominator
    bi = b.numerator * b.denominator
    alpha, u = _split(ai, p)
    beta, v = _split(bi, p)
    if p == 2:
        eps_u = ((u - 1) // 2) % 2
        eps_v = ((v - 1) // 2) % 2
        om_u = ((u * u - 1) // 8) % 2
        om_v = ((v * v - 1) // 8) % 2
        e = (eps_u * eps_v + alpha * om_v + beta * om_u) % 2
        return -1 if e else 1
    e = (alpha * beta * ((p - 1) // 2)) % 2
    s = -1 if e else 1
    if beta % 2:
        s *= _legendre(u, p)
    if alpha % 2:
        s *= _legendre(v, p)
    return s


def hasse_invariant(Q: QuadSpace, p: int | str, diag: Sequence[Any] | None = None) -> int:
    """prod_{i<j} (d_i, d_j)_p over a diagonalization of Q."""
    d = diagonalize(Q).diag if diag is None else diag
    s = 1
    for i in range(len(d)):
        for j in range(i + 1, len(d)):
            s *= hilbert_symbol(d[i], d[j], p)
    return s


def relevant_primes(entries: Iterable[Fraction]) -> set[int]:
    primes = {2}
    for x in entries:
        x = Fraction(x)
        for n in (x.numerator, x.denominator):
            if abs(n) > 1:
                primes.update(factorize(n))
    return primes


def rational_invariants(Q: QuadSpace, extra_primes: Iterable[int] = ()) -> RationalInvariants:
    dg = diagonalize(Q)
    primes = relevant_primes(dg.diag) | set(extra_primes)
    hasse: dict[Any, int] = {p: hasse_invariant(Q, p, dg.diag) for p in sorted(primes)}
    hasse[INF] = hasse_invariant(Q, INF, dg.diag)
    det_class = squarefree_part(_prod(dg.diag)) if dg.diag else 1
    return RationalInvariants(Q.dim, signature_of(dg.diag), det_class, hasse)


def _prod(xs: Iterable[Fraction]) -> Fraction:
    out = Fraction(1)
    for x in xs:
        out *= x
    return out


def isometric(Q1: QuadSpace, Q2: QuadSpace) -> bool:
    """Decide isometry over Q by comparing all Hasse–Minkowski invariants."""
    if Q1.dim != Q2.dim:
        return False
    d1, d2 = diagonalize(Q1).diag, diagonalize(Q2).diag
    if signature_of(d1) != signature_of(d2):
        return False
    if Q1.dim == 0:
        return True
    if squarefree_part(_prod(d1)) != squarefree_part(_prod(d2)):
        return False
    for p in sorted(relevant_primes(d1) | relevant_primes(d2)):
        if hasse_invariant(Q1, p, d1) != hasse_invariant(Q2, p, d2):
            return False
    return True


# --------------------------------------------------------------------------
# embeddings
# --------------------------------------------------------------------------

def embedding_witness_verify(j: Matrix, Qsub: QuadSpace, Qamb: QuadSpace) -> VerificationReport:
    """Check that the columns of ``j`` span an isometric copy of Qsub in Qamb."""
    if j.shape != (Qamb.dim, Qsub.dim):
        raise DimensionMismatch(
            f"witness is {j.shape}, expected {(Qamb.dim, Qsub.dim)}"
        )
    check = "embedding_witness"
    if j.rank() < Qsub.dim:
        return VerificationReport.failed(check, {"reason": "witness is not injective",
                                                 "rank": j.rank()})
    pulled = j.T @ Qamb.gram @ j
    for a in range(Qsub.dim):
        for b in range(Qsub.dim):
            if pulled[a, b] != Qsub.gram[a, b]:
                return VerificationReport.failed(check, {
                    "entry": [a, b],
                    "pulled_back": rat_str(pulled[a, b]),
                    "expected": rat_str(Qsub.gram[a, b]),
                })
    return VerificationReport.ok(check)
