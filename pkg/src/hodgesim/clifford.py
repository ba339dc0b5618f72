"""Exact Clifford algebras of diagonal rational forms.

Blades are bitmasks over the generators e_0..e_{n-1}; e_i^2 = a_i and
distinct generators anticommute.  The even subalgebra is spanned by blades
of even popcount and is ordered by increasing mask.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Iterable, Mapping, Sequence

from .errors import (
    AlgebraMismatch,
    BadPolarizationPair,
    DimensionMismatch,
    NotEven,
    ParseError,
    TooLarge,
    WellDefinednessFailure,
    ZeroCoefficient,
    ZeroNormBasePoint,
)
from .exact import Matrix, rat, rat_str
from .quadspace import Diagonalization, QuadSpace, diagonalize
from .report import VerificationReport, digest
from .similarity import Similarity, compose

MAX_GENERATORS = 12
MATERIALIZE_LIMIT = 8
EXHAUSTIVE_LIMIT = 6


def _popcount(x: int) -> int:
    return bin(x).count("1")


def reorder_sign(s: int, t: int) -> int:
    """Sign from sorting the concatenated generator word of blades s and t."""
    swaps = 0
    t_bits = t
    while t_bits:
        low = t_bits & -t_bits
        j = low.bit_length() - 1
        swaps += _popcount(s >> (j + 1))
        t_bits ^= low
    return -1 if swaps & 1 else 1


class CliffordAlgebra:
    """Cl(a_1, ..., a_n) with a lazily filled, lock-protected product table."""

    def __init__(self, coeffs: Sequence[Any]) -> None:
        coeffs = tuple(rat(a) for a in coeffs)
        if len(coeffs) > MAX_GENERATORS:
            raise TooLarge(f"{len(coeffs)} generators exceeds the limit {MAX_GENERATORS}")
        if any(a == 0 for a in coeffs):
            raise ZeroCoefficient("Clifford coefficients must be nonzero")
        self.coeffs = coeffs
        self.n = len(coeffs)
        self.dim = 1 << self.n
        self.even_blades = tuple(m for m in range(self.dim) if not _popcount(m) & 1)
        self.even_index = {m: i for i, m in enumerate(self.even_blades)}
        self.even_dim = len(self.even_blades)
        self._table: dict[tuple[int, int], tuple[Fraction, int]] = {}
        self._lock = threading.Lock()

    def __eq__(self, other: Any) -> bool:
        return isinstance(other, CliffordAlgebra) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"CliffordAlgebra({', '.join(rat_str(a) for a in self.coeffs)})"

    def blade_product(self, s: int, t: int) -> tuple[Fraction, int]:
        key = (s, t)
        hit = self._table.get(key)
        if hit is not None:
            return hit
        c = Fraction(reorder_sign(s, t))
        common = s & t
        i = 0
        while common:
            if common & 1:
                c *= self.coeffs[i]
            common >>= 1
            i += 1
        val = (c, s ^ t)
        with self._lock:
            self._table.setdefault(key, val)
        return val

    # -- element constructors -------------------------------------------------
    def element(self, terms: Mapping[int, Any]) -> "CliffordElement":
        return CliffordElement(self, {m: rat(c) for m, c in terms.items()})

    def scalar(self, c: Any) -> "CliffordElement":
        return CliffordElement(self, {0: rat(c)})

    def one(self) -> "CliffordElement":
        return self.scalar(1)

    def gen(self, i: int) -> "CliffordElement":
        return CliffordElement(self, {1 << i: Fraction(1)})

    def blade(self, mask: int) -> "CliffordElement":
        return CliffordElement(self, {mask: Fraction(1)})

    def vector(self, v: Sequence[Any]) -> "CliffordElement":
        if len(v) != self.n:
            raise DimensionMismatch(f"vector of length {len(v)} in Cl with n = {self.n}")
        return CliffordElement(self, {1 << i: rat(x) for i, x in enumerate(v)})

    def q(self, v: Sequence[Any]) -> Fraction:
        return sum((a * rat(x) ** 2 for a, x in zip(self.coeffs, v)), Fraction(0))

    def bilinear(self, v: Sequence[Any], w: Sequence[Any]) -> Fraction:
        return sum((a * rat(x) * rat(y) for a, x, y in zip(self.coeffs, v, w)), Fraction(0))

    def even_coords(self, x: "CliffordElement") -> list[Fraction]:
        out = [Fraction(0)] * self.even_dim
        for m, c in x.terms.items():
            idx = self.even_index.get(m)
            if idx is None:
                raise NotEven(f"blade {m} is odd")
            out[idx] = c
        return out

    def from_even_coords(self, coords: Sequence[Any]) -> "CliffordElement":
        return CliffordElement(self, {m: rat(c) for m, c in zip(self.even_blades, coords)})

    def random_even(self, rng: random.Random, bound: int = 3, density: float = 0.5) -> "CliffordElement":
        terms = {}
        for m in self.even_blades:
            if rng.random() < density:
                terms[m] = Fraction(rng.randint(-bound, bound))
        return CliffordElement(self, terms)

    def random_element(self, rng: random.Random, bound: int = 3, density: float = 0.5) -> "CliffordElement":
        terms = {}
        for m in range(self.dim):
            if rng.random() < density:
                terms[m] = Fraction(rng.randint(-bound, bound))
        return CliffordElement(self, terms)


@lru_cache(maxsize=64)
def clifford_build(coeffs: tuple[Fraction, ...]) -> CliffordAlgebra:
    return CliffordAlgebra(coeffs)


def algebra_of(space: QuadSpace | CliffordAlgebra) -> CliffordAlgebra:
    if isinstance(space, CliffordAlgebra):
        return space
    if not space.gram.is_diagonal():
        raise ParseError("Clifford algebras are built from diagonal forms; diagonalize first")
    return clifford_build(tuple(space.gram.diagonal()))


class CliffordElement:
    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: CliffordAlgebra, terms: Mapping[int, Fraction]) -> None:
        self.algebra = algebra
        self.terms = {m: c for m, c in terms.items() if c}
        for m in self.terms:
            if not 0 <= m < algebra.dim:
                raise ValueError(f"blade {m} out of range for n = {algebra.n}")

    def _check(self, other: "CliffordElement") -> None:
        if other.algebra is not self.algebra and other.algebra != self.algebra:
            raise AlgebraMismatch("elements live in different algebras")

    def __add__(self, other: "CliffordElement") -> "CliffordElement":
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return CliffordElement(self.algebra, out)

    def __sub__(self, other: "CliffordElement") -> "CliffordElement":
        return self + (-other)

    def __neg__(self) -> "CliffordElement":
        return CliffordElement(self.algebra, {m: -c for m, c in self.terms.items()})

    def scale(self, c: Any) -> "CliffordElement":
        c = rat(c)
        return CliffordElement(self.algebra, {m: c * x for m, x in self.terms.items()})

    def __mul__(self, other: Any) -> "CliffordElement":
        if not isinstance(other, CliffordElement):
            return self.scale(other)
        return cl_mul(self, other)

    def __rmul__(self, other: Any) -> "CliffordElement":
        return self.scale(other)

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, CliffordElement):
            return self.algebra == other.algebra and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == ({0: Fraction(other)} if other else {})
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def is_even(self) -> bool:
        return all(not _popcount(m) & 1 for m in self.terms)

    def scalar_part(self) -> Fraction:
        return self.terms.get(0, Fraction(0))

    def reversal(self) -> "CliffordElement":
        return reversal(self)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms):
            name = "".join(f"e{i + 1}" for i in range(self.algebra.n) if m >> i & 1) or "1"
            parts.append(f"{rat_str(self.terms[m])}*{name}")
        return " + ".join(parts)

    def to_json(self) -> dict[str, Any]:
        return {"n": self.algebra.n,
                "terms": {str(m): rat_str(c) for m, c in sorted(self.terms.items())}}

    @classmethod
    def from_json(cls, algebra: CliffordAlgebra, data: Mapping[str, Any]) -> "CliffordElement":
        if data.get("n") != algebra.n:
            raise ParseError(f"element has n = {data.get('n')}, algebra has n = {algebra.n}")
        return cls(algebra, {int(m): rat(c) for m, c in data["terms"].items()})


def cl_mul(x: CliffordElement, y: CliffordElement) -> CliffordElement:
    x._check(y)
    prod = x.algebra.blade_product
    out: dict[int, Fraction] = {}
    for s, a in x.terms.items():
        for t, b in y.terms.items():
            c, m = prod(s, t)
            out[m] = out.get(m, 0) + c * a * b
    return CliffordElement(x.algebra, out)


def reversal(x: CliffordElement) -> CliffordElement:
    """Anti-automorphism reversing generator order: e_S -> (-1)^(k(k-1)/2) e_S."""
    out = {}
    for m, c in x.terms.items():
        k = _popcount(m)
        out[m] = -c if (k * (k - 1) // 2) & 1 else c
    return CliffordElement(x.algebra, out)


# --------------------------------------------------------------------------
# traces on the even part
# --------------------------------------------------------------------------

def left_mult_matrix(x: CliffordElement) -> Matrix:
    """Matrix of w -> x*w on Cl+ in the even blade basis."""
    if not x.is_even():
        raise NotEven("left multiplication on Cl+ needs an even element")
    A = x.algebra
    cols = [A.even_coords(cl_mul(x, A.blade(b))) for b in A.even_blades]
    return Matrix.from_columns(cols)


def left_mult_trace(x: CliffordElement) -> Fraction:
    """Trace of w -> x*w on Cl+, summed blade by blade."""
    if not x.is_even():
        raise NotEven("left multiplication on Cl+ needs an even element")
    A = x.algebra
    tr = Fraction(0)
    for s, c in x.terms.items():
        for b in A.even_blades:
            coef, m = A.blade_product(s, b)
            if m == b:
                tr += c * coef
    return tr


def check_polarization_pair(A: CliffordAlgebra, f1: Sequence[Any], f2: Sequence[Any]) -> None:
    if not (A.q(f1) > 0 and A.q(f2) > 0 and A.bilinear(f1, f2) == 0):
        raise BadPolarizationPair(
            f"need q(f1) > 0, q(f2) > 0, b(f1, f2) = 0; got "
            f"{rat_str(A.q(f1))}, {rat_str(A.q(f2))}, {rat_str(A.bilinear(f1, f2))}"
        )


def trace_form(f1: Sequence[Any], f2: Sequence[Any], v: CliffordElement, w: CliffordElement,
               space: QuadSpace | CliffordAlgebra) -> Fraction:
    """tr(f1 f2 v* w) as a left multiplication on Cl+."""
    A = algebra_of(space)
    check_polarization_pair(A, f1, f2)
    if not (v.is_even() and w.is_even()):
        raise NotEven("the trace form is defined on Cl+")
    f12 = cl_mul(A.vector(f1), A.vector(f2))
    return left_mult_trace(cl_mul(cl_mul(f12, reversal(v)), w))


def trace_form_matrix(f1: Sequence[Any], f2: Sequence[Any], space: QuadSpace | CliffordAlgebra) -> Matrix:
    """Gram matrix of the trace form on the even blade basis."""
    A = algebra_of(space)
    check_polarization_pair(A, f1, f2)
    f12 = cl_mul(A.vector(f1), A.vector(f2))
    rows = []
    for bi in A.even_blades:
        left = cl_mul(f12, reversal(A.blade(bi)))
        rows.append([left_mult_trace(cl_mul(left, A.blade(bj))) for bj in A.even_blades])
    return Matrix(rows)


def find_polarization_pair(space: QuadSpace | CliffordAlgebra, height: int = 8
                           ) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Orthogonal pair of positive vectors: basis vectors first, then small combinations."""
    if isinstance(space, CliffordAlgebra):
        G = Matrix.diag(space.coeffs)
    else:
        G = space.gram
    n = G.nrows
    Q = QuadSpace(G)
    unit = [tuple(Fraction(int(i == j)) for i in range(n)) for j in range(n)]
    cands = list(unit)
    for i in range(n):
        for j in range(i + 1, n):
            for c1 in range(1, height + 1):
                for c2 in range(-height, height + 1):
                    if c2:
                        cands.append(tuple(Fraction(c1 if k == i else c2 if k == j else 0)
                                           for k in range(n)))
    pos = [v for v in cands if Q.q(v) > 0]
    for a_idx, a in enumerate(pos):
        for b in pos[a_idx + 1:]:
            if Q.bilinear(a, b) == 0:
                return a, b
    raise BadPolarizationPair("no orthogonal pair of positive vectors found")


# --------------------------------------------------------------------------
# maps between even Clifford algebras
# --------------------------------------------------------------------------

class CliffordMap:
    """Linear map Cl+(V) -> Cl+(V').

    Either induced by a similarity (``generators`` holds the matrix of psi in
    the diagonal bases, ``multiplier`` its multiplier) or given directly by
    a matrix on the even blade bases.
    """

    def __init__(self, source: CliffordAlgebra, target: CliffordAlgebra, *,
                 generators: Matrix | None = None, multiplier: Fraction | None = None,
                 matrix: Matrix | None = None) -> None:
        if source.even_dim != target.even_dim:
            raise DimensionMismatch("even parts have different dimensions")
        self.source = source
        self.target = target
        self.generators = generators
        self.multiplier = multiplier
        self._matrix = matrix
        self._images: dict[int, CliffordElement] = {}
        self._prefix: dict[tuple[int, ...], CliffordElement] = {}
        self._gen_images: list[CliffordElement] | None = None
        if generators is not None:
            self._gen_images = [target.vector(generators.col(i)) for i in range(source.n)]

    @property
    def induced(self) -> bool:
        return self.generators is not None

    def generator_image(self, i: int) -> CliffordElement:
        assert self._gen_images is not None
        return self._gen_images[i]

    def _word(self, idx: tuple[int, ...]) -> CliffordElement:
        """Product psi(e_i1) ... psi(e_ik), left to right."""
        hit = self._prefix.get(idx)
        if hit is not None:
            return hit
        if not idx:
            val = self.target.one()
        else:
            val = cl_mul(self._word(idx[:-1]), self.generator_image(idx[-1]))
        self._prefix[idx] = val
        return val

    def image(self, mask: int) -> CliffordElement:
        hit = self._images.get(mask)
        if hit is not None:
            return hit
        if mask not in self.source.even_index:
            raise NotEven(f"blade {mask} is odd")
        if self._matrix is not None:
            val = self.target.from_even_coords(self._matrix.col(self.source.even_index[mask]))
        else:
            idx = tuple(i for i in range(self.source.n) if mask >> i & 1)
            m = len(idx) // 2
            val = self._word(idx).scale(Fraction(1) / self.multiplier ** m)
        self._images[mask] = val
        return val

    def __call__(self, x: CliffordElement) -> CliffordElement:
        if x.algebra != self.source:
            raise AlgebraMismatch("element is not in the source algebra")
        out: dict[int, Fraction] = {}
        for s, c in x.terms.items():
            for m, d in self.image(s).terms.items():
                out[m] = out.get(m, 0) + c * d
        return CliffordElement(self.target, out)

    def matrix(self) -> Matrix:
        if self._matrix is None:
            if self.source.n > MATERIALIZE_LIMIT:
                raise TooLarge(f"full matrices are only built for n <= {MATERIALIZE_LIMIT}")
            cols = [self.target.even_coords(self.image(b)) for b in self.source.even_blades]
            self._matrix = Matrix.from_columns(cols)
        return self._matrix

    def inverse_matrix(self) -> Matrix:
        return self.matrix().inverse()


def _diag_of(Q: QuadSpace, given: Diagonalization | None) -> Diagonalization:
    if given is not None:
        return given
    if Q.gram.is_diagonal():
        return Diagonalization(Matrix.identity(Q.dim), tuple(Q.gram.diagonal()))
    return diagonalize(Q)


def induced_clifford_iso(psi: Similarity, diagS: Diagonalization | None = None,
                         diagT: Diagonalization | None = None) -> CliffordMap:
    """psi_Cl: e_S -> (1/lam)^m psi(e_i1) ... psi(e_i2m) on diagonal bases."""
    dS = _diag_of(psi.source, diagS)
    dT = _diag_of(psi.target, diagT)
    src = clifford_build(tuple(dS.diag))
    tgt = clifford_build(tuple(dT.diag))
    N = dT.base_change.inverse() @ psi.matrix @ dS.base_change
    lam = psi.multiplier
    cmap = CliffordMap(src, tgt, generators=N, multiplier=lam)
    # the relation v*v = q(v) must be carried into the target ideal
    for i in range(src.n):
        gi = cmap.generator_image(i)
        if cl_mul(gi, gi) != tgt.scalar(lam * src.coeffs[i]):
            raise WellDefinednessFailure(f"(psi e{i + 1})^2 != lambda * a{i + 1}")
        for k in range(i + 1, src.n):
            gk = cmap.generator_image(k)
            if cl_mul(gi, gk) + cl_mul(gk, gi) != tgt.scalar(0):
                raise WellDefinednessFailure(f"psi e{i + 1}, psi e{k + 1} do not anticommute")
    return cmap


def _elem_json(x: CliffordElement) -> dict[str, Any]:
    return x.to_json()


def verify_ring_iso(cmap: CliffordMap, samples: int = 200, seed: int = 0,
                    exhaustive: bool | None = None) -> VerificationReport:
    """Unital, invertible and multiplicative, checked exactly."""
    check = "ring_iso"
    src, tgt = cmap.source, cmap.target
    meta = {"seed": seed, "inputs_digest": digest([str(src), str(tgt), samples])}
    if cmap(src.one()) != tgt.one():
        return VerificationReport.failed(check, {"unital": _elem_json(cmap(src.one()))}, **meta)
    if src.n <= MATERIALIZE_LIMIT:
        invertible = cmap.matrix().rank() == src.even_dim
    else:
        invertible = cmap.generators is not None and cmap.generators.rank() == src.n
    if not invertible:
        return VerificationReport.failed(check, {"invertible": False}, **meta)

    def mult_ok(x: CliffordElement, y: CliffordElement) -> bool:
        return cmap(cl_mul(x, y)) == cl_mul(cmap(x), cmap(y))

    if exhaustive is None:
        exhaustive = src.n <= EXHAUSTIVE_LIMIT
    if exhaustive:
        pairs_basis = src.even_blades
    else:
        pairs_basis = tuple(b for b in src.even_blades if _popcount(b) == 2)
    checked = 0
    for a in pairs_basis:
        for b in pairs_basis:
            checked += 1
            if not mult_ok(src.blade(a), src.blade(b)):
                return VerificationReport.failed(
                    check, {"multiplicative": [a, b]}, **meta)
    rng = random.Random(seed)
    for _ in range(samples):
        x, y = src.random_even(rng, density=0.3), src.random_even(rng, density=0.3)
        checked += 1
        if not mult_ok(x, y):
            return VerificationReport.failed(
                check, {"multiplicative": [_elem_json(x), _elem_json(y)]}, **meta)
    return VerificationReport.ok(check, details={"pairs_checked": checked,
                                                 "exhaustive": exhaustive}, **meta)


def verify_functoriality(psi: Similarity, phi: Similarity) -> VerificationReport:
    """(psi o phi)_Cl = psi_Cl o phi_Cl on every even blade."""
    check = "functoriality"
    comp = induced_clifford_iso(compose(psi, phi))
    p_cl, f_cl = induced_clifford_iso(psi), induced_clifford_iso(phi)
    for b in comp.source.even_blades:
        if comp.image(b) != p_cl(f_cl.image(b)):
            return VerificationReport.failed(check, {"blade": b})
    return VerificationReport.ok(check, details={"blades": comp.source.even_dim})


def trace_invariance_check(cmap: CliffordMap, samples: int = 200, seed: int = 0) -> VerificationReport:
    check = "trace_invariance"
    src = cmap.source
    for b in src.even_blades:
        x = src.blade(b)
        if left_mult_trace(x) != left_mult_trace(cmap(x)):
            return VerificationReport.failed(check, {"blade": b}, seed=seed)
    rng = random.Random(seed)
    for _ in range(samples):
        x = src.random_even(rng)
        if left_mult_trace(x) != left_mult_trace(cmap(x)):
            return VerificationReport.failed(check, {"element": x.to_json()}, seed=seed)
    return VerificationReport.ok(check, seed=seed,
                                 details={"blades": src.even_dim, "samples": samples})


def transported_pair(cmap: CliffordMap, f1: Sequence[Any], f2: Sequence[Any]
                     ) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """(psi f1 / lam, psi f2) in the target diagonal coordinates."""
    assert cmap.generators is not None and cmap.multiplier is not None
    N, lam = cmap.generators, cmap.multiplier
    g1 = tuple(x / lam for x in N.apply([rat(x) for x in f1]))
    g2 = N.apply([rat(x) for x in f2])
    return g1, g2


def trace_form_compatibility(cmap: CliffordMap, f1: Sequence[Any] | None = None,
                             f2: Sequence[Any] | None = None, samples: int = 20,
                             seed: int = 0) -> VerificationReport:
    """Q(v, w) = Q'(psi_Cl v, psi_Cl w) with Q' built from (psi f1 / lam, psi f2)."""
    check = "trace_form_compatibility"
    src, tgt = cmap.source, cmap.target
    if f1 is None or f2 is None:
        f1, f2 = find_polarization_pair(src)
    g1, g2 = transported_pair(cmap, f1, f2)
    details: dict[str, Any] = {"f1": [rat_str(x) for x in f1], "f2": [rat_str(x) for x in f2],
                               "g1": [rat_str(x) for x in g1], "g2": [rat_str(x) for x in g2]}
    if src.n <= MATERIALIZE_LIMIT:
        Qs = trace_form_matrix(f1, f2, src)
        Qt = trace_form_matrix(g1, g2, tgt)
        P = cmap.matrix()
        pulled = P.T @ Qt @ P
        if pulled != Qs:
            bad = next((i, j) for i in range(Qs.nrows) for j in range(Qs.ncols)
                       if pulled[i, j] != Qs[i, j])
            return VerificationReport.failed(check, {"basis_pair": list(bad)}, seed=seed,
                                             details=details)
    rng = random.Random(seed)
    for _ in range(samples):
        v, w = src.random_even(rng, density=0.3), src.random_even(rng, density=0.3)
        if trace_form(f1, f2, v, w, src) != trace_form(g1, g2, cmap(v), cmap(w), tgt):
            return VerificationReport.failed(check, {"v": v.to_json(), "w": w.to_json()},
                                             seed=seed, details=details)
    return VerificationReport.ok(check, seed=seed, details=details)


# --------------------------------------------------------------------------
# the embedding V -> End(Cl+)
# --------------------------------------------------------------------------

def phi_embedding(v: Sequence[Any], v0: Sequence[Any], A: CliffordAlgebra) -> Matrix:
    """Matrix of f_v: w -> v*w*v0 on Cl+ (odd * even * odd is even)."""
    if A.q(v0) == 0:
        raise ZeroNormBasePoint("base point must have nonzero norm")
    ve, v0e = A.vector(v), A.vector(v0)
    cols = [A.even_coords(cl_mul(cl_mul(ve, A.blade(b)), v0e)) for b in A.even_blades]
    return Matrix.from_columns(cols)


def default_base_point(A: CliffordAlgebra) -> tuple[Fraction, ...]:
    i = next(i for i, a in enumerate(A.coeffs) if a != 0)
    return tuple(Fraction(int(k == i)) for k in range(A.n))


def phi_square_check(psi: Similarity, v0: Sequence[Any] | None = None, samples: int = 20,
                     seed: int = 0, cmap: CliffordMap | None = None) -> VerificationReport:
    """psi_Cl o f_v o psi_Cl^-1 = f'_{psi v}, with base point psi(v0)/lam downstairs."""
    check = "phi_square"
    cmap = cmap or induced_clifford_iso(psi)
    src, tgt = cmap.source, cmap.target
    v0 = tuple(rat(x) for x in (v0 if v0 is not None else default_base_point(src)))
    if src.q(v0) == 0:
        raise ZeroNormBasePoint("base point must have nonzero norm")
    N, lam = cmap.generators, cmap.multiplier
    assert N is not None and lam is not None
    v0t = tuple(x / lam for x in N.apply(v0))
    P = cmap.matrix()
    Pinv = P.inverse()
    rng = random.Random(seed)
    vs = [tuple(Fraction(int(i == j)) for i in range(src.n)) for j in range(src.n)]
    vs += [tuple(Fraction(rng.randint(-3, 3)) for _ in range(src.n)) for _ in range(samples)]
    for v in vs:
        lhs = P @ phi_embedding(v, v0, src) @ Pinv
        rhs = phi_embedding(N.apply(v), v0t, tgt)
        if lhs != rhs:
            return VerificationReport.failed(check, {"v": [rat_str(x) for x in v]}, seed=seed)
    return VerificationReport.ok(check, seed=seed, details={
        "v0": [rat_str(x) for x in v0], "vectors_checked": len(vs)})
