"""Similarities of rational quadratic spaces.

A similarity of multiplier ``lam`` is an invertible M with
``M^T G_target M = lam * G_source``.  When it is an endomorphism that is
self-adjoint for the form and squares to ``d * Id``, the real space splits
into the two eigenspaces for +sqrt(d) and -sqrt(d); those are computed
exactly over Q(sqrt d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Sequence

from .errors import (
    DimensionMismatch,
    NotASimilarity,
    NotEndomorphism,
    PreconditionFailed,
    Singular,
    SpaceMismatch,
)
from .exact import (
    Matrix,
    QuadExt,
    int_matmul,
    int_transpose,
    is_rational_square,
    rat,
    rat_str,
    squarefree_decompose,
)
from .quadspace import (
    Diagonalization,
    QuadSpace,
    gram_schmidt,
    orthogonal_sum,
    signature,
    signature_of,
)

DEFAULT_HEIGHT = 64


@dataclass(frozen=True)
class Similarity:
    """A verified similarity ``source -> target`` (matrix acts on columns)."""

    source: QuadSpace
    target: QuadSpace
    matrix: Matrix
    multiplier: Fraction

    def __post_init__(self) -> None:
        M = self.matrix
        if M.shape != (self.target.dim, self.source.dim) or not M.is_square():
            raise DimensionMismatch(
                f"matrix {M.shape} for {self.source.dim} -> {self.target.dim}"
            )
        if self.multiplier == 0:
            raise NotASimilarity("multiplier 0")
        lhs = M.T @ self.target.gram @ M
        if lhs != self.source.gram.scale(self.multiplier):
            raise NotASimilarity("M^T G' M != lambda G")

    @classmethod
    def _already_checked(cls, source: QuadSpace, target: QuadSpace, M: Matrix,
                         multiplier: Fraction) -> "Similarity":
        """Skip __post_init__ when the caller has just verified every entry."""
        sim = object.__new__(cls)
        for name, value in (("source", source), ("target", target), ("matrix", M),
                            ("multiplier", multiplier)):
            object.__setattr__(sim, name, value)
        return sim

    @property
    def dim(self) -> int:
        return self.source.dim

    def is_endomorphism(self) -> bool:
        return self.source.gram == self.target.gram

    def __call__(self, v: Sequence[Any]) -> tuple[Any, ...]:
        return self.matrix.apply(v)

    def to_json(self) -> dict[str, Any]:
        return {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "matrix": [[rat_str(x) for x in r] for r in self.matrix.rows],
            "multiplier": rat_str(self.multiplier),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Similarity":
        src = QuadSpace.from_json(data["source"])
        tgt = QuadSpace.from_json(data["target"])
        M = Matrix([[rat(x) for x in r] for r in data["matrix"]])
        sim = similarity_verify(M, src, tgt)
        if "multiplier" in data and rat(data["multiplier"]) != sim.multiplier:
            raise NotASimilarity(
                f"declared multiplier {data['multiplier']} but computed {rat_str(sim.multiplier)}"
            )
        return sim


def similarity_verify(M: Matrix, source: QuadSpace, target: QuadSpace | None = None) -> Similarity:
    """Read off the multiplier of M and check it against every entry."""
    target = source if target is None else target
    if not M.is_square() or M.nrows != source.dim or target.dim != source.dim:
        raise DimensionMismatch(
            f"matrix {M.shape} between spaces of dim {source.dim} and {target.dim}"
        )
    if M.rank() < M.nrows:
        raise Singular("similarity matrix is not invertible")
    lam = _integral_multiplier(M, source.gram, target.gram)
    if lam is not None:
        return Similarity._already_checked(source, target, M, lam)
    pulled = M.T @ target.gram @ M
    G = source.gram
    n = source.dim
    lam = None
    for i in range(n):
        for j in range(n):
            if G[i, j]:
                lam = pulled[i, j] / G[i, j]
                break
        if lam is not None:
            break
    if lam is None or lam == 0:
        raise NotASimilarity("source form is zero or pulled-back form vanishes")
    for i in range(n):
        for j in range(n):
            if pulled[i, j] != lam * G[i, j]:
                raise NotASimilarity(
                    f"entry ({i}, {j}): M^T G' M = {rat_str(pulled[i, j])}, "
                    f"expected {rat_str(lam)} * {rat_str(G[i, j])}"
                )
    return Similarity._already_checked(source, target, M, lam)


def _integral_multiplier(M: Matrix, G: Matrix, Gt: Matrix) -> Fraction | None:
    """Multiplier of M via integer matrices; None defers to the generic path.

    With M = A/m, G' = T/t and G = S/s, the identity M^T G' M = lam G reads
    s * A^T T A = lam * m^2 * t * S, so every entry of A^T T A must be the
    same multiple of the matching entry of S.
    """
    parts = [X.integral() for X in (M, G, Gt)]
    if any(p is None for p in parts):
        return None
    (A, m), (S, s), (T, t) = parts  # type: ignore[misc]
    P = int_matmul(int_matmul(int_transpose(A), T), A)
    n = len(S)
    ref = next(((i, j) for i in range(n) for j in range(n) if S[i][j]), None)
    if ref is None or P[ref[0]][ref[1]] == 0:
        return None
    pr, sr = P[ref[0]][ref[1]], S[ref[0]][ref[1]]
    if any(P[i][j] * sr != pr * S[i][j] for i in range(n) for j in range(n)):
        return None  # the generic path names the offending entry
    return Fraction(pr * s, sr * m * m * t)


def rosati_fixed(M: Matrix, Q: QuadSpace) -> bool:
    """True iff M is self-adjoint for Q, i.e. M^T G = G M."""
    if M.shape != (Q.dim, Q.dim):
        raise DimensionMismatch(f"matrix {M.shape} on a space of dim {Q.dim}")
    mi, gi = M.integral(), Q.gram.integral()
    if mi is not None and gi is not None:
        A, G = mi[0], gi[0]  # both sides carry the same denominator
        return int_matmul(int_transpose(A), G) == int_matmul(G, A)
    return M.T @ Q.gram == Q.gram @ M


def square_check(psi: Similarity, d: Any) -> bool:
    """True iff psi is an endomorphism with M^2 = d * Id."""
    if not psi.is_endomorphism():
        raise NotEndomorphism("square_check needs source == target")
    M, d = psi.matrix, rat(d)
    mi = M.integral()
    if mi is not None:
        A, m = mi
        A2 = int_matmul(A, A)
        n = len(A)
        # A^2 = d m^2 Id, compared as integers
        return all(A2[i][j] * d.denominator == (d.numerator * m * m if i == j else 0)
                   for i in range(n) for j in range(n))
    return M @ M == Matrix.identity(M.nrows).scale(d)


# --------------------------------------------------------------------------
# obstructions
# --------------------------------------------------------------------------

class ObstructionKind(str, Enum):
    ODD_DIM_NONSQUARE = "odd_dim_nonsquare"
    SIGNATURE_MISMATCH = "signature_mismatch"
    NONE = "none"


@dataclass(frozen=True)
class ObstructionCertificate:
    kind: ObstructionKind
    detail: str

    def to_json(self) -> dict[str, str]:
        return {"kind": self.kind.value, "detail": self.detail}


def exists_obstruction(Q: QuadSpace, d: Any) -> ObstructionCertificate:
    """Cheap necessary conditions for a self-similarity of multiplier d."""
    d = rat(d)
    if d == 0:
        raise ValueError("multiplier must be nonzero")
    n = Q.dim
    if n % 2 and not is_rational_square(d):
        return ObstructionCertificate(
            ObstructionKind.ODD_DIM_NONSQUARE,
            f"(det M)^2 = {rat_str(d)}^{n} has no rational solution for odd dim {n}",
        )
    pos, neg = signature(Q)
    if d < 0 and pos != neg:
        return ObstructionCertificate(
            ObstructionKind.SIGNATURE_MISMATCH,
            f"negative multiplier maps signature ({pos},{neg}) to ({neg},{pos})",
        )
    return ObstructionCertificate(ObstructionKind.NONE, "no obstruction found")


# --------------------------------------------------------------------------
# eigenspaces over Q(sqrt d)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenDecomp:
    d: int
    scale: int
    basis_plus: Matrix
    basis_minus: Matrix
    gram_plus: Matrix
    gram_minus: Matrix
    sig_plus: tuple[int, int]
    sig_minus: tuple[int, int]
    diag_plus: Diagonalization
    diag_minus: Diagonalization
    space: QuadSpace

    @property
    def eigenvalue(self) -> QuadExt:
        return QuadExt(0, self.scale, self.d)

    def to_json(self) -> dict[str, Any]:
        def basis(B: Matrix) -> list[list[dict[str, str]]]:
            return [[_as_ext(x, self.d).to_json() for x in col] for col in B.columns()]
        return {
            "d": self.d,
            "scale": self.scale,
            "sig_plus": list(self.sig_plus),
            "sig_minus": list(self.sig_minus),
            "basis_plus": basis(self.basis_plus),
            "basis_minus": basis(self.basis_minus),
        }


def _as_ext(x: Any, d: int) -> QuadExt:
    return x if isinstance(x, QuadExt) else QuadExt(x, 0, d)


def _check_eigen_preconditions(psi: Similarity, d: Any) -> tuple[int, int]:
    d = rat(d)
    if d.denominator != 1 or d < 2:
        raise PreconditionFailed(f"d must be an integer >= 2, got {rat_str(d)}")
    scale, d0 = squarefree_decompose(int(d))
    if d0 == 1:
        raise PreconditionFailed(f"d = {d} is a perfect square")
    if not psi.is_endomorphism():
        raise PreconditionFailed("similarity is not an endomorphism")
    if not rosati_fixed(psi.matrix, psi.source):
        raise PreconditionFailed("similarity is not fixed by the Rosati involution")
    if not square_check(psi, d):
        raise PreconditionFailed(f"M^2 != {d} Id")
    return d0, scale


def coordinate_blocks(*mats: Matrix) -> list[list[int]]:
    """Connected components of coordinates coupled by a nonzero entry of any matrix."""
    n = mats[0].nrows
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for A in mats:
        for i, row in enumerate(A.rows):
            for j, x in enumerate(row):
                if x and i != j:
                    parent[find(i)] = find(j)
    comps: dict[int, list[int]] = {}
    for i in range(n):
        comps.setdefault(find(i), []).append(i)
    return sorted(comps.values())


def eigenspace_decomposition(psi: Similarity, d: Any) -> EigenDecomp:
    d0, scale = _check_eigen_preconditions(psi, d)
    n = psi.dim
    M = psi.matrix
    G = psi.source.gram
    root = QuadExt(0, scale, d0)
    zero = QuadExt(0, 0, d0)
    halves: dict[int, tuple[list[list[Any]], list[Matrix], list[Matrix], list[Any]]] = {}
    for sgn in (1, -1):
        ev = root if sgn > 0 else -root
        cols: list[list[Any]] = []
        grams: list[Matrix] = []
        bases: list[Matrix] = []
        diag: list[Any] = []
        # psi and the form split along these blocks, so each is handled alone
        for block in coordinate_blocks(M, G):
            Mb = M.submatrix(block, block)
            shifted = Mb - Matrix.identity(len(block)).map(lambda x: x * ev)
            kern = shifted.kernel()
            for v in kern:
                full = [zero] * n
                for i, x in zip(block, v):
                    full[i] = x
                cols.append(full)
            if kern:
                Kb = Matrix.from_columns(kern)
                Gb = Kb.T @ G.submatrix(block, block) @ Kb
                Bb, db = gram_schmidt(Gb)
                grams.append(Gb)
                bases.append(Bb)
                diag.extend(db)
        if len(cols) != n // 2 or n % 2:
            raise PreconditionFailed(
                f"eigenspace for {ev} has dimension {len(cols)}, expected {n / 2}"
            )
        halves[sgn] = (cols, grams, bases, diag)

    def assemble(sgn: int) -> tuple[Matrix, Matrix, Diagonalization]:
        cols, grams, bases, diag = halves[sgn]
        return (Matrix.from_columns(cols, n), Matrix.block_diag(grams),
                Diagonalization(Matrix.block_diag(bases), tuple(diag)))

    Bp, Gp, dp = assemble(1)
    Bm, Gm, dm = assemble(-1)
    return EigenDecomp(
        d=d0,
        scale=scale,
        basis_plus=Bp,
        basis_minus=Bm,
        gram_plus=Gp,
        gram_minus=Gm,
        sig_plus=signature_of(dp.diag),
        sig_minus=signature_of(dm.diag),
        diag_plus=dp,
        diag_minus=dm,
        space=psi.source,
    )


def hodge_locus_dimension(psi: Similarity, d: Any) -> int | None:
    """Dimension of the period locus on which psi is a Hodge similarity.

    Returns ``dim/2 - 2`` when one eigenspace is negative definite and the
    other has signature (2, dim/2 - 2); returns None (empty locus) otherwise.
    A nonempty locus in dim <= 4 raises PreconditionFailed.
    """
    n = psi.dim
    dec = eigenspace_decomposition(psi, d)
    half = n // 2
    want = (2, half - 2)
    negdef = (0, half)
    if not ((dec.sig_minus == negdef and dec.sig_plus == want) or (
        dec.sig_plus == negdef and dec.sig_minus == want
    )):
        return None
    # emptiness needs no size bound, the dimension count does
    if n <= 4:
        raise PreconditionFailed(f"the locus formula needs dim > 4, got {n}")
    return half - 2


# --------------------------------------------------------------------------
# bounded search for 2x2 blocks
# --------------------------------------------------------------------------

def _height(x: Fraction) -> int:
    return max(abs(x.numerator), x.denominator)


def _rat_key(x: Fraction) -> tuple[Fraction, bool]:
    return abs(x), x < 0


def _rationals(height: int) -> list[Fraction]:
    out = {Fraction(0)}
    for q in range(1, height + 1):
        for p in range(1, height + 1):
            if math.gcd(p, q) == 1:
                out.add(Fraction(p, q))
                out.add(Fraction(-p, q))
    return sorted(out, key=_rat_key)


def block_similarity_find(Q: QuadSpace, d: Any, height: int = DEFAULT_HEIGHT) -> Matrix | None:
    """Search a self-adjoint M on diag(q1, q2) with M^2 = d Id.

    Such M is [[a, b], [(q1/q2) b, -a]] with a^2 + (q1/q2) b^2 = d.  All
    rational b of height <= ``height`` are tried; the returned witness is
    the least under the order (max height, |a|, a < 0, |b|, b < 0).
    None means the bounded search failed, not that no witness exists.
    """
    if Q.dim != 2 or not Q.gram.is_diagonal():
        raise PreconditionFailed("block search needs a diagonal 2-dim space")
    d = rat(d)
    q1, q2 = Q.gram[0, 0], Q.gram[1, 1]
    r = q1 / q2
    best: tuple[Any, Fraction, Fraction] | None = None
    for b in _rationals(height):
        rest = d - r * b * b
        if rest < 0:
            continue
        p, q = rest.numerator, rest.denominator
        sp, sq = math.isqrt(p), math.isqrt(q)
        if sp * sp != p or sq * sq != q:
            continue
        a = Fraction(sp, sq)
        if _height(a) > height:
            continue
        for aa in ((a, -a) if a else (a,)):
            key = (max(_height(aa), _height(b)), _rat_key(aa), _rat_key(b))
            if best is None or key < best[0]:
                best = (key, aa, b)
    if best is None:
        return None
    _, a, b = best
    M = Matrix([[a, b], [r * b, -a]])
    psi = similarity_verify(M, Q)
    assert rosati_fixed(M, Q) and square_check(psi, d)
    return M


# --------------------------------------------------------------------------
# construction helpers
# --------------------------------------------------------------------------

def hyperbolic_plane() -> QuadSpace:
    return QuadSpace.from_rows([[0, 1], [1, 0]], "U")


def kummer_similarity(n: int, k: int) -> Similarity:
    """Multiplier-k similarity U^3 + <-2(n'+1)> -> U^3 + <-2(n+1)>, n' = k(n+1) - 1.

    Each hyperbolic plane maps by diag(1, k), pulling U back to U(k).  The
    last line maps by k because k^2 * (-2(n+1)) = k * (-2(n'+1)).  Dividing
    the matrix by k gives the isometry onto the target rescaled by k.
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    n_prime = k * (n + 1) - 1
    U = hyperbolic_plane()
    source = orthogonal_sum(U, U, U, QuadSpace.diagonal([-2 * (n_prime + 1)]),
                            label=f"U^3 + <{-2 * (n_prime + 1)}>")
    target = orthogonal_sum(U, U, U, QuadSpace.diagonal([-2 * (n + 1)]),
                            label=f"U^3 + <{-2 * (n + 1)}>")
    M = Matrix.diag([1, k, 1, k, 1, k, k])
    sim = similarity_verify(M, source, target)
    assert sim.multiplier == k
    return sim


def compose(psi: Similarity, phi: Similarity) -> Similarity:
    """psi after phi."""
    if phi.target.gram != psi.source.gram:
        raise SpaceMismatch("target of phi is not the source of psi")
    return Similarity(phi.source, psi.target, psi.matrix @ phi.matrix,
                      psi.multiplier * phi.multiplier)


def invert(psi: Similarity) -> Similarity:
    return Similarity(psi.target, psi.source, psi.matrix.inverse(), 1 / psi.multiplier)


def direct_sum(*sims: Similarity) -> Similarity:
    lams = {s.multiplier for s in sims}
    if len(lams) != 1:
        raise NotASimilarity(f"blocks have different multipliers {sorted(lams)}")
    return Similarity(
        orthogonal_sum(*(s.source for s in sims)),
        orthogonal_sum(*(s.target for s in sims)),
        Matrix.block_diag([s.matrix for s in sims]),
        lams.pop(),
    )


def restrict(psi: Similarity, coords: Sequence[int]) -> Similarity:
    """Restriction to a coordinate subspace that psi maps into itself."""
    coords = list(coords)
    rest = [i for i in range(psi.dim) if i not in coords]
    M = psi.matrix
    if any(M[i, j] for i in rest for j in coords) or any(M[i, j] for i in coords for j in rest):
        raise PreconditionFailed(f"coordinates {coords} are not invariant under psi")
    sub = lambda Q: QuadSpace(Q.gram.submatrix(coords, coords))  # noqa: E731
    src, tgt = sub(psi.source), sub(psi.target)
    for Q, full in ((src, psi.source), (tgt, psi.target)):
        if any(full.gram[i, j] for i in coords for j in rest):
            raise PreconditionFailed(f"coordinates {coords} are not an orthogonal summand")
    return Similarity(src, tgt, M.submatrix(coords, coords), psi.multiplier)
