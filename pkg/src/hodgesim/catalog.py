"""Named lattices, the K3-type test spaces and their block similarities.

Every entry is checked when it is loaded; a failed check raises
CatalogCorrupt so that anything built on a bad entry fails closed.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Any, Mapping, Sequence

from .errors import CatalogCorrupt, HodgeSimError, UnknownLattice, UnknownName
from .exact import Matrix, rat
from .quadspace import QuadSpace, isometric, orthogonal_sum, rescale, signature
from .similarity import Similarity, direct_sum, rosati_fixed, similarity_verify, square_check

E8_CARTAN = (
    (2, -1, 0, 0, 0, 0, 0, 0),
    (-1, 2, -1, 0, 0, 0, 0, 0),
    (0, -1, 2, -1, 0, 0, 0, -1),
    (0, 0, -1, 2, -1, 0, 0, 0),
    (0, 0, 0, -1, 2, -1, 0, 0),
    (0, 0, 0, 0, -1, 2, -1, 0),
    (0, 0, 0, 0, 0, -1, 2, 0),
    (0, 0, -1, 0, 0, 0, 0, 2),
)
# simple roots of E8 in the standard coordinates of Q^8 (Gram = E8_CARTAN)
E8_ROOTS = (
    ("1", "1", "0", "0", "0", "0", "0", "0"),
    ("-1", "0", "1", "0", "0", "0", "0", "0"),
    ("1", "-1", "0", "0", "0", "0", "0", "0"),
    ("-1/2", "1/2", "-1/2", "1/2", "1/2", "1/2", "1/2", "1/2"),
    ("0", "0", "0", "-1", "-1", "0", "0", "0"),
    ("0", "0", "0", "1", "0", "-1", "0", "0"),
    ("0", "0", "0", "0", "0", "1", "-1", "0"),
    ("-1/2", "1/2", "-1/2", "-1/2", "1/2", "-1/2", "-1/2", "-1/2"),
)
A2_CARTAN = ((2, -1), (-1, 2))
# lattice coordinates -> diagonal coordinates: U -> <1,-1>, A2(-) -> <-2,-3/2>
U_TO_DIAG = ((1, "1/2"), (1, "-1/2"))
A2_TO_DIAG = ((1, "-1/2"), (0, 1))
HYPERBOLIC = ((0, 1), (1, 0))

LATTICE_NAMES = ("U", "U(k)", "E8(-1)", "E8(-2)", "A2(+)", "A2(-)", "K12(-2)")
SPACE_NAMES = ("lambda_p2", "gamma_p3", "nikulin_ambient", "order3_ambient", "kummer_h2(n)")
SIMILARITY_NAMES = ("lambda_p2_sqrt2", "gamma_p3_sqrt3")


@dataclass(frozen=True)
class Expected:
    """Load-time assertions for a lattice: dimension, signature, determinant
    and optionally a diagonal model it must be rationally isometric to."""

    dim: int
    signature: tuple[int, int]
    det: Fraction
    model: tuple[Fraction, ...] | None = None


@dataclass(frozen=True)
class NamedLattice:
    name: str
    space: QuadSpace
    expected: Expected


@dataclass(frozen=True)
class BlockData:
    """A diagonal 2x2 form and a matrix meant to be a Rosati-fixed root of d."""

    diag: tuple[Fraction, ...]
    matrix: tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class SimilarityData:
    d: int
    space: str
    blocks: tuple[BlockData, ...]


def _block(diag: Sequence[Any], rows: Sequence[Sequence[Any]]) -> BlockData:
    return BlockData(tuple(rat(x) for x in diag), tuple(tuple(rat(x) for x in r) for r in rows))


_LAMBDA_M1 = _block([1, -1], [["3/2", "-1/2"], ["1/2", "-3/2"]])
_LAMBDA_M3 = _block([-2, -2], [[1, 1], [1, -1]])
_GAMMA_M1 = _block([1, -1], [[2, -1], [1, -2]])
_GAMMA_M3 = _block([-2, "-3/2"], [[0, "3/2"], [2, 0]])

DEFAULT_SIMILARITIES: dict[str, SimilarityData] = {
    "lambda_p2_sqrt2": SimilarityData(2, "lambda_p2", (_LAMBDA_M1, _LAMBDA_M1) + (_LAMBDA_M3,) * 4),
    "gamma_p3_sqrt3": SimilarityData(3, "gamma_p3", (_GAMMA_M1, _GAMMA_M1, _GAMMA_M3, _GAMMA_M3)),
}


def _k12_gram() -> Matrix:
    raw = resources.files("hodgesim").joinpath("data/k12.json").read_text()
    data = json.loads(raw)
    rows = data["gram"]
    digest = hashlib.sha256(json.dumps(rows, separators=(",", ":")).encode()).hexdigest()
    if digest != data.get("sha256"):
        raise CatalogCorrupt("k12.json checksum mismatch")
    return Matrix(rows)


_U_PARAM = re.compile(r"^U\((-?\d+(?:/\d+)?)\)$")


@dataclass
class Catalog:
    """Lattice and similarity data with optional overrides for fault injection."""

    gram_overrides: dict[str, Matrix] = field(default_factory=dict)
    similarity_overrides: dict[str, SimilarityData] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._cache: dict[str, Any] = {}

    # -- raw Gram matrices ------------------------------------------------------
    def _base_gram(self, key: str) -> Matrix:
        if key in self.gram_overrides:
            return self.gram_overrides[key]
        if key == "E8":
            return Matrix(E8_CARTAN)
        if key == "A2":
            return Matrix(A2_CARTAN)
        if key == "U":
            return Matrix(HYPERBOLIC)
        if key == "K12":
            return _k12_gram()
        raise UnknownLattice(key)

    def _even_gram(self, key: str) -> Matrix:
        """Base Gram matrix, asserted integral and even like every bundled lattice."""
        G = self._base_gram(key)
        integral = all(Fraction(x).denominator == 1 for r in G.rows for x in r)
        if not integral or any(G[i, i] % 2 for i in range(G.nrows)):
            raise CatalogCorrupt(f"{key} Gram matrix is not an even integral lattice")
        return G

    def named_lattice(self, name: str) -> NamedLattice:
        hit = self._cache.get(("lattice", name))
        if hit is not None:
            return hit
        m = _U_PARAM.match(name)
        if name == "U":
            space, exp = QuadSpace(self._even_gram("U"), "U"), Expected(2, (1, 1), Fraction(-1), (1, -1))
        elif m:
            k = rat(m.group(1))
            if k == 0:
                raise UnknownLattice("U(0) is degenerate")
            space = rescale(QuadSpace(self._even_gram("U"), "U"), k)
            exp = Expected(2, (1, 1), -k * k, (1, -1))
        elif name in ("E8(-1)", "E8(-2)"):
            s = -1 if name == "E8(-1)" else -2
            space = QuadSpace(self._even_gram("E8").scale(s), name)
            exp = Expected(8, (0, 8), Fraction(s) ** 8, (s,) * 8)
        elif name in ("A2(+)", "A2(-)"):
            s = 1 if name == "A2(+)" else -1
            space = QuadSpace(self._even_gram("A2").scale(s), name)
            exp = Expected(2, (2, 0) if s > 0 else (0, 2), Fraction(3), (2 * s, Fraction(3, 2) * s))
        elif name == "K12(-2)":
            space = QuadSpace(self._even_gram("K12").scale(-2), name)
            exp = Expected(12, (0, 12), Fraction(729 * 2**12))
        else:
            raise UnknownLattice(f"unknown lattice {name!r}; known: {', '.join(LATTICE_NAMES)}")
        entry = NamedLattice(name, space, exp)
        _assert_expected(entry)
        self._cache[("lattice", name)] = entry
        return entry

    def lattice(self, name: str) -> QuadSpace:
        return self.named_lattice(name).space

    # -- assembled spaces -------------------------------------------------------
    def paper_space(self, name: str) -> QuadSpace:
        U = self.lattice("U")
        m = re.match(r"^kummer_h2\((\d+)\)$", name)
        if name == "lambda_p2":
            return orthogonal_sum(U, U, self.lattice("E8(-2)"), label=name)
        if name == "gamma_p3":
            A = self.lattice("A2(-)")
            return orthogonal_sum(U, U, A, A, label=name)
        if name == "nikulin_ambient":
            return orthogonal_sum(U, U, U, self.lattice("E8(-2)"), label=name)
        if name == "order3_ambient":
            A = self.lattice("A2(-)")
            return orthogonal_sum(U, U, U, A, A, label=name)
        if m:
            n = int(m.group(1))
            if n < 1:
                raise UnknownName("kummer_h2(n) needs n >= 1")
            return orthogonal_sum(U, U, U, QuadSpace.diagonal([-2 * (n + 1)]), label=name)
        raise UnknownName(f"unknown space {name!r}; known: {', '.join(SPACE_NAMES)}")

    # -- block similarities -----------------------------------------------------
    def similarity_data(self, name: str) -> SimilarityData:
        if name in self.similarity_overrides:
            return self.similarity_overrides[name]
        if name in DEFAULT_SIMILARITIES:
            return DEFAULT_SIMILARITIES[name]
        raise UnknownName(f"unknown similarity {name!r}; known: {', '.join(SIMILARITY_NAMES)}")

    def similarity_blocks(self, name: str) -> list[Similarity]:
        hit = self._cache.get(("blocks", name))
        if hit is not None:
            return hit
        data = self.similarity_data(name)
        sims = []
        for i, b in enumerate(data.blocks):
            Q = QuadSpace.diagonal(b.diag, label=f"block{i + 1}")
            M = Matrix(b.matrix)
            try:
                psi = similarity_verify(M, Q)
                ok = psi.is_endomorphism() and psi.multiplier == data.d and rosati_fixed(M, Q) \
                    and square_check(psi, data.d)
            except HodgeSimError as exc:
                raise CatalogCorrupt(f"{name} block {i + 1}: {exc}") from exc
            if not ok:
                raise CatalogCorrupt(f"{name} block {i + 1} fails its load-time checks")
            sims.append(psi)
        self._cache[("blocks", name)] = sims
        return sims

    def diagonal_model(self, name: str) -> QuadSpace:
        """The orthogonal sum of a similarity's diagonal blocks."""
        data = self.similarity_data(name)
        entries = [x for b in data.blocks for x in b.diag]
        model = QuadSpace.diagonal(entries, label=f"{data.space} (diagonal)")
        if not isometric(model, self.paper_space(data.space)):
            raise CatalogCorrupt(f"diagonal model of {name} is not isometric to {data.space}")
        return model

    def paper_similarity(self, name: str) -> Similarity:
        hit = self._cache.get(("sim", name))
        if hit is not None:
            return hit
        sims = self.similarity_blocks(name)
        model = self.diagonal_model(name)
        self.model_isometry(name)
        psi = direct_sum(*sims)
        psi = Similarity(model, model, psi.matrix, psi.multiplier)
        self._cache[("sim", name)] = psi
        return psi

    def model_isometry(self, name: str) -> Matrix:
        """D with D^T G_model D = G_space, mapping lattice to diagonal coordinates."""
        data = self.similarity_data(name)
        U = Matrix(U_TO_DIAG)
        if data.space == "lambda_p2":
            D = Matrix.block_diag([U, U, Matrix(E8_ROOTS).T])
        elif data.space == "gamma_p3":
            A = Matrix(A2_TO_DIAG)
            D = Matrix.block_diag([U, U, A, A])
        else:  # pragma: no cover - every similarity names one of the two spaces
            raise UnknownName(data.space)
        model = self.diagonal_model(name)
        if D.T @ model.gram @ D != self.paper_space(data.space).gram:
            raise CatalogCorrupt(f"model isometry for {data.space} does not match its Gram matrix")
        return D

    def lattice_similarity(self, name: str) -> Similarity:
        """The similarity expressed in the lattice coordinates of its space."""
        psi = self.paper_similarity(name)
        D = self.model_isometry(name)
        space = self.paper_space(self.similarity_data(name).space)
        try:
            return similarity_verify(D.inverse() @ psi.matrix @ D, space)
        except HodgeSimError as exc:
            raise CatalogCorrupt(f"{name} in lattice coordinates: {exc}") from exc

    def block_restriction(self, name: str, blocks: Sequence[int]) -> Similarity:
        """Direct sum of the chosen 2x2 blocks (0-based indices)."""
        sims = self.similarity_blocks(name)
        try:
            return direct_sum(*(sims[i] for i in blocks))
        except IndexError:
            raise UnknownName(f"{name} has {len(sims)} blocks") from None

    def list(self) -> dict[str, list[str]]:
        return {"lattices": list(LATTICE_NAMES), "spaces": list(SPACE_NAMES),
                "similarities": list(SIMILARITY_NAMES)}


def _assert_expected(entry: NamedLattice) -> None:
    Q, exp = entry.space, entry.expected
    try:
        ok = Q.dim == exp.dim and Q.det() == exp.det and signature(Q) == exp.signature
        if ok and exp.model is not None:
            ok = isometric(Q, QuadSpace.diagonal(exp.model))
    except HodgeSimError as exc:
        raise CatalogCorrupt(f"{entry.name}: {exc}") from exc
    if not ok:
        raise CatalogCorrupt(f"{entry.name} fails its invariant assertions")


def with_corrupted_block(name: str, block: int, row: int, col: int, delta: Any = 1,
                         base: Catalog | None = None) -> Catalog:
    """Copy of the catalog with one similarity matrix entry shifted by ``delta``."""
    base = base or Catalog()
    data = base.similarity_data(name)
    blocks = list(data.blocks)
    b = blocks[block]
    rows = [list(r) for r in b.matrix]
    rows[row][col] += rat(delta)
    blocks[block] = BlockData(b.diag, tuple(tuple(r) for r in rows))
    overrides = dict(base.similarity_overrides)
    overrides[name] = SimilarityData(data.d, data.space, tuple(blocks))
    return Catalog(dict(base.gram_overrides), overrides)


DEFAULT = Catalog()


def lattice(name: str) -> QuadSpace:
    return DEFAULT.lattice(name)


def paper_space(name: str) -> QuadSpace:
    return DEFAULT.paper_space(name)


def paper_similarity(name: str) -> Similarity:
    return DEFAULT.paper_similarity(name)


def resolve_space(spec: str, catalog: Catalog | None = None) -> QuadSpace:
    """Parse a space name: a catalog lattice or space, "e8m2"-style aliases,
    diagonal shorthand like "<-2>^8" or "<1,-1>", or orthogonal sums joined by "+"."""
    cat = catalog or DEFAULT
    spec = spec.strip()
    pieces = _split_sum(spec)
    if len(pieces) > 1:
        return orthogonal_sum(*(resolve_space(p, cat) for p in pieces), label=spec)
    alias = _ALIASES.get(spec.lower())
    if alias:
        spec = alias
    m = re.fullmatch(r"<([^<>]+)>(?:\^(\d+))?", spec)
    if m:
        entries = [rat(x.strip()) for x in m.group(1).split(",")]
        reps = int(m.group(2) or 1)
        return QuadSpace.diagonal(entries * reps, label=spec)
    m = re.fullmatch(r"(.+)\^(\d+)", spec)
    if m:
        base = resolve_space(m.group(1), cat)
        return orthogonal_sum(*([base] * int(m.group(2))), label=spec)
    try:
        return cat.lattice(spec)
    except UnknownLattice:
        pass
    try:
        return cat.paper_space(spec)
    except UnknownName:
        pass
    if spec in SIMILARITY_NAMES:
        return cat.diagonal_model(spec)
    raise UnknownName(f"cannot resolve space {spec!r}")


def _split_sum(spec: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in spec:
        if ch in "(<":
            depth += 1
        elif ch in ")>":
            depth -= 1
        if ch == "+" and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    out.append(cur)
    return [p.strip() for p in out if p.strip()]


_ALIASES: Mapping[str, str] = {
    "e8m2": "E8(-2)", "e8m1": "E8(-1)", "a2p": "A2(+)", "a2m": "A2(-)",
    "k12m2": "K12(-2)", "u": "U",
}
