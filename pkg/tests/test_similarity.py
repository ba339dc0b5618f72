from __future__ import annotations

import json
import random
from fractions import Fraction as F

import numpy as np
import pytest

from hodgesim.catalog import paper_similarity
from hodgesim.errors import (
    DimensionMismatch,
    NotASimilarity,
    NotEndomorphism,
    PreconditionFailed,
    Singular,
    SpaceMismatch,
)
from hodgesim.exact import Matrix, QuadExt
from hodgesim.quadspace import QuadSpace, orthogonal_sum, rescale, signature
from hodgesim.similarity import (
    ObstructionKind,
    Similarity,
    block_similarity_find,
    compose,
    direct_sum,
    eigenspace_decomposition,
    exists_obstruction,
    hodge_locus_dimension,
    invert,
    kummer_similarity,
    restrict,
    rosati_fixed,
    similarity_verify,
    square_check,
)

H = QuadSpace.diagonal([1, -1])
M22 = QuadSpace.diagonal([-2, -2])
A2D = QuadSpace.diagonal([-2, F(-3, 2)])
M1 = Matrix([[F(3, 2), F(-1, 2)], [F(1, 2), F(-3, 2)]])
M3 = Matrix([[1, 1], [1, -1]])
G1 = Matrix([[2, -1], [1, -2]])
G3 = Matrix([[0, F(3, 2)], [2, 0]])


def numeric_eigen_signature(psi: Similarity, root: float) -> tuple[int, int]:
    """Float oracle: signature of G restricted to ker(M - root)."""
    M = np.array([[float(x) for x in r] for r in psi.matrix.rows])
    G = np.array([[float(x) for x in r] for r in psi.source.gram.rows])
    w, V = np.linalg.eig(M)
    K = np.real(V[:, np.abs(w - root) < 1e-8])
    e = np.linalg.eigvalsh(K.T @ G @ K)
    return int((e > 1e-9).sum()), int((e < -1e-9).sum())


# -- verification -------------------------------------------------------------

@pytest.mark.parametrize("M, Q, lam", [(M1, H, 2), (G3, A2D, 3), (Matrix.identity(3), QuadSpace.diagonal([1, 2, 3]), 1)])
def test_multiplier_examples(M, Q, lam):
    assert similarity_verify(M, Q).multiplier == lam


def test_verify_errors():
    with pytest.raises(NotASimilarity, match=r"entry \(1, 1\)"):
        similarity_verify(Matrix([[1, 0], [0, 2]]), H)
    with pytest.raises(Singular):
        similarity_verify(Matrix([[1, 1], [1, 1]]), H)
    with pytest.raises(DimensionMismatch):
        similarity_verify(Matrix.identity(3), H)


def test_rosati_examples():
    assert rosati_fixed(M1, H)
    assert rosati_fixed(Matrix([[1, 2], [2, 5]]), QuadSpace.diagonal([3, 3]))
    assert not rosati_fixed(Matrix([[0, -1], [1, 0]]), QuadSpace.diagonal([1, 1]))
    with pytest.raises(DimensionMismatch):
        rosati_fixed(Matrix.identity(3), H)


def test_square_examples():
    assert square_check(similarity_verify(M3, M22), 2)
    assert square_check(similarity_verify(G1, H), 3)
    # multiplier 2 but composed with the isometry swapping the two lines
    swap = Matrix([[0, 1], [1, 0]])
    twisted = similarity_verify(M3 @ swap, M22)
    assert twisted.multiplier == 2 and not square_check(twisted, 2)
    other = Similarity(H, QuadSpace.diagonal([2, -2]), Matrix.identity(2), F(2))
    with pytest.raises(NotEndomorphism):
        square_check(other, 2)


def test_similarity_json_roundtrip():
    psi = similarity_verify(M1, H)
    data = json.loads(json.dumps(psi.to_json()))
    assert data["multiplier"] == "2"
    again = Similarity.from_json(data)
    assert again.matrix == M1 and again.multiplier == 2
    data["multiplier"] = "3"
    with pytest.raises(NotASimilarity):
        Similarity.from_json(data)


# -- obstructions -------------------------------------------------------------

def test_obstruction_examples():
    assert exists_obstruction(QuadSpace.diagonal([1, 1, 1]), 2).kind is ObstructionKind.ODD_DIM_NONSQUARE
    assert exists_obstruction(QuadSpace.diagonal([1, 1]), 4).kind is ObstructionKind.NONE
    assert similarity_verify(Matrix.identity(2).scale(2), QuadSpace.diagonal([1, 1])).multiplier == 4
    lam = paper_similarity("lambda_p2_sqrt2").source
    assert signature(lam) == (2, 10)
    assert exists_obstruction(lam, -1).kind is ObstructionKind.SIGNATURE_MISMATCH
    # odd dim with a square multiplier is not obstructed
    assert exists_obstruction(QuadSpace.diagonal([1, 2, 3]), 9).kind is ObstructionKind.NONE


# -- eigenspaces --------------------------------------------------------------

def test_eigen_signatures_of_named_similarities():
    lam = paper_similarity("lambda_p2_sqrt2")
    dec = eigenspace_decomposition(lam, 2)
    assert (dec.sig_plus, dec.sig_minus) == ((2, 4), (0, 6))
    gam = paper_similarity("gamma_p3_sqrt3")
    dec = eigenspace_decomposition(gam, 3)
    assert (dec.sig_plus, dec.sig_minus) == ((2, 2), (0, 4))


def test_eigen_single_block():
    dec = eigenspace_decomposition(similarity_verify(M1, H), 2)
    assert (dec.sig_plus, dec.sig_minus) == ((1, 0), (0, 1))
    # the -sqrt2 eigenline is spanned by (1, 3 + 2 sqrt 2)
    v = dec.basis_minus.col(0)
    w = (QuadExt(1, 0, 2), QuadExt(3, 2, 2))
    assert v[0] * w[1] - v[1] * w[0] == 0


@pytest.mark.parametrize("name, d", [("lambda_p2_sqrt2", 2), ("gamma_p3_sqrt3", 3)])
def test_eigen_invariants(name, d):
    psi = paper_similarity(name)
    dec = eigenspace_decomposition(psi, d)
    n = psi.dim
    G = psi.source.gram
    root = QuadExt.sqrt(d)
    assert dec.basis_plus.ncols == dec.basis_minus.ncols == n // 2
    for B, ev in ((dec.basis_plus, root), (dec.basis_minus, -root)):
        for v in B.columns():
            Mv = psi.matrix.apply(v)
            assert all(a - ev * b == 0 for a, b in zip(Mv, v))
    cross = dec.basis_plus.T @ G @ dec.basis_minus
    assert all(x == 0 for r in cross.rows for x in r)
    sp, sm = dec.sig_plus, dec.sig_minus
    assert (sp[0] + sm[0], sp[1] + sm[1]) == signature(psi.source)
    # Galois conjugation carries the plus eigenspace onto the minus one
    for v in dec.basis_plus.columns():
        cv = [x.conj() if isinstance(x, QuadExt) else x for x in v]
        Mv = psi.matrix.apply(cv)
        assert all(a + root * b == 0 for a, b in zip(Mv, cv))
    assert sp == numeric_eigen_signature(psi, d**0.5)
    assert sm == numeric_eigen_signature(psi, -(d**0.5))


def test_eigen_preconditions():
    twisted = similarity_verify(M3 @ Matrix([[0, 1], [1, 0]]), M22)
    with pytest.raises(PreconditionFailed, match="Rosati"):
        eigenspace_decomposition(twisted, 2)
    with pytest.raises(PreconditionFailed, match="square"):
        eigenspace_decomposition(similarity_verify(Matrix.identity(2).scale(2), H), 4)
    with pytest.raises(PreconditionFailed):
        eigenspace_decomposition(similarity_verify(M1, H), 3)


def test_eigen_json_renders_field_elements():
    data = eigenspace_decomposition(similarity_verify(M1, H), 2).to_json()
    assert data["sig_plus"] == [1, 0]
    assert set(data["basis_plus"][0][0]) == {"a", "b"}


# -- locus dimension ----------------------------------------------------------

def test_locus_dimensions_of_named_similarities():
    assert hodge_locus_dimension(paper_similarity("lambda_p2_sqrt2"), 2) == 4
    assert hodge_locus_dimension(paper_similarity("gamma_p3_sqrt3"), 3) == 2


def test_locus_empty_when_no_eigenspace_is_definite():
    psi = direct_sum(similarity_verify(M1, H), similarity_verify(-M1, H))
    dec = eigenspace_decomposition(psi, 2)
    assert dec.sig_plus == dec.sig_minus == (1, 1)
    assert hodge_locus_dimension(psi, 2) is None
    # the same holds above the dimension bound
    bigger = direct_sum(psi, similarity_verify(M3, M22))
    assert hodge_locus_dimension(bigger, 2) is None


def test_locus_formula_needs_dim_above_four():
    psi = direct_sum(similarity_verify(M1, H), similarity_verify(M3, M22))
    dec = eigenspace_decomposition(psi, 2)
    assert dec.sig_minus == (0, 2) and dec.sig_plus == (1, 1)
    assert hodge_locus_dimension(psi, 2) is None
    plus = direct_sum(similarity_verify(M1, H), similarity_verify(M1, H))
    assert eigenspace_decomposition(plus, 2).sig_plus == (2, 0)
    with pytest.raises(PreconditionFailed, match="dim > 4"):
        hodge_locus_dimension(plus, 2)


# -- block search -------------------------------------------------------------

def test_block_search_examples():
    W = block_similarity_find(H, 2)
    assert W is not None
    psi = similarity_verify(W, H)
    assert rosati_fixed(W, H) and square_check(psi, 2) and psi.multiplier == 2
    assert block_similarity_find(M22, 2) == M3
    assert block_similarity_find(A2D, 3) == G3


def test_block_search_failure_and_determinism():
    # a^2 + b^2 = 3 has no rational solution
    assert block_similarity_find(QuadSpace.diagonal([1, 1]), 3, height=16) is None
    assert block_similarity_find(H, 2) == block_similarity_find(H, 2)
    with pytest.raises(PreconditionFailed):
        block_similarity_find(QuadSpace.from_rows([[0, 1], [1, 0]]), 2)


# -- Kummer similarities ------------------------------------------------------

@pytest.mark.parametrize("n, k", [(1, 2), (2, 3), (3, 2), (4, 5)])
def test_kummer(n, k):
    psi = kummer_similarity(n, k)
    n_prime = k * (n + 1) - 1
    assert psi.multiplier == k
    assert psi.source.gram[6, 6] == -2 * (n_prime + 1)
    assert psi.target.gram[6, 6] == -2 * (n + 1)
    assert signature(psi.target) == (3, 4)


def test_kummer_examples():
    psi = kummer_similarity(1, 2)
    assert (psi.source.gram[6, 6], psi.target.gram[6, 6]) == (-8, -4)
    assert kummer_similarity(2, 3).source.gram[6, 6] == -18
    one = kummer_similarity(3, 1)
    assert one.matrix == Matrix.identity(7) and one.multiplier == 1
    # dividing by k gives an isometry onto the rescaled target
    scaled = Similarity(psi.source, rescale(psi.target, F(1, 2)), psi.matrix, F(1))
    assert scaled.multiplier == 1


# -- composition --------------------------------------------------------------

def test_compose_examples():
    psi = similarity_verify(M1, H)
    sq = compose(psi, psi)
    assert sq.matrix == Matrix.identity(2).scale(2) and sq.multiplier == 4
    ident = similarity_verify(Matrix.identity(2), H)
    assert invert(ident).matrix == Matrix.identity(2)
    g = similarity_verify(G3, A2D)
    assert invert(g).multiplier == F(1, 3)
    with pytest.raises(SpaceMismatch):
        compose(psi, g)


def test_compose_invert_laws_on_random_catalog_pairs():
    rng = random.Random(0)
    sims = [paper_similarity("lambda_p2_sqrt2"), paper_similarity("gamma_p3_sqrt3")]
    sims += [kummer_similarity(n, k) for n, k in ((1, 2), (2, 3), (3, 2))]
    endos = [s for s in sims if s.is_endomorphism()]
    for _ in range(100):
        psi = rng.choice(endos)
        phi = psi if rng.random() < 0.5 else invert(psi)
        c = compose(psi, phi)
        assert c.multiplier == psi.multiplier * phi.multiplier
        inv = invert(c)
        assert inv.multiplier == 1 / c.multiplier
        assert compose(c, inv).matrix == Matrix.identity(c.dim)
    for s in sims:
        assert invert(invert(s)).matrix == s.matrix


def test_det_identity_and_positive_multipliers():
    sims = [paper_similarity("lambda_p2_sqrt2"), paper_similarity("gamma_p3_sqrt3")]
    sims += [kummer_similarity(n, k) for n, k in ((1, 2), (2, 3), (3, 2))]
    for s in sims:
        M = s.matrix
        assert (M.T @ s.target.gram @ M).det() == s.multiplier**s.dim * s.source.det()
        assert M.det() ** 2 * s.target.det() == s.multiplier**s.dim * s.source.det()
        p, q = signature(s.source)
        if p != q and signature(s.target) == (p, q):
            assert s.multiplier > 0


def test_restrict_and_direct_sum():
    psi = paper_similarity("lambda_p2_sqrt2")
    block = restrict(psi, [0, 1])
    assert block.matrix == M1
    assert direct_sum(block, restrict(psi, [2, 3])).matrix == psi.matrix.submatrix(range(4), range(4))
    with pytest.raises(PreconditionFailed):
        restrict(psi, [0])
    with pytest.raises(NotASimilarity):
        direct_sum(block, similarity_verify(G3, A2D))


def test_orthogonal_blocks_give_block_similarity():
    psi = direct_sum(*(similarity_verify(M, Q) for M, Q in [(M1, H), (M3, M22)]))
    assert psi.source.gram == orthogonal_sum(H, M22).gram


def test_integer_fast_path_agrees_with_fraction_products():
    # similarity_verify, rosati_fixed and square_check clear denominators first;
    # compare against plain Fraction products, including non-similarities
    rng = random.Random(31)
    for _ in range(150):
        n = rng.choice((2, 3, 4))
        G = Matrix.diag([F(rng.choice((-3, -2, -1, 1, 2, 3)), rng.randint(1, 3)) for _ in range(n)])
        M = Matrix([[F(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(n)] for _ in range(n)])
        Q = QuadSpace(G)
        if M.det() == 0:
            continue
        pulled = M.T @ G @ M
        lam = pulled[0, 0] / G[0, 0]
        if pulled == G.scale(lam) and lam:
            assert similarity_verify(M, Q).multiplier == lam
        else:
            with pytest.raises(NotASimilarity):
                similarity_verify(M, Q)
        assert rosati_fixed(M, Q) == (M.T @ G == G @ M)
        psi = similarity_verify(Matrix.identity(n).scale(F(rng.randint(1, 4), rng.randint(1, 3))), Q)
        d = psi.matrix[0, 0] ** 2
        assert square_check(psi, d) and not square_check(psi, d + 1)
