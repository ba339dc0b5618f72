from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction as F

import pytest

from hodgesim.catalog import DEFAULT as CATALOG
from hodgesim.clifford import (
    CliffordAlgebra,
    CliffordElement,
    CliffordMap,
    clifford_build,
    cl_mul,
    find_polarization_pair,
    induced_clifford_iso,
    left_mult_matrix,
    left_mult_trace,
    phi_embedding,
    phi_square_check,
    reversal,
    trace_form,
    trace_form_compatibility,
    trace_form_matrix,
    trace_invariance_check,
    verify_functoriality,
    verify_ring_iso,
)
from hodgesim.errors import (
    AlgebraMismatch,
    BadPolarizationPair,
    NotEven,
    TooLarge,
    ZeroCoefficient,
    ZeroNormBasePoint,
)
from hodgesim.exact import Matrix
from hodgesim.quadspace import QuadSpace
from hodgesim.similarity import compose, invert, similarity_verify

H = QuadSpace.diagonal([1, -1])
M1 = Matrix([[F(3, 2), F(-1, 2)], [F(1, 2), F(-3, 2)]])


def word_product(coeffs, s: int, t: int) -> tuple[F, int]:
    """Independent oracle: concatenate index words, bubble sort, contract."""
    word = [i for i in range(len(coeffs)) if s >> i & 1] + [i for i in range(len(coeffs)) if t >> i & 1]
    sign = F(1)
    changed = True
    while changed:
        changed = False
        k = 0
        while k < len(word) - 1:
            if word[k] > word[k + 1]:
                word[k], word[k + 1] = word[k + 1], word[k]
                sign = -sign
                changed = True
            elif word[k] == word[k + 1]:
                sign *= coeffs[word[k]]
                del word[k:k + 2]
                changed = True
                continue
            k += 1
    return sign, sum(1 << i for i in word)


def oracle_mul(x: CliffordElement, y: CliffordElement) -> dict[int, F]:
    out: dict[int, F] = {}
    for s, a in x.terms.items():
        for t, b in y.terms.items():
            c, m = word_product(x.algebra.coeffs, s, t)
            out[m] = out.get(m, 0) + a * b * c
    return {m: c for m, c in out.items() if c}


def block_similarity(name: str, blocks):
    return CATALOG.block_restriction(name, blocks)


ALGEBRAS = [(F(5),), (F(1), F(-1)), (F(2), F(-3), F(1, 2)), (F(1), F(-1), F(-2), F(-2), F(3))]


# -- construction -------------------------------------------------------------

def test_build_examples():
    A = clifford_build((F(5),))
    assert cl_mul(A.gen(0), A.gen(0)) == A.scalar(5)
    B = clifford_build((F(1), F(-1)))
    e12 = B.blade(0b11)
    assert cl_mul(e12, e12) == B.one()
    assert clifford_build((F(1), F(2), F(3))).even_dim == 4


def test_build_errors():
    with pytest.raises(TooLarge):
        CliffordAlgebra([1] * 13)
    with pytest.raises(ZeroCoefficient):
        CliffordAlgebra([1, 0])
    A, B = clifford_build((F(1),)), clifford_build((F(2),))
    with pytest.raises(AlgebraMismatch):
        cl_mul(A.one(), B.one())


@pytest.mark.parametrize("coeffs", ALGEBRAS)
def test_blade_products_match_word_oracle(coeffs):
    A = clifford_build(coeffs)
    for s in range(A.dim):
        for t in range(A.dim):
            assert A.blade_product(s, t) == word_product(coeffs, s, t)


@pytest.mark.parametrize("coeffs", ALGEBRAS)
def test_generator_relations(coeffs):
    A = clifford_build(coeffs)
    for i in range(A.n):
        assert cl_mul(A.gen(i), A.gen(i)) == A.scalar(coeffs[i])
        for j in range(A.n):
            if i != j:
                assert cl_mul(A.gen(i), A.gen(j)) + cl_mul(A.gen(j), A.gen(i)) == A.scalar(0)
    if A.n >= 2:
        e12 = cl_mul(A.gen(0), A.gen(1))
        assert cl_mul(e12, e12) == A.scalar(-coeffs[0] * coeffs[1])
        v = A.vector([1, 1] + [0] * (A.n - 2))
        assert cl_mul(v, v) == A.scalar(coeffs[0] + coeffs[1])


@pytest.mark.parametrize("coeffs", ALGEBRAS)
def test_associativity_and_oracle_on_random_triples(coeffs):
    A = clifford_build(coeffs)
    rng = random.Random(len(coeffs))
    for _ in range(200):
        x, y, z = (A.random_element(rng) for _ in range(3))
        assert cl_mul(cl_mul(x, y), z) == cl_mul(x, cl_mul(y, z))
    for _ in range(30):
        x, y = A.random_element(rng), A.random_element(rng)
        assert cl_mul(x, y).terms == oracle_mul(x, y)


# -- reversal -----------------------------------------------------------------

def test_reversal_examples():
    A = clifford_build((F(1), F(-1), F(2), F(3)))
    assert reversal(A.blade(0b11)) == -A.blade(0b11)
    assert reversal(A.one()) == A.one()
    assert reversal(A.blade(0b1111)) == A.blade(0b1111)


@pytest.mark.parametrize("coeffs", ALGEBRAS)
def test_reversal_is_an_anti_involution(coeffs):
    A = clifford_build(coeffs)
    rng = random.Random(7)
    for _ in range(60):
        x, y = A.random_element(rng), A.random_element(rng)
        assert reversal(cl_mul(x, y)) == cl_mul(reversal(y), reversal(x))
        assert reversal(reversal(x)) == x


# -- traces -------------------------------------------------------------------

def test_trace_examples():
    A = clifford_build((F(1), F(-1), F(-2), F(-2)))
    assert left_mult_trace(A.one()) == 8
    assert left_mult_trace(A.blade(0b11)) == 0
    assert left_mult_matrix(A.blade(0b11)).trace() == 0
    with pytest.raises(NotEven):
        left_mult_trace(A.gen(0))


@pytest.mark.parametrize("coeffs", ALGEBRAS[1:])
def test_trace_matches_matrix_oracle_and_is_cyclic(coeffs):
    A = clifford_build(coeffs)
    rng = random.Random(3)
    for _ in range(40):
        x, y = A.random_even(rng), A.random_even(rng)
        assert left_mult_trace(x) == left_mult_matrix(x).trace()
        assert left_mult_trace(cl_mul(x, y)) == left_mult_trace(cl_mul(y, x))


# -- induced isomorphisms -----------------------------------------------------

def test_induced_identity_is_identity():
    cmap = induced_clifford_iso(similarity_verify(Matrix.identity(3), QuadSpace.diagonal([1, -2, 3])))
    assert cmap.matrix() == Matrix.identity(4)
    assert verify_ring_iso(cmap).passed


def test_induced_p2_block_example():
    cmap = induced_clifford_iso(similarity_verify(M1, H))
    e12 = cmap.source.blade(0b11)
    assert cmap(e12) == -cmap.target.blade(0b11)
    assert cmap(cl_mul(e12, e12)) == cl_mul(cmap(e12), cmap(e12)) == cmap.target.one()


def test_ring_iso_negative_control():
    A = clifford_build((F(1), F(-1)))
    bad = CliffordMap(A, A, matrix=Matrix.diag([1, 2]))
    rep = verify_ring_iso(bad)
    assert not rep.passed and "multiplicative" in rep.witness
    assert verify_ring_iso(CliffordMap(A, A, matrix=Matrix.identity(2))).passed


@pytest.mark.parametrize("name, blocks", [
    ("lambda_p2_sqrt2", (0,)), ("lambda_p2_sqrt2", (0, 2)), ("lambda_p2_sqrt2", (0, 1, 2)),
    ("gamma_p3_sqrt3", (0,)), ("gamma_p3_sqrt3", (0, 2)), ("gamma_p3_sqrt3", (1, 2, 3)),
])
def test_catalog_blocks_give_ring_isomorphisms(name, blocks):
    psi = block_similarity(name, blocks)
    cmap = induced_clifford_iso(psi)
    rep = verify_ring_iso(cmap, samples=20)
    assert rep.passed and rep.details["exhaustive"]
    assert trace_invariance_check(cmap, samples=20).passed


def test_ring_iso_on_a_non_diagonal_space():
    # U rescaled by diag(1, 3) has multiplier 3; U is diagonalized internally
    U = QuadSpace.from_rows([[0, 1], [1, 0]])
    psi = similarity_verify(Matrix([[1, 0], [0, 3]]), U)
    cmap = induced_clifford_iso(psi)
    assert verify_ring_iso(cmap).passed
    assert trace_invariance_check(cmap).passed


def test_functoriality():
    psi = block_similarity("lambda_p2_sqrt2", (0, 1))
    assert verify_functoriality(psi, psi).passed
    assert verify_functoriality(psi, invert(psi)).passed
    sq = induced_clifford_iso(compose(psi, psi))
    # psi o psi = 2 Id with multiplier 4 induces the identity
    assert sq.matrix() == Matrix.identity(8)


@pytest.mark.parametrize("name, blocks", [("lambda_p2_sqrt2", (0,)), ("gamma_p3_sqrt3", (0, 3))])
def test_induced_matrix_invertible(name, blocks):
    cmap = induced_clifford_iso(block_similarity(name, blocks))
    P = cmap.matrix()
    assert P.det() != 0
    assert P @ cmap.inverse_matrix() == Matrix.identity(P.nrows)


def test_induced_matrix_invertible_odd_dimension():
    Q = QuadSpace.diagonal([1, 2, -3, 5, 7])
    perm = Matrix.diag([2, -2, 2, 2, -2])
    cmap = induced_clifford_iso(similarity_verify(perm, Q))
    assert cmap.matrix().det() != 0
    assert verify_ring_iso(cmap, samples=10).passed


# -- trace form ---------------------------------------------------------------

def test_trace_form_examples():
    A = clifford_build((F(1), F(1), F(-1), F(-1)))
    f1, f2 = (1, 0, 0, 0), (0, 1, 0, 0)
    assert trace_form(f1, f2, A.one(), A.one(), A) == 0
    f12 = cl_mul(A.vector(f1), A.vector(f2))
    assert left_mult_matrix(f12).trace() == 0
    rng = random.Random(0)
    for _ in range(20):
        v, v2, w = (A.random_even(rng) for _ in range(3))
        c = F(rng.randint(-5, 5), rng.randint(1, 3))
        lhs = trace_form(f1, f2, v + v2.scale(c), w, A)
        assert lhs == trace_form(f1, f2, v, w, A) + c * trace_form(f1, f2, v2, w, A)
        rhs = trace_form(f1, f2, w, v + v2.scale(c), A)
        assert rhs == trace_form(f1, f2, w, v, A) + c * trace_form(f1, f2, w, v2, A)


def test_trace_form_matrix_matches_pointwise():
    A = clifford_build((F(1), F(1), F(-2), F(-3)))
    f1, f2 = find_polarization_pair(A)
    Qm = trace_form_matrix(f1, f2, A)
    for i, bi in enumerate(A.even_blades):
        for j, bj in enumerate(A.even_blades):
            assert Qm[i, j] == trace_form(f1, f2, A.blade(bi), A.blade(bj), A)


def test_bad_polarization_pairs():
    A = clifford_build((F(1), F(1), F(-1)))
    with pytest.raises(BadPolarizationPair):
        trace_form((1, 0, 0), (0, 0, 1), A.one(), A.one(), A)
    with pytest.raises(BadPolarizationPair):
        trace_form((1, 0, 0), (1, 1, 0), A.one(), A.one(), A)
    with pytest.raises(BadPolarizationPair):
        find_polarization_pair(QuadSpace.diagonal([1, -1, -1]))
    with pytest.raises(NotEven):
        trace_form((1, 0, 0), (0, 1, 0), A.gen(0), A.one(), A)


@pytest.mark.parametrize("name, blocks", [
    ("lambda_p2_sqrt2", (0, 1)), ("lambda_p2_sqrt2", (0, 1, 2)), ("gamma_p3_sqrt3", (0, 1, 2)),
])
def test_trace_form_compatibility(name, blocks):
    cmap = induced_clifford_iso(block_similarity(name, blocks))
    assert trace_form_compatibility(cmap, samples=5).passed


def test_trace_form_compatibility_catches_wrong_pair():
    psi = block_similarity("lambda_p2_sqrt2", (0, 1))
    cmap = induced_clifford_iso(psi)
    A = cmap.source
    f1, f2 = find_polarization_pair(A)
    Qs = trace_form_matrix(f1, f2, A)
    # forgetting the 1/lambda on the first vector scales the form by lambda
    g1, g2 = psi.matrix.apply(f1), psi.matrix.apply(f2)
    P = cmap.matrix()
    assert P.T @ trace_form_matrix(g1, g2, cmap.target) @ P == Qs.scale(psi.multiplier)


# -- phi embedding ------------------------------------------------------------

def test_phi_embedding_examples():
    A = clifford_build((F(2), F(-1), F(3)))
    v0 = (1, 0, 0)
    f = phi_embedding(v0, v0, A)
    assert A.from_even_coords(f.col(0)) == A.scalar(2)
    u, w = (1, 2, 0), (0, -1, 3)
    both = tuple(a + b for a, b in zip(u, w))
    assert phi_embedding(both, v0, A) == phi_embedding(u, v0, A) + phi_embedding(w, v0, A)
    flat = [sum((list(r) for r in phi_embedding(e, v0, A).rows), []) for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    assert Matrix(flat).rank() == 3
    with pytest.raises(ZeroNormBasePoint):
        phi_embedding(u, (0, 0, 0), A)


def test_phi_square_examples():
    ident = similarity_verify(Matrix.identity(2), H)
    assert phi_square_check(ident).passed
    assert phi_square_check(similarity_verify(M1, H), v0=(1, 0)).passed
    psi = block_similarity("gamma_p3_sqrt3", (0, 2))
    rep = phi_square_check(psi, v0=(1, 0, 0, 0))
    assert rep.passed
    assert induced_clifford_iso(psi).source.even_dim == 8


def test_phi_square_on_six_generators():
    assert phi_square_check(block_similarity("lambda_p2_sqrt2", (0, 1, 2)), samples=3).passed


# -- serialisation and concurrency --------------------------------------------

def test_element_json_roundtrip():
    A = clifford_build((F(1), F(-1), F(2)))
    x = A.element({0: F(1, 2), 0b11: -3, 0b101: F(7, 5)})
    data = x.to_json()
    assert data["n"] == 3 and data["terms"]["3"] == "-3"
    assert CliffordElement.from_json(A, data) == x


def test_concurrent_products_agree():
    coeffs = (F(1), F(-1), F(-2), F(3), F(5), F(-7))
    reference = {(s, t): word_product(coeffs, s, t) for s in range(64) for t in range(64)}
    A = CliffordAlgebra(coeffs)

    def work(offset: int) -> bool:
        for s in range(64):
            for t in range(64):
                if A.blade_product((s + offset) % 64, t) != reference[(s + offset) % 64, t]:
                    return False
        return True

    with ThreadPoolExecutor(max_workers=8) as pool:
        assert all(pool.map(work, range(16)))
