"""The reproduction battery: twelve named checks over the catalog data.

Each check declares which catalog entries it reads, so corrupting one entry
must fail exactly the checks that list it.
"""

from __future__ import annotations

import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from . import clifford as cl
from . import ksnum as ks
from .catalog import Catalog
from .errors import HodgeSimError
from .exact import Matrix, factorize, rat_str
from .quadspace import (
    INF,
    QuadSpace,
    diagonalize,
    hasse_invariant,
    hilbert_symbol,
    isometric,
    relevant_primes,
    rescale,
    signature_of,
)
from .report import VerificationReport, digest
from .similarity import (
    ObstructionKind,
    Similarity,
    compose,
    eigenspace_decomposition,
    exists_obstruction,
    hodge_locus_dimension,
    kummer_similarity,
    rosati_fixed,
    similarity_verify,
    square_check,
)

LAMBDA = "lambda_p2_sqrt2"
GAMMA = "gamma_p3_sqrt3"

# catalog keys a similarity entry reads (the diagonal model is checked
# against the lattice-built space on load)
_SIM_KEYS = {LAMBDA: {LAMBDA, "U", "E8"}, GAMMA: {GAMMA, "U", "A2"}}

SUB_BLOCKS = {2: (0,), 4: (0, 2), 6: (0, 1, 2)}
# the trace form needs two positive directions, so it uses the indefinite blocks
FORM_BLOCKS = {4: (0, 1), 6: (0, 1, 2)}


@dataclass
class SuiteContext:
    catalog: Catalog = field(default_factory=Catalog)
    seed: int = 0
    samples: int = 200
    tol: float = ks.DEFAULT_TOL


@dataclass(frozen=True)
class Check:
    name: str
    depends: frozenset[str]
    run: Callable[[SuiteContext], VerificationReport]


_REGISTRY: dict[str, Check] = {}


def _check(name: str, depends: Iterable[str] = ()) -> Callable:
    def wrap(fn: Callable[[SuiteContext], VerificationReport]) -> Callable:
        _REGISTRY[name] = Check(name, frozenset(depends), fn)
        return fn
    return wrap


def _fail(name: str, **witness: object) -> VerificationReport:
    return VerificationReport.failed(name, witness)


def _block_claims(name: str, ctx: SuiteContext, sim_name: str, d: int) -> VerificationReport:
    cat = ctx.catalog
    cat.paper_similarity(sim_name)
    data = cat.similarity_data(sim_name)
    for i, b in enumerate(data.blocks):
        Q = QuadSpace.diagonal(b.diag)
        M = Matrix(b.matrix)
        psi = similarity_verify(M, Q)
        if not rosati_fixed(M, Q):
            return _fail(name, block=i + 1, failed="rosati")
        if not square_check(psi, d):
            return _fail(name, block=i + 1, failed="square")
        if psi.multiplier != d:
            return _fail(name, block=i + 1, multiplier=rat_str(psi.multiplier))
    return VerificationReport.ok(name, details={"blocks": len(data.blocks), "multiplier": d})


@_check("p2_block_matrices", _SIM_KEYS[LAMBDA])
def check_p2_blocks(ctx: SuiteContext) -> VerificationReport:
    return _block_claims("p2_block_matrices", ctx, LAMBDA, 2)


@_check("p3_block_matrices", _SIM_KEYS[GAMMA])
def check_p3_blocks(ctx: SuiteContext) -> VerificationReport:
    return _block_claims("p3_block_matrices", ctx, GAMMA, 3)


EXPECTED_SIGNATURES = {LAMBDA: (2, (2, 4), (0, 6)), GAMMA: (3, (2, 2), (0, 4))}
EXPECTED_LOCUS = {LAMBDA: 4, GAMMA: 2}


@_check("eigenspace_signatures", _SIM_KEYS[LAMBDA] | _SIM_KEYS[GAMMA])
def check_eigen_signatures(ctx: SuiteContext) -> VerificationReport:
    name = "eigenspace_signatures"
    found = {}
    for sim, (d, plus, minus) in EXPECTED_SIGNATURES.items():
        dec = eigenspace_decomposition(ctx.catalog.paper_similarity(sim), d)
        found[sim] = {"plus": list(dec.sig_plus), "minus": list(dec.sig_minus)}
        if (dec.sig_plus, dec.sig_minus) != (plus, minus):
            return _fail(name, similarity=sim, **found[sim])
    return VerificationReport.ok(name, details=found)


@_check("locus_dimensions", _SIM_KEYS[LAMBDA] | _SIM_KEYS[GAMMA])
def check_locus(ctx: SuiteContext) -> VerificationReport:
    name = "locus_dimensions"
    found = {}
    for sim, expected in EXPECTED_LOCUS.items():
        d = EXPECTED_SIGNATURES[sim][0]
        got = hodge_locus_dimension(ctx.catalog.paper_similarity(sim), d)
        found[sim] = got
        if got != expected:
            return _fail(name, similarity=sim, dimension=got, expected=expected)
    return VerificationReport.ok(name, details=found)


@_check("isometry_claims", {"E8", "U"})
def check_isometries(ctx: SuiteContext) -> VerificationReport:
    name = "isometry_claims"
    cat = ctx.catalog
    if not isometric(cat.lattice("E8(-2)"), QuadSpace.diagonal([-2] * 8)):
        return _fail(name, pair=["E8(-2)", "<-2>^8"])
    U = cat.lattice("U")
    for k in (2, 3, 5):
        if not isometric(U, rescale(U, k)):
            return _fail(name, pair=["U", f"U({k})"])
    return VerificationReport.ok(name, details={"pairs": 4})


KUMMER_CASES = ((1, 2), (2, 3), (3, 2))


@_check("kummer_similarities", {"U"})
def check_kummer(ctx: SuiteContext) -> VerificationReport:
    name = "kummer_similarities"
    out = []
    for n, k in KUMMER_CASES:
        sim = kummer_similarity(n, k)
        n_prime = k * (n + 1) - 1
        target = ctx.catalog.paper_space(f"kummer_h2({n})")
        source = ctx.catalog.paper_space(f"kummer_h2({n_prime})")
        if sim.multiplier != k or sim.target.gram != target.gram or sim.source.gram != source.gram:
            return _fail(name, n=n, k=k)
        out.append({"n": n, "k": k, "n_prime": n_prime})
    return VerificationReport.ok(name, details={"cases": out})


def _negation(Q: QuadSpace) -> Similarity:
    return Similarity(Q, Q, Matrix.identity(Q.dim).scale(-1), Fraction(1))


@_check("clifford_functoriality", _SIM_KEYS[LAMBDA] | _SIM_KEYS[GAMMA])
def check_functoriality(ctx: SuiteContext) -> VerificationReport:
    name = "clifford_functoriality"
    cat = ctx.catalog
    checked = []
    for sim in (LAMBDA, GAMMA):
        cat.paper_similarity(sim)
        for n, blocks in SUB_BLOCKS.items():
            psi = cat.block_restriction(sim, blocks)
            cmap = cl.induced_clifford_iso(psi)
            rep = cl.verify_ring_iso(cmap, ctx.samples, ctx.seed, exhaustive=True)
            if not rep.passed:
                return _fail(name, similarity=sim, n=n, ring_iso=rep.witness)
            for label, phi in (("square", psi), ("negation", _negation(psi.source))):
                rep = cl.verify_functoriality(psi, phi)
                if not rep.passed:
                    return _fail(name, similarity=sim, n=n, composed_with=label, blade=rep.witness)
            checked.append(f"{sim}:{n}")
    # two different roots on the same plane diag(1,-1)
    a = cat.block_restriction(LAMBDA, (0,))
    b = cat.block_restriction(GAMMA, (0,))
    rep = cl.verify_functoriality(a, b)
    if not rep.passed:
        return _fail(name, mixed=True, blade=rep.witness)
    return VerificationReport.ok(name, seed=ctx.seed, details={"restrictions": checked})


@_check("trace_compatibility", _SIM_KEYS[LAMBDA] | _SIM_KEYS[GAMMA])
def check_trace(ctx: SuiteContext) -> VerificationReport:
    name = "trace_compatibility"
    cat = ctx.catalog
    checked = []
    for sim in (LAMBDA, GAMMA):
        cat.paper_similarity(sim)
        for n, blocks in SUB_BLOCKS.items():
            cmap = cl.induced_clifford_iso(cat.block_restriction(sim, blocks))
            rep = cl.trace_invariance_check(cmap, ctx.samples, ctx.seed)
            if not rep.passed:
                return _fail(name, similarity=sim, n=n, trace=rep.witness)
            checked.append(f"{sim}:{n}:trace")
        for n, blocks in FORM_BLOCKS.items():
            cmap = cl.induced_clifford_iso(cat.block_restriction(sim, blocks))
            rep = cl.trace_form_compatibility(cmap, samples=min(ctx.samples, 10), seed=ctx.seed)
            if not rep.passed:
                return _fail(name, similarity=sim, n=n, trace_form=rep.witness)
            checked.append(f"{sim}:{n}:form")
    return VerificationReport.ok(name, seed=ctx.seed, details={"checked": checked})


@_check("phi_square", _SIM_KEYS[LAMBDA] | _SIM_KEYS[GAMMA])
def check_phi(ctx: SuiteContext) -> VerificationReport:
    name = "phi_square"
    cat = ctx.catalog
    for sim in (LAMBDA, GAMMA):
        cat.paper_similarity(sim)
        for n, blocks in SUB_BLOCKS.items():
            rep = cl.phi_square_check(cat.block_restriction(sim, blocks),
                                      samples=min(ctx.samples, 5), seed=ctx.seed)
            if not rep.passed:
                return _fail(name, similarity=sim, n=n, v=rep.witness)
    return VerificationReport.ok(name, seed=ctx.seed)


NEGATIVE_CONTROL = 1e-3


def numeric_ks_measurements(ctx: SuiteContext) -> dict[str, float | int | bool]:
    """Residuals of the float layer on the p=2 data."""
    cat = ctx.catalog
    psi = cat.paper_similarity(LAMBDA)
    dec = eigenspace_decomposition(psi, 2)
    omega = ks.period_point_from_eigenspace(dec, "plus")
    none_minus = ks.period_point_from_eigenspace(dec, "minus") is None
    assert omega is not None
    J_big = ks.complex_structure(dec.space, omega, convention=ks.Convention.BEAUVILLE)

    # n = 4 block diag(1,-1) + diag(-2,-2), plane spanned by the last two vectors
    sub = cat.block_restriction(LAMBDA, SUB_BLOCKS[4])
    cmap = cl.induced_clifford_iso(sub)
    A = cmap.source
    e = np.eye(A.n)
    J = ks.structure_from_vectors(A, e[2], e[3])
    Jp = ks.transported_structure(cmap, J)
    linear = ks.check_complex_linearity(cmap, J, Jp)
    wrong = ks.structure_from_vectors(A, e[1], e[3])
    control = ks.check_complex_linearity(cmap, J, wrong)

    # polarization sign on the K3-type n = 6 restriction, before and after transport
    sub6 = cat.block_restriction(LAMBDA, SUB_BLOCKS[6])
    cm6 = cl.induced_clifford_iso(sub6)
    polar = ks.convert(sub6.source, ks.Convention.BEAUVILLE, ks.Convention.POLARIZED)
    cmP = cl.induced_clifford_iso(similarity_verify(sub6.matrix, polar))
    pos = [i for i, a in enumerate(cm6.source.coeffs) if a > 0][:2]
    f1 = tuple(int(k == pos[0]) for k in range(6))
    f2 = tuple(int(k == pos[1]) for k in range(6))
    e6 = np.eye(6)
    J6 = ks.structure_from_vectors(cmP.source, e6[pos[0]], e6[pos[1]])
    J6p = ks.transported_structure(cmP, J6)
    g1, g2 = cl.transported_pair(cm6, f1, f2)
    pol = ks.check_polarization(cl.trace_form_matrix(f1, f2, cm6.source), J6, ctx.samples, ctx.seed, ctx.tol)
    polp = ks.check_polarization(cl.trace_form_matrix(g1, g2, cm6.target), J6p, ctx.samples, ctx.seed, ctx.tol)
    return {
        "j_squared_residual_lambda": J_big.residual,
        "j_squared_residual_block": J.residual,
        "linearity_residual": linear,
        "negative_control_residual": control,
        "minus_side_empty": none_minus,
        "polarization_sign": pol.sign,
        "transported_sign": polp.sign,
        "polarization_pass": pol.passed and polp.passed,
    }


@_check("numeric_kuga_satake", _SIM_KEYS[LAMBDA])
def check_numeric(ctx: SuiteContext) -> VerificationReport:
    name = "numeric_kuga_satake"
    m = numeric_ks_measurements(ctx)
    details = {k: (round(v, 18) if isinstance(v, float) else v) for k, v in m.items()}
    details.update(tol=ctx.tol, convention=ks.Convention.POLARIZED.value)
    ok = (m["j_squared_residual_lambda"] <= ctx.tol and m["j_squared_residual_block"] <= ctx.tol
          and m["linearity_residual"] <= ctx.tol and m["negative_control_residual"] > NEGATIVE_CONTROL
          and m["minus_side_empty"] and m["polarization_pass"]
          and m["polarization_sign"] == m["transported_sign"] != 0)
    if not ok:
        return VerificationReport.failed(name, details, seed=ctx.seed)
    return VerificationReport.ok(name, seed=ctx.seed, details=details)


@_check("odd_dim_obstruction")
def check_obstruction(ctx: SuiteContext) -> VerificationReport:
    name = "odd_dim_obstruction"
    cert = exists_obstruction(QuadSpace.diagonal([1, -1, -2]), 2)
    if cert.kind != ObstructionKind.ODD_DIM_NONSQUARE:
        return _fail(name, kind=cert.kind.value)
    return VerificationReport.ok(name, details={"kind": cert.kind.value})


def _random_form(rng: random.Random) -> QuadSpace:
    n = rng.randint(1, 5)
    while True:
        rows = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                x = Fraction(rng.randint(-6, 6), rng.choice((1, 1, 2, 3)))
                rows[i][j] = rows[j][i] = x
        G = Matrix(rows)
        if G.det() != 0:
            return QuadSpace(G)


def _random_invertible(rng: random.Random, n: int) -> Matrix:
    while True:
        P = Matrix([[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)])
        if P.det() != 0:
            return P


def _nonzero_rational(rng: random.Random) -> Fraction:
    while True:
        x = Fraction(rng.randint(-60, 60), rng.randint(1, 30))
        if x:
            return x


@_check("oracle_suites")
def check_oracles(ctx: SuiteContext) -> VerificationReport:
    name = "oracle_suites"
    rng = random.Random(ctx.seed)
    for t in range(ctx.samples):
        Q = _random_form(rng)
        P = _random_invertible(rng, Q.dim)
        Q2 = QuadSpace(P.T @ Q.gram @ P)
        d1, d2 = diagonalize(Q).diag, diagonalize(Q2).diag
        if signature_of(d1) != signature_of(d2):
            return _fail(name, trial=t, failed="signature", gram=Q.to_json()["gram"])
        for p in sorted(relevant_primes(d1) | relevant_primes(d2)) + [INF]:
            if hasse_invariant(Q, p, d1) != hasse_invariant(Q2, p, d2):
                return _fail(name, trial=t, failed="hasse", place=str(p), gram=Q.to_json()["gram"])
    for t in range(ctx.samples):
        a, b = _nonzero_rational(rng), _nonzero_rational(rng)
        primes = {2}
        for x in (a, b):
            for m in (x.numerator, x.denominator):
                if abs(m) > 1:
                    primes.update(factorize(m))
        prod = hilbert_symbol(a, b, INF)
        for p in primes:
            prod *= hilbert_symbol(a, b, p)
        if prod != 1:
            return _fail(name, trial=t, failed="product_formula", a=rat_str(a), b=rat_str(b))
    return VerificationReport.ok(name, seed=ctx.seed, details={"trials": ctx.samples})


def check_names() -> list[str]:
    return sorted(_REGISTRY)


def dependencies() -> dict[str, frozenset[str]]:
    return {n: c.depends for n, c in _REGISTRY.items()}


def run_check(name: str, ctx: SuiteContext) -> VerificationReport:
    check = _REGISTRY[name]
    t0 = time.perf_counter()
    try:
        rep = check.run(ctx)
    except HodgeSimError as exc:
        rep = VerificationReport.failed(name, {"error": type(exc).__name__, "message": str(exc)})
    elapsed = time.perf_counter() - t0
    return rep.with_(seconds=elapsed, inputs_digest=digest([name, ctx.seed, ctx.samples, ctx.tol]),
                     seed=ctx.seed)


def run_suite(ctx: SuiteContext | None = None, only: Iterable[str] | None = None,
              jobs: int = 1) -> list[VerificationReport]:
    """Run the battery; reports come back ordered by check name."""
    ctx = ctx or SuiteContext()
    names = sorted(only) if only is not None else check_names()
    unknown = [n for n in names if n not in _REGISTRY]
    if unknown:
        raise KeyError(f"unknown checks: {', '.join(unknown)}")
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            reports = list(pool.map(lambda n: run_check(n, ctx), names))
    else:
        reports = [run_check(n, ctx) for n in names]
    return sorted(reports, key=lambda r: r.check)
