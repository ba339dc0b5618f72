"""Command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 invalid input or usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import clifford as cl
from . import ksnum as ks
from .catalog import DEFAULT, LATTICE_NAMES, SIMILARITY_NAMES, SPACE_NAMES, resolve_space
from .errors import HodgeSimError, NotASimilarity, ParseError, Singular
from .exact import Matrix, matrix_from_json, rat, rat_str
from .quadspace import (
    QuadSpace,
    diagonalize,
    embedding_witness_verify,
    isometric,
    rational_invariants,
)
from .report import VerificationReport
from .similarity import (
    DEFAULT_HEIGHT,
    Similarity,
    block_similarity_find,
    eigenspace_decomposition,
    exists_obstruction,
    hodge_locus_dimension,
    kummer_similarity,
    similarity_verify,
)
from .suite import SuiteContext, run_suite


class UsageError(Exception):
    pass


class Failed(Exception):
    """A verification ran and failed; carries the payload to print."""

    def __init__(self, payload: Any) -> None:
        super().__init__("verification failed")
        self.payload = payload


# --------------------------------------------------------------------------
# input helpers
# --------------------------------------------------------------------------

def load_json_arg(text: str) -> Any:
    """Inline JSON, or a path to a JSON file."""
    p = Path(text)
    try:
        if p.is_file():
            return json.loads(p.read_text())
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"cannot parse JSON from {text!r}: {exc}") from exc


def load_space(text: str) -> QuadSpace:
    if text.endswith(".json") or text.lstrip().startswith("{"):
        return QuadSpace.from_json(load_json_arg(text))
    return resolve_space(text)


def load_matrix(text: str) -> Matrix:
    data = load_json_arg(text)
    if isinstance(data, dict):
        data = data.get("matrix", data.get("gram"))
    if not isinstance(data, list):
        raise ParseError("matrix JSON must be a list of rows or {\"matrix\": rows}")
    return matrix_from_json(data)


def load_vector(text: str) -> list:
    data = load_json_arg(text) if text.lstrip().startswith("[") else text.split(",")
    return [rat(x) for x in data]


def parse_blocks(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    return tuple(int(x) for x in text.split(","))


def load_similarity(args: argparse.Namespace) -> Similarity:
    if getattr(args, "similarity", None):
        blocks = parse_blocks(getattr(args, "blocks", None))
        if getattr(args, "coordinates", "diagonal") == "lattice":
            if blocks is not None:
                raise UsageError("--blocks applies to diagonal coordinates only")
            return DEFAULT.lattice_similarity(args.similarity)
        if blocks is None:
            return DEFAULT.paper_similarity(args.similarity)
        return DEFAULT.block_restriction(args.similarity, blocks)
    if not (args.space and args.matrix):
        raise UsageError("give --similarity NAME or both --space and --matrix")
    target = load_space(args.target) if getattr(args, "target", None) else None
    return similarity_verify(load_matrix(args.matrix), load_space(args.space), target)


def _d_for(args: argparse.Namespace, psi: Similarity) -> Any:
    if args.d is not None:
        return rat(args.d)
    if getattr(args, "similarity", None):
        return DEFAULT.similarity_data(args.similarity).d
    return psi.multiplier


# --------------------------------------------------------------------------
# command handlers (each returns a JSON-ready payload)
# --------------------------------------------------------------------------

def cmd_quad(args: argparse.Namespace) -> Any:
    if args.action == "invariants":
        Q = load_space(args.space)
        return rational_invariants(Q).to_json()
    if args.action == "diagonalize":
        dg = diagonalize(load_space(args.space))
        return {"diag": [rat_str(x) for x in dg.diag],
                "base_change": [[rat_str(x) for x in r] for r in dg.base_change.rows]}
    if args.action == "isometric":
        return {"isometric": isometric(load_space(args.a), load_space(args.b))}
    if args.action == "embed-verify":
        rep = embedding_witness_verify(load_matrix(args.witness), load_space(args.sub), load_space(args.amb))
        return _report(rep)
    raise UsageError(args.action)


def cmd_sim(args: argparse.Namespace) -> Any:
    if args.action == "verify":
        try:
            psi = load_similarity(args)
        except (NotASimilarity, Singular) as exc:
            raise Failed({"check": "similarity", "pass": False,
                          "witness": {"error": type(exc).__name__, "message": str(exc)}})
        return {"pass": True, "multiplier": rat_str(psi.multiplier), "dim": psi.dim}
    if args.action == "find":
        Q = load_space(args.space)
        obstruction = exists_obstruction(Q, rat(args.d))
        # an obstructed space has nothing to search
        M = None if obstruction.kind.value != "none" else block_similarity_find(Q, rat(args.d), args.height)
        out: dict[str, Any] = {"obstruction": obstruction.kind.value}
        out["matrix"] = None if M is None else [[rat_str(x) for x in r] for r in M.rows]
        return out
    if args.action in ("eigen", "locus"):
        psi = load_similarity(args)
        d = _d_for(args, psi)
        if args.action == "eigen":
            return eigenspace_decomposition(psi, d).to_json()
        return {"dimension": hodge_locus_dimension(psi, d)}
    if args.action == "kummer":
        sim = kummer_similarity(args.n, args.k)
        return sim.to_json()
    raise UsageError(args.action)


def _cmap(args: argparse.Namespace) -> tuple[Similarity, cl.CliffordMap]:
    psi = load_similarity(args)
    return psi, cl.induced_clifford_iso(psi)


def cmd_cl(args: argparse.Namespace) -> Any:
    if args.action == "build":
        A = cl.clifford_build(tuple(rat(x) for x in args.coeffs.split(",")))
        return {"n": A.n, "coeffs": [rat_str(a) for a in A.coeffs], "dim": A.dim,
                "even_dim": A.even_dim}
    if args.action == "iso":
        _, cmap = _cmap(args)
        images = {str(b): cmap.image(b).to_json()["terms"] for b in cmap.source.even_blades}
        return {"n": cmap.source.n, "multiplier": rat_str(cmap.multiplier), "images": images}
    if args.action == "verify":
        _, cmap = _cmap(args)
        exhaustive = True if args.exhaustive else None
        return _report(cl.verify_ring_iso(cmap, args.samples, args.seed, exhaustive))
    if args.action == "trace-form":
        Q = load_space(args.space)
        A = cl.algebra_of(Q)
        v = cl.CliffordElement.from_json(A, load_json_arg(args.v))
        w = cl.CliffordElement.from_json(A, load_json_arg(args.w))
        return {"value": rat_str(cl.trace_form(load_vector(args.f1), load_vector(args.f2), v, w, A))}
    if args.action == "phi-square":
        psi, cmap = _cmap(args)
        v0 = load_vector(args.v0) if args.v0 else None
        return _report(cl.phi_square_check(psi, v0, args.samples, args.seed, cmap))
    raise UsageError(args.action)


def _plane(args: argparse.Namespace, n: int) -> tuple[np.ndarray, np.ndarray]:
    i, j = parse_blocks(args.plane) or (0, 1)
    e = np.eye(n)
    return e[i], e[j]


def cmd_ks(args: argparse.Namespace) -> Any:
    if args.action in ("period", "jstruct"):
        psi = load_similarity(args)
        dec = eigenspace_decomposition(psi, _d_for(args, psi))
        omega = ks.period_point_from_eigenspace(dec, args.which)
        if args.action == "period":
            return {"period_point": None if omega is None else omega.to_json()}
        if omega is None:
            raise Failed({"check": "jstruct", "pass": False,
                          "witness": {"reason": f"{args.which} eigenspace has < 2 positive directions"}})
        J = ks.complex_structure(dec.space, omega, args.tol, ks.Convention.BEAUVILLE)
        out = J.to_json()
        out["pass"] = J.residual <= args.tol
        if not out["pass"]:
            raise Failed(out)
        return out
    if args.action == "linearity":
        _, cmap = _cmap(args)
        x, y = _plane(args, cmap.source.n)
        J = ks.structure_from_vectors(cmap.source, x, y, args.tol)
        Jp = ks.transported_structure(cmap, J)
        res = ks.check_complex_linearity(cmap, J, Jp)
        out = {"residual": res, "tol": args.tol, "pass": res <= args.tol, "seed": args.seed,
               "convention": ks.Convention.POLARIZED.value}
        if not out["pass"]:
            raise Failed(out)
        return out
    if args.action == "polarization":
        QB = load_space(args.space)  # period-domain (Beauville) convention
        A = cl.algebra_of(QB)
        f1, f2 = (load_vector(args.f1), load_vector(args.f2)) if args.f1 else cl.find_polarization_pair(A)
        QP = ks.convert(QB, ks.Convention.BEAUVILLE, ks.Convention.POLARIZED)
        x, y = _plane(args, A.n)
        J = ks.structure_from_vectors(cl.algebra_of(QP), x, y, args.tol)
        res = ks.check_polarization(cl.trace_form_matrix(f1, f2, A), J, args.samples, args.seed, args.tol)
        out = res.to_json()
        if not res.passed:
            raise Failed(out)
        return out
    raise UsageError(args.action)


def cmd_catalog(args: argparse.Namespace) -> Any:
    if args.action == "list":
        return DEFAULT.list()
    name = args.name
    if name in SIMILARITY_NAMES:
        if args.coordinates == "lattice":
            return DEFAULT.lattice_similarity(name).to_json()
        return DEFAULT.paper_similarity(name).to_json()
    return load_space(name).to_json()


def cmd_paper(args: argparse.Namespace) -> Any:
    ctx = SuiteContext(seed=args.seed, samples=args.samples, tol=args.tol)
    reports = run_suite(ctx, jobs=args.jobs)
    payload = {"pass": all(r.passed for r in reports),
               "reports": [r.to_json(timing=args.timing) for r in reports]}
    if not payload["pass"]:
        raise Failed(payload)
    return payload


def _report(rep: VerificationReport) -> Any:
    out = rep.to_json()
    if not rep.passed:
        raise Failed(out)
    return out


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--tol", type=float, default=ks.DEFAULT_TOL)
    p.add_argument("--height", type=int, default=DEFAULT_HEIGHT)


def _sim_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--similarity", choices=SIMILARITY_NAMES, help="catalog similarity")
    p.add_argument("--blocks", help="comma-separated 0-based block indices to restrict to")
    p.add_argument("--coordinates", choices=("diagonal", "lattice"), default="diagonal",
                   help="basis for a catalog similarity")
    p.add_argument("--space", help="source space: catalog name, <a,b,...>^k, or JSON file")
    p.add_argument("--target", help="target space (defaults to the source)")
    p.add_argument("--matrix", help="matrix JSON (file or inline)")
    p.add_argument("--d", help="square of the eigenvalue (defaults to the multiplier)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hodgesim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    quad = sub.add_parser("quad", help="rational quadratic spaces")
    qs = quad.add_subparsers(dest="action", required=True)
    for name in ("invariants", "diagonalize"):
        p = qs.add_parser(name)
        p.add_argument("--space", required=True)
        _common(p)
    p = qs.add_parser("isometric")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    _common(p)
    p = qs.add_parser("embed-verify")
    p.add_argument("--sub", required=True)
    p.add_argument("--amb", required=True)
    p.add_argument("--witness", required=True)
    _common(p)
    quad.set_defaults(func=cmd_quad)

    sim = sub.add_parser("sim", help="similarities and eigenspaces")
    ss = sim.add_subparsers(dest="action", required=True)
    for name in ("verify", "eigen", "locus"):
        p = ss.add_parser(name)
        _sim_inputs(p)
        _common(p)
    p = ss.add_parser("find")
    p.add_argument("--space", required=True)
    p.add_argument("--d", required=True)
    _common(p)
    p = ss.add_parser("kummer")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    _common(p)
    sim.set_defaults(func=cmd_sim)

    clp = sub.add_parser("cl", help="even Clifford algebras")
    cs = clp.add_subparsers(dest="action", required=True)
    p = cs.add_parser("build")
    p.add_argument("--coeffs", required=True, help="comma-separated a_1,...,a_n")
    _common(p)
    for name in ("iso", "verify", "phi-square"):
        p = cs.add_parser(name)
        _sim_inputs(p)
        if name == "verify":
            p.add_argument("--exhaustive", action="store_true", help="all basis pairs for any n")
        if name == "phi-square":
            p.add_argument("--v0", help="base point, comma-separated")
        _common(p)
    p = cs.add_parser("trace-form")
    p.add_argument("--space", required=True, help="diagonal space")
    for name in ("f1", "f2", "v", "w"):
        p.add_argument(f"--{name}", required=True)
    _common(p)
    clp.set_defaults(func=cmd_cl)

    ksp = sub.add_parser("ks", help="numeric Kuga-Satake checks")
    kss = ksp.add_subparsers(dest="action", required=True)
    for name in ("period", "jstruct", "linearity"):
        p = kss.add_parser(name)
        _sim_inputs(p)
        p.add_argument("--which", choices=("plus", "minus"), default="plus")
        p.add_argument("--plane", help="two basis indices spanning the negative plane")
        _common(p)
    p = kss.add_parser("polarization")
    p.add_argument("--space", required=True, help="diagonal space, period-domain convention")
    p.add_argument("--f1")
    p.add_argument("--f2")
    p.add_argument("--plane", help="two basis indices spanning the J plane")
    _common(p)
    ksp.set_defaults(func=cmd_ks)

    cat = sub.add_parser("catalog", help="named lattices and spaces")
    cts = cat.add_subparsers(dest="action", required=True)
    p = cts.add_parser("list")
    _common(p)
    p = cts.add_parser("show")
    p.add_argument("name", help=f"one of {', '.join(LATTICE_NAMES + SPACE_NAMES + SIMILARITY_NAMES)}")
    p.add_argument("--coordinates", choices=("diagonal", "lattice"), default="diagonal")
    _common(p)
    cat.set_defaults(func=cmd_catalog)

    paper = sub.add_parser("paper", help="reproduction suite")
    ps = paper.add_subparsers(dest="action", required=True)
    p = ps.add_parser("verify-all")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="include wall-clock seconds (not reproducible)")
    _common(p)
    paper.set_defaults(func=cmd_paper)
    return parser


def _emit(payload: Any, as_json: bool) -> None:
    if as_json:
        print(json.dumps(payload, sort_keys=True, indent=2))
        return
    if isinstance(payload, dict) and "reports" in payload:
        for r in payload["reports"]:
            status = "PASS" if r["pass"] else "FAIL"
            print(f"{status}  {r['check']}")
        print("all checks passed" if payload["pass"] else "some checks failed")
        return
    print(json.dumps(payload, sort_keys=True, indent=2))


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    as_json = getattr(args, "json", False)
    try:
        payload = args.func(args)
    except Failed as f:
        _emit(f.payload, as_json)
        return 1
    except (HodgeSimError, UsageError, KeyError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    _emit(payload, as_json)
    return 0


if __name__ == "__main__":
    sys.exit(main())
