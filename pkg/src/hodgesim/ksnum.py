"""Float64 layer for period points, the complex structure J = e1 e2 and the
trace-form polarization.

Two sign conventions meet here.  Period points live in the convention where
the space has signature (2, n-2) and the real plane of omega is positive
(``BEAUVILLE``).  The complex structure and the polarization use the opposite
sign, where that plane is negative definite (``POLARIZED``).  The two differ
by rescaling the form by -1, and every object records which one it uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

import numpy as np

from .clifford import CliffordAlgebra, CliffordMap, clifford_build
from .errors import ConventionError, DimensionMismatch
from .exact import Matrix, sign
from .quadspace import QuadSpace, diagonalize, rescale
from .similarity import EigenDecomp

DEFAULT_TOL = 1e-9
DENSE_LIMIT = 256  # even dimension up to which operators are built densely


class Convention(str, Enum):
    BEAUVILLE = "beauville"
    POLARIZED = "polarized"

    def flipped(self) -> "Convention":
        return Convention.POLARIZED if self is Convention.BEAUVILLE else Convention.BEAUVILLE


def convert(Q: QuadSpace, source: Convention, target: Convention) -> QuadSpace:
    """Move a form between conventions (polarized = -beauville)."""
    return Q if source == target else rescale(Q, -1)


def float_matrix(M: Matrix) -> np.ndarray:
    return np.array([[float(x) for x in r] for r in M.rows], dtype=float).reshape(M.nrows, M.ncols)


# --------------------------------------------------------------------------
# period points
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodPoint:
    """omega = x + i y with q(omega) = 0 and q(omega, conj omega) > 0."""

    space: QuadSpace
    omega_re: np.ndarray
    omega_im: np.ndarray
    convention: Convention = Convention.BEAUVILLE
    gram: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        G = float_matrix(self.space.gram)
        if self.omega_re.shape != (G.shape[0],) or self.omega_im.shape != (G.shape[0],):
            raise DimensionMismatch("period vector does not match the space")
        object.__setattr__(self, "gram", G)
        norm2 = float(self.omega_re @ self.omega_re + self.omega_im @ self.omega_im)
        if abs(self.q_omega) > 1e-10 * norm2 or self.hermitian < 1e-6 * norm2:
            raise ValueError("not a period point: need q(w) = 0 and q(w, conj w) > 0")

    @property
    def omega(self) -> np.ndarray:
        return self.omega_re + 1j * self.omega_im

    @property
    def q_omega(self) -> complex:
        w = self.omega
        return complex(w @ self.gram @ w)

    @property
    def hermitian(self) -> float:
        """q(omega, conj omega) = q(x) + q(y)."""
        x, y = self.omega_re, self.omega_im
        return float(x @ self.gram @ x + y @ self.gram @ y)

    def to_json(self) -> dict[str, Any]:
        return {"convention": self.convention.value,
                "omega_re": [float(x) for x in self.omega_re],
                "omega_im": [float(x) for x in self.omega_im],
                "q_omega_abs": abs(self.q_omega), "hermitian": self.hermitian}


def period_point_from_eigenspace(dec: EigenDecomp, which: str = "plus") -> PeriodPoint | None:
    """omega = x + i y from two orthogonal positive directions of one eigenspace."""
    if which not in ("plus", "minus"):
        raise ValueError("which must be 'plus' or 'minus'")
    basis = dec.basis_plus if which == "plus" else dec.basis_minus
    dg = dec.diag_plus if which == "plus" else dec.diag_minus
    pos = [i for i, a in enumerate(dg.diag) if sign(a) > 0]
    if len(pos) < 2:
        return None
    vecs = float_matrix(basis @ dg.base_change)
    i, j = pos[:2]
    x = vecs[:, i] / math.sqrt(float(dg.diag[i]))
    y = vecs[:, j] / math.sqrt(float(dg.diag[j]))
    return PeriodPoint(dec.space, x, y, Convention.BEAUVILLE)


def period_point_from_plane(Q: QuadSpace, x: Sequence[float], y: Sequence[float],
                            convention: Convention = Convention.BEAUVILLE) -> PeriodPoint:
    """Orthonormalize a plane that is positive in the Beauville sense."""
    G = float_matrix(Q.gram)
    s = 1.0 if convention == Convention.BEAUVILLE else -1.0
    x, y = np.asarray(x, float), np.asarray(y, float)
    qx = s * x @ G @ x
    if qx <= 0:
        raise ConventionError("plane is not positive in the period-domain sense")
    x = x / math.sqrt(qx)
    y = y - s * (x @ G @ y) * x
    qy = s * y @ G @ y
    if qy <= 0:
        raise ConventionError("plane is not positive definite in the period-domain sense")
    return PeriodPoint(Q, x, y / math.sqrt(qy), convention)


# --------------------------------------------------------------------------
# float Clifford arithmetic
# --------------------------------------------------------------------------

def float_vector_product(A: CliffordAlgebra, u: np.ndarray, v: np.ndarray) -> dict[int, float]:
    """u*v for vectors in a diagonal algebra: scalar b(u,v) plus bivector part."""
    a = [float(c) for c in A.coeffs]
    out: dict[int, float] = {0: float(sum(ai * ui * vi for ai, ui, vi in zip(a, u, v)))}
    for i in range(A.n):
        for j in range(i + 1, A.n):
            c = float(u[i] * v[j] - u[j] * v[i])
            if c:
                out[(1 << i) | (1 << j)] = c
    return out


def float_mul(A: CliffordAlgebra, x: dict[int, float], y: dict[int, float]) -> dict[int, float]:
    out: dict[int, float] = {}
    for s, a in x.items():
        for t, b in y.items():
            c, m = A.blade_product(s, t)
            out[m] = out.get(m, 0.0) + float(c) * a * b
    return out


def left_operator(A: CliffordAlgebra, x: dict[int, float]) -> np.ndarray:
    """Dense matrix of w -> x*w on Cl+ (x even)."""
    L = np.zeros((A.even_dim, A.even_dim))
    idx = A.even_index
    for s, c in x.items():
        if not c:
            continue
        for col, b in enumerate(A.even_blades):
            coef, m = A.blade_product(s, b)
            L[idx[m], col] += float(coef) * c
    return L


def operator_norm_bound(A: CliffordAlgebra, x: dict[int, float]) -> float:
    """Operator 2-norm of left multiplication by x on Cl+.

    Exact (dense SVD) for small algebras; above DENSE_LIMIT the triangle-
    inequality bound sum |c_s| * ||L_{e_s}|| is used, each L_{e_s} being a
    scaled signed permutation.
    """
    if A.even_dim <= DENSE_LIMIT:
        return float(np.linalg.norm(left_operator(A, x), 2)) if x else 0.0
    total = 0.0
    for s, c in x.items():
        total += abs(c) * max(abs(float(A.blade_product(s, b)[0])) for b in A.even_blades)
    return total


# --------------------------------------------------------------------------
# complex structure
# --------------------------------------------------------------------------

@dataclass
class NumericComplexStructure:
    """J = e1*e2 for an orthonormal basis of a negative plane, q(e_i) = -1."""

    algebra: CliffordAlgebra
    J: dict[int, float]
    e1: np.ndarray
    e2: np.ndarray
    residual: float
    convention: Convention = Convention.POLARIZED

    def operator(self) -> np.ndarray:
        return left_operator(self.algebra, self.J)

    def to_json(self) -> dict[str, Any]:
        return {"n": self.algebra.n, "convention": self.convention.value,
                "e1": [float(x) for x in self.e1], "e2": [float(x) for x in self.e2],
                "J": {str(m): c for m, c in sorted(self.J.items()) if c},
                "J2_plus_id": self.residual}


def _to_diag_coords(Q: QuadSpace, vecs: Sequence[np.ndarray]) -> tuple[CliffordAlgebra, list[np.ndarray]]:
    if Q.gram.is_diagonal():
        return clifford_build(tuple(Q.gram.diagonal())), [np.asarray(v, float) for v in vecs]
    dg = diagonalize(Q)
    Binv = float_matrix(dg.base_change.inverse())
    return clifford_build(tuple(dg.diag)), [Binv @ np.asarray(v, float) for v in vecs]


def structure_from_vectors(A: CliffordAlgebra, x: np.ndarray, y: np.ndarray,
                           tol: float = DEFAULT_TOL) -> NumericComplexStructure:
    """Gram-Schmidt (x, y) to q(e1) = q(e2) = -1 and set J = e1*e2."""
    a = np.array([float(c) for c in A.coeffs])

    def b(u: np.ndarray, v: np.ndarray) -> float:
        return float(np.sum(a * u * v))

    qx = b(x, x)
    if qx >= 0:
        raise ConventionError("plane is not negative definite; convert to the polarized convention")
    e1 = x / math.sqrt(-qx)
    y = y + b(y, e1) * e1  # q(e1) = -1
    qy = b(y, y)
    if qy >= 0 or qy > -1e-12 * float(y @ y):
        raise ConventionError("plane is not negative definite; convert to the polarized convention")
    e2 = y / math.sqrt(-qy)
    J = float_vector_product(A, e1, e2)
    J2 = float_mul(A, J, J)
    J2[0] = J2.get(0, 0.0) + 1.0
    residual = operator_norm_bound(A, J2)
    return NumericComplexStructure(A, J, e1, e2, residual)


def complex_structure(Q: QuadSpace, omega: PeriodPoint, tol: float = DEFAULT_TOL,
                      convention: Convention = Convention.POLARIZED) -> NumericComplexStructure:
    """J for the real plane of omega; Q is given in ``convention``."""
    if convention != Convention.POLARIZED:
        Q = convert(Q, convention, Convention.POLARIZED)
    if omega.space.dim != Q.dim:
        raise DimensionMismatch("period point lives on a space of different dimension")
    A, (x, y) = _to_diag_coords(Q, [omega.omega_re, omega.omega_im])
    return structure_from_vectors(A, x, y, tol)


def transported_structure(cmap: CliffordMap, J: NumericComplexStructure) -> NumericComplexStructure:
    """J' from e'_i = psi(e_i) / sqrt(lambda)."""
    if cmap.generators is None or cmap.multiplier is None:
        raise ValueError("map is not induced by a similarity")
    lam = float(cmap.multiplier)
    if lam <= 0:
        raise ConventionError("a negative multiplier swaps the sign conventions")
    N = float_matrix(cmap.generators)
    e1 = N @ J.e1 / math.sqrt(lam)
    e2 = N @ J.e2 / math.sqrt(lam)
    return structure_from_vectors(cmap.target, e1, e2)


def check_complex_linearity(cmap: CliffordMap, J: NumericComplexStructure,
                            Jp: NumericComplexStructure) -> float:
    """max over even basis x of |psi_Cl(J x) - J' psi_Cl(x)|."""
    P = float_matrix(cmap.matrix())
    diff = P @ J.operator() - Jp.operator() @ P
    return float(np.max(np.linalg.norm(diff, axis=0))) if diff.size else 0.0


# --------------------------------------------------------------------------
# polarization
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PolarizationResult:
    sign: int
    passed: bool
    min_value: float
    invariance_residual: float
    seed: int
    tol: float
    form_convention: Convention = Convention.BEAUVILLE

    def to_json(self) -> dict[str, Any]:
        return {"sign": self.sign, "pass": self.passed, "min_value": self.min_value,
                "invariance_residual": self.invariance_residual, "seed": self.seed,
                "tol": self.tol, "form_convention": self.form_convention.value}


def convention_signs(A: CliffordAlgebra) -> np.ndarray:
    """Diagonal of the isomorphism Cl+(q) -> Cl+(-q), e_S -> (-1)^(|S|/2) e_S."""
    return np.array([-1.0 if (bin(m).count("1") // 2) & 1 else 1.0 for m in A.even_blades])


def check_polarization(form: Matrix | np.ndarray, J: NumericComplexStructure, samples: int = 200,
                       seed: int = 0, tol: float = DEFAULT_TOL,
                       form_convention: Convention = Convention.BEAUVILLE) -> PolarizationResult:
    """Find s = +-1 with s Q(x, Jx) > 0 and Q(Jx, Jy) = Q(x, y).

    ``form`` is the trace-form Gram matrix on the even blade basis, usually
    from clifford.trace_form_matrix.  The pair (f1, f2) must have positive
    square for the period-domain form, so by default ``form`` is taken to be
    computed in Cl+ of the Beauville-convention form and is carried over to
    the polarized algebra of J before testing.
    """
    Qf = float_matrix(form) if isinstance(form, Matrix) else np.asarray(form, float)
    if form_convention != J.convention:
        D = convention_signs(J.algebra)
        Qf = D[:, None] * Qf * D[None, :]
    L = J.operator()
    scale = max(float(np.max(np.abs(Qf))), 1.0)
    inv = float(np.max(np.abs(L.T @ Qf @ L - Qf))) / scale
    H = Qf @ L
    H = (H + H.T) / 2
    eig = np.linalg.eigvalsh(H)
    rng = np.random.default_rng(seed)
    xs = rng.standard_normal((samples, Qf.shape[0]))
    vals = np.einsum("ij,jk,ik->i", xs, H, xs) if samples else np.array([])
    best = (0, False, float(eig.min()) if eig.size else 0.0)
    for s in (1, -1):
        lo = float((s * eig).min())
        sampled_ok = bool(np.all(s * vals > 0)) if samples else True
        if lo > tol * scale and sampled_ok:
            best = (s, inv <= tol, lo)
            break
    return PolarizationResult(best[0], best[1], best[2], inv, seed, tol, form_convention)
