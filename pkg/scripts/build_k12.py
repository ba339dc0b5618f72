"""Regenerate src/hodgesim/data/k12.json (the Coxeter–Todd lattice K12).

K12 is realised inside Z[w]^6, w a primitive cube root of unity, as the
vectors with all coordinates congruent mod theta = w - w^2 and coordinate sum
divisible by 3, with the form (2/3) Re(sum x_i conj(y_i)).  Coordinates
x_i = a_i + b_i w are flattened to (a_1, b_1, ..., a_6, b_6).

The script checks determinant 729, minimum 4 and kissing number 756 before
writing anything.
"""

from __future__ import annotations

import argparse
import hashlib
import json
from fractions import Fraction
from pathlib import Path

from hodgesim.exact import Matrix

OUT = Path(__file__).resolve().parents[1] / "src" / "hodgesim" / "data" / "k12.json"


def residue(a: int, b: int) -> int:
    # Z[w]/theta = F_3 with w -> 1
    return (a + b) % 3


def in_lattice(v: list[int]) -> bool:
    r = {residue(v[2 * i], v[2 * i + 1]) for i in range(6)}
    if len(r) != 1:
        return False
    # sum divisible by 3 = theta^2 (up to a unit)
    return sum(v[0::2]) % 3 == 0 and sum(v[1::2]) % 3 == 0


def ambient_form(u: list[int], v: list[int]) -> Fraction:
    # Re((a + b w)(c + d conj w)) = ac + bd - (ad + bc)/2
    s = Fraction(0)
    for i in range(6):
        a, b, c, d = u[2 * i], u[2 * i + 1], v[2 * i], v[2 * i + 1]
        s += a * c + b * d - Fraction(a * d + b * c, 2)
    return Fraction(2, 3) * s


def hnf_basis(gens: list[list[int]]) -> list[list[int]]:
    """Row-style Hermite reduction of integer generators to a basis."""
    rows = [list(g) for g in gens]
    basis = []
    n = len(rows[0])
    for col in range(n):
        live = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            p = live[0]
            nxt = [p]
            for r in live[1:]:
                q = r[col] // p[col]
                r = [x - q * y for x, y in zip(r, p)]
                (nxt if r[col] else rest).append(r)
            live = nxt
        if live:
            p = live[0]
            if p[col] < 0:
                p = [-x for x in p]
            basis.append(p)
        rows = [r for r in rest if any(r)]
    return basis


def kernel_mod3(rows: list[list[int]], n: int) -> list[list[int]]:
    """Basis of the F_3 null space of the given congruence rows."""
    A = [[x % 3 for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(A)) if A[i][c]), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = A[r][c]  # 1 and 2 are self-inverse mod 3
        A[r] = [(x * inv) % 3 for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [(x - f * y) % 3 for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    out = []
    for f in free:
        v = [0] * n
        v[f] = 1
        for i, c in enumerate(pivots):
            v[c] = (-A[i][f]) % 3
        out.append(v)
    return out


def congruence_rows() -> list[list[int]]:
    rows = []
    for i in range(1, 6):
        r = [0] * 12
        r[0] = r[1] = 1
        r[2 * i] = r[2 * i + 1] = -1
        rows.append(r)
    rows.append([1, 0] * 6)
    rows.append([0, 1] * 6)
    return rows


def small_vectors(norm: Fraction) -> list[tuple[int, ...]]:
    """All lattice vectors of the given norm, by enumerating coordinates."""
    target = norm * Fraction(3, 2)  # sum of Eisenstein norms
    coords = [(a, b) for a in range(-3, 4) for b in range(-3, 4) if a * a - a * b + b * b <= target]
    out = []

    def rec(prefix: list[int], used: Fraction) -> None:
        if len(prefix) == 12:
            if used == target and in_lattice(prefix):
                out.append(tuple(prefix))
            return
        for a, b in coords:
            n = a * a - a * b + b * b
            if used + n <= target:
                rec(prefix + [a, b], used + n)

    rec([], Fraction(0))
    return out


def build() -> dict:
    # L is generated by 3 Z^12 and lifts of its image in F_3^12
    gens = [[3 * int(i == j) for i in range(12)] for j in range(12)]
    lifts = kernel_mod3(congruence_rows(), 12)
    assert all(in_lattice(v) for v in lifts)
    gens += lifts
    basis = hnf_basis(gens)
    assert len(basis) == 12
    gram = Matrix([[ambient_form(u, v) for v in basis] for u in basis])
    det = gram.det()
    if det != 729:
        raise SystemExit(f"determinant {det}, expected 729")
    if any(x.denominator != 1 for r in gram.rows for x in r):
        raise SystemExit("Gram matrix is not integral")
    for k in (1, 2, 3):
        if small_vectors(Fraction(k)):
            raise SystemExit(f"found a vector of norm {k}")
    kissing = len(small_vectors(Fraction(4)))
    if kissing != 756:
        raise SystemExit(f"kissing number {kissing}, expected 756")
    rows = [[str(x) for x in r] for r in gram.rows]
    checksum = hashlib.sha256(json.dumps(rows, separators=(",", ":")).encode()).hexdigest()
    return {"dim": 12, "gram": rows, "label": "K12", "sha256": checksum,
            "det": 729, "min": 4, "kissing": 756}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=OUT)
    args = ap.parse_args()
    data = build()
    rows = ",\n  ".join(json.dumps(r) for r in data.pop("gram"))
    head = json.dumps(data)[:-1]
    args.out.write_text(f'{head}, "gram": [\n  {rows}\n]}}\n')
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
