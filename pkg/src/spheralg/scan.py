"""Grid scans of the closure manifold over (a, b).

Each point uses c = a - b - 2 and d = b.  A point is flagged closed when
the matrix residual ||[K+, K-] - (2 a0 Kz + b0)|| on the depth-2 interior
is within tolerance; the exact closure coefficients ride along so the
numeric flag can be audited against the symbolic one.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Sequence

from .analyzer import closure_values, commutator_family, labelled_case_of, solver_case_of
from .reports import range_values

DEFAULT_RANGE = (Fraction(-5), Fraction(5), Fraction(1, 10))


def scan_point(a: Fraction, b: Fraction, lmax: int, tol: float) -> dict:
    c, d = a - b - 2, b
    e1, e2 = closure_values(a, b)
    a0, b0 = -(b + 1) ** 2, -(a + c) * (b + 1)
    r = commutator_family(lmax).closed_residual(a, b, a0, b0, c, d)
    closed = r <= tol
    return {
        "a": a, "b": b, "c": c, "d": d,
        "closure_ac": e1, "closure_b": e2,
        "residual": r, "closed": closed,
        "labelled_case": labelled_case_of(a, b) if closed else None,
        "solver_case": solver_case_of(a, b) if closed else None,
    }


def _scan_chunk(args) -> list[dict]:
    points, lmax, tol = args
    return [scan_point(a, b, lmax, tol) for a, b in points]


def grid(a_range=DEFAULT_RANGE, b_range=DEFAULT_RANGE) -> list[tuple[Fraction, Fraction]]:
    """Row-major grid: a outer, b inner."""
    bs = range_values(b_range)
    return [(a, b) for a in range_values(a_range) for b in bs]


def scan(points: Sequence[tuple[Fraction, Fraction]], lmax: int = 16, tol: float = 1e-10, jobs: int = 1) -> list[dict]:
    """Rows in grid order regardless of ``jobs``."""
    if jobs <= 1 or len(points) < 2:
        return _scan_chunk((list(points), lmax, tol))
    n = max(1, -(-len(points) // (4 * jobs)))
    chunks = [(list(points[i : i + n]), lmax, tol) for i in range(0, len(points), n)]
    out: list[dict] = []
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves submission order, so the merge is by grid position
        for rows in pool.map(_scan_chunk, chunks):
            out.extend(rows)
    return out


def summarize(rows: Sequence[dict]) -> dict:
    closed = [r for r in rows if r["closed"]]
    exact = [r for r in rows if r["closure_ac"] == 0 and r["closure_b"] == 0]
    return {
        "points": len(rows),
        "closed": len(closed),
        "exactly_closed": len(exact),
        "agree": {(r["a"], r["b"]) for r in closed} == {(r["a"], r["b"]) for r in exact},
        "min_open_residual": min((r["residual"] for r in rows if not r["closed"]), default=None),
        "max_closed_residual": max((r["residual"] for r in closed), default=None),
    }
