"""Exact two-phase simplex over the rationals.

Solves ``max c.x  s.t.  A x = b, x >= 0`` with :class:`fractions.Fraction`
arithmetic on a sparse tableau (one dict per row).  Pivoting uses
Dantzig's rule and falls back to Bland's rule after a run of degenerate
pivots, which rules out cycling.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

__all__ = ["LPResult", "solve_lp", "Infeasible", "Unbounded"]


class Infeasible(ValueError):
    pass


class Unbounded(ValueError):
    pass


@dataclass
class LPResult:
    value: Fraction
    x: list[Fraction]
    pivots: int


def _pivot(rows, rhs, basis, obj, r, j):
    row = rows[r]
    piv = row[j]
    if piv != 1:
        inv = 1 / piv
        for k in row:
            row[k] *= inv
        rhs[r] *= inv
    for i, other in enumerate(rows):
        if i == r:
            continue
        factor = other.get(j)
        if not factor:
            continue
        for k, v in row.items():
            nv = other.get(k, 0) - factor * v
            if nv:
                other[k] = nv
            else:
                other.pop(k, None)
        rhs[i] -= factor * rhs[r]
    factor = obj[0].get(j)
    if factor:
        for k, v in row.items():
            nv = obj[0].get(k, 0) - factor * v
            if nv:
                obj[0][k] = nv
            else:
                obj[0].pop(k, None)
        obj[1] += factor * rhs[r]
    basis[r] = j


def _run(rows, rhs, basis, obj, allowed, degenerate_limit=50):
    """Maximise; ``obj = [reduced costs dict, current value]``."""
    pivots = 0
    stall = 0
    while True:
        candidates = [(d, k) for k, d in obj[0].items() if d > 0 and k in allowed]
        if not candidates:
            return pivots
        if stall >= degenerate_limit:
            j = min(k for _, k in candidates)
        else:
            j = max(candidates, key=lambda t: (t[0], -t[1]))[1]
        best = None
        for i, row in enumerate(rows):
            a = row.get(j)
            if a is not None and a > 0:
                key = (rhs[i] / a, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            raise Unbounded(f"objective unbounded along column {j}")
        step = best[0][0]
        stall = stall + 1 if step == 0 else 0
        _pivot(rows, rhs, basis, obj, best[1], j)
        pivots += 1


def solve_lp(c: Mapping[int, Fraction] | Sequence[Fraction], A: Sequence[Mapping[int, Fraction]],
             b: Sequence[Fraction], n_vars: int) -> LPResult:
    """Maximise ``c.x`` subject to sparse equality rows ``A x = b`` and ``x >= 0``."""
    if not isinstance(c, Mapping):
        c = {k: Fraction(v) for k, v in enumerate(c) if v}
    rows = []
    rhs = []
    for row, beta in zip(A, b):
        row = {k: Fraction(v) for k, v in row.items() if v}
        beta = Fraction(beta)
        if beta < 0:
            row = {k: -v for k, v in row.items()}
            beta = -beta
        if not row:
            if beta:
                raise Infeasible("empty row with nonzero right-hand side")
            continue
        rows.append(row)
        rhs.append(beta)

    # crash basis: a column living in a single row with a positive
    # coefficient can start basic there; other rows get an artificial
    count: dict[int, int] = {}
    for row in rows:
        for k in row:
            count[k] = count.get(k, 0) + 1
    basis = []
    art = []
    next_art = n_vars
    for i, row in enumerate(rows):
        j = next((k for k, v in row.items() if count[k] == 1 and v > 0 and k < n_vars), None)
        if j is not None:
            count[j] = 0  # do not reuse
            inv = 1 / row[j]
            if inv != 1:
                for k in row:
                    row[k] *= inv
                rhs[i] *= inv
            basis.append(j)
        else:
            row[next_art] = Fraction(1)
            basis.append(next_art)
            art.append(next_art)
            next_art += 1

    # phase 1: minimise the sum of artificials
    art_set = set(art)
    reduced: dict[int, Fraction] = {}
    value = Fraction(0)
    for i, row in enumerate(rows):
        if basis[i] not in art_set:
            continue
        for k, v in row.items():
            if k not in art_set:
                reduced[k] = reduced.get(k, 0) + v
        value -= rhs[i]
    reduced = {k: v for k, v in reduced.items() if v}
    obj = [reduced, value]
    pivots = 0
    if value != 0:
        pivots = _run(rows, rhs, basis, obj, allowed=range(next_art))
    if obj[1] != 0:
        raise Infeasible(f"phase 1 optimum {obj[1]} < 0")

    # drive remaining artificials out of the basis, dropping redundant rows
    keep = []
    for i in range(len(rows)):
        if basis[i] in art_set:
            j = next((k for k in rows[i] if k not in art_set), None)
            if j is None:
                continue
            _pivot(rows, rhs, basis, obj, i, j)
            pivots += 1
        keep.append(i)
    rows = [{k: v for k, v in rows[i].items() if k not in art_set} for i in keep]
    rhs = [rhs[i] for i in keep]
    basis = [basis[i] for i in keep]

    # phase 2
    reduced = {k: Fraction(v) for k, v in c.items() if v}
    value = Fraction(0)
    for i, j in enumerate(basis):
        cj = c.get(j)
        if cj:
            for k, v in rows[i].items():
                nv = reduced.get(k, 0) - cj * v
                if nv:
                    reduced[k] = nv
                else:
                    reduced.pop(k, None)
            value += cj * rhs[i]
    obj = [reduced, value]
    pivots += _run(rows, rhs, basis, obj, allowed=range(n_vars))

    x = [Fraction(0)] * n_vars
    for i, j in enumerate(basis):
        x[j] = rhs[i]
    return LPResult(value=obj[1], x=x, pivots=pivots)
