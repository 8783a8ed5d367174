"""Exact vertex enumeration by the double description method.

Only intended for small polytopes (dimension around ten, a few dozen
facets).  Everything runs in Python integers: constraint rows are scaled
to integer vectors and rays are kept primitive.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

__all__ = ["enumerate_vertices", "nullspace", "rank"]


def _integer_row(row: Sequence[Fraction]) -> list[int]:
    den = math.lcm(*(Fraction(v).denominator for v in row)) if row else 1
    ints = [int(Fraction(v) * den) for v in row]
    return _primitive(ints)


def _primitive(vec: list[int]) -> list[int]:
    g = 0
    for v in vec:
        g = math.gcd(g, v)
    return [v // g for v in vec] if g > 1 else vec


def _rref(rows: list[list[Fraction]], width: int):
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    for col in range(width):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][col]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                factor = rows[i][col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def rank(rows: list[list[Fraction]], width: int) -> int:
    return len(_rref([[Fraction(v) for v in r] for r in rows], width)[1])


def nullspace(rows: list[list[Fraction]], width: int) -> list[list[Fraction]]:
    """Basis of ``{v : rows @ v = 0}`` as exact rational vectors."""
    if not rows:
        return [[Fraction(int(i == j)) for i in range(width)] for j in range(width)]
    reduced, pivots = _rref([[Fraction(v) for v in r] for r in rows], width)
    free = [c for c in range(width) if c not in pivots]
    basis = []
    for fcol in free:
        vec = [Fraction(0)] * width
        vec[fcol] = Fraction(1)
        for row, pcol in zip(reduced, pivots):
            vec[pcol] = -row[fcol]
        basis.append(vec)
    return basis


def enumerate_vertices(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction],
                       max_rays: int = 200_000) -> list[list[Fraction]]:
    """Vertices of the bounded polytope ``{y : A y <= b}``.

    The polytope is homogenised to the cone ``{(lam, y) : b lam - A y >= 0,
    lam >= 0}``, whose extreme rays with ``lam > 0`` are the vertices.
    """
    d = len(A[0])
    D = d + 1
    H = [_integer_row([Fraction(bi)] + [-Fraction(v) for v in row]) for row, bi in zip(A, b)]
    H.append([1] + [0] * d)

    # initial simplicial cone from D independent rows
    chosen: list[int] = []
    for i in range(len(H)):
        if rank([H[k] for k in chosen + [i]], D) == len(chosen) + 1:
            chosen.append(i)
            if len(chosen) == D:
                break
    if len(chosen) < D:
        raise ValueError("constraint matrix is rank deficient; polytope is unbounded or degenerate")
    # rays: columns of the inverse of the chosen rows
    square = [[Fraction(v) for v in H[i]] for i in chosen]
    aug = [row + [Fraction(int(r == c)) for c in range(D)] for r, row in enumerate(square)]
    reduced, _ = _rref(aug, D)
    inverse_cols = [[reduced[r][D + c] for r in range(D)] for c in range(D)]
    rays = [_integer_row(col) for col in inverse_cols]
    position = {row_index: bit for bit, row_index in enumerate(chosen)}

    def tight_set(ray, processed):
        mask = 0
        for idx in processed:
            if sum(h * r for h, r in zip(H[idx], ray)) == 0:
                mask |= 1 << position[idx]
        return mask

    processed = list(chosen)
    zero_sets = [tight_set(r, processed) for r in rays]

    for idx in range(len(H)):
        if idx in position:
            continue
        h = H[idx]
        position[idx] = len(position)
        values = [sum(a * r for a, r in zip(h, ray)) for ray in rays]
        pos = [i for i, v in enumerate(values) if v > 0]
        neg = [i for i, v in enumerate(values) if v < 0]
        zer = [i for i, v in enumerate(values) if v == 0]
        new_rays = [rays[i] for i in pos + zer]
        new_sets = [zero_sets[i] for i in pos] + [zero_sets[i] | (1 << position[idx]) for i in zer]
        for p in pos:
            for q in neg:
                common = zero_sets[p] & zero_sets[q]
                if common.bit_count() < D - 2:
                    continue
                if any(k != p and k != q and (zero_sets[k] & common) == common
                       for k in range(len(rays))):
                    continue
                vp, vq = values[p], -values[q]
                ray = _primitive([vp * a + vq * c for a, c in zip(rays[q], rays[p])])
                new_rays.append(ray)
                new_sets.append(common | (1 << position[idx]))
        rays, zero_sets = new_rays, new_sets
        processed.append(idx)
        if len(rays) > max_rays:
            raise ValueError(f"vertex enumeration exceeded {max_rays} intermediate rays")

    vertices = []
    for ray in rays:
        lam = ray[0]
        if lam > 0:
            vertices.append([Fraction(v, lam) for v in ray[1:]])
    return vertices
