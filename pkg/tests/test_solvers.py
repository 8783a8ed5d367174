import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from nsbox.simplex import Infeasible, Unbounded, solve_lp
from nsbox.vertices import enumerate_vertices, nullspace, rank


def random_lp(rng, n_vars, n_rows):
    """Bounded feasible LP: x in a box, a few equalities through a known point."""
    point = [Fraction(rng.randint(0, 4), 4) for _ in range(n_vars)]
    A = []
    b = []
    for _ in range(n_rows):
        row = {k: Fraction(rng.randint(-3, 3)) for k in range(n_vars) if rng.random() < 0.6}
        A.append(row)
        b.append(sum((v * point[k] for k, v in row.items()), Fraction(0)))
    # x_k + s_k = 1 keeps the region bounded
    for k in range(n_vars):
        A.append({k: Fraction(1), n_vars + k: Fraction(1)})
        b.append(Fraction(1))
    c = {k: Fraction(rng.randint(-5, 5)) for k in range(n_vars)}
    return c, A, b, 2 * n_vars


@given(st.integers(0, 2**31))
@settings(max_examples=60, deadline=None)
def test_simplex_matches_float_solver(seed):
    rng = random.Random(seed)
    c, A, b, n = random_lp(rng, rng.randint(1, 6), rng.randint(0, 4))
    result = solve_lp(c, A, b, n)
    dense = np.array([[float(row.get(k, 0)) for k in range(n)] for row in A])
    ref = linprog([-float(c.get(k, 0)) for k in range(n)], A_eq=dense, b_eq=[float(v) for v in b],
                  bounds=[(0, None)] * n, method="highs")
    assert ref.status == 0
    assert float(result.value) == pytest.approx(-ref.fun, abs=1e-9)
    # exact feasibility of the returned point
    assert all(x >= 0 for x in result.x)
    for row, beta in zip(A, b):
        assert sum((v * result.x[k] for k, v in row.items()), Fraction(0)) == beta


def test_simplex_infeasible_and_unbounded():
    with pytest.raises(Infeasible):
        solve_lp({0: 1}, [{0: 1, 1: 1}], [-1], 2)
    with pytest.raises(Unbounded):
        solve_lp({0: 1}, [{0: 1, 1: -1}], [0], 2)


def test_simplex_redundant_rows():
    A = [{0: 1, 1: 1}, {0: 2, 1: 2}, {0: 1, 2: 1}]
    result = solve_lp({1: 1}, A, [1, 2, Fraction(1, 3)], 3)
    assert result.value == 1


def test_vertices_of_square():
    A = [[1, 0], [-1, 0], [0, 1], [0, -1]]
    b = [1, 0, 1, 0]
    verts = {tuple(v) for v in enumerate_vertices(A, b)}
    assert verts == {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_vertices_of_simplex_with_redundant_facet():
    A = [[-1, 0, 0], [0, -1, 0], [0, 0, -1], [1, 1, 1], [2, 2, 2]]
    b = [0, 0, 0, 1, 3]
    verts = {tuple(v) for v in enumerate_vertices(A, b)}
    assert verts == {(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)}


@given(st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_vertex_optimum_matches_simplex(seed):
    rng = random.Random(seed)
    d = rng.randint(1, 4)
    # box [0,1]^d cut by random halfspaces through its interior
    A = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
    A += [[Fraction(-int(i == j)) for j in range(d)] for i in range(d)]
    b = [Fraction(1)] * d + [Fraction(0)] * d
    for _ in range(rng.randint(0, 3)):
        row = [Fraction(rng.randint(-3, 3)) for _ in range(d)]
        A.append(row)
        b.append(Fraction(max(1, sum(v for v in row if v > 0))) / 2 + Fraction(1, 2))
    c = [Fraction(rng.randint(-4, 4)) for _ in range(d)]
    best = max(sum(ci * vi for ci, vi in zip(c, v)) for v in enumerate_vertices(A, b))
    # same LP in equality form: A y + s = b, y, s >= 0
    rows = [{**{j: row[j] for j in range(d) if row[j]}, d + i: Fraction(1)} for i, row in enumerate(A)]
    result = solve_lp({j: c[j] for j in range(d)}, rows, b, d + len(A))
    assert result.value == best


def test_nullspace_and_rank():
    rows = [[1, 2, 3], [2, 4, 6]]
    assert rank(rows, 3) == 1
    basis = nullspace(rows, 3)
    assert len(basis) == 2
    for v in basis:
        assert sum(a * x for a, x in zip(rows[0], v)) == 0
