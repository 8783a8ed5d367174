"""Independent small-instance oracles.

* :func:`brute_force_guess` re-derives guessing probabilities atom by atom.
* :func:`optimal_tons_attack` finds the best TONS attack on a given box by
  exact linear optimisation (simplex, or vertex enumeration for tiny cases).
* :func:`best_prefix_attack` searches all prefix-free codes up to a depth.

The attack LP works on Eve's ``e = 0`` slice ``z(a b | x y) = P'(a b 0 | x y)``.
The extension's marginal then matches the base by construction
(``P'(a b 1 | x y) = P(a b | x y) - z``), the ``k = 0`` TONS equalities are
the base's own, and the ``e = 1`` equalities follow from those of ``z``.
What remains: ``0 <= z <= P`` and the ``k = 1`` TONS equalities on ``z``.
The objective is ``P'(f(a) = e | x)`` at one fixed Alice input ``x``
(default all zeros); ``objective="worst"`` maximises the minimum over all
``x`` instead, i.e. attacks that work equally well whatever Alice types.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple

import numpy as np

from .attacks import ClassicalJoint, influence, check_prefix_code
from .boolean import BooleanFunction
from .box import Box, PartySpec, check_noise
from .simplex import solve_lp
from .verify import check_tons
from .vertices import enumerate_vertices, nullspace

__all__ = [
    "SizeGuardError",
    "OptimizationProblem",
    "brute_force_guess",
    "build_attack_problem",
    "optimal_tons_attack",
    "prefix_codes",
    "complete_prefix_codes",
    "prefix_code_value",
    "best_prefix_attack",
    "PrefixSearchResult",
]

MAX_BRUTE_FORCE_N = 20
MAX_LP_ROUNDS = 2
MAX_ENUM_DIM = 14
MAX_PREFIX_N = 5


class SizeGuardError(ValueError):
    pass


def brute_force_guess(q: ClassicalJoint, f: BooleanFunction) -> Fraction:
    """Sum Q(a, e) over atoms with f(a) = e, calling f once per string."""
    if q.n != f.n:
        raise ValueError(f"joint has n={q.n}, function has arity {f.n}")
    if q.n > MAX_BRUTE_FORCE_N:
        raise SizeGuardError(f"brute force limited to n <= {MAX_BRUTE_FORCE_N}")
    total = Fraction(0)
    for a in itertools.product((0, 1), repeat=q.n):
        e = f(a)
        total += q.table[a + (e,)]
    return total


@dataclass
class OptimizationProblem:
    """LP over Eve's ``e = 0`` slice of a candidate attack.

    ``variables[k]`` is the flat base-table index of the k-th free entry
    (entries where the base is zero are pinned to zero).  ``equalities``
    are homogeneous sparse rows over the variables.  ``guess_rows[x]`` is
    ``(constant, coefficients)`` with ``P'(f(a) = e | x) = constant +
    coefficients . z`` for each targeted Alice input ``x``; the objective
    is the minimum over the rows.
    """

    base: Box
    f: BooleanFunction
    variables: list[int]
    upper: list[Fraction]
    equalities: list[dict[int, Fraction]]
    guess_rows: list[tuple[Fraction, dict[int, Fraction]]]

    @property
    def n(self) -> int:
        return self.base.parties[0].rounds

    def z_table(self, z) -> np.ndarray:
        table = np.empty(self.base.table.size, dtype=object)
        table.fill(Fraction(0))
        for k, idx in enumerate(self.variables):
            table[idx] = z[k]
        return table.reshape(self.base.table.shape)

    def witness(self, z) -> Box:
        """The attack box with Eve appended as a third party (one input, binary output)."""
        n = self.n
        zero = self.z_table(z)
        one = self.base.table - zero
        stacked = np.stack([zero, one], axis=-1)  # (..., e)
        stacked = np.expand_dims(stacked, axis=2 * n)  # Eve's single input letter
        a, b = self.base.parties
        return Box([a, b, PartySpec(1, 2, 1)], stacked, check=False)

    def guess_values(self, z) -> list[Fraction]:
        return [c + sum((v * z[k] for k, v in row.items()), Fraction(0)) for c, row in self.guess_rows]

    def is_feasible(self, z) -> bool:
        if any(not 0 <= z[k] <= self.upper[k] for k in range(len(self.variables))):
            return False
        return all(sum((v * z[k] for k, v in row.items()), Fraction(0)) == 0 for row in self.equalities)

    def z_from_box(self, attack: Box) -> list[Fraction]:
        """Read ``z`` off an attack box laid out like :meth:`witness`."""
        n = self.n
        e0 = attack.table[(slice(None),) * (2 * n) + (0,) + (slice(None),) * (2 * n) + (0,)]
        flat = e0.reshape(-1)
        return [flat[idx] for idx in self.variables]


def build_attack_problem(base: Box, f: BooleanFunction, objective: str = "fixed",
                         alice_input=None) -> OptimizationProblem:
    if len(base.parties) != 2 or base.parties[0].rounds != base.parties[1].rounds:
        raise ValueError("base must be an Alice/Bob box with equal round counts")
    n = base.parties[0].rounds
    if n > MAX_LP_ROUNDS:
        raise SizeGuardError(f"optimal attacks are limited to n <= {MAX_LP_ROUNDS} rounds")
    if base.parties[0].outputs != 2:
        raise ValueError("Alice's outputs must be binary")
    if f.n != n:
        raise ValueError(f"function arity {f.n} does not match {n} rounds")
    report = check_tons(base)
    if not report.ok:
        raise ValueError(f"base is not time-ordered no-signalling: {report.violations[0].describe()}")

    shape = base.table.shape
    flat = base.table.reshape(-1)
    variables = [i for i, p in enumerate(flat) if p != 0]
    var_of = {idx: k for k, idx in enumerate(variables)}
    upper = [flat[i] for i in variables]

    # k = 1 conditions: marginal of z on A_<=i B_<=j independent of later inputs
    equalities: list[dict[int, Fraction]] = []
    systems = 2 * n
    ins, outs = shape[:systems], shape[systems:]
    for i, j in itertools.product(range(n + 1), repeat=2):
        kept = list(range(i)) + list(range(n, n + j))
        varied = [s for s in range(systems) if s not in kept]
        if not varied:
            continue
        fixed_ranges = [range(ins[s]) for s in kept] + [range(outs[s]) for s in kept]
        varied_settings = list(itertools.product(*(range(ins[s]) for s in varied)))
        summed_outputs = list(itertools.product(*(range(outs[s]) for s in varied)))
        for fixed in itertools.product(*fixed_ranges):
            fx, fo = fixed[:len(kept)], fixed[len(kept):]

            def row_for(setting):
                row = {}
                for out_rest in summed_outputs:
                    x = [0] * systems
                    o = [0] * systems
                    for s, v in zip(kept, fx):
                        x[s] = v
                    for s, v in zip(kept, fo):
                        o[s] = v
                    for s, v in zip(varied, setting):
                        x[s] = v
                    for s, v in zip(varied, out_rest):
                        o[s] = v
                    idx = int(np.ravel_multi_index(tuple(x) + tuple(o), shape))
                    if idx in var_of:
                        row[var_of[idx]] = row.get(var_of[idx], 0) + 1
                return row

            ref = row_for(varied_settings[0])
            for setting in varied_settings[1:]:
                row = dict(row_for(setting))
                for k, v in ref.items():
                    nv = row.get(k, 0) - v
                    if nv:
                        row[k] = nv
                    else:
                        row.pop(k, None)
                if row:
                    equalities.append({k: Fraction(v) for k, v in row.items()})

    # guess probability per Alice input string, Bob's inputs at 0
    if objective == "worst":
        targets = list(itertools.product(*(range(s) for s in ins[:n])))
    elif objective == "fixed":
        x0 = tuple(alice_input) if alice_input is not None else (0,) * n
        if len(x0) != n or any(not 0 <= v < ins[k] for k, v in enumerate(x0)):
            raise ValueError(f"invalid Alice input {x0}")
        targets = [x0]
    else:
        raise ValueError(f"unknown objective {objective!r}")
    guess_rows = []
    ftab = f.table
    for x in targets:
        const = Fraction(0)
        row: dict[int, Fraction] = {}
        for a in itertools.product((0, 1), repeat=n):
            target = int(ftab[a])
            for b in itertools.product(*(range(s) for s in outs[n:])):
                idx = int(np.ravel_multi_index(tuple(x) + (0,) * n + a + b, shape))
                p = flat[idx]
                if target == 1:
                    const += p
                if idx in var_of:
                    row[var_of[idx]] = row.get(var_of[idx], 0) + (1 if target == 0 else -1)
        guess_rows.append((const, {k: Fraction(v) for k, v in row.items() if v}))
    return OptimizationProblem(base, f, variables, upper, equalities, guess_rows)


def _solve_simplex(problem: OptimizationProblem):
    m = len(problem.variables)
    n_guess = len(problem.guess_rows)
    # columns: z (m), upper slacks (m), t, guess slacks (n_guess)
    t_col = 2 * m
    A, b = [], []
    for row in problem.equalities:
        A.append(dict(row))
        b.append(Fraction(0))
    for k in range(m):
        A.append({k: Fraction(1), m + k: Fraction(1)})
        b.append(problem.upper[k])
    for g, (const, row) in enumerate(problem.guess_rows):
        r = {k: -v for k, v in row.items()}
        r[t_col] = Fraction(1)
        r[t_col + 1 + g] = Fraction(1)
        A.append(r)
        b.append(const)
    result = solve_lp({t_col: Fraction(1)}, A, b, n_vars=2 * m + 1 + n_guess)
    return result.value, result.x[:m]


def _solve_enum(problem: OptimizationProblem):
    m = len(problem.variables)
    eq = [[row.get(k, Fraction(0)) for k in range(m)] for row in problem.equalities]
    basis = nullspace(eq, m)  # z = N w
    d = len(basis)
    if d + 1 > MAX_ENUM_DIM:
        raise SizeGuardError(f"vertex enumeration limited to dimension {MAX_ENUM_DIM}, need {d + 1}")
    N = [[basis[c][k] for c in range(d)] for k in range(m)]
    A, b = [], []
    for k in range(m):
        A.append([-v for v in N[k]] + [Fraction(0)])  # z_k >= 0
        b.append(Fraction(0))
        A.append(list(N[k]) + [Fraction(0)])  # z_k <= P_k
        b.append(problem.upper[k])
    for const, row in problem.guess_rows:
        coeff = [sum((v * N[k][c] for k, v in row.items()), Fraction(0)) for c in range(d)]
        A.append([-v for v in coeff] + [Fraction(1)])  # t <= guess
        b.append(const)
    A.append([Fraction(0)] * d + [Fraction(-1)])  # t >= 0
    b.append(Fraction(0))
    best = None
    for vertex in enumerate_vertices(A, b):
        if best is None or vertex[-1] > best[-1]:
            best = vertex
    w = best[:d]
    z = [sum((N[k][c] * w[c] for c in range(d)), Fraction(0)) for k in range(m)]
    return best[-1], z


def optimal_tons_attack(base: Box, f: BooleanFunction, method: str = "lp",
                        objective: str = "fixed", alice_input=None) -> tuple[Fraction, Box]:
    """Best guessing probability of f(a) achievable by a TONS attack on ``base``.

    ``objective="fixed"`` optimises ``P'(f(a) = e | x)`` at ``alice_input``
    (default all zeros); ``"worst"`` optimises its minimum over x.
    Returns the exact optimum and a witness attack attaining it.
    """
    problem = build_attack_problem(base, f, objective, alice_input)
    if method == "lp":
        value, z = _solve_simplex(problem)
    elif method == "enum":
        value, z = _solve_enum(problem)
    else:
        raise ValueError(f"unknown method {method!r}")
    if min(problem.guess_values(z)) != value:
        raise AssertionError("solver returned a point that does not attain its value")
    return value, problem.witness(z)


# prefix-code search

def prefix_codes(max_depth: int, prefix: str = "") -> Iterator[tuple[str, ...]]:
    """All prefix-free codes (including the empty code) with words of length <= max_depth."""
    yield ()
    yield (prefix,)
    if len(prefix) < max_depth:
        left = list(prefix_codes(max_depth, prefix + "0"))
        right = list(prefix_codes(max_depth, prefix + "1"))
        for l, r in itertools.product(left, right):
            if l or r:
                yield l + r


def complete_prefix_codes(max_depth: int, prefix: str = "") -> Iterator[tuple[str, ...]]:
    """Prefix-free codes satisfying Kraft's equality, word lengths <= max_depth."""
    yield (prefix,)
    if len(prefix) < max_depth:
        left = list(complete_prefix_codes(max_depth, prefix + "0"))
        right = list(complete_prefix_codes(max_depth, prefix + "1"))
        for l, r in itertools.product(left, right):
            yield l + r


def prefix_code_value(f: BooleanFunction, code, eps) -> Fraction:
    """1/2 + 2 eps sum_c 2^-|c| |influence(c)|, the assembled attack's value."""
    eps = check_noise(eps)
    code = check_prefix_code(code, f.n)
    gain = sum((Fraction(1, 2 ** len(c)) * abs(influence(f, c)) for c in code), Fraction(0))
    return Fraction(1, 2) + 2 * eps * gain


class PrefixSearchResult(NamedTuple):
    code: tuple[str, ...]
    value: Fraction
    constant_f: bool


def best_prefix_attack(f: BooleanFunction, eps, max_depth: int | None = None) -> PrefixSearchResult:
    """Exhaustive search over prefix-free codes; ties keep the first code found.

    A constant f has no influential bit: the search reports 1/2 and sets
    ``constant_f`` (Eve could of course just output the constant).
    """
    if f.n > MAX_PREFIX_N:
        raise SizeGuardError(f"prefix search limited to n <= {MAX_PREFIX_N}")
    if max_depth is None:
        max_depth = f.n - 1
    if not 0 <= max_depth <= f.n - 1:
        raise ValueError(f"max_depth must lie in 0..{f.n - 1}")
    eps = check_noise(eps)
    # per-node gain, computed once; the code value is additive over codewords
    gain = {}
    for length in range(max_depth + 1):
        for word in itertools.product("01", repeat=length):
            w = "".join(word)
            gain[w] = Fraction(1, 2**length) * abs(influence(f, w))
    best_code, best_gain = (), Fraction(-1)
    for code in prefix_codes(max_depth):
        g = sum((gain[c] for c in code), Fraction(0))
        if g > best_gain:
            best_code, best_gain = code, g
    return PrefixSearchResult(tuple(sorted(best_code, key=lambda c: (len(c), c))),
                              Fraction(1, 2) + 2 * eps * best_gain, f.is_constant())

