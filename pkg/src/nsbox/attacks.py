"""Classical attack distributions Q(a_1..a_n, e) and their TONS extension.

Round subsets ``S`` are 1-based sets of indices into Alice's bits.  A
:class:`ClassicalJoint` stores Q as an exact array of shape ``(2,)*n + (2,)``
so ``table[a_1, ..., a_n, e]`` is the probability of that atom; flattening
in C order gives the ``(a as big-endian bits) * 2 + e`` index used on disk.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .box import (
    Box,
    PartySpec,
    _guard,
    check_noise,
    integer_image,
    make_uniform,
    tensor,
    to_fraction,
    v_box_problems,
)
from .boolean import BooleanFunction, maj_of

__all__ = [
    "ClassicalJoint",
    "as_subset",
    "all_subsets",
    "s_influenceable_problems",
    "validate_s_influenceable",
    "weight",
    "assemble_divisible",
    "build_tons_extension",
    "divisible_extension",
    "joint_as_box",
    "round_boxes",
    "extension_reports",
    "influence",
    "check_prefix_code",
    "is_complete_code",
    "prefix_code_attack",
    "prefix_code_family",
    "majority_attack",
    "majority_family",
]

HALF = Fraction(1, 2)


class ClassicalJoint:
    """Exact distribution over Alice's n bits and Eve's bit."""

    __slots__ = ("n", "table")

    def __init__(self, n: int, table, *, check: bool = True):
        table = np.asarray(table, dtype=object)
        if table.size != 2 ** (n + 1):
            raise ValueError(f"joint over n={n} bits needs {2 ** (n + 1)} atoms, got {table.size}")
        table = table.reshape((2,) * (n + 1))
        if check:
            table = np.vectorize(to_fraction, otypes=[object])(table)
            if any(p < 0 for p in table.flat):
                raise ValueError("negative probability in joint")
            total = sum(table.flat, Fraction(0))
            if total != 1:
                raise ValueError(f"joint sums to {total}, not 1")
        table.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "table", table)

    def __setattr__(self, name, value):
        raise AttributeError("ClassicalJoint is immutable")

    @classmethod
    def uniform(cls, n: int) -> "ClassicalJoint":
        table = np.empty((2,) * (n + 1), dtype=object)
        table.fill(Fraction(1, 2 ** (n + 1)))
        return cls(n, table, check=False)

    def prefix_marginal(self, i: int) -> np.ndarray:
        """Q(a_1..a_i, e), shape ``(2,)*i + (2,)``."""
        if i == self.n:
            return self.table
        return self.table.sum(axis=tuple(range(i, self.n)))

    def eve_marginal(self) -> np.ndarray:
        return self.prefix_marginal(0)

    def alice_marginal(self) -> np.ndarray:
        return self.table.sum(axis=-1)

    def flat(self) -> list[Fraction]:
        return list(self.table.flat)

    def __eq__(self, other):
        if not isinstance(other, ClassicalJoint):
            return NotImplemented
        return self.n == other.n and bool(np.all(self.table == other.table))

    def __hash__(self):
        return hash((self.n, tuple(self.table.flat)))

    def __repr__(self):
        return f"ClassicalJoint(n={self.n})"


def as_subset(S: Iterable[int], n: int) -> frozenset[int]:
    S = frozenset(int(i) for i in S)
    bad = [i for i in S if not 1 <= i <= n]
    if bad:
        raise ValueError(f"subset members {sorted(bad)} outside 1..{n}")
    return S


def all_subsets(n: int) -> list[frozenset[int]]:
    """Every subset of {1..n}, ordered by size then lexicographically."""
    return [frozenset(c) for k in range(n + 1) for c in itertools.combinations(range(1, n + 1), k)]


def s_influenceable_problems(q: ClassicalJoint, S: Iterable[int]) -> list[str]:
    """Violations of the ordered S-influenceable conditions (empty if none).

    Uniformity: sum_e Q(a, e) = 2^-n for every a.  Untouched bits: for each
    i outside S, Q(a_i | a_<i, e) = 1/2 wherever the conditioning event has
    positive probability, i.e. Q(a_<i, 0, e) == Q(a_<i, 1, e).
    """
    S = as_subset(S, q.n)
    n = q.n
    problems = []
    ints, den = integer_image(q.table)
    alice = ints.sum(axis=-1)
    bad = np.argwhere(alice * 2**n != den)
    if len(bad):
        a = tuple(int(v) for v in bad[0])
        problems.append(f"sum_e Q(a={''.join(map(str, a))}, e) = {Fraction(alice[a], den)}, "
                        f"expected {Fraction(1, 2**n)}")
    for i in range(1, n + 1):
        if i in S:
            continue
        m = ints.sum(axis=tuple(range(i, n))) if i < n else ints
        zero, one = m[(slice(None),) * (i - 1) + (0,)], m[(slice(None),) * (i - 1) + (1,)]
        diff = zero != one
        if np.any(diff):
            idx = tuple(int(v) for v in np.argwhere(diff)[0])
            prefix, e = "".join(map(str, idx[:-1])), idx[-1]
            problems.append(f"bit a_{i} is biased after prefix '{prefix}' given e={e}")
    return problems


def validate_s_influenceable(q: ClassicalJoint, S: Iterable[int]) -> tuple[bool, list[str]]:
    problems = s_influenceable_problems(q, S)
    return not problems, problems


def weight(S: Iterable[int], n: int, eps) -> Fraction:
    """(1 - 2 eps)^(n - |S|) (2 eps)^|S|."""
    S = as_subset(S, n)
    eps = check_noise(eps)
    return (1 - 2 * eps) ** (n - len(S)) * (2 * eps) ** len(S)


def assemble_divisible(family: Mapping[frozenset, ClassicalJoint], eps, *,
                       validate: bool = True) -> ClassicalJoint:
    """The ordered (eps, S)-divisible mixture sum_S weight(S) Q_S."""
    eps = check_noise(eps)
    members = {frozenset(k): v for k, v in family.items()}
    if not members:
        raise ValueError("empty family")
    n = next(iter(members.values())).n
    missing = [sorted(S) for S in all_subsets(n) if S not in members]
    if missing:
        raise ValueError(f"family is missing subsets {missing[:5]}{'...' if len(missing) > 5 else ''}")
    # accumulate integer images over a common denominator, divide once
    terms = []
    for S in all_subsets(n):
        q = members[S]
        if q.n != n:
            raise ValueError(f"member for S={sorted(S)} has n={q.n}, expected {n}")
        if validate:
            problems = s_influenceable_problems(q, S)
            if problems:
                raise ValueError(f"member for S={sorted(S)} is not S-influenceable: {problems[0]}")
        w = weight(S, n, eps)
        if w:
            ints, den = integer_image(q.table)
            terms.append((w.numerator, w.denominator * den, ints))
    common = math.lcm(*(d for _, d, _ in terms))
    total = sum(ints.astype(object) * (num * (common // d)) for num, d, ints in terms)
    table = np.vectorize(lambda v: Fraction(v, common), otypes=[object])(total)
    return ClassicalJoint(n, table, check=False)


def build_tons_extension(q: ClassicalJoint, S: Iterable[int], v: Box) -> Box:
    """Extend an ordered S-influenceable Q to a (2n+1)-system TONS attack.

    Eve's bit is drawn from Q(e).  Round i then runs the V box if i is
    outside S; otherwise Alice's bit follows Q(a_i | a_<i, e) and Bob's
    output is uniform.  Systems: Alice rounds 1..n, Bob rounds 1..n, Eve
    (one input letter, binary output).
    """
    S = as_subset(S, q.n)
    problems = s_influenceable_problems(q, S)
    if problems:
        raise ValueError(f"Q is not S-influenceable: {problems[0]}")
    problems = v_box_problems(v)
    if problems:
        raise ValueError(f"not a V box: {problems[0]}")

    n = q.n
    alice_spec, bob_spec = v.parties
    kx, ky, mb = alice_spec.inputs, bob_spec.inputs, bob_spec.outputs
    parties = [PartySpec(kx, 2, n), PartySpec(ky, mb, n), PartySpec(1, 2, 1)]
    shape = Box.shape_for(parties)
    _guard(int(np.prod(shape, dtype=object)))

    # Eve's part: Q(e) * prod_{i in S} Q(a_i | a_<i, e), over (a_1..a_n, e).
    eve_part = np.empty((2,) * (n + 1), dtype=object)
    eve_part.fill(Fraction(1))
    eve_part = eve_part * q.eve_marginal().reshape((1,) * n + (2,))
    for i in sorted(S):
        joint_i = q.prefix_marginal(i)
        prev = q.prefix_marginal(i - 1)
        prev = np.expand_dims(prev, axis=i - 1)
        cond = np.empty(joint_i.shape, dtype=object)
        for idx in np.ndindex(*joint_i.shape):
            p = prev[idx[:i - 1] + (0,) + idx[i:]]
            cond[idx] = joint_i[idx] / p if p else Fraction(0)
        eve_part = eve_part * cond.reshape(joint_i.shape[:i] + (1,) * (n - i) + (2,))

    # Assemble on axes (x_1..x_n, y_1..y_n, u, a_1..a_n, b_1..b_n, e).
    axes = 2 * n + 1
    full_rank = 2 * axes

    def place(arr, positions):
        out_shape = [1] * full_rank
        for axis_pos, size in zip(positions, arr.shape):
            out_shape[axis_pos] = size
        order = np.argsort(positions)
        return np.transpose(arr, order).reshape(out_shape)

    a_pos = [axes + k for k in range(n)]
    b_pos = [axes + n + k for k in range(n)]
    e_pos = axes + 2 * n
    table = place(eve_part, a_pos + [e_pos])
    u_bob = Fraction(1, mb)
    for i in range(1, n + 1):
        if i in S:
            table = table * u_bob
        else:
            # V(a_i b_i | x_i y_i), table axes (x, y, a, b)
            table = table * place(v.table, [i - 1, n + i - 1, a_pos[i - 1], b_pos[i - 1]])
    table = np.broadcast_to(table, shape).copy()
    return Box(parties, table, check=False)


def divisible_extension(family: Mapping[frozenset, ClassicalJoint], eps, v: Box) -> Box:
    """Weighted mixture of the per-S extensions: an attack on the noisy V box, n times.

    Its Alice/Bob marginal is the n-fold product of ``mix_noise(v, eps)``
    and its Alice/Eve marginal is the assembled divisible distribution.
    """
    eps = check_noise(eps)
    members = {frozenset(k): q for k, q in family.items()}
    n = next(iter(members.values())).n
    total = None
    for S in all_subsets(n):
        w = weight(S, n, eps)
        if not w:
            continue
        part = w * build_tons_extension(members[S], S, v).table
        total = part if total is None else total + part
    parties = [PartySpec(v.parties[0].inputs, 2, n),
               PartySpec(v.parties[1].inputs, v.parties[1].outputs, n),
               PartySpec(1, 2, 1)]
    return Box(parties, total, check=False)


def joint_as_box(q: ClassicalJoint) -> Box:
    """Q(a, e) as a box: Alice with n one-letter rounds, Eve with one."""
    return Box([PartySpec(1, 2, q.n), PartySpec(1, 2, 1)], q.table)


def round_boxes(v: Box, S: Iterable[int], n: int) -> list[Box]:
    """What Alice and Bob see per round under the S-extension: v outside S, uniform inside."""
    S = as_subset(S, n)
    u = make_uniform(v.parties)
    return [u if i in S else v for i in range(1, n + 1)]


def extension_reports(extension: Box, q: ClassicalJoint, rounds: Sequence[Box]) -> dict:
    """TONS check plus both marginal checks for an attack built on ``n`` rounds.

    ``rounds[i]`` is the single-round box Alice and Bob should see in round
    ``i + 1``; ``q`` is the joint Alice and Eve should see.
    """
    from .verify import check_extension, check_tons

    n = q.n
    if len(rounds) != n:
        raise ValueError(f"need {n} round boxes, got {len(rounds)}")
    tons = check_tons(extension)
    _, ab = check_extension(extension, tensor(rounds), list(range(2 * n)))
    _, ae = check_extension(extension, joint_as_box(q), list(range(n)) + [2 * n])
    return {"tons": tons, "alice_bob": ab, "alice_eve": ae}


def _bits(prefix) -> tuple[int, ...]:
    if isinstance(prefix, str):
        if any(c not in "01" for c in prefix):
            raise ValueError(f"not a binary string: {prefix!r}")
        return tuple(int(c) for c in prefix)
    return tuple(int(b) for b in prefix)


def influence(f: BooleanFunction, prefix) -> Fraction:
    """Half the drop in Q(f=0) when bit |prefix|+1 goes from 0 to 1, under uniform a."""
    prefix = _bits(prefix)
    if len(prefix) > f.n - 1:
        raise ValueError(f"prefix of length {len(prefix)} leaves no bit to flip in arity {f.n}")
    sub = f.table[prefix]
    size = sub[0].size
    zeros0 = size - int(sub[0].sum())
    zeros1 = size - int(sub[1].sum())
    return Fraction(zeros0 - zeros1, 2 * size)


def check_prefix_code(code: Sequence[str], n: int) -> list[str]:
    code = ["".join(map(str, _bits(c))) for c in code]
    if len(set(code)) != len(code):
        raise ValueError("repeated codeword")
    for c in code:
        if len(c) > n - 1:
            raise ValueError(f"codeword {c!r} has length {len(c)} > n-1 = {n - 1}")
    for c, d in itertools.permutations(code, 2):
        if d.startswith(c):
            raise ValueError(f"not prefix-free: {c!r} is a prefix of {d!r}")
    return code


def is_complete_code(code: Sequence[str]) -> bool:
    """Kraft equality: the codewords cover every infinite binary string."""
    return sum((Fraction(1, 2 ** len(c)) for c in code), Fraction(0)) == 1


def prefix_code_attack(f: BooleanFunction, code: Sequence[str], S: Iterable[int]) -> ClassicalJoint:
    """Eve's uniform bit, with bit |c|+1 pushed to e after codeword c when |c|+1 is in S.

    The push follows the sign of the influence: towards e if positive,
    towards 1-e if negative, and not at all if the influence is zero.
    """
    n = f.n
    S = as_subset(S, n)
    code = check_prefix_code(code, n)
    base = Fraction(1, 2 ** (n + 1))
    table = np.empty((2,) * (n + 1), dtype=object)
    table.fill(base)
    for c in code:
        i = len(c) + 1
        if i not in S:
            continue
        delta = influence(f, c)
        if delta == 0:
            continue
        flip = 0 if delta > 0 else 1
        prefix = _bits(c)
        for ai, e in itertools.product((0, 1), repeat=2):
            idx = prefix + (ai,) + (slice(None),) * (n - i) + (e,)
            table[idx] = 2 * base if ai == e ^ flip else Fraction(0)
    return ClassicalJoint(n, table, check=False)


def prefix_code_family(f: BooleanFunction, code: Sequence[str]) -> dict[frozenset, ClassicalJoint]:
    return {S: prefix_code_attack(f, code, S) for S in all_subsets(f.n)}


def majority_attack(n: int, S: Iterable[int]) -> ClassicalJoint:
    """e = Maj_S(a_S) with a uniform; even |S| drops the last member of S."""
    S = as_subset(S, n)
    if not S:
        raise ValueError("majority attack needs a nonempty S")
    members = sorted(S)
    p = Fraction(1, 2**n)
    table = np.empty((2,) * (n + 1), dtype=object)
    table.fill(Fraction(0))
    for a in itertools.product((0, 1), repeat=n):
        table[a + (maj_of([a[i - 1] for i in members]),)] = p
    return ClassicalJoint(n, table, check=False)


def majority_family(n: int) -> dict[frozenset, ClassicalJoint]:
    """Majority attack for every nonempty S; S = {} gets the uniform joint."""
    family = {S: majority_attack(n, S) for S in all_subsets(n) if S}
    family[frozenset()] = ClassicalJoint.uniform(n)
    return family
