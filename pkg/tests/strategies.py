"""Shared generators for exact random boxes and attack distributions."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from nsbox.attacks import ClassicalJoint, all_subsets
from nsbox.boolean import BooleanFunction

noise = st.fractions(min_value=0, max_value=Fraction(1, 2), max_denominator=40)


def random_rational(rng: random.Random, den: int = 12) -> Fraction:
    return Fraction(rng.randint(0, den), den)


def random_distribution(rng: random.Random, size: int, den: int = 10) -> list[Fraction]:
    weights = [rng.randint(0, den) for _ in range(size)]
    if not any(weights):
        weights[rng.randrange(size)] = 1
    total = sum(weights)
    return [Fraction(w, total) for w in weights]


def random_joint(rng: random.Random, n: int) -> ClassicalJoint:
    """Arbitrary distribution over (a, e), no structure assumed."""
    return ClassicalJoint(n, random_distribution(rng, 2 ** (n + 1)))


def random_s_influenceable(rng: random.Random, n: int, S) -> ClassicalJoint:
    """Random rational ordered S-influenceable joint.

    A mixture of two members, each with Alice uniform.  In the first, Eve's
    bit depends on a only through a_S, via a random rational response.  In
    the second, e = a_j xor phi(a_<j) with j the last member of S, so e
    also correlates with earlier bits outside S while each of them stays
    fair given its past and e.
    """
    S = sorted(S)
    response = {}
    phi = {}
    t = Fraction(rng.randint(0, 4), 4) if S else Fraction(1)
    table = np.empty((2,) * (n + 1), dtype=object)
    for a in itertools.product((0, 1), repeat=n):
        key = tuple(a[i - 1] for i in S)
        if key not in response:
            response[key] = random_rational(rng)
        r = t * response[key]
        if S:
            j = S[-1]
            past = a[: j - 1]
            if past not in phi:
                phi[past] = rng.randint(0, 1)
            if a[j - 1] ^ phi[past]:
                r += 1 - t
        table[a + (1,)] = r / 2**n
        table[a + (0,)] = (1 - r) / 2**n
    return ClassicalJoint(n, table)


def random_family(rng: random.Random, n: int) -> dict:
    return {S: random_s_influenceable(rng, n, S) for S in all_subsets(n)}


def random_function(rng: random.Random, n: int) -> BooleanFunction:
    return BooleanFunction(n, table=[rng.randint(0, 1) for _ in range(2**n)], name="random")
