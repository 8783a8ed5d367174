"""Exact conditional-probability boxes.

A box over parties ``p = 0..m-1``, each holding ``rounds`` time-ordered
subsystems with fixed input/output alphabets, is stored as a numpy object
array of :class:`fractions.Fraction`.  Axes are laid out row-major as::

    (inputs of party 0 rounds 1..r0, inputs of party 1 rounds 1..r1, ...,
     outputs of party 0 rounds 1..r0, outputs of party 1 rounds 1..r1, ...)

with letter 0 first on every axis.  Subsystems are addressed by a flat
*system index* following the same party-major, round-minor order.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PartySpec",
    "Box",
    "TableTooLarge",
    "SignallingError",
    "to_fraction",
    "max_table_entries",
    "make_uniform",
    "make_pr",
    "make_deterministic",
    "mix_noise",
    "tensor",
    "marginal",
    "v_box_problems",
    "is_valid_v_box",
]

DEFAULT_MAX_TABLE = 2**26


class TableTooLarge(ValueError):
    """Raised instead of materialising a table above the entry guard."""


class SignallingError(ValueError):
    """Raised when a marginal is requested across a signalling cut."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


def max_table_entries() -> int:
    value = os.environ.get("NSBOX_MAX_TABLE")
    return int(value) if value else DEFAULT_MAX_TABLE


def _guard(size: int) -> None:
    limit = max_table_entries()
    if size > limit:
        raise TableTooLarge(
            f"table would have {size} entries, above the guard of {limit} "
            "(set NSBOX_MAX_TABLE to override)"
        )


def to_fraction(value) -> Fraction:
    """Parse an exact rational from ``Fraction``, ``int`` or a ``"p/q"`` string.

    Floats are refused: binary floats silently turn 1/10 into a 55-bit
    denominator.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (bool, float, np.floating)):
        raise TypeError(f"refusing inexact value {value!r}; pass a 'p/q' string")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


def check_noise(eps) -> Fraction:
    eps = to_fraction(eps)
    if not 0 <= eps <= Fraction(1, 2):
        raise ValueError(f"noise level must lie in [0, 1/2], got {eps}")
    return eps


@dataclass(frozen=True)
class PartySpec:
    inputs: int
    outputs: int
    rounds: int = 1

    def __post_init__(self):
        for name in ("inputs", "outputs", "rounds"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ValueError(f"PartySpec.{name} must be a positive integer, got {value!r}")


def _fraction_array(shape, fill=Fraction(0)) -> np.ndarray:
    arr = np.empty(shape, dtype=object)
    arr.fill(fill)
    return arr


class Box:
    """Immutable exact box ``P(outputs | inputs)``."""

    __slots__ = ("parties", "table")

    def __init__(self, parties: Sequence[PartySpec], table, *, check: bool = True):
        parties = tuple(parties)
        if not parties:
            raise ValueError("a box needs at least one party")
        shape = self.shape_for(parties)
        _guard(math.prod(shape))
        table = np.asarray(table, dtype=object)
        if table.size != math.prod(shape):
            raise ValueError(f"table has {table.size} entries, layout needs {math.prod(shape)}")
        table = table.reshape(shape)
        if check:
            table = np.vectorize(to_fraction, otypes=[object])(table)
        table.setflags(write=False)
        object.__setattr__(self, "parties", parties)
        object.__setattr__(self, "table", table)
        if check:
            self._validate()

    def __setattr__(self, name, value):
        raise AttributeError("Box is immutable")

    @staticmethod
    def shape_for(parties: Sequence[PartySpec]) -> tuple[int, ...]:
        ins = [p.inputs for p in parties for _ in range(p.rounds)]
        outs = [p.outputs for p in parties for _ in range(p.rounds)]
        return tuple(ins + outs)

    def _validate(self) -> None:
        flat = self.table.reshape(self.n_input_settings, -1)
        for row, probs in enumerate(flat):
            if any(p < 0 for p in probs):
                raise ValueError(f"negative probability in input setting {row}")
            total = sum(probs, Fraction(0))
            if total != 1:
                raise ValueError(f"input setting {row} sums to {total}, not 1")

    # layout helpers

    @property
    def systems(self) -> list[tuple[int, int]]:
        """(party, round) per flat system index."""
        return [(p, r) for p, spec in enumerate(self.parties) for r in range(spec.rounds)]

    @property
    def n_systems(self) -> int:
        return sum(p.rounds for p in self.parties)

    def party_systems(self, party: int) -> list[int]:
        start = sum(p.rounds for p in self.parties[:party])
        return list(range(start, start + self.parties[party].rounds))

    def input_sizes(self) -> list[int]:
        return [p.inputs for p in self.parties for _ in range(p.rounds)]

    def output_sizes(self) -> list[int]:
        return [p.outputs for p in self.parties for _ in range(p.rounds)]

    @property
    def n_input_settings(self) -> int:
        return math.prod(self.input_sizes())

    def prob(self, inputs: Sequence[int], outputs: Sequence[int]) -> Fraction:
        return self.table[tuple(inputs) + tuple(outputs)]

    def __eq__(self, other):
        if not isinstance(other, Box):
            return NotImplemented
        return self.parties == other.parties and bool(np.all(self.table == other.table))

    def __hash__(self):
        return hash((self.parties, tuple(self.table.flat)))

    def __repr__(self):
        return f"Box(parties={list(self.parties)}, entries={self.table.size})"


def integer_image(table: np.ndarray) -> tuple[np.ndarray, int]:
    """``(ints, den)`` with ``table == ints / den`` over a common denominator.

    ``ints`` is int64 when no partial sum of entries in [0, 1] can overflow,
    Python integers otherwise.
    """
    flat = table.ravel()
    den = math.lcm(*{f.denominator for f in flat})
    ints = np.array([f.numerator * (den // f.denominator) for f in flat], dtype=object)
    if den * max(flat.size, 4) < 2**62:
        ints = ints.astype(np.int64)
    return ints.reshape(table.shape), den


def make_uniform(parties: Sequence[PartySpec]) -> Box:
    parties = tuple(parties)
    shape = Box.shape_for(parties)
    n_in = sum(p.rounds for p in parties)
    _guard(math.prod(shape))
    value = Fraction(1, math.prod(shape[n_in:]))
    return Box(parties, _fraction_array(shape, value), check=False)


def make_pr() -> Box:
    """The PR box: 1/2 when a xor b == x and y, else 0."""
    table = _fraction_array((2, 2, 2, 2))
    for x, y, a, b in np.ndindex(2, 2, 2, 2):
        if a ^ b == x & y:
            table[x, y, a, b] = Fraction(1, 2)
    return Box([PartySpec(2, 2), PartySpec(2, 2)], table, check=False)


def make_deterministic(parties: Sequence[PartySpec], rule) -> Box:
    """Box putting all mass on ``rule(inputs) -> outputs`` (both flat tuples)."""
    parties = tuple(parties)
    shape = Box.shape_for(parties)
    k = sum(p.rounds for p in parties)
    _guard(math.prod(shape))
    table = _fraction_array(shape)
    for inputs in np.ndindex(*shape[:k]):
        table[inputs + tuple(rule(inputs))] = Fraction(1)
    return Box(parties, table)


def mix_noise(box: Box, eps) -> Box:
    """``(1 - 2 eps) P + 2 eps U``, entrywise."""
    eps = check_noise(eps)
    uniform = make_uniform(box.parties).table
    table = (1 - 2 * eps) * box.table + (2 * eps) * uniform
    return Box(box.parties, table, check=False)


def tensor(factors: Sequence[Box]) -> Box:
    """Independent product, appending each factor's rounds after the previous ones.

    Every factor must have the same number of parties with matching
    per-party alphabets; the result's party ``p`` holds the rounds of party
    ``p`` of all factors in order.
    """
    factors = list(factors)
    if not factors:
        raise ValueError("tensor needs at least one factor")
    first = factors[0]
    for f in factors[1:]:
        if len(f.parties) != len(first.parties):
            raise ValueError("mismatched party counts in tensor product")
        for p, q in zip(f.parties, first.parties):
            if (p.inputs, p.outputs) != (q.inputs, q.outputs):
                raise ValueError(f"mismatched alphabets in tensor product: {p} vs {q}")
    parties = tuple(
        PartySpec(spec.inputs, spec.outputs, sum(f.parties[p].rounds for f in factors))
        for p, spec in enumerate(first.parties)
    )
    _guard(math.prod(Box.shape_for(parties)))

    table = factors[0].table
    for f in factors[1:]:
        table = np.multiply.outer(table, f.table)

    # axis bookkeeping: (factor, kind, party, round) for each outer-product axis
    labels = []
    for fi, f in enumerate(factors):
        for kind in (0, 1):
            for p, spec in enumerate(f.parties):
                for r in range(spec.rounds):
                    labels.append((kind, p, fi, r))
    order = sorted(range(len(labels)), key=labels.__getitem__)
    return Box(parties, np.transpose(table, order), check=False)


def _sum_outputs(table: np.ndarray, n_systems: int, systems: Iterable[int]) -> np.ndarray:
    axes = tuple(n_systems + s for s in systems)
    if not axes:
        return table
    return table.sum(axis=axes)


def marginal(box: Box, keep: Iterable[int]) -> Box:
    """Marginal on the kept systems, after checking the rest cannot signal to them.

    Raises :class:`SignallingError` (carrying the violation report) when the
    discarded systems signal to the kept ones.
    """
    from .verify import check_no_signalling

    keep = sorted(set(keep))
    n = box.n_systems
    if any(s < 0 or s >= n for s in keep):
        raise IndexError(f"system index out of range 0..{n - 1}")
    if not keep:
        raise ValueError("cannot keep zero systems")
    drop = [s for s in range(n) if s not in keep]
    if drop:
        report = check_no_signalling(box, (drop, keep))
        if not report.ok:
            v = report.violations[0]
            raise SignallingError(
                f"systems {drop} signal to {keep}: {v.describe()}", report
            )
    table = _sum_outputs(box.table, n, drop)
    index = tuple(0 if s in drop else slice(None) for s in range(n))
    table = table[index]

    systems = box.systems
    parties = []
    for p, spec in enumerate(box.parties):
        rounds = sum(1 for s in keep if systems[s][0] == p)
        if rounds:
            parties.append(PartySpec(spec.inputs, spec.outputs, rounds))
    return Box(parties, table, check=False)


def v_box_problems(box: Box) -> list[str]:
    """Reasons why ``box`` is not a V box (empty list if it is one)."""
    from .verify import check_no_signalling

    if len(box.parties) != 2 or any(p.rounds != 1 for p in box.parties):
        return ["V box must be bipartite with one round per party"]
    if box.parties[0].outputs != 2:
        return ["Alice's output alphabet must be binary"]
    problems = []
    for part in (([0], [1]), ([1], [0])):
        report = check_no_signalling(box, part)
        if not report.ok:
            problems.append(f"signalling {part[0]}->{part[1]}: {report.violations[0].describe()}")
    alice = box.table.sum(axis=3)  # (x, y, a)
    for x, y, a in np.ndindex(*alice.shape):
        if alice[x, y, a] != Fraction(1, 2):
            problems.append(f"Alice marginal P(a={a}|x={x},y={y}) = {alice[x, y, a]}, not 1/2")
            break
    return problems


def is_valid_v_box(box: Box) -> bool:
    return not v_box_problems(box)
