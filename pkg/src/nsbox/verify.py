"""Exact no-signalling and time-ordered no-signalling (TONS) checks.

Every check works on an integer image of the box (all entries scaled by
the common denominator), so equalities are exact and numpy can do the
heavy lifting.  Equality instances are enumerated pairwise over input
settings for small instances.  Above ``PAIRWISE_LIMIT`` compared values the
checker first compares each setting against the all-zero reference and
enumerates pairs only in the rows where that comparison finds a difference.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .box import Box, integer_image

__all__ = [
    "CausalOrder",
    "Violation",
    "ViolationReport",
    "check_no_signalling",
    "check_tons",
    "check_extension",
    "tons_equality_count",
]

PAIRWISE_LIMIT = 2**22


@dataclass(frozen=True)
class CausalOrder:
    """Round counts per party; round i of a party precedes round j iff i < j."""

    rounds: tuple[int, ...]

    @classmethod
    def from_box(cls, box: Box) -> "CausalOrder":
        return cls(tuple(p.rounds for p in box.parties))

    @classmethod
    def attack(cls, n: int) -> "CausalOrder":
        """Alice and Bob with ``n`` rounds each, Eve with a single system."""
        return cls((n, n, 1))

    def prefixes(self):
        return itertools.product(*(range(r + 1) for r in self.rounds))


@dataclass(frozen=True)
class Violation:
    condition: str
    kept: tuple[int, ...]
    varied: tuple[int, ...]
    fixed_inputs: tuple[int, ...]
    settings: tuple[tuple[int, ...], tuple[int, ...]] | None
    outputs: tuple[int, ...]
    values: tuple[Fraction, Fraction]

    def describe(self) -> str:
        where = f"outputs {self.outputs} on systems {list(self.kept)}"
        if self.settings is None:
            return (f"{self.condition}: {where} at inputs {self.fixed_inputs}: "
                    f"{self.values[0]} != {self.values[1]}")
        return (f"{self.condition}: {where}, inputs of systems {list(self.varied)} "
                f"{self.settings[0]} vs {self.settings[1]} "
                f"(others fixed at {self.fixed_inputs}): {self.values[0]} != {self.values[1]}")

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "kept_systems": list(self.kept),
            "varied_systems": list(self.varied),
            "fixed_inputs": list(self.fixed_inputs),
            "settings": None if self.settings is None else [list(s) for s in self.settings],
            "outputs": list(self.outputs),
            "values": [_frac_str(v) for v in self.values],
        }


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass
class ViolationReport:
    checked: int = 0
    violations: list[Violation] = field(default_factory=list)
    n_violations: int = 0
    max_violations: int = 100

    @property
    def ok(self) -> bool:
        return self.n_violations == 0

    def __bool__(self):
        return self.ok

    def add(self, violation: Violation) -> None:
        self.n_violations += 1
        if len(self.violations) < self.max_violations:
            self.violations.append(violation)

    def merge(self, other: "ViolationReport") -> "ViolationReport":
        self.checked += other.checked
        for v in other.violations:
            if len(self.violations) < self.max_violations:
                self.violations.append(v)
        self.n_violations += other.n_violations
        return self

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checked": self.checked,
            "n_violations": self.n_violations,
            "violations": [v.to_dict() for v in self.violations],
        }


def _check_independence(ints, den, box: Box, kept: Sequence[int], varied: Sequence[int],
                        condition: str, report: ViolationReport) -> None:
    """Compare the marginal on ``kept`` across all settings of the ``varied`` inputs."""
    n = box.n_systems
    kept = sorted(kept)
    varied = sorted(varied)
    fixed = [s for s in range(n) if s not in varied]
    summed = tuple(n + s for s in range(n) if s not in kept)
    m = ints.sum(axis=summed) if summed else ints
    # m axes: all n input axes, then kept output axes
    m = np.transpose(m, fixed + varied + list(range(n, n + len(kept))))
    in_sizes = box.input_sizes()
    out_sizes = box.output_sizes()
    f_shape = [in_sizes[s] for s in fixed]
    v_shape = [in_sizes[s] for s in varied]
    o_shape = [out_sizes[s] for s in kept]
    F, V, O = math.prod(f_shape), math.prod(v_shape), math.prod(o_shape)
    m = m.reshape(F, V, O)
    report.checked += F * V * V * O
    if V == 1:
        return

    if F * V * V * O <= PAIRWISE_LIMIT:
        rows = np.arange(F)
    else:
        # only rows that differ from their first setting can hold a violation
        rows = np.nonzero(np.any(m != m[:, :1, :], axis=(1, 2)))[0]
        if not len(rows):
            return
    sub = m[rows]
    unequal = sub[:, :, None, :] != sub[:, None, :, :]
    upper = np.triu(np.ones((V, V), dtype=bool), k=1)
    unequal &= upper[None, :, :, None]
    hits = np.nonzero(unequal)
    for f, v1, v2, o in zip(rows[hits[0]], *hits[1:]):
        report.add(Violation(
            condition=condition,
            kept=tuple(kept),
            varied=tuple(varied),
            fixed_inputs=tuple(int(i) for i in np.unravel_index(f, f_shape)) if f_shape else (),
            settings=(tuple(int(i) for i in np.unravel_index(v1, v_shape)),
                      tuple(int(i) for i in np.unravel_index(v2, v_shape))),
            outputs=tuple(int(i) for i in np.unravel_index(o, o_shape)) if o_shape else (),
            values=(Fraction(int(m[f, v1, o]), den), Fraction(int(m[f, v2, o]), den)),
        ))


def _check_indices(box: Box, systems: Iterable[int]) -> list[int]:
    systems = list(systems)
    n = box.n_systems
    for s in systems:
        if not 0 <= s < n:
            raise IndexError(f"system index {s} out of range 0..{n - 1}")
    if len(set(systems)) != len(systems):
        raise ValueError(f"repeated system index in {systems}")
    return systems


def check_no_signalling(box: Box, partition, *, max_violations: int = 100) -> ViolationReport:
    """Check that systems ``partition[0]`` cannot signal to systems ``partition[1]``.

    Systems in neither set are marginalised over; their inputs are held
    fixed and enumerated.
    """
    senders, receivers = partition
    senders = _check_indices(box, senders)
    receivers = _check_indices(box, receivers)
    if set(senders) & set(receivers):
        raise ValueError("partition sets must be disjoint")
    report = ViolationReport(max_violations=max_violations)
    if not senders or not receivers:
        return report
    ints, den = integer_image(box.table)
    _check_independence(ints, den, box, receivers, senders,
                        f"ns({sorted(senders)}->{sorted(receivers)})", report)
    return report


def check_tons(box: Box, order: CausalOrder | None = None, *,
               max_violations: int = 100) -> ViolationReport:
    """Check every time-ordered no-signalling equality.

    For each choice of prefix lengths (one per party, ``0..rounds``), the
    marginal on the union of those prefixes must not depend on the inputs
    of any later system.  With the Alice/Bob/Eve layout the prefix tuple is
    exactly ``(i, j, k)``.
    """
    if order is None:
        order = CausalOrder.from_box(box)
    if tuple(p.rounds for p in box.parties) != tuple(order.rounds):
        raise ValueError(
            f"causal order {order.rounds} does not match box rounds "
            f"{tuple(p.rounds for p in box.parties)}"
        )
    ints, den = integer_image(box.table)
    report = ViolationReport(max_violations=max_violations)
    starts = np.cumsum([0] + [p.rounds for p in box.parties])
    for prefix in order.prefixes():
        kept = [int(starts[p]) + r for p, length in enumerate(prefix) for r in range(length)]
        varied = [s for s in range(box.n_systems) if s not in kept]
        label = "tons(" + ",".join(map(str, prefix)) + ")"
        _check_independence(ints, den, box, kept, varied, label, report)
    return report


def tons_equality_count(box: Box) -> int:
    """Number of equality instances ``check_tons`` enumerates (ordered setting pairs)."""
    ins, outs = box.input_sizes(), box.output_sizes()
    starts = np.cumsum([0] + [p.rounds for p in box.parties])
    total = 0
    for prefix in CausalOrder.from_box(box).prefixes():
        kept = {int(starts[p]) + r for p, length in enumerate(prefix) for r in range(length)}
        fixed = math.prod(ins[s] * outs[s] for s in kept)
        future = math.prod(ins[s] for s in range(box.n_systems) if s not in kept)
        total += fixed * future**2
    return total


def check_extension(extension: Box, base: Box, kept: Sequence[int], *,
                    max_violations: int = 100) -> tuple[bool, ViolationReport]:
    """Check that ``extension`` is a no-signalling extension of ``base``.

    ``kept[i]`` is the extension system playing the role of base system
    ``i``.  The kept systems and the rest must not signal to each other in
    either direction, and the marginal on the kept systems must equal
    ``base``.  A base input alphabet of size 1 means the marginal must
    equal the base for every input of that system.
    """
    kept = _check_indices(extension, kept)
    if len(kept) != base.n_systems:
        raise ValueError(f"kept selects {len(kept)} systems, base has {base.n_systems}")
    ext_in, ext_out = extension.input_sizes(), extension.output_sizes()
    base_in, base_out = base.input_sizes(), base.output_sizes()
    for i, s in enumerate(kept):
        if ext_out[s] != base_out[i] or base_in[i] not in (1, ext_in[s]):
            raise ValueError(f"alphabet mismatch between extension system {s} and base system {i}")

    rest = [s for s in range(extension.n_systems) if s not in kept]
    report = ViolationReport(max_violations=max_violations)
    if rest:
        report.merge(check_no_signalling(extension, (rest, kept), max_violations=max_violations))
        report.merge(check_no_signalling(extension, (kept, rest), max_violations=max_violations))
    if not report.ok:
        return False, report

    n = extension.n_systems
    table = extension.table
    if rest:
        table = table.sum(axis=tuple(n + s for s in rest))
        table = table[tuple(0 if s in rest else slice(None) for s in range(n))]
    # put kept systems in the caller's order
    by_index = sorted(kept)
    perm = [by_index.index(s) for s in kept]
    k = len(kept)
    table = np.transpose(table, perm + [k + p for p in perm])
    expected = np.broadcast_to(base.table, table.shape)
    mismatch = table != expected
    report.checked += table.size
    for idx in zip(*np.nonzero(mismatch)):
        idx = tuple(int(i) for i in idx)
        report.add(Violation(
            condition="marginal",
            kept=tuple(kept),
            varied=(),
            fixed_inputs=idx[:k],
            settings=None,
            outputs=idx[k:],
            values=(table[idx], expected[idx]),
        ))
    return report.ok, report
