"""Boolean functions on Alice's raw bits, indexed big-endian (a_1 first)."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

__all__ = ["BooleanFunction", "majority", "parity", "bit", "constant", "from_selector", "maj_of"]

MAX_TABULATED = 25


def maj_of(bits: Sequence[int]) -> int:
    """Majority of an odd-length bit sequence; even length drops the last bit."""
    bits = list(bits)
    if len(bits) % 2 == 0:
        bits = bits[:-1]
    if not bits:
        raise ValueError("majority of an empty sequence is undefined")
    return int(2 * sum(bits) > len(bits))


class BooleanFunction:
    """A total function {0,1}^n -> {0,1}.

    Stored as a truth table of shape ``(2,) * n`` when ``n <= 25``; beyond
    that only the procedural evaluator is available.
    """

    def __init__(self, n: int, *, table=None, func: Callable[[tuple], int] | None = None,
                 name: str = "custom"):
        if n < 1:
            raise ValueError("arity must be at least 1")
        if table is None and func is None:
            raise ValueError("need a truth table or an evaluator")
        self.n = n
        self.name = name
        self._func = func
        self._table = None
        if table is not None:
            table = np.asarray(table, dtype=np.uint8)
            if table.size != 2**n:
                raise ValueError(f"truth table needs {2**n} entries, got {table.size}")
            if np.any(table > 1):
                raise ValueError("truth table entries must be 0 or 1")
            self._table = table.reshape((2,) * n)
            self._table.setflags(write=False)

    @property
    def table(self) -> np.ndarray:
        if self._table is None:
            if self.n > MAX_TABULATED:
                raise ValueError(f"refusing to tabulate a function of arity {self.n} > {MAX_TABULATED}")
            t = np.empty((2,) * self.n, dtype=np.uint8)
            for idx in np.ndindex(*t.shape):
                t[idx] = self._func(idx)
            t.setflags(write=False)
            self._table = t
        return self._table

    def __call__(self, bits: Sequence[int]) -> int:
        bits = tuple(int(b) for b in bits)
        if len(bits) != self.n:
            raise ValueError(f"expected {self.n} bits, got {len(bits)}")
        if self._table is not None:
            return int(self._table[bits])
        return int(self._func(bits))

    def is_constant(self) -> bool:
        t = self.table
        return bool(np.all(t == t.flat[0]))

    def __repr__(self):
        return f"BooleanFunction(n={self.n}, name={self.name!r})"


def _bit_grid(n: int) -> np.ndarray:
    return np.indices((2,) * n, dtype=np.int32)


def majority(n: int) -> BooleanFunction:
    if n % 2 == 0:
        raise ValueError(f"Maj_n needs odd n, got {n}")
    if n <= MAX_TABULATED:
        table = (2 * _bit_grid(n).sum(axis=0) > n).astype(np.uint8)
        return BooleanFunction(n, table=table, name="maj")
    return BooleanFunction(n, func=maj_of, name="maj")


def parity(n: int) -> BooleanFunction:
    if n <= MAX_TABULATED:
        return BooleanFunction(n, table=_bit_grid(n).sum(axis=0) % 2, name="parity")
    return BooleanFunction(n, func=lambda bits: sum(bits) % 2, name="parity")


def bit(n: int, i: int) -> BooleanFunction:
    """Dictator function returning a_i (1-based)."""
    if not 1 <= i <= n:
        raise ValueError(f"bit index {i} outside 1..{n}")
    return BooleanFunction(n, func=lambda bits: bits[i - 1], name=f"bit:{i}")


def constant(n: int, value: int) -> BooleanFunction:
    if value not in (0, 1):
        raise ValueError("constant must be 0 or 1")
    return BooleanFunction(n, table=np.full((2,) * n, value, dtype=np.uint8), name=f"const:{value}")


def from_selector(selector: str, n: int) -> BooleanFunction:
    """Parse ``maj``, ``parity``, ``bit:i``, ``const:0|1`` or ``table:<path>``.

    A table file holds a JSON list of ``2**n`` bits in big-endian order.
    """
    kind, _, arg = selector.partition(":")
    if kind == "maj":
        return majority(n)
    if kind == "parity":
        return parity(n)
    if kind == "bit":
        return bit(n, int(arg))
    if kind == "const":
        return constant(n, int(arg))
    if kind == "table":
        bits = json.loads(Path(arg).read_text())
        if len(bits) != 2**n:
            raise ValueError(f"table file has {len(bits)} entries, expected {2**n}")
        return BooleanFunction(n, table=bits, name=selector)
    raise ValueError(f"unknown function selector {selector!r}")


def n_from_table_size(size: int) -> int:
    n = int(math.log2(size))
    if 2**n != size:
        raise ValueError(f"{size} is not a power of two")
    return n
