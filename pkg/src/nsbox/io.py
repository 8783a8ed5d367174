"""JSON formats for boxes and attacks.

Box::

    {"parties": [{"inputs": k, "outputs": m, "rounds": n}, ...],
     "probabilities": ["p/q", ...]}

with probabilities in the canonical row-major order of :mod:`nsbox.box`.

Attack::

    {"n": 3, "kind": "prefix|majority|custom", "code": ["0", "10"],
     "S": [1, 3], "eps": "1/10", "f": "maj", "joint": ["p/q", ...]}

with ``joint`` indexed by ``(a as big-endian bits) * 2 + e``.  ``S`` is
present for a single S-influenceable member, ``eps`` for an assembled
divisible mixture.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .attacks import ClassicalJoint, as_subset
from .box import Box, PartySpec, to_fraction

__all__ = [
    "frac_str",
    "box_to_dict",
    "box_from_dict",
    "save_box",
    "load_box",
    "AttackFile",
    "save_attack",
    "load_attack",
]

KINDS = ("prefix", "majority", "custom")


def frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def box_to_dict(box: Box) -> dict:
    return {
        "parties": [{"inputs": p.inputs, "outputs": p.outputs, "rounds": p.rounds} for p in box.parties],
        "probabilities": [frac_str(p) for p in box.table.flat],
    }


def box_from_dict(data: dict) -> Box:
    try:
        parties = [PartySpec(int(p["inputs"]), int(p["outputs"]), int(p.get("rounds", 1)))
                   for p in data["parties"]]
        probs = [to_fraction(str(v)) for v in data["probabilities"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed box JSON: {exc}") from exc
    return Box(parties, probs)


def dumps(data: dict) -> str:
    return json.dumps(data, indent=2) + "\n"


def save_box(box: Box, path) -> None:
    Path(path).write_text(dumps(box_to_dict(box)))


def load_box(path) -> Box:
    return box_from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class AttackFile:
    joint: ClassicalJoint
    kind: str = "custom"
    S: frozenset | None = None
    eps: Fraction | None = None
    code: tuple[str, ...] | None = None
    f: str | None = None

    @property
    def n(self) -> int:
        return self.joint.n

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "kind": self.kind,
            "code": None if self.code is None else list(self.code),
            "S": None if self.S is None else sorted(self.S),
            "eps": None if self.eps is None else frac_str(self.eps),
            "f": self.f,
            "joint": [frac_str(p) for p in self.joint.table.flat],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AttackFile":
        try:
            n = int(data["n"])
            kind = data.get("kind", "custom")
            if kind not in KINDS:
                raise ValueError(f"unknown attack kind {kind!r}")
            joint = ClassicalJoint(n, [to_fraction(str(v)) for v in data["joint"]])
            S = data.get("S")
            eps = data.get("eps")
            code = data.get("code")
            return cls(
                joint=joint,
                kind=kind,
                S=None if S is None else as_subset(S, n),
                eps=None if eps is None else to_fraction(str(eps)),
                code=None if code is None else tuple(code),
                f=data.get("f"),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed attack JSON: {exc}") from exc


def save_attack(attack: AttackFile, path) -> None:
    Path(path).write_text(dumps(attack.to_dict()))


def load_attack(path) -> AttackFile:
    return AttackFile.from_dict(json.loads(Path(path).read_text()))
