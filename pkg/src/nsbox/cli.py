"""Command-line entry point: ``nsbox <subcommand> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage error (bad flags,
malformed files, size guards).
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import attacks, evaluate, oracle
from .boolean import from_selector
from .box import Box, TableTooLarge, check_noise, make_pr, make_uniform, mix_noise, tensor, to_fraction
from .io import AttackFile, dumps, frac_str, load_attack, load_box, save_box
from .verify import ViolationReport, check_no_signalling, check_tons

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass
class CommandConfig:
    command: str
    flags: dict = field(default_factory=dict)


# parsing helpers

def parse_eps(text: str) -> Fraction:
    try:
        return check_noise(to_fraction(text))
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise UsageError(f"bad eps {text!r}: {exc}") from exc


def parse_int_list(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(t) for t in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


def parse_code(text: str) -> tuple[str, ...]:
    """Comma-separated binary words; an empty string (or ``-``) is the empty word."""
    words = tuple("" if w.strip() in ("", "-") else w.strip() for w in text.split(","))
    for w in words:
        if set(w) - {"0", "1"}:
            raise UsageError(f"code word {w!r} is not binary")
    return words


def parse_n_range(text: str) -> list[int]:
    """``3,5,9`` or ``start:stop[:step|odd|even]`` (stop inclusive)."""
    if ":" not in text:
        return parse_int_list(text)
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"bad range {text!r}")
    try:
        start, stop = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}") from exc
    step = parts[2] if len(parts) == 3 else "1"
    if step in ("odd", "even"):
        want = 1 if step == "odd" else 0
        return [n for n in range(start, stop + 1) if n % 2 == want]
    try:
        step = int(step)
    except ValueError as exc:
        raise UsageError(f"bad range step {step!r}") from exc
    if step <= 0:
        raise UsageError("range step must be positive")
    return list(range(start, stop + 1, step))


def parse_partition(text: str) -> tuple[list[int], list[int]]:
    left, sep, right = text.partition("|")
    if not sep:
        raise UsageError(f"partition {text!r} needs the form 'senders|receivers'")
    return parse_int_list(left), parse_int_list(right)


def load_v_box(spec: str) -> Box:
    if spec == "pr":
        return make_pr()
    if spec == "uniform":
        return make_uniform(make_pr().parties)
    return load_box(spec)


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# subcommands

def cmd_verify(args) -> int:
    box = load_box(args.box)
    if args.mode == "tons":
        if args.partition:
            raise UsageError("--partition only applies to --mode ns")
        report = check_tons(box)
        payload = {"mode": "tons", **report.to_dict()}
    else:
        if args.partition:
            cuts = [parse_partition(args.partition)]
        else:
            cuts = party_cuts(box)
        report = ViolationReport()
        for senders, receivers in cuts:
            report.merge(check_no_signalling(box, (senders, receivers)))
        payload = {"mode": "ns", "cuts": [[s, r] for s, r in cuts], **report.to_dict()}
    sys.stdout.write(dumps(payload))
    return EXIT_OK if report.ok else EXIT_FAIL


def party_cuts(box: Box) -> list[tuple[list[int], list[int]]]:
    """Every split of the parties into a nonempty sender group and its complement."""
    owned = [box.party_systems(p) for p in range(len(box.parties))]
    m = len(owned)
    cuts = []
    for k in range(1, m):
        for group in itertools.combinations(range(m), k):
            senders = [s for p in group for s in owned[p]]
            receivers = [s for p in range(m) if p not in group for s in owned[p]]
            cuts.append((senders, receivers))
    return cuts


def cmd_attack_build(args) -> int:
    n = args.n
    if n < 1:
        raise UsageError("--n must be positive")
    S = None if args.S is None else attacks.as_subset(parse_int_list(args.S), n)
    eps = None if args.eps is None else parse_eps(args.eps)
    if (S is None) == (eps is None):
        raise UsageError("give exactly one of --S (single member) or --eps (assembled mixture)")
    code = None
    f_sel = None
    if args.kind == "majority":
        if n % 2 == 0:
            raise UsageError("the majority attack needs odd n")
        if args.code is not None:
            raise UsageError("--code only applies to --kind prefix")
        f_sel = "maj"
        if S is not None:
            if not S:
                joint = attacks.ClassicalJoint.uniform(n)
            else:
                joint = attacks.majority_attack(n, S)
        else:
            joint = attacks.assemble_divisible(attacks.majority_family(n), eps)
    else:
        if args.code is None:
            raise UsageError("--kind prefix needs --code")
        f_sel = args.f
        f = from_selector(f_sel, n)
        code = tuple(attacks.check_prefix_code(parse_code(args.code), n))
        if S is not None:
            joint = attacks.prefix_code_attack(f, code, S)
        else:
            joint = attacks.assemble_divisible(attacks.prefix_code_family(f, code), eps)
    attack = AttackFile(joint=joint, kind=args.kind, S=S, eps=eps, code=code, f=f_sel)
    emit(dumps(attack.to_dict()), args.out)
    return EXIT_OK


def cmd_attack_eval(args) -> int:
    attack = load_attack(args.attack)
    n = attack.n
    selector = args.f or attack.f
    if selector is None:
        raise UsageError("attack file names no function; pass --f")
    f = from_selector(selector, n)
    value = evaluate.guessing_probability(attack.joint, f)
    payload = {
        "n": n,
        "kind": attack.kind,
        "f": selector,
        "eps": None if attack.eps is None else frac_str(attack.eps),
        "S": None if attack.S is None else sorted(attack.S),
        "guessing_probability": frac_str(value),
        "bias": frac_str(value - Fraction(1, 2)),
    }
    if attack.eps is not None and n % 2 == 1:
        report = evaluate.bias_report(n, attack.eps)
        payload.update(
            lemma2_guess=frac_str(evaluate.lemma2_closed_form(n, attack.eps)),
            majority_guess=frac_str(evaluate.divisible_majority_guess(n, attack.eps, exact=True))
            if n <= 25 else report.majority_guess,
            rotem_bound=report.rotem_bound,
            theorem2_limit_at_2eps=report.theorem2_limit,
        )
    sys.stdout.write(dumps(payload))
    return EXIT_OK


def _family_for(attack: AttackFile) -> dict:
    n = attack.n
    if attack.kind == "majority":
        return attacks.majority_family(n)
    if attack.kind == "prefix":
        if attack.code is None or attack.f is None:
            raise UsageError("prefix attack file lacks its code or function")
        return attacks.prefix_code_family(from_selector(attack.f, n), attack.code)
    raise UsageError("a custom attack can only be extended as a single S member (set S)")


def cmd_extend(args) -> int:
    attack = load_attack(args.attack)
    v = load_v_box(args.v)
    n = attack.n
    if attack.S is not None:
        ext = attacks.build_tons_extension(attack.joint, attack.S, v)
        rounds = attacks.round_boxes(v, attack.S, n)
    elif attack.eps is not None:
        family = _family_for(attack)
        ext = attacks.divisible_extension(family, attack.eps, v)
        rounds = [mix_noise(v, attack.eps)] * n
    else:
        raise UsageError("attack file has neither S nor eps")
    reports = attacks.extension_reports(ext, attack.joint, rounds)
    ok = all(r.ok for r in reports.values())
    if args.out:
        save_box(ext, args.out)
    payload = {"ok": ok, "box": args.out, **{k: r.to_dict() for k, r in reports.items()}}
    sys.stdout.write(dumps(payload))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sweep(args) -> int:
    eps = parse_eps(args.eps)
    ns = parse_n_range(args.n)
    if not ns:
        raise UsageError("empty n range")
    if any(n % 2 == 0 or n < 1 for n in ns):
        raise UsageError("sweep needs positive odd n")
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=evaluate.CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for report in evaluate.separation_sweep(ns, eps):
        writer.writerow(report.csv_row())
    emit(buf.getvalue(), args.csv)
    return EXIT_OK


def cmd_oracle(args) -> int:
    eps = parse_eps(args.eps)
    if args.n not in (1, 2):
        raise UsageError("the oracle handles n = 1 or 2")
    base = tensor([mix_noise(load_v_box(args.base), eps)] * args.n)
    f = from_selector(args.f, args.n)
    x = None if args.x is None else parse_int_list(args.x)
    value, witness = oracle.optimal_tons_attack(base, f, method=args.method,
                                                objective=args.objective, alice_input=x)
    if args.witness:
        save_box(witness, args.witness)
    payload = {
        "n": args.n,
        "eps": frac_str(eps),
        "f": args.f,
        "method": args.method,
        "objective": args.objective,
        "value": frac_str(value),
        "witness": args.witness,
    }
    sys.stdout.write(dumps(payload))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsbox", description="TONS attacks on no-signalling boxes")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check no-signalling or time-ordered no-signalling")
    p.add_argument("--box", required=True)
    p.add_argument("--mode", choices=("ns", "tons"), default="tons")
    p.add_argument("--partition", help="system indices 'senders|receivers', e.g. '0,1|2'")
    p.set_defaults(func=cmd_verify)

    attack = sub.add_parser("attack", help="build or evaluate classical attacks")
    asub = attack.add_subparsers(dest="action", required=True)
    b = asub.add_parser("build")
    b.add_argument("--kind", choices=("majority", "prefix"), required=True)
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--eps", help="assemble the divisible mixture at this noise, e.g. 1/10")
    b.add_argument("--S", help="build the single member for this 1-based subset, e.g. 1,3")
    b.add_argument("--code", help="comma-separated code words; '' is the empty word")
    b.add_argument("--f", default="maj", help="function selector for prefix attacks")
    b.add_argument("--out")
    b.set_defaults(func=cmd_attack_build)
    e = asub.add_parser("eval")
    e.add_argument("--attack", required=True)
    e.add_argument("--f", help="maj, parity, bit:i, const:c or table:path")
    e.set_defaults(func=cmd_attack_eval)

    x = sub.add_parser("extend", help="build and verify the TONS extension of an attack")
    x.add_argument("--attack", required=True)
    x.add_argument("--v", default="pr", help="pr, uniform or a box JSON path")
    x.add_argument("--out")
    x.set_defaults(func=cmd_extend)

    s = sub.add_parser("sweep", help="CSV of bias figures over odd n")
    s.add_argument("--n", required=True, help="e.g. 3:1601:odd or 3,5,7")
    s.add_argument("--eps", required=True)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", help="exact optimal TONS attack on noisy boxes")
    o.add_argument("--base", default="pr", help="pr, uniform or a box JSON path")
    o.add_argument("--eps", required=True)
    o.add_argument("--f", default="bit:1")
    o.add_argument("--n", type=int, default=1)
    o.add_argument("--method", choices=("lp", "enum"), default="lp")
    o.add_argument("--objective", choices=("fixed", "worst"), default="fixed")
    o.add_argument("--x", help="Alice's inputs for the fixed objective, e.g. 0,1")
    o.add_argument("--witness", help="write the optimal attack box here")
    o.set_defaults(func=cmd_oracle)
    return parser


def run(config: CommandConfig) -> int:
    args = argparse.Namespace(**config.flags)
    try:
        return args.func(args)
    except (UsageError, ValueError, TableTooLarge, OSError, json.JSONDecodeError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    command = args.command if args.command != "attack" else f"attack {args.action}"
    return run(CommandConfig(command, vars(args)))


if __name__ == "__main__":
    sys.exit(main())
