"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion N ... PASS|FAIL`` line (visible even
under pytest's capture) before asserting.  Run directly with
``python tests/test_acceptance.py`` for the summary lines alone.
"""
import contextlib
import itertools
import math
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from nsbox.attacks import (  # noqa: E402
    all_subsets,
    assemble_divisible,
    build_tons_extension,
    divisible_extension,
    extension_reports,
    influence,
    majority_attack,
    majority_family,
    prefix_code_attack,
    prefix_code_family,
    round_boxes,
    validate_s_influenceable,
    weight,
    ClassicalJoint,
)
from nsbox.boolean import bit, maj_of, majority, parity  # noqa: E402
from nsbox.box import make_pr, make_uniform, marginal, mix_noise, tensor  # noqa: E402
from nsbox.cli import main as cli_main  # noqa: E402
from nsbox.evaluate import (  # noqa: E402
    bias_report,
    corollary2_bound,
    divisible_majority_guess,
    guessing_probability,
    lemma2_closed_form,
    majority_agreement,
    theorem2_limit,
)
from nsbox.io import load_attack, load_box, save_attack, save_box  # noqa: E402
from nsbox.oracle import (  # noqa: E402
    brute_force_guess,
    build_attack_problem,
    complete_prefix_codes,
    optimal_tons_attack,
    prefix_codes,
)
from nsbox.verify import check_extension, check_no_signalling, check_tons, tons_equality_count  # noqa: E402
from strategies import random_function, random_joint, random_s_influenceable  # noqa: E402

HALF = Fraction(1, 2)
PR = make_pr()
UNIFORM = make_uniform(PR.parties)


def say(capsys, line):
    ctx = capsys.disabled() if capsys is not None else contextlib.nullcontext()
    with ctx:
        print(line, flush=True)


def verdict(capsys, number, title, ok, detail, elapsed, limit):
    in_time = elapsed < limit
    status = "PASS" if ok and in_time else "FAIL"
    say(capsys, f"criterion {number} [{title}]: {status}  {detail}  ({elapsed:.1f}s, limit {limit:.0f}s)")
    return ok and in_time


# 1

def test_criterion_1_single_box_optimum(capsys):
    start = time.perf_counter()
    ok, parts, slowest = True, [], 0.0
    for eps in (Fraction(0), Fraction(1, 20), Fraction(1, 10), Fraction(1, 4)):
        t0 = time.perf_counter()
        value, witness = optimal_tons_attack(tensor([mix_noise(PR, eps)]), bit(1, 1))
        slowest = max(slowest, time.perf_counter() - t0)
        hit = value == HALF + 2 * eps and check_tons(witness).ok
        ok &= hit
        parts.append(f"eps={eps}: {value}")
    ok &= slowest < 10
    result = verdict(capsys, 1, "single-box optimum 1/2+2eps", ok,
                     "; ".join(parts) + f"; slowest instance {slowest:.2f}s",
                     time.perf_counter() - start, 40)
    assert result


# 2

def test_criterion_2_extension_verification(capsys):
    start = time.perf_counter()
    rng = random.Random(20240202)
    total, failures = 0, []
    for n in (1, 2, 3):
        for S in all_subsets(n):
            for name, v in (("pr", PR), ("uniform", UNIFORM)):
                rounds = round_boxes(v, S, n)
                for _ in range(20):
                    q = random_s_influenceable(rng, n, S)
                    ext = build_tons_extension(q, S, v)
                    reports = extension_reports(ext, q, rounds)
                    total += 1
                    if not all(r.ok for r in reports.values()):
                        failures.append((n, sorted(S), name))
    result = verdict(capsys, 2, "extension passes TONS and both marginals", not failures,
                     f"{total} extensions, {len(failures)} failing", time.perf_counter() - start, 300)
    assert result, failures[:5]


# 3

def test_criterion_3_prefix_code_value(capsys):
    start = time.perf_counter()
    checked, failures = 0, []
    for n in (3, 5, 7):
        f = majority(n)
        codes = list(complete_prefix_codes(min(3, n - 1)))
        assert ("",) in codes
        for eps in (Fraction(1, 10), Fraction(1, 4)):
            target = HALF + eps * Fraction(math.comb(n - 1, (n - 1) // 2), 2 ** (n - 1))
            for code in codes:
                q = assemble_divisible(prefix_code_family(f, code), eps)
                checked += 1
                if brute_force_guess(q, f) != target:
                    failures.append((n, eps, code))
    result = verdict(capsys, 3, "prefix-code attacks on Maj_n hit the closed form", not failures,
                     f"{checked} (n, eps, code) cases, {len(failures)} off",
                     time.perf_counter() - start, 60)
    assert result, failures[:5]


# 4

def test_criterion_4_majority_exact(capsys):
    start = time.perf_counter()
    failures = []
    for n in (3, 5, 7, 9):
        family = majority_family(n)
        for eps in (Fraction(1, 10), Fraction(1, 4), Fraction(1, 3)):
            value = guessing_probability(assemble_divisible(family, eps), majority(n))
            if value != divisible_majority_guess(n, eps):
                failures.append((n, eps))
    anchor = guessing_probability(assemble_divisible(majority_family(3), Fraction(1, 4)), majority(3))
    ok = not failures and anchor == Fraction(3, 4)
    result = verdict(capsys, 4, "assembled majority attack equals binomial sum", ok,
                     f"n=3 eps=1/4 -> {anchor}; mismatches {failures}", time.perf_counter() - start, 60)
    assert result


# 5

def test_criterion_5_convergence(capsys):
    start = time.perf_counter()
    ok, parts = True, []
    for c in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
        errs = []
        for n in (101, 401, 1601):
            s = math.floor(c * n + HALF)
            errs.append(abs(majority_agreement(n, s) - theorem2_limit(c)))
        good = errs[0] > errs[1] > errs[2] and errs[2] <= 0.03
        ok &= good
        parts.append(f"c={c}: " + ", ".join(f"{e:.2e}" for e in errs))
    result = verdict(capsys, 5, "g(n, cn) approaches the arctan limit", ok, "; ".join(parts),
                     time.perf_counter() - start, 60)
    assert result


# 6

def test_criterion_6_asymptotic_bound(capsys):
    start = time.perf_counter()
    ok, parts = True, []
    for eps in (Fraction(1, 10), Fraction(1, 4)):
        bound = corollary2_bound(eps, 0.05)
        values = [divisible_majority_guess(n, eps) for n in (501, 1001, 1601)]
        ok &= all(v >= bound for v in values)
        parts.append(f"eps={eps}: bound {bound:.4f}, values " + ", ".join(f"{v:.4f}" for v in values))
    result = verdict(capsys, 6, "majority attack above the asymptotic bound", ok, "; ".join(parts),
                     time.perf_counter() - start, 60)
    assert result


# 7

def test_criterion_7_sqrt_separation(capsys):
    start = time.perf_counter()
    eps = Fraction(1, 10)
    growth = bias_report(101, eps).ratio / bias_report(11, eps).ratio
    ok = 2.0 <= growth <= 4.5
    result = verdict(capsys, 7, "sqrt(n) separation", ok,
                     f"ratio(101)/ratio(11) = {growth:.3f} (sqrt(101/11) = {math.sqrt(101 / 11):.3f})",
                     time.perf_counter() - start, 60)
    assert result


# 8

def brute_force_tons_count(box):
    ins, outs = box.input_sizes(), box.output_sizes()
    starts = [0]
    for p in box.parties:
        starts.append(starts[-1] + p.rounds)
    count = 0
    for prefix in itertools.product(*(range(p.rounds + 1) for p in box.parties)):
        kept = [starts[p] + r for p, length in enumerate(prefix) for r in range(length)]
        later = [s for s in range(box.n_systems) if s not in kept]
        fixed = list(itertools.product(*(range(ins[s]) for s in kept), *(range(outs[s]) for s in kept)))
        settings = list(itertools.product(*(range(ins[s]) for s in later)))
        count += sum(1 for _ in itertools.product(fixed, settings, settings))
    return count


def invariant_checks(tmp_dir: Path):
    rng = random.Random(8)
    checks = {}

    def normalized(box):
        flat = box.table.reshape(box.n_input_settings, -1)
        return all(sum(row, Fraction(0)) == 1 for row in flat)

    boxes = [PR, UNIFORM, mix_noise(PR, Fraction(1, 3)), tensor([PR, mix_noise(PR, Fraction(1, 5))]),
             marginal(tensor([PR, PR]), [0, 2]),
             build_tons_extension(majority_attack(2, {2}), {2}, PR)]
    checks["boxes normalized"] = all(normalized(b) for b in boxes)

    probes = [Fraction(k, 17) for k in (0, 2, 5, 7, 8)]
    checks["noise mixing affine"] = all(
        np.all(mix_noise(PR, e).table == (1 - 2 * e) * PR.table + 2 * e * UNIFORM.table) for e in probes)

    factors = [mix_noise(PR, e) for e in probes[:3]]
    t = tensor(factors)
    checks["tensor then marginal"] = all(marginal(t, [i, 3 + i]) == f for i, f in enumerate(factors))

    counts_ok = True
    from nsbox.box import PartySpec
    for n in (1, 2):
        for kx, ky in ((2, 2), (3, 1)):
            box = make_uniform([PartySpec(kx, 2, n), PartySpec(ky, 2, n), PartySpec(1, 2, 1)])
            expected = brute_force_tons_count(box)
            counts_ok &= tons_equality_count(box) == expected == check_tons(box).checked
    checks["TONS count complete (n <= 2)"] = counts_ok

    implied = True
    for _ in range(10):
        n = rng.choice([1, 2])
        S = {i for i in range(1, n + 1) if rng.random() < 0.5}
        box = build_tons_extension(random_s_influenceable(rng, n, S), S, PR)
        if check_tons(box).ok:
            implied &= check_no_signalling(box, (list(range(2 * n)), [2 * n])).ok
    checks["TONS implies AB|E no-signalling"] = implied

    box = build_tons_extension(majority_attack(2, {1}), {1}, PR)
    checks["reports deterministic"] = check_tons(box).to_dict() == check_tons(box).to_dict()

    influenceable = True
    for n in range(1, 7):
        for S in all_subsets(n):
            if S:
                influenceable &= validate_s_influenceable(majority_attack(n, S), S)[0]
            code = ("",) if n == 1 else ("0", "1")
            influenceable &= validate_s_influenceable(prefix_code_attack(parity(n), code, S), S)[0]
    checks["constructed attacks S-influenceable (n <= 6)"] = influenceable

    checks["Maj influence = pivot count"] = all(
        influence(majority(n), "") == Fraction(math.comb(n - 1, (n - 1) // 2), 2**n)
        == Fraction(sum(maj_of((0,) + a) != maj_of((1,) + a) for a in itertools.product((0, 1), repeat=n - 1)),
                    2**n)
        for n in (3, 5, 7))

    linear = True
    for _ in range(5):
        n = rng.randint(1, 4)
        eps = Fraction(rng.randint(0, 10), 20)
        f1 = {S: random_s_influenceable(rng, n, S) for S in all_subsets(n)}
        f2 = {S: random_s_influenceable(rng, n, S) for S in all_subsets(n)}
        lam = Fraction(rng.randint(0, 5), 5)
        mixed = {S: ClassicalJoint(n, lam * f1[S].table + (1 - lam) * f2[S].table) for S in f1}
        linear &= bool(np.all(assemble_divisible(mixed, eps).table
                              == lam * assemble_divisible(f1, eps).table
                              + (1 - lam) * assemble_divisible(f2, eps).table))
    checks["assembly linear"] = linear

    checks["weights sum to one"] = all(
        sum(weight(S, n, e) for S in all_subsets(n)) == 1 for n in range(1, 9) for e in probes)

    checks["prefix-code value independent of the code (n = 3, 5)"] = all(
        guessing_probability(assemble_divisible(prefix_code_family(majority(n), code), e), majority(n))
        == lemma2_closed_form(n, e)
        for n in (3, 5) for e in (Fraction(1, 10), Fraction(1, 4))
        for code in complete_prefix_codes(min(3, n - 1)))

    general = True
    for _ in range(40):
        n = rng.randint(1, 5)
        f = random_function(rng, n)
        code = rng.choice(list(prefix_codes(min(3, n - 1))))
        eps = Fraction(rng.randint(0, 10), 20)
        expected = HALF + 2 * eps * sum((Fraction(1, 2 ** len(c)) * abs(influence(f, c)) for c in code),
                                        Fraction(0))
        general &= brute_force_guess(assemble_divisible(prefix_code_family(f, code), eps), f) == expected
    checks["general prefix-code formula"] = general

    checks["g nondecreasing in s (n <= 15)"] = all(
        all(majority_agreement(n, s) <= majority_agreement(n, s + 1) for s in range(n))
        for n in range(1, 16, 2))

    checks["exact path = assembled attack (n <= 9)"] = all(
        guessing_probability(assemble_divisible(majority_family(n), e), majority(n))
        == divisible_majority_guess(n, e)
        for n in (3, 5, 7, 9) for e in (Fraction(1, 10), Fraction(1, 4)))

    agree = True
    for _ in range(100):
        n = rng.randint(1, 6)
        q, f = random_joint(rng, n), random_function(rng, n)
        agree &= brute_force_guess(q, f) == guessing_probability(q, f)
    checks["oracle agreement, 100 random joints"] = agree

    sound = True
    for eps in (Fraction(0), Fraction(1, 20), Fraction(1, 10), Fraction(1, 8), Fraction(1, 4)):
        base = tensor([mix_noise(PR, eps)])
        value, witness = optimal_tons_attack(base, bit(1, 1))
        sound &= value == HALF + 2 * eps
        sound &= check_tons(witness).ok and check_extension(witness, base, [0, 1])[0]
    checks["solver sound and tight at n = 1"] = sound

    admissible = True
    eps = Fraction(1, 10)
    for n, f in ((1, bit(1, 1)), (2, parity(2))):
        base = tensor([mix_noise(PR, eps)] * n)
        optimum, _ = optimal_tons_attack(base, f)
        problem = build_attack_problem(base, f)
        code = ("",) if n == 1 else ("0", "1")
        ext = divisible_extension(prefix_code_family(f, code), eps, PR)
        z = problem.z_from_box(ext)
        admissible &= problem.is_feasible(z) and problem.guess_values(z)[0] <= optimum
    checks["constructed attacks admissible (n <= 2)"] = admissible

    with contextlib.redirect_stdout(None):
        argv = ["attack", "build", "--kind", "majority", "--n", "5", "--eps", "2/7"]
        first, second = tmp_dir / "a1.json", tmp_dir / "a2.json"
        cli_main(argv + ["--out", str(first)])
        cli_main(argv + ["--out", str(second)])
        sweep1, sweep2 = tmp_dir / "s1.csv", tmp_dir / "s2.csv"
        cli_main(["sweep", "--n", "3:41:odd", "--eps", "1/10", "--csv", str(sweep1)])
        cli_main(["sweep", "--n", "3:41:odd", "--eps", "1/10", "--csv", str(sweep2)])
    attack = load_attack(first)
    save_attack(attack, tmp_dir / "a3.json")
    ext = build_tons_extension(majority_attack(3, {1, 2}), {1, 2}, PR)
    save_box(ext, tmp_dir / "ext.json")
    checks["round trip and determinism"] = (
        first.read_bytes() == second.read_bytes() == (tmp_dir / "a3.json").read_bytes()
        and load_attack(tmp_dir / "a3.json") == attack
        and load_box(tmp_dir / "ext.json") == ext
        and sweep1.read_bytes() == sweep2.read_bytes())
    return checks


def test_criterion_8_invariants(tmp_path, capsys):
    start = time.perf_counter()
    if tmp_path is None:
        import tempfile
        tmp_path = Path(tempfile.mkdtemp())
    checks = invariant_checks(tmp_path)
    for name, good in checks.items():
        say(capsys, f"    {'ok  ' if good else 'FAIL'} {name}")
    failed = [k for k, v in checks.items() if not v]
    result = verdict(capsys, 8, "invariant suites", not failed,
                     f"{len(checks) - len(failed)}/{len(checks)} invariants hold",
                     time.perf_counter() - start, 600)
    assert result, failed


if __name__ == "__main__":
    outcomes = []
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_criterion_")):
        args = (None, None) if name.startswith("test_criterion_8") else (None,)
        try:
            fn(*args)
            outcomes.append(True)
        except AssertionError:
            outcomes.append(False)
    sys.exit(0 if all(outcomes) else 1)
