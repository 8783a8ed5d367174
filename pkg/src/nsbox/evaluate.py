"""Attack performance: guessing probabilities, closed forms and large-n sweeps.

Exact rationals are used up to ``FLOAT_ABOVE`` rounds; past that the
binomial sums switch to scipy's binomial distribution in double precision.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, asdict
from fractions import Fraction
from typing import Iterable

import numpy as np
from scipy.stats import binom

from .attacks import ClassicalJoint
from .boolean import BooleanFunction
from .box import check_noise

__all__ = [
    "BiasReport",
    "guessing_probability",
    "lemma2_closed_form",
    "majority_agreement",
    "divisible_majority_guess",
    "theorem2_limit",
    "corollary2_bound",
    "rotem_bound",
    "separation_sweep",
    "effective_majority_size",
    "bias_report",
    "CSV_COLUMNS",
]

FLOAT_ABOVE = 25
NEGLIGIBLE_WEIGHT = 1e-20


def guessing_probability(q: ClassicalJoint, f: BooleanFunction) -> Fraction:
    """P(f(a) = e) under the joint."""
    if q.n != f.n:
        raise ValueError(f"joint has n={q.n}, function has arity {f.n}")
    t = f.table.astype(bool)
    hit_zero = q.table[..., 0][~t]
    hit_one = q.table[..., 1][t]
    return sum(hit_zero, Fraction(0)) + sum(hit_one, Fraction(0))


def _odd(n: int, what: str = "n") -> None:
    if n < 1 or n % 2 == 0:
        raise ValueError(f"{what} must be a positive odd integer, got {n}")


def lemma2_closed_form(n: int, eps) -> Fraction:
    """Prefix-code attack value on Maj_n: 1/2 + eps 2^(1-n) C(n-1, (n-1)/2)."""
    _odd(n)
    eps = check_noise(eps)
    return Fraction(1, 2) + eps * Fraction(math.comb(n - 1, (n - 1) // 2), 2 ** (n - 1))


def effective_majority_size(s: int) -> int:
    """Number of S-bits Maj_S actually reads (even sizes drop the last bit)."""
    return s if s % 2 else s - 1


def _agreement_exact(n: int, t: int) -> Fraction:
    r = n - t
    row = [math.comb(r, l) for l in range(r + 1)]
    cumulative = list(itertools.accumulate(row))
    total = cumulative[-1]

    def head(upto):  # sum_{l <= upto}
        if upto < 0:
            return 0
        return cumulative[min(upto, r)]

    count = 0
    for k in range(t + 1):
        if 2 * k > t:
            # Maj_n = 1 needs k + l >= (n+1)/2
            hits = total - head((n + 1) // 2 - k - 1)
        else:
            hits = head((n - 1) // 2 - k)
        count += math.comb(t, k) * hits
    return Fraction(count, 2**n)


def _agreement_float(n: int, ts) -> np.ndarray:
    """Float g for each effective size in ``ts`` at once (all ts >= 1)."""
    ts = np.asarray(ts)[:, None]
    k = np.arange(int(ts.max()) + 1)[None, :]
    pk = binom.pmf(k, ts, 0.5)  # zero where k > t
    r = n - ts
    upper = binom.sf((n + 1) // 2 - k - 1, r, 0.5)
    lower = binom.cdf((n - 1) // 2 - k, r, 0.5)
    return np.sum(pk * np.where(2 * k > ts, upper, lower), axis=1)


def majority_agreement(n: int, s: int, *, exact: bool | None = None):
    """g(n, s) = P(Maj_n(a) = Maj_S(a_S)) for uniform a and |S| = s.

    ``g(n, 0)`` is 1/2 (Eve holds an independent coin).  Exact for
    ``n <= 25`` unless ``exact`` says otherwise.
    """
    _odd(n)
    if not 0 <= s <= n:
        raise ValueError(f"s must lie in 0..{n}, got {s}")
    if exact is None:
        exact = n <= FLOAT_ABOVE
    if s == 0:
        return Fraction(1, 2) if exact else 0.5
    t = effective_majority_size(s)
    return _agreement_exact(n, t) if exact else float(_agreement_float(n, [t])[0])


def divisible_majority_guess(n: int, eps, *, exact: bool | None = None):
    """Value of the assembled majority attack: sum_s C(n,s) w_s g(n,s)."""
    _odd(n)
    eps = check_noise(eps)
    if exact is None:
        exact = n <= FLOAT_ABOVE
    if exact:
        total = Fraction(0)
        for s in range(n + 1):
            w = math.comb(n, s) * (1 - 2 * eps) ** (n - s) * (2 * eps) ** s
            if w:
                total += w * majority_agreement(n, s, exact=True)
        return total
    weights = binom.pmf(np.arange(n + 1), n, float(2 * eps))
    # terms below 1e-20 carry at most (n+1) 1e-20 of mass in total
    live = np.flatnonzero(weights > NEGLIGIBLE_WEIGHT)
    g = np.full(live.size, 0.5)
    sized = live > 0
    if np.any(sized):
        g[sized] = _agreement_float(n, [effective_majority_size(int(s)) for s in live[sized]])
    return float(np.dot(weights[live], g))


def theorem2_limit(c) -> float:
    """1 - arctan(sqrt((1-c)/c)) / pi, the large-n value of g(n, c n)."""
    c = float(c)
    if not 0 < c < 1:
        raise ValueError(f"c must lie in (0, 1), got {c}")
    return 1 - math.atan(math.sqrt((1 - c) / c)) / math.pi


def corollary2_bound(eps, delta) -> float:
    """Asymptotic lower bound on the majority attack for noise eps and slack delta."""
    c = 2 * to_float(eps) - to_float(delta)
    if not 0 < c < 1:
        raise ValueError(f"need 0 < 2 eps - delta < 1, got {c}")
    return theorem2_limit(c)


def to_float(x) -> float:
    if isinstance(x, str):
        return float(Fraction(x))
    return float(x)


def rotem_bound(n: int, eps) -> float:
    """1/2 + eps / (2n): the guaranteed value of the earlier attack for any f."""
    if n < 1:
        raise ValueError("n must be positive")
    return 0.5 + to_float(eps) / (2 * n)


@dataclass(frozen=True)
class BiasReport:
    n: int
    eps: Fraction
    lemma2_guess: float
    majority_guess: float
    rotem_bound: float
    theorem2_limit: float | None

    @property
    def lemma2_bias(self) -> float:
        return self.lemma2_guess - 0.5

    @property
    def majority_bias(self) -> float:
        return self.majority_guess - 0.5

    @property
    def ratio(self) -> float:
        return self.majority_bias / self.lemma2_bias if self.lemma2_bias else math.nan

    def csv_row(self) -> dict:
        return {
            "n": self.n,
            "eps": f"{self.eps.numerator}/{self.eps.denominator}",
            "lemma2_bias": repr(self.lemma2_bias),
            "majority_bias": repr(self.majority_bias),
            "ratio": repr(self.ratio),
            "rotem_bound": repr(self.rotem_bound),
            "theorem2_limit_at_2eps": "" if self.theorem2_limit is None else repr(self.theorem2_limit),
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        d["eps"] = f"{self.eps.numerator}/{self.eps.denominator}"
        d.update(lemma2_bias=self.lemma2_bias, majority_bias=self.majority_bias, ratio=self.ratio)
        return d


CSV_COLUMNS = ["n", "eps", "lemma2_bias", "majority_bias", "ratio", "rotem_bound",
               "theorem2_limit_at_2eps"]


def bias_report(n: int, eps) -> BiasReport:
    eps = check_noise(eps)
    c = 2 * eps
    return BiasReport(
        n=n,
        eps=eps,
        lemma2_guess=float(lemma2_closed_form(n, eps)),
        majority_guess=float(divisible_majority_guess(n, eps)),
        rotem_bound=rotem_bound(n, eps),
        theorem2_limit=theorem2_limit(c) if 0 < c < 1 else None,
    )


def separation_sweep(n_list: Iterable[int], eps) -> list[BiasReport]:
    """One report per odd n, ascending."""
    ns = sorted(set(int(n) for n in n_list))
    for n in ns:
        _odd(n)
    return [bias_report(n, eps) for n in ns]
