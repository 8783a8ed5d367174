"""Exact best TONS attack on one or two noisy PR boxes.

Prints, per noise level, the optimum at a fixed Alice input, the optimum
of the worst case over Alice's inputs, and the best prefix-code attack
for the same function.

    python scripts/single_box_optimum.py --f bit:1 --n 1
"""
import argparse
import time
from fractions import Fraction

from nsbox.boolean import from_selector
from nsbox.box import make_pr, mix_noise, tensor
from nsbox.oracle import best_prefix_attack, optimal_tons_attack


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--f", default="bit:1")
    parser.add_argument("--n", type=int, default=1)
    parser.add_argument("--eps", nargs="*", default=["0", "1/20", "1/10", "1/8", "1/4"])
    parser.add_argument("--method", choices=("lp", "enum"), default="lp")
    args = parser.parse_args()

    f = from_selector(args.f, args.n)
    print(f"{'eps':>6} {'fixed x':>10} {'worst x':>10} {'prefix code':>12}  seconds")
    for text in args.eps:
        eps = Fraction(text)
        base = tensor([mix_noise(make_pr(), eps)] * args.n)
        start = time.perf_counter()
        fixed, _ = optimal_tons_attack(base, f, method=args.method)
        worst, _ = optimal_tons_attack(base, f, method=args.method, objective="worst")
        prefix = best_prefix_attack(f, eps).value
        print(f"{str(eps):>6} {str(fixed):>10} {str(worst):>10} {str(prefix):>12}  "
              f"{time.perf_counter() - start:.2f}")


if __name__ == "__main__":
    main()
