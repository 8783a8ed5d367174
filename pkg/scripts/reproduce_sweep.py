"""Bias of the majority attack against the prefix-code attack over odd n.

Writes the sweep CSV and prints a short table of how the ratio grows
compared with sqrt(n).

    python scripts/reproduce_sweep.py --eps 1/10 --n 3:1601:odd --csv sweep.csv
"""
import argparse
import csv
import math

from nsbox.cli import parse_eps, parse_n_range
from nsbox.evaluate import CSV_COLUMNS, separation_sweep


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--eps", default="1/10")
    parser.add_argument("--n", default="3:1601:odd")
    parser.add_argument("--csv", default="sweep.csv")
    args = parser.parse_args()

    reports = separation_sweep(parse_n_range(args.n), parse_eps(args.eps))
    with open(args.csv, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for r in reports:
            writer.writerow(r.csv_row())

    first = reports[0]
    print(f"{'n':>6} {'prefix bias':>12} {'majority bias':>14} {'ratio':>8} {'ratio growth':>13} {'sqrt growth':>12}")
    shown = {r.n for r in reports if r.n in (3, 11, 101, 401, 1601)} or {reports[-1].n}
    for r in reports:
        if r.n not in shown:
            continue
        print(f"{r.n:>6} {r.lemma2_bias:>12.6f} {r.majority_bias:>14.6f} {r.ratio:>8.3f} "
              f"{r.ratio / first.ratio:>13.3f} {math.sqrt(r.n / first.n):>12.3f}")
    print(f"wrote {len(reports)} rows to {args.csv}")


if __name__ == "__main__":
    main()
