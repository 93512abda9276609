"""PSNR grid over kernels, illumination and sample rate on the synthetic scenes.

Prints the per-image grid, the mean per kernel, and whether each row is
monotone in the sample rate and whether dim light beats normal light.
"""

import argparse

import numpy as np

from pulseconv import testimages
from pulseconv.harness import SweepSpec, is_monotone, sweep
from pulseconv.oracle import format_db


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--count", type=int, default=3)
    ap.add_argument("--reference", choices=["full_rate", "realized", "kernel"], default="full_rate")
    args = ap.parse_args()

    images = [(f"scene{k}", im) for k, im in enumerate(testimages.test_set(args.size, args.seed, args.count))]
    spec = SweepSpec(reference=args.reference)
    res = sweep(spec, images)
    print(res.to_markdown())

    n = len(spec.sample_rates)
    labels = res.column_labels()
    print("| Kernel (mean) | " + " | ".join(labels) + " | monotone | low >= normal |")
    print("|---|" + "---|" * (len(labels) + 2))
    for kernel in spec.kernels:
        rows = np.array([cells for (k, _), cells in res.rows.items() if k == kernel])
        mean = rows.mean(axis=0)
        mono = all(is_monotone(r[:n]) and is_monotone(r[n:]) for r in rows)
        dom = int(sum(b >= a for r in rows for a, b in zip(r[:n], r[n:])))
        print(f"| {kernel} | " + " | ".join(format_db(v) for v in mean)
              + f" | {mono} | {dom}/{rows.shape[0] * n} |")


if __name__ == "__main__":
    main()
