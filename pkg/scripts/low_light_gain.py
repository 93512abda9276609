"""Dim scenes with a doubled sample rate versus normal scenes at the base rate.

Halving the light halves the pulse widths. Doubling the stage gain (a
doubled sample rate under auto gains) brings the register values back to
full scale, so the count rounding is half as large relative to the output.
"""

import numpy as np

from pulseconv import testimages
from pulseconv.harness import compare
from pulseconv.imageio import scale_illumination
from pulseconv.oracle import format_db
from pulseconv.planner import builtin, plan_kernel
from pulseconv.sim import SimConfig


def mean_psnr(images, kernel, s, factor):
    plan = plan_kernel(builtin(kernel), s)
    cfg = SimConfig(sample_rate=s)
    return float(np.mean([compare(scale_illumination(im, factor), plan, cfg).metrics.psnr_db
                          for im in images]))


def main():
    images = testimages.test_set(64, seed=2024, count=3)
    print("| Kernel | S | normal @ S | low @ S | low @ 2S |")
    print("|---|---|---|---|---|")
    for kernel in ("edge1", "edge2", "log5", "sharpen"):
        for s in (64, 128):
            print(f"| {kernel} | {s} | {format_db(mean_psnr(images, kernel, s, 1.0))} | "
                  f"{format_db(mean_psnr(images, kernel, s, 0.5))} | "
                  f"{format_db(mean_psnr(images, kernel, 2 * s, 0.5))} |")


if __name__ == "__main__":
    main()
