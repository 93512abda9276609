"""Clock frequency needed for one 3x3 pass per sample rate and frame rate."""

import argparse

from pulseconv.harness import budget


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--frame-rates", type=float, nargs="+", default=[1000, 10000])
    ap.add_argument("--sample-rates", type=int, nargs="+", default=[64, 128, 192, 256])
    args = ap.parse_args()
    print("| frame rate | " + " | ".join(f"S={s}" for s in args.sample_rates) + " |")
    print("|---|" + "---|" * len(args.sample_rates))
    for fps in args.frame_rates:
        cells = [f"{budget((3, 3), s, fps).clock_mhz:.3f} MHz" for s in args.sample_rates]
        print(f"| {fps:g} fps | " + " | ".join(cells) + " |")


if __name__ == "__main__":
    main()
