"""Command-line entry point: ``pulseconv {convolve,compare,sweep,budget,kernels}``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from . import testimages
from .errors import ConfigurationError, PulseConvError
from .harness import SweepSpec, budget, compare, run_plan, sweep
from .imageio import load_image, plane_to_csv, save_image, scale_illumination, visualize
from .oracle import format_db
from .planner import BUILTIN_NAMES, DESCRIPTIONS, builtin, factorize, format_kernel, load_kernel, plan_kernel
from .pulse import PwmWindow
from .sim import SimConfig

EXIT_CODES = {"config": 2, "plan": 3, "parse": 4, "lookup": 5, "shape": 6, "simulation": 7, "io": 8}


def _gains(args):
    explicit = args.gain_v is not None or args.gain_h is not None
    if explicit and args.auto_gain:
        raise ConfigurationError("--auto-gain conflicts with --gain-v/--gain-h")
    if not explicit:
        return "auto_max"
    if args.gain_v is None or args.gain_h is None:
        raise ConfigurationError("--gain-v and --gain-h must be given together")
    return (args.gain_v, args.gain_h)


def _config(args) -> SimConfig:
    return SimConfig(sample_rate=args.sample_rate, window=PwmWindow(args.ticks),
                     mag_bits=args.register_bits, register_policy=args.policy,
                     phase_rule=args.phase_rule)


def _plan(args, kernel=None):
    kernel = kernel if kernel is not None else load_kernel(args.kernel)
    return plan_kernel(kernel, args.sample_rate, PwmWindow(args.ticks), _gains(args), args.phase_rule)


def _image(args):
    img = load_image(args.image)
    if args.illumination != 1.0:
        img = scale_illumination(img, args.illumination)
    return img


def cmd_convolve(args) -> int:
    kernel = load_kernel(args.kernel)
    plan = _plan(args, kernel)
    print(plan.describe())
    plane = run_plan(_image(args), plan, _config(args))
    out = Path(args.out)
    csv_path = out.with_suffix(".csv")
    pgm_path = out.with_suffix(".pgm")
    csv_path.write_text(plane_to_csv(plane))
    save_image(pgm_path, visualize(plane, signed=kernel.is_signed))
    print(f"wrote {csv_path} and {pgm_path}")
    return 0


COMPARE_FIELDS = ["image", "kernel", "sample_rate", "illumination", "gains", "realized_scale",
                  "reference_scale", "mse", "psnr_db", "quantized_ref_psnr_db", "pixels", "saturated"]


def cmd_compare(args) -> int:
    plan = _plan(args)
    result = compare(_image(args), plan, _config(args), args.reference.replace("-", "_"))
    m = result.metrics
    print(plan.describe())
    print(f"MSE {m.mse:.6g}  PSNR {format_db(m.psnr_db)} dB  "
          f"(vs quantized taps: PSNR {format_db(result.quantized.psnr_db)} dB)  "
          f"pixels {m.pixel_count}  reference scale {result.reference_scale:.6g}"
          + ("  [register saturated]" if result.saturated else ""))
    row = {
        "image": args.image, "kernel": args.kernel, "sample_rate": args.sample_rate,
        "illumination": args.illumination, "gains": "auto_max" if _gains(args) == "auto_max"
        else f"{args.gain_v}/{args.gain_h}", "realized_scale": repr(result.realized_scale),
        "reference_scale": repr(result.reference_scale), "mse": repr(m.mse),
        "psnr_db": format_db(m.psnr_db), "quantized_ref_psnr_db": format_db(result.quantized.psnr_db),
        "pixels": m.pixel_count, "saturated": int(result.saturated),
    }
    if args.out:
        path = Path(args.out)
        new = not path.exists() or path.stat().st_size == 0
        with path.open("a", newline="") as fh:
            w = csv.DictWriter(fh, COMPARE_FIELDS, lineterminator="\n")
            if new:
                w.writeheader()
            w.writerow(row)
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, COMPARE_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerow(row)
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_sweep(args) -> int:
    if args.images:
        images = [(Path(p).stem, load_image(p)) for p in args.images]
    else:
        images = [(f"scene{k}", img) for k, img in
                  enumerate(testimages.test_set(args.size, args.seed, args.count))]
    spec = SweepSpec(
        kernels=tuple(args.kernel or BUILTIN_NAMES),
        sample_rates=tuple(args.sample_rate or (64, 128, 192, 256)),
        illumination_factors=tuple(args.illumination or (1.0, 0.5)),
        frame_rate=args.frame_rate,
        gains=_gains(args),
        reference=args.reference.replace("-", "_"),
        window=PwmWindow(args.ticks),
        mag_bits=args.register_bits,
        register_policy=args.policy,
        phase_rule=args.phase_rule,
    )
    result = sweep(spec, images, jobs=args.jobs)
    text = result.to_markdown() if args.format == "md" else result.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _parse_size(text: str):
    try:
        rows, cols = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected ROWSxCOLS, got {text!r}") from None
    return rows, cols


def cmd_budget(args) -> int:
    if args.kernel:
        target = factorize(load_kernel(args.kernel))
        shapes = [(len(v), len(h)) for v, h in target]
        rows, cols, passes = shapes[0][0], shapes[0][1], len(shapes)
    else:
        rows, cols = args.size
        passes = args.passes
    rates = args.sample_rate or [64, 128, 192, 256]
    fields = ["rows", "cols", "passes", "sample_rate", "frame_rate", "cycles_per_frame", "clock_mhz"]
    records = []
    for s in rates:
        rep = budget((rows, cols, passes), s, args.frame_rate)
        records.append([rows, cols, passes, s, f"{args.frame_rate:g}", rep.cycles_per_frame,
                        f"{rep.clock_mhz:.3f}"])
    if args.format == "md":
        lines = ["| " + " | ".join(fields) + " |", "|" + "---|" * len(fields)]
        lines += ["| " + " | ".join(str(x) for x in r) + " |" for r in records]
        text = "\n".join(lines) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        w.writerows(records)
        text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_kernels(args) -> int:
    for name in BUILTIN_NAMES:
        k = builtin(name)
        print(f"{name}: {DESCRIPTIONS[name]} ({k.rows}x{k.cols}, {len(factorize(k))} separable pass(es))")
        print("".join("    " + line + "\n" for line in format_kernel(k).splitlines()[1:]), end="")
    return 0


def _add_sim_flags(p, sample_rate_list=False):
    if sample_rate_list:
        p.add_argument("--sample-rate", type=int, action="append",
                       help="samples per PWM cycle (repeatable; default 64 128 192 256)")
    else:
        p.add_argument("--sample-rate", type=int, default=256, help="samples per PWM cycle")
    p.add_argument("--ticks", type=int, default=256, help="PWM window length in ticks")
    p.add_argument("--register-bits", type=int, default=8, help="register magnitude bits")
    p.add_argument("--policy", choices=["saturate", "wrap"], default="saturate")
    p.add_argument("--phase-rule", choices=["midpoint", "leading"], default="midpoint")
    p.add_argument("--gain-v", type=float, help="explicit vertical stage gain")
    p.add_argument("--gain-h", type=float, help="explicit horizontal stage gain")
    p.add_argument("--auto-gain", action="store_true",
                   help="largest realizable gains (default unless --gain-v/--gain-h)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pulseconv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convolve", help="run the pixel-array simulator on an image")
    p.add_argument("image")
    p.add_argument("--kernel", required=True, help="built-in name or kernel text file")
    p.add_argument("--illumination", type=float, default=1.0)
    p.add_argument("--out", required=True, help="output stem; writes STEM.csv and STEM.pgm")
    _add_sim_flags(p)
    p.set_defaults(func=cmd_convolve)

    p = sub.add_parser("compare", help="PSNR of the simulator against the exact oracle")
    p.add_argument("image")
    p.add_argument("--kernel", required=True)
    p.add_argument("--illumination", type=float, default=1.0)
    p.add_argument("--reference", choices=["full-rate", "realized", "kernel"], default="full-rate")
    p.add_argument("--out", help="append the CSV row to this file")
    _add_sim_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="kernel x (illumination x sample rate) PSNR grid")
    p.add_argument("images", nargs="*", help="PGM files (default: synthetic test scenes)")
    p.add_argument("--kernel", action="append", help="repeatable; default all built-ins")
    p.add_argument("--illumination", type=float, action="append",
                   help="repeatable; default 1.0 0.5")
    p.add_argument("--frame-rate", type=float, default=1000.0)
    p.add_argument("--reference", choices=["full-rate", "realized", "kernel"], default="full-rate")
    p.add_argument("--format", choices=["csv", "md"], default="md")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--size", type=int, default=64, help="synthetic scene size")
    p.add_argument("--seed", type=int, default=2024, help="synthetic scene seed")
    p.add_argument("--count", type=int, default=3, help="number of synthetic scenes")
    _add_sim_flags(p, sample_rate_list=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("budget", help="clock frequency needed per sample rate and frame rate")
    p.add_argument("--kernel", help="built-in name or kernel file (sets size and pass count)")
    p.add_argument("--size", type=_parse_size, default=(3, 3), help="ROWSxCOLS (default 3x3)")
    p.add_argument("--passes", type=int, default=1)
    p.add_argument("--sample-rate", type=int, action="append")
    p.add_argument("--frame-rate", type=float, default=1000.0)
    p.add_argument("--format", choices=["csv", "md"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("kernels", help="list the built-in kernels")
    p.set_defaults(func=cmd_kernels)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PulseConvError as exc:
        print(f"pulseconv: {exc.category} error: {exc}", file=sys.stderr)
        return EXIT_CODES.get(exc.category, 1)
    except OSError as exc:
        print(f"pulseconv: io error: {exc}", file=sys.stderr)
        return EXIT_CODES["io"]


if __name__ == "__main__":
    sys.exit(main())
