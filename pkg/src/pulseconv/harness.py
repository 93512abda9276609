"""Batch operations behind the CLI: convolve, compare, sweep and clock budget."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import ConfigurationError, PulseConvError
from .imageio import scale_illumination
from .oracle import MetricsReport, format_db, ideal_separable, quantized_reference
from .planner import (
    GainPolicy,
    KernelSpec,
    PassPlan,
    auto_gains,
    load_kernel,
    plan_kernel,
)
from .pulse import PwmWindow
from .sim import SimConfig, convolve_frame

Reference = Literal["full_rate", "realized", "kernel"]


def reference_scale(plan: PassPlan, reference: Reference = "full_rate") -> float:
    """Scale at which ideal and simulated planes are compared.

    ``realized`` compares raw register values against the ideal at the plan's
    own scale. ``full_rate`` rescales both to the scale the same factors reach
    with auto gains at one sample per tick, so a lower sample rate (smaller
    normalization gain) shows up as a larger error. ``kernel`` compares in
    units of the unscaled kernel.
    """
    if reference == "realized":
        return plan.realized_scale
    if reference == "kernel":
        return 1.0
    if reference == "full_rate":
        ticks = plan.window.ticks
        return auto_gains(plan.factors, ticks, ticks)[1]
    raise ConfigurationError(f"unknown reference {reference!r}")


@dataclass(frozen=True)
class Comparison:
    metrics: MetricsReport
    quantized: MetricsReport
    realized_scale: float
    reference_scale: float
    saturated: bool


def run_plan(image, plan: PassPlan, config: SimConfig) -> np.ndarray:
    return convolve_frame(image, plan, config).values


def compare(image, plan: PassPlan, config: SimConfig,
            reference: Reference = "full_rate") -> Comparison:
    """Simulate ``plan`` and score it against the exact separable evaluation.

    ``quantized`` scores the same output against the realized tap values, so
    its error is what sampling and register width alone contribute.
    """
    actual = run_plan(image, plan, config)
    ideal = ideal_separable(image, plan)
    qref = quantized_reference(image, plan, config)
    ref = reference_scale(plan, reference)
    k = ref / plan.realized_scale
    return Comparison(
        MetricsReport.compare(ideal * k, actual * k),
        MetricsReport.compare(qref * k, actual * k),
        plan.realized_scale,
        ref,
        bool(np.any(np.abs(actual) >= config.register_limit)),
    )


# ---------------------------------------------------------------- budget

@dataclass(frozen=True)
class PassBudget:
    taps_v: int
    taps_h: int
    cycles: int


@dataclass(frozen=True)
class BudgetReport:
    cycles_per_frame: int
    clock_hz: float
    frame_rate: float
    sample_rate: int
    passes: tuple[PassBudget, ...] = field(default_factory=tuple)

    @property
    def clock_mhz(self) -> float:
        return self.clock_hz / 1e6


def budget(plan_or_shape, sample_rate: int, frame_rate: float) -> BudgetReport:
    """Clock needed for one frame: ``2 * (taps_v + taps_h) * S`` cycles per pass.

    ``plan_or_shape`` is a :class:`PassPlan` or a ``(rows, cols[, passes])`` tuple.
    """
    if sample_rate <= 0 or frame_rate <= 0:
        raise ConfigurationError("sample rate and frame rate must be positive")
    if isinstance(plan_or_shape, PassPlan):
        shapes = [(len(v), len(h)) for v, h in plan_or_shape.factors]
    else:
        rows, cols, *rest = plan_or_shape
        shapes = [(rows, cols)] * (rest[0] if rest else 1)
    passes = tuple(PassBudget(tv, th, 2 * (tv + th) * sample_rate) for tv, th in shapes)
    cycles = sum(p.cycles for p in passes)
    return BudgetReport(cycles, cycles * frame_rate, frame_rate, sample_rate, passes)


# ---------------------------------------------------------------- sweep

@dataclass(frozen=True)
class SweepSpec:
    kernels: tuple[str, ...] = ("edge1", "edge2", "log5", "sharpen")
    sample_rates: tuple[int, ...] = (64, 128, 192, 256)
    illumination_factors: tuple[float, ...] = (1.0, 0.5)
    frame_rate: float = 1000.0
    gains: GainPolicy = "auto_max"
    reference: Reference = "full_rate"
    window: PwmWindow = field(default_factory=PwmWindow)
    mag_bits: int = 8
    register_policy: str = "saturate"
    phase_rule: str = "midpoint"

    def __post_init__(self):
        if not self.kernels:
            raise ConfigurationError("sweep needs at least one kernel")
        for s in self.sample_rates:
            if not 1 <= s <= self.window.ticks:
                raise ConfigurationError(f"sample rate {s} outside [1, {self.window.ticks}]")
        for f in self.illumination_factors:
            if not 0 < f <= 1:
                raise ConfigurationError(f"illumination factor {f} outside (0, 1]")

    @property
    def columns(self) -> list[tuple[float, int]]:
        return [(f, s) for f in self.illumination_factors for s in self.sample_rates]


@dataclass
class SweepResult:
    spec: SweepSpec
    image_names: list[str]
    # rows[(kernel, image)] -> PSNR per column, in spec.columns order
    rows: dict[tuple[str, str], list[float]]

    def column_labels(self) -> list[str]:
        return [f"illum={f:g} S={s}" for f, s in self.spec.columns]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kernel", "image"] + self.column_labels())
        for (kernel, image), cells in self.rows.items():
            w.writerow([kernel, image] + [format_db(c) for c in cells])
        return buf.getvalue()

    def to_markdown(self) -> str:
        labels = self.column_labels()
        lines = [
            "| Kernel | Image | " + " | ".join(labels) + " |",
            "|---|---|" + "---|" * len(labels),
        ]
        for (kernel, image), cells in self.rows.items():
            lines.append(f"| {kernel} | {image} | " + " | ".join(format_db(c) for c in cells) + " |")
        lines.append("")
        lines.append(
            f"PSNR in dB, full frame with zero padding, {self.spec.reference} reference scale, "
            f"gains {self.spec.gains}. Clock for one 3x3 pass at {self.spec.frame_rate:g} fps: "
            + ", ".join(
                f"S={s}: {budget((3, 3), s, self.spec.frame_rate).clock_mhz:.3f} MHz"
                for s in self.spec.sample_rates
            )
        )
        return "\n".join(lines) + "\n"


def _sweep_cell(kernel: KernelSpec, image, factor: float, sample_rate: int, spec: SweepSpec) -> float:
    config = SimConfig(sample_rate=sample_rate, window=spec.window, mag_bits=spec.mag_bits,
                       register_policy=spec.register_policy, phase_rule=spec.phase_rule)
    plan = plan_kernel(kernel, sample_rate, spec.window, spec.gains, spec.phase_rule)
    dimmed = scale_illumination(image, factor)
    return compare(dimmed, plan, config, spec.reference).metrics.psnr_db


def sweep(spec: SweepSpec, images: Sequence[tuple[str, np.ndarray]], jobs: int = 1) -> SweepResult:
    """PSNR grid: one row per (kernel, image), one column per (illumination, S)."""
    kernels = [(name, load_kernel(name)) for name in spec.kernels]
    cells = [(kname, kernel, iname, img, f, s)
             for kname, kernel in kernels
             for iname, img in images
             for f, s in spec.columns]

    def run(cell):
        kname, kernel, iname, img, f, s = cell
        try:
            return _sweep_cell(kernel, img, f, s, spec)
        except PulseConvError as exc:
            raise type(exc)(f"sweep cell kernel={kname} image={iname} S={s} "
                            f"illumination={f:g}: {exc}") from exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(run, cells))
    else:
        values = [run(c) for c in cells]

    ncol = len(spec.columns)
    rows: dict[tuple[str, str], list[float]] = {}
    for i in range(0, len(values), ncol):
        kname, _, iname, *_ = cells[i]
        rows[(kname, iname)] = values[i:i + ncol]
    return SweepResult(spec, [n for n, _ in images], rows)


def is_monotone(values: Sequence[float]) -> bool:
    """Non-decreasing; infinity dominates every finite value."""
    return all(b >= a for a, b in zip(values, values[1:]))
