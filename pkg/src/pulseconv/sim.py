"""Lockstep pixel-array engine.

Every pixel runs the same tap loop at the same time. During tap iteration
``x`` a pixel sees the sampled PWM bit (and sign) of its neighbor at offset
``x`` along the pass direction; the hardware gets there by shifting samples
one cell per counting phase, which is modeled here as direct indexed access.
Vertical passes walk along columns (axis 0), horizontal passes along rows
(axis 1). Missing neighbors at the border contribute nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Literal

import numpy as np

from .errors import ConfigurationError, DimensionMismatchError, RegenerationOverflowError
from .pulse import (
    CoefficientSchedule,
    PhaseRule,
    PwmFrame,
    PwmWindow,
    RegisterPolicy,
    apply_policy,
    encode_pwm,
)

Boundary = Literal["zero_pad"]


@dataclass(frozen=True)
class SimConfig:
    sample_rate: int = 256
    window: PwmWindow = field(default_factory=PwmWindow)
    mag_bits: int = 8
    register_policy: RegisterPolicy = "saturate"
    boundary: Boundary = "zero_pad"
    phase_rule: PhaseRule = "midpoint"

    def __post_init__(self):
        if not 1 <= self.sample_rate <= self.window.ticks:
            raise ConfigurationError(
                f"sample rate {self.sample_rate} outside [1, {self.window.ticks}]"
            )
        if self.mag_bits < 1:
            raise ConfigurationError("mag_bits must be >= 1")
        if (1 << self.mag_bits) - 1 >= self.window.ticks:
            raise ConfigurationError(
                f"a {self.mag_bits}-bit magnitude cannot be regenerated in "
                f"{self.window.ticks} ticks"
            )
        if self.register_policy not in ("saturate", "wrap"):
            raise ConfigurationError(f"unknown register policy {self.register_policy!r}")
        if self.boundary != "zero_pad":
            raise ConfigurationError(f"unsupported boundary policy {self.boundary!r}")
        if self.phase_rule not in ("midpoint", "leading"):
            raise ConfigurationError(f"unknown phase rule {self.phase_rule!r}")

    @property
    def register_limit(self) -> int:
        return (1 << self.mag_bits) - 1


@dataclass(frozen=True, eq=False)
class RegisterPlane:
    """Counter state of every pixel, stored as one signed integer plane."""

    values: np.ndarray
    mag_bits: int = 8
    policy: RegisterPolicy = "saturate"

    def __post_init__(self):
        v = np.array(self.values, dtype=np.int64)
        if v.ndim != 2:
            raise DimensionMismatchError(f"register plane must be 2D, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, shape, config: SimConfig) -> "RegisterPlane":
        return cls(np.zeros(shape, dtype=np.int64), config.mag_bits, config.register_policy)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class TapSet:
    """Schedules for offsets ``-m..+m`` of a 1D factor, listed in offset order."""

    schedules: tuple[CoefficientSchedule, ...]

    def __post_init__(self):
        scheds = tuple(self.schedules)
        if len(scheds) % 2 != 1:
            raise ConfigurationError(f"a tap set needs an odd number of taps, got {len(scheds)}")
        object.__setattr__(self, "schedules", scheds)

    @property
    def half_width(self) -> int:
        return len(self.schedules) // 2

    @property
    def offsets(self) -> tuple[int, ...]:
        m = self.half_width
        return tuple(range(-m, m + 1))

    def __len__(self):
        return len(self.schedules)

    def center_out(self) -> Iterator[tuple[int, CoefficientSchedule]]:
        """Taps in hardware iteration order: 0, -1, +1, -2, +2, ..."""
        m = self.half_width
        yield 0, self.schedules[m]
        for d in range(1, m + 1):
            yield -d, self.schedules[m - d]
            yield d, self.schedules[m + d]

    def realized(self) -> np.ndarray:
        return np.array([s.realized for s in self.schedules])

    def counts(self) -> list[int]:
        return [s.scaled_coefficient for s in self.schedules]


def neighbor(plane: np.ndarray, offset: int, axis: int) -> np.ndarray:
    """``out[s, t] = plane[s + offset, t]`` (axis 0) with zeros outside the array."""
    out = np.zeros_like(plane)
    n = plane.shape[axis]
    if offset == 0:
        out[...] = plane
    elif abs(offset) < n:
        dst = [slice(None), slice(None)]
        src = [slice(None), slice(None)]
        if offset > 0:
            dst[axis], src[axis] = slice(0, n - offset), slice(offset, n)
        else:
            dst[axis], src[axis] = slice(-offset, n), slice(0, n + offset)
        out[tuple(dst)] = plane[tuple(src)]
    return out


def _check_taps(taps: TapSet, config: SimConfig):
    for off, sched in zip(taps.offsets, taps.schedules):
        if sched.window != config.window:
            raise ConfigurationError(f"tap {off:+d} was built for a different PWM window")
        if sched.sample_count > config.sample_rate:
            raise ConfigurationError(
                f"tap {off:+d} needs {sched.sample_count} samples, "
                f"sample rate is {config.sample_rate}"
            )


def _count_pass(frame: PwmFrame, taps: TapSet, config: SimConfig,
                start: np.ndarray, axis: int) -> np.ndarray:
    if frame.window != config.window:
        raise ConfigurationError("frame and configuration use different PWM windows")
    if frame.high_ticks.size == 0:
        raise DimensionMismatchError("frame has no pixels")
    _check_taps(taps, config)
    acc = start.copy()
    for off, sched in taps.center_out():
        if sched.sample_count == 0:
            continue
        high = neighbor(frame.high_ticks, off, axis)
        sign = neighbor(frame.sign.astype(np.int64), off, axis)
        delta = sign * sched.sign * sched.counts_for(high)
        acc = apply_policy(acc + delta, config.mag_bits, config.register_policy)
    return acc


def run_vertical_pass(frame: PwmFrame, taps: TapSet, config: SimConfig) -> RegisterPlane:
    start = np.zeros(frame.shape, dtype=np.int64)
    return RegisterPlane(_count_pass(frame, taps, config, start, axis=0),
                         config.mag_bits, config.register_policy)


def regenerate_pwm(plane: RegisterPlane, window: PwmWindow = PwmWindow()) -> PwmFrame:
    """Count the register back to zero, producing a PWM of width ``|value|``."""
    v = plane.values
    mag = np.abs(v)
    if mag.size and mag.max() >= window.ticks:
        raise RegenerationOverflowError(
            f"register magnitude {int(mag.max())} does not fit a {window.ticks}-tick window"
        )
    return PwmFrame(mag, np.where(v < 0, -1, 1), window)


def run_horizontal_pass(frame: PwmFrame, taps: TapSet, config: SimConfig,
                        into: RegisterPlane) -> RegisterPlane:
    if into.shape != frame.shape:
        raise DimensionMismatchError(
            f"result plane {into.shape} does not match frame {frame.shape}"
        )
    return RegisterPlane(_count_pass(frame, taps, config, into.values, axis=1),
                         config.mag_bits, config.register_policy)


def convolve_frame(image, plan, config: SimConfig) -> RegisterPlane:
    """Run every separable pass of a quantized plan, accumulating into one plane."""
    if plan.taps is None:
        raise ConfigurationError("plan has not been quantized into tap schedules")
    frame = encode_pwm(image, config.window)
    final = RegisterPlane.zeros(frame.shape, config)
    for vertical, horizontal in plan.taps:
        partial = run_vertical_pass(frame, vertical, config)
        final = run_horizontal_pass(regenerate_pwm(partial, config.window),
                                    horizontal, config, final)
    return final
