"""PWM encoding, coefficient sampling schedules and the signed pulse counter.

A pixel value is carried as a PWM waveform that is high on ticks
``[0, high_ticks)`` of a fixed window. A kernel coefficient is realized as a
set of sampling instants inside that window; the in-pixel counter adds (or
subtracts, depending on the sign product) one for every instant at which the
gated waveform is high.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import (
    ConfigurationError,
    DimensionMismatchError,
    ResolutionLossError,
    UnrealizableCoefficientError,
)

PhaseRule = Literal["midpoint", "leading"]
RegisterPolicy = Literal["saturate", "wrap"]

DEFAULT_TICKS = 256
INPUT_LEVELS = 256


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PwmWindow:
    """Master-timebase ticks in one PWM cycle (one counting interval)."""

    ticks: int = DEFAULT_TICKS

    def __post_init__(self):
        if int(self.ticks) != self.ticks or self.ticks < 2:
            raise ConfigurationError(f"PWM window needs >= 2 ticks, got {self.ticks}")


@dataclass(frozen=True, eq=False)
class PwmFrame:
    """Per-pixel PWM high-tick counts plus the sign plane, row-major ``(height, width)``."""

    high_ticks: np.ndarray
    sign: np.ndarray
    window: PwmWindow = field(default_factory=PwmWindow)

    def __post_init__(self):
        high = np.array(self.high_ticks, dtype=np.int64)
        sign = np.array(self.sign, dtype=np.int8)
        if high.ndim != 2 or high.shape != sign.shape:
            raise DimensionMismatchError(
                f"high_ticks {high.shape} and sign {sign.shape} must be equal 2D planes"
            )
        if high.size and (high.min() < 0 or high.max() >= self.window.ticks):
            raise ConfigurationError(
                f"high_ticks must lie in [0, {self.window.ticks - 1}]"
            )
        if not np.isin(sign, (-1, 1)).all():
            raise ConfigurationError("sign plane may only contain +1 / -1")
        # zero is canonically positive
        sign = np.where(high == 0, 1, sign).astype(np.int8)
        object.__setattr__(self, "high_ticks", _frozen(high))
        object.__setattr__(self, "sign", _frozen(sign))

    @property
    def height(self) -> int:
        return self.high_ticks.shape[0]

    @property
    def width(self) -> int:
        return self.high_ticks.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.high_ticks.shape

    def duty(self) -> np.ndarray:
        return self.high_ticks / self.window.ticks

    def signed_values(self) -> np.ndarray:
        return self.sign.astype(np.int64) * self.high_ticks


@dataclass(frozen=True, eq=False)
class CoefficientSchedule:
    """One kernel tap: count direction plus the sorted sampling instants."""

    sign: int
    instants: tuple[int, ...]
    window: PwmWindow = field(default_factory=PwmWindow)

    def __post_init__(self):
        inst = tuple(int(i) for i in self.instants)
        if self.sign not in (1, -1):
            raise ConfigurationError(f"schedule sign must be +1 or -1, got {self.sign}")
        if any(b <= a for a, b in zip(inst, inst[1:])):
            raise ConfigurationError("sampling instants must be strictly increasing")
        if inst and (inst[0] < 0 or inst[-1] >= self.window.ticks):
            raise ConfigurationError("sampling instant outside the PWM window")
        if not inst and self.sign != 1:
            object.__setattr__(self, "sign", 1)
        object.__setattr__(self, "instants", inst)
        # counts[h] = number of instants strictly below h, for h in [0, ticks)
        lut = np.searchsorted(np.asarray(inst, dtype=np.int64),
                              np.arange(self.window.ticks), side="left")
        object.__setattr__(self, "_counts", _frozen(lut.astype(np.int64)))

    @property
    def sample_count(self) -> int:
        return len(self.instants)

    @property
    def scaled_coefficient(self) -> int:
        """Signed sample count, i.e. the integer the schedule was built from."""
        return self.sign * self.sample_count

    @property
    def realized(self) -> float:
        """Effective multiplier applied to a duty cycle, ``±N / ticks``."""
        return self.scaled_coefficient / self.window.ticks

    def counts_for(self, high_ticks: np.ndarray) -> np.ndarray:
        """Unsigned gated-sample counts for an array of high-tick values."""
        return self._counts[high_ticks]

    def __eq__(self, other):
        if not isinstance(other, CoefficientSchedule):
            return NotImplemented
        return (self.sign, self.instants, self.window) == (
            other.sign, other.instants, other.window)

    def __hash__(self):
        return hash((self.sign, self.instants, self.window))

    def __repr__(self):
        return (f"CoefficientSchedule(N={self.scaled_coefficient:+d}, "
                f"ticks={self.window.ticks})")


@dataclass(frozen=True)
class SignedRegister:
    """Sign-magnitude style counter with ``mag_bits`` of magnitude."""

    value: int = 0
    mag_bits: int = 8
    policy: RegisterPolicy = "saturate"

    def __post_init__(self):
        if self.mag_bits < 1:
            raise ConfigurationError("mag_bits must be >= 1")
        if self.policy not in ("saturate", "wrap"):
            raise ConfigurationError(f"unknown register policy {self.policy!r}")
        object.__setattr__(self, "value", int(apply_policy(self.value, self.mag_bits, self.policy)))

    @property
    def limit(self) -> int:
        return (1 << self.mag_bits) - 1


def apply_policy(value, mag_bits: int, policy: RegisterPolicy):
    """Bring ``value`` (scalar or array) into register range.

    ``saturate`` clamps to ``±(2**mag_bits - 1)``; ``wrap`` wraps into the
    two's-complement range of ``mag_bits + 1`` bits.
    """
    limit = (1 << mag_bits) - 1
    if policy == "saturate":
        return np.clip(value, -limit, limit)
    if policy == "wrap":
        half = 1 << mag_bits
        return (value + half) % (2 * half) - half
    raise ConfigurationError(f"unknown register policy {policy!r}")


def encode_pwm(image, window: PwmWindow = PwmWindow()) -> PwmFrame:
    """Map 8-bit intensities to PWM high-tick counts (all signs positive)."""
    img = np.asarray(image)
    if img.ndim != 2:
        raise DimensionMismatchError(f"expected a 2D intensity plane, got shape {img.shape}")
    if window.ticks < INPUT_LEVELS:
        raise ResolutionLossError(
            f"{window.ticks} ticks cannot carry {INPUT_LEVELS} intensity levels"
        )
    img = img.astype(np.int64)
    if img.size and (img.min() < 0 or img.max() > 255):
        raise ConfigurationError("intensities must lie in [0, 255]")
    high = img * window.ticks // INPUT_LEVELS
    return PwmFrame(high, np.ones(img.shape, dtype=np.int8), window)


def schedule_instants(n: int, ticks: int, phase_rule: PhaseRule = "midpoint") -> list[int]:
    """Sampling instants for ``n`` samples spread over ``ticks``."""
    if phase_rule == "midpoint":
        return [(2 * j + 1) * ticks // (2 * n) for j in range(n)]
    if phase_rule == "leading":
        return [j * ticks // n for j in range(n)]
    raise ConfigurationError(f"unknown phase rule {phase_rule!r}")


def make_schedule(scaled_coefficient: int, window: PwmWindow = PwmWindow(),
                  phase_rule: PhaseRule = "midpoint") -> CoefficientSchedule:
    n = abs(int(scaled_coefficient))
    if n > window.ticks:
        raise UnrealizableCoefficientError(
            f"|{scaled_coefficient}| samples do not fit in a {window.ticks}-tick window"
        )
    sign = -1 if scaled_coefficient < 0 else 1
    return CoefficientSchedule(sign, tuple(schedule_instants(n, window.ticks, phase_rule)), window)


def sample_count(high_ticks: int, sign_data: int, schedule: CoefficientSchedule) -> int:
    """Signed number of sampling instants that land while the PWM is high."""
    gated = sum(1 for t in schedule.instants if t < high_ticks)
    return sign_data * schedule.sign * gated


def accumulate(register: SignedRegister, delta: int) -> SignedRegister:
    return SignedRegister(register.value + int(delta), register.mag_bits, register.policy)
