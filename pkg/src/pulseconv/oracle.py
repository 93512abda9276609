"""Exact reference convolutions and the MSE / PSNR metrics.

All convolutions use the correlation convention (no kernel flip) and treat
pixels outside the image as zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionMismatchError

PEAK = 255.0


def _as_plane(image) -> np.ndarray:
    a = np.asarray(image, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatchError(f"expected a 2D plane, got shape {a.shape}")
    return a


def ideal_convolve_2d(image, kernel) -> np.ndarray:
    """``R[s, t] = sum_{x, y} C[x, y] * P[s + x, t + y]`` with zero padding."""
    img = _as_plane(image)
    coeffs = np.asarray(getattr(kernel, "coefficients", kernel), dtype=float)
    kr, kc = coeffs.shape
    if kr % 2 == 0 or kc % 2 == 0:
        raise ConfigurationError(f"kernel dimensions must be odd, got {kr}x{kc}")
    m, n = kr // 2, kc // 2
    h, w = img.shape
    padded = np.pad(img, ((m, m), (n, n)))
    out = np.zeros_like(img)
    for i in range(kr):
        for j in range(kc):
            c = coeffs[i, j]
            if c:
                out += c * padded[i:i + h, j:j + w]
    return out


def correlate_1d(plane: np.ndarray, taps, axis: int) -> np.ndarray:
    taps = np.asarray(taps, dtype=float)
    m = len(taps) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (m, m)
    padded = np.pad(plane, pad)
    n = plane.shape[axis]
    out = np.zeros_like(plane, dtype=float)
    for i, c in enumerate(taps):
        if c:
            out += c * np.take(padded, np.arange(i, i + n), axis=axis)
    return out


def ideal_separable(image, plan) -> np.ndarray:
    """Vertical then horizontal 1D correlation per pass, at the plan's real gains."""
    img = _as_plane(image)
    out = np.zeros_like(img)
    for (v, h), (gv, gh) in zip(plan.factors, plan.gains):
        out += correlate_1d(correlate_1d(img, gv * np.asarray(v), axis=0), gh * np.asarray(h), axis=1)
    return out


def quantized_reference(image, plan, config=None) -> np.ndarray:
    """Same two-stage sum but with the realized tap values ``N / ticks``.

    Registers are unbounded and counts are not rounded, so any remaining
    difference from the simulator comes from sampling and register width.
    """
    if plan.taps is None:
        raise ConfigurationError("plan has not been quantized")
    window = config.window if config is not None else plan.window
    # the simulator sees intensities through the PWM encoder
    img = np.floor(_as_plane(image) * window.ticks / 256)
    out = np.zeros_like(img)
    for tv, th in plan.taps:
        out += correlate_1d(correlate_1d(img, tv.realized(), axis=0), th.realized(), axis=1)
    return out


def mse(ideal, actual) -> float:
    a, b = _as_plane(ideal), _as_plane(actual)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"cannot compare planes of shape {a.shape} and {b.shape}")
    return float(np.mean((a - b) ** 2))


def psnr_from_mse(err: float) -> float:
    if err == 0:
        return math.inf
    return 20 * math.log10(PEAK) - 10 * math.log10(err)


def psnr(ideal, actual) -> float:
    return psnr_from_mse(mse(ideal, actual))


@dataclass(frozen=True)
class MetricsReport:
    mse: float
    psnr_db: float
    pixel_count: int

    @classmethod
    def compare(cls, ideal, actual) -> "MetricsReport":
        err = mse(ideal, actual)
        return cls(err, psnr_from_mse(err), int(np.asarray(ideal).size))

    @property
    def exact(self) -> bool:
        return self.mse == 0


def format_db(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.2f}"
