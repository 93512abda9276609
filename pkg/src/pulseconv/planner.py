"""Kernels, separable decomposition and quantization into tap schedules."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .errors import (
    ConfigurationError,
    DecompositionError,
    KernelParseError,
    UnknownKernelError,
    UnrealizableCoefficientError,
)
from .pulse import PhaseRule, PwmWindow, make_schedule
from .sim import TapSet

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class KernelSpec:
    coefficients: np.ndarray
    name: str | None = None

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.ndim != 2 or c.size == 0:
            raise ConfigurationError(f"kernel must be a non-empty matrix, got shape {c.shape}")
        if c.shape[0] % 2 == 0 or c.shape[1] % 2 == 0:
            raise ConfigurationError(f"kernel dimensions must be odd, got {c.shape[0]}x{c.shape[1]}")
        if not np.isfinite(c).all():
            raise ConfigurationError("kernel coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def rows(self) -> int:
        return self.coefficients.shape[0]

    @property
    def cols(self) -> int:
        return self.coefficients.shape[1]

    @property
    def is_signed(self) -> bool:
        return bool((self.coefficients < 0).any())

    def __eq__(self, other):
        if not isinstance(other, KernelSpec):
            return NotImplemented
        return np.array_equal(self.coefficients, other.coefficients)

    def __hash__(self):
        return hash(self.coefficients.tobytes())


_BUILTIN = {
    "edge1": [[-1, -1, -1],
              [-1, 8, -1],
              [-1, -1, -1]],
    "edge2": [[1, 0, -1],
              [0, 0, 0],
              [-1, 0, 1]],
    "log5": [[0, 0, 1, 0, 0],
             [0, 1, 2, 1, 0],
             [1, 2, -16, 2, 1],
             [0, 1, 2, 1, 0],
             [0, 0, 1, 0, 0]],
    "sharpen": [[0, -1, 0],
                [-1, 5, -1],
                [0, -1, 0]],
}

BUILTIN_NAMES = tuple(_BUILTIN)

DESCRIPTIONS = {
    "edge1": "Edge Detection-1 (8-neighbour Laplacian)",
    "edge2": "Edge Detection-2 (diagonal cross)",
    "log5": "Laplacian of Gaussian, 5x5",
    "sharpen": "Sharpening",
}


def builtin(name: str) -> KernelSpec:
    try:
        return KernelSpec(_BUILTIN[name], name=name)
    except KeyError:
        raise UnknownKernelError(
            f"unknown kernel {name!r}; valid names: {', '.join(BUILTIN_NAMES)}"
        ) from None


def parse_kernel(text: str, name: str | None = None) -> KernelSpec:
    """Parse whitespace-separated rows; ``#`` lines and blank lines are skipped."""
    rows: list[list[float]] = []
    first_line = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        values = []
        pos = 0
        for token in line.split():
            col = line.index(token, pos) + 1
            pos = col - 1 + len(token)
            try:
                v = float(token)
            except ValueError:
                raise KernelParseError(f"not a number: {token!r}", lineno, col) from None
            if not math.isfinite(v):
                raise KernelParseError(f"non-finite coefficient {token!r}", lineno, col)
            values.append(v)
        if rows and len(values) != len(rows[0]):
            raise KernelParseError(
                f"row has {len(values)} values, expected {len(rows[0])} (from line {first_line})",
                lineno,
            )
        if not rows:
            first_line = lineno
        rows.append(values)
    if not rows:
        raise KernelParseError("kernel text contains no rows")
    if len(rows) % 2 == 0 or len(rows[0]) % 2 == 0:
        raise KernelParseError(f"kernel dimensions must be odd, got {len(rows)}x{len(rows[0])}")
    return KernelSpec(rows, name=name)


def format_kernel(kernel: KernelSpec) -> str:
    lines = [f"# {kernel.name}"] if kernel.name else []
    for row in kernel.coefficients:
        lines.append(" ".join(f"{v:g}" for v in row))
    return "\n".join(lines) + "\n"


def load_kernel(ref: str) -> KernelSpec:
    """Built-in name or path to a kernel text file."""
    if ref in _BUILTIN:
        return builtin(ref)
    try:
        with open(ref) as fh:
            text = fh.read()
    except FileNotFoundError:
        raise UnknownKernelError(
            f"{ref!r} is neither a built-in kernel ({', '.join(BUILTIN_NAMES)}) nor a file"
        ) from None
    return parse_kernel(text, name=ref)


Factor = tuple[np.ndarray, np.ndarray]


def factorize(kernel: KernelSpec, tolerance: float = DEFAULT_TOLERANCE) -> list[Factor]:
    """Split a kernel into rank-1 terms by repeated pivot elimination.

    Each step takes the largest-magnitude residual entry (first in row-major
    order on ties) and removes ``outer(column, row / pivot)``. Elimination
    runs in exact rational arithmetic, so the pass count equals the rank of
    the kernel's binary-float values. Each term is then rescaled so that the
    vertical and horizontal factors share the same max-abs entry.
    """
    k = kernel.coefficients
    if not np.any(k):
        raise ConfigurationError("cannot plan an all-zero kernel")
    rows, cols = k.shape
    resid = [[Fraction(float(x)) for x in row] for row in k]
    terms = []
    while True:
        i, j, best = 0, 0, Fraction(0)
        for r in range(rows):
            for c in range(cols):
                if abs(resid[r][c]) > best:
                    i, j, best = r, c, abs(resid[r][c])
        if float(best) <= tolerance:
            break
        if len(terms) >= min(rows, cols):
            raise DecompositionError("pivot elimination did not terminate within rank bound")
        pivot = resid[i][j]
        col = [resid[r][j] for r in range(rows)]
        row = [resid[i][c] / pivot for c in range(cols)]
        resid = [[resid[r][c] - col[r] * row[c] for c in range(cols)] for r in range(rows)]
        terms.append((col, row))

    factors = []
    for col, row in terms:
        a = max(abs(x) for x in col)
        b = max(abs(x) for x in row)
        s = math.sqrt(b / a)
        v = np.array([float(x) * s for x in col])
        h = np.array([float(x) / s for x in row])
        factors.append((v, h))

    err = np.max(np.abs(reconstruct(factors, k.shape) - k))
    if err > tolerance:
        raise DecompositionError(f"reconstruction error {err:.3g} exceeds tolerance {tolerance:g}")
    return factors


def reconstruct(factors: Sequence[Factor], shape=None) -> np.ndarray:
    if not factors:
        if shape is None:
            raise ValueError("shape required for an empty factor list")
        return np.zeros(shape)
    return sum(np.outer(v, h) for v, h in factors)


@dataclass(frozen=True, eq=False)
class PassPlan:
    """Separable passes, their stage gains and (once quantized) tap schedules.

    ``realized_scale`` is the common product ``g_v * g_h`` of every pass: the
    simulator output approximates ``realized_scale`` times the unscaled
    kernel response, in register units.
    """

    factors: tuple[Factor, ...]
    gains: tuple[tuple[float, float], ...]
    realized_scale: float
    sample_rate: int
    window: PwmWindow = PwmWindow()
    taps: tuple[tuple[TapSet, TapSet], ...] | None = None
    kernel: KernelSpec | None = None

    @property
    def rows(self) -> int:
        return len(self.factors[0][0])

    @property
    def cols(self) -> int:
        return len(self.factors[0][1])

    @property
    def n_passes(self) -> int:
        return len(self.factors)

    def realized_kernel(self) -> np.ndarray:
        """Kernel actually applied, ``sum outer(N_v/ticks, N_h/ticks)``, in register units."""
        if self.taps is None:
            raise ConfigurationError("plan has not been quantized")
        return reconstruct([(tv.realized(), th.realized()) for tv, th in self.taps],
                           (self.rows, self.cols))

    def describe(self) -> str:
        name = self.kernel.name if self.kernel is not None and self.kernel.name else "kernel"
        lines = [
            f"plan for {name}: {self.rows}x{self.cols}, {self.n_passes} pass(es), "
            f"S={self.sample_rate}, ticks={self.window.ticks}, "
            f"realized scale={self.realized_scale:.6g}"
        ]
        for k, ((v, h), (gv, gh)) in enumerate(zip(self.factors, self.gains), start=1):
            lines.append(f"  pass {k}: g_v={gv:.6g} g_h={gh:.6g}")
            lines.append(f"    v factor  {np.array2string(v, precision=4)}")
            lines.append(f"    h factor  {np.array2string(h, precision=4)}")
            if self.taps is not None:
                tv, th = self.taps[k - 1]
                lines.append(f"    v counts  {tv.counts()}  realized {np.array2string(tv.realized(), precision=4)}")
                lines.append(f"    h counts  {th.counts()}  realized {np.array2string(th.realized(), precision=4)}")
        return "\n".join(lines)


GainPolicy = Union[str, tuple[float, float], Sequence[tuple[float, float]]]


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def auto_gains(factors, sample_rate, ticks):
    # Largest per-stage gain that maps the biggest entry to exactly S samples.
    full = []
    for v, h in factors:
        av, ah = np.max(np.abs(v)), np.max(np.abs(h))
        gv = sample_rate / (ticks * av) if av > 0 else math.inf
        gh = sample_rate / (ticks * ah) if ah > 0 else math.inf
        full.append((gv, gh))
    products = [gv * gh for gv, gh in full if math.isfinite(gv * gh)]
    if not products:
        return [(1.0, 1.0)] * len(factors), 1.0
    # Every pass must land on the same overall scale; the tightest pass sets it
    # and both stages of every pass share its per-stage gain.
    scale = min(products)
    g = math.sqrt(scale)
    gains = [(g, g)] * len(factors)
    return gains, scale


def quantize_plan(factors: Sequence[Factor], sample_rate: int,
                  window: PwmWindow = PwmWindow(), gains: GainPolicy = "auto_max",
                  phase_rule: PhaseRule = "midpoint",
                  kernel: KernelSpec | None = None) -> PassPlan:
    """Turn factor pairs into tap schedules at the given stage gains.

    ``gains`` is ``"auto_max"``, one ``(g_v, g_h)`` pair for every pass, or a
    list with one pair per pass. Each entry ``c`` becomes
    ``round(c * g * ticks)`` samples.
    """
    factors = tuple((np.asarray(v, dtype=float), np.asarray(h, dtype=float)) for v, h in factors)
    if not factors:
        raise ConfigurationError("plan needs at least one pass")
    if not 1 <= sample_rate <= window.ticks:
        raise ConfigurationError(f"sample rate {sample_rate} outside [1, {window.ticks}]")
    for v, h in factors:
        if len(v) % 2 != 1 or len(h) % 2 != 1:
            raise ConfigurationError("factor lengths must be odd")
        if len(v) != len(factors[0][0]) or len(h) != len(factors[0][1]):
            raise ConfigurationError("all passes must share the kernel size")

    if isinstance(gains, str):
        if gains != "auto_max":
            raise ConfigurationError(f"unknown gain policy {gains!r}")
        gain_list, scale = auto_gains(factors, sample_rate, window.ticks)
    else:
        g = list(gains)
        if len(g) == 2 and all(isinstance(x, (int, float)) for x in g):
            g = [tuple(g)] * len(factors)
        if len(g) != len(factors):
            raise ConfigurationError(f"{len(g)} gain pairs given for {len(factors)} passes")
        gain_list = [(float(gv), float(gh)) for gv, gh in g]
        products = [gv * gh for gv, gh in gain_list]
        scale = products[0]
        if any(not math.isclose(p, scale, rel_tol=1e-12) for p in products):
            raise ConfigurationError(
                "explicit gains must give every pass the same g_v * g_h product"
            )

    taps = []
    for k, ((v, h), (gv, gh)) in enumerate(zip(factors, gain_list), start=1):
        stage_taps = []
        for stage, vec, g in (("vertical", v, gv), ("horizontal", h, gh)):
            m = len(vec) // 2
            scheds = []
            for idx, c in enumerate(vec):
                n = round_half_away(c * g * window.ticks)
                if abs(n) > sample_rate:
                    raise UnrealizableCoefficientError(
                        f"pass {k} {stage} tap {idx - m:+d}: coefficient {c:.6g} at gain "
                        f"{g:.6g} needs {abs(n)} samples, sample rate is {sample_rate}"
                    )
                scheds.append(make_schedule(n, window, phase_rule))
            stage_taps.append(TapSet(tuple(scheds)))
        taps.append(tuple(stage_taps))

    return PassPlan(factors, tuple(gain_list), scale, sample_rate, window, tuple(taps), kernel)


def plan_kernel(kernel: KernelSpec, sample_rate: int, window: PwmWindow = PwmWindow(),
                gains: GainPolicy = "auto_max", phase_rule: PhaseRule = "midpoint",
                tolerance: float = DEFAULT_TOLERANCE) -> PassPlan:
    return quantize_plan(factorize(kernel, tolerance), sample_rate, window, gains,
                         phase_rule, kernel=kernel)


def coefficient_error(plan: PassPlan, kernel: KernelSpec) -> np.ndarray:
    """Realized kernel, de-scaled back to kernel units, minus the requested kernel."""
    if plan.realized_scale == 0:
        raise ConfigurationError("plan has zero realized scale")
    return plan.realized_kernel() / plan.realized_scale - kernel.coefficients
