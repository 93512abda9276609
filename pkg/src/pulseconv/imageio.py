"""8-bit grayscale images: PGM (P2/P5) I/O, illumination scaling, CSV planes."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, PgmFormatError

_WS = b" \t\r\n\v\f"


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def skip_space(self):
        d = self.data
        while self.pos < len(d):
            if d[self.pos] in _WS:
                self.pos += 1
            elif d[self.pos] == ord("#"):
                while self.pos < len(d) and d[self.pos] not in b"\r\n":
                    self.pos += 1
            else:
                break

    def token(self, what: str) -> tuple[bytes, int]:
        self.skip_space()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos] not in _WS + b"#":
            self.pos += 1
        if start == self.pos:
            raise PgmFormatError(f"unexpected end of data while reading {what}", start)
        return self.data[start:self.pos], start

    def integer(self, what: str) -> int:
        tok, at = self.token(what)
        if not tok.isdigit():
            raise PgmFormatError(f"{what} must be a non-negative integer, got {tok!r}", at)
        return int(tok)


def read_pgm(data: bytes) -> np.ndarray:
    """Decode a P2 or P5 PGM with maxval <= 255 into a ``(height, width)`` uint8 array.

    Sample values are returned as stored; they are not rescaled to 255.
    """
    r = _Reader(bytes(data))
    if r.data[:2] not in (b"P2", b"P5"):
        raise PgmFormatError(f"bad magic {r.data[:2]!r}, expected P2 or P5", 0)
    binary = r.data[:2] == b"P5"
    r.pos = 2
    if r.pos < len(r.data) and r.data[r.pos] not in _WS + b"#":
        raise PgmFormatError("magic number must be followed by whitespace", r.pos)
    width = r.integer("width")
    height = r.integer("height")
    at = r.pos
    maxval = r.integer("maxval")
    if not 1 <= maxval <= 255:
        raise PgmFormatError(f"maxval {maxval} unsupported (must be 1..255)", at)
    if width < 1 or height < 1:
        raise PgmFormatError(f"image dimensions must be positive, got {width}x{height}", at)
    count = width * height

    if binary:
        if r.pos >= len(r.data):
            raise PgmFormatError("missing whitespace after maxval", r.pos)
        start = r.pos + 1
        payload = r.data[start:start + count]
        if len(payload) < count:
            raise PgmFormatError(
                f"truncated payload: expected {count} bytes, found {len(payload)}",
                start + len(payload),
            )
        pixels = np.frombuffer(payload, dtype=np.uint8).copy()
        bad = np.flatnonzero(pixels > maxval)
        if bad.size:
            raise PgmFormatError(f"sample {pixels[bad[0]]} exceeds maxval {maxval}", start + int(bad[0]))
    else:
        pixels = np.empty(count, dtype=np.uint8)
        for i in range(count):
            try:
                tok, at = r.token("pixel data")
            except PgmFormatError as exc:
                raise PgmFormatError(
                    f"truncated payload: expected {count} samples, found {i}", exc.offset
                ) from None
            if not tok.isdigit() or int(tok) > maxval:
                raise PgmFormatError(f"invalid sample {tok!r} for maxval {maxval}", at)
            pixels[i] = int(tok)
    return pixels.reshape(height, width)


def write_pgm(image) -> bytes:
    """Encode as binary P5 with maxval 255."""
    img = np.asarray(image)
    if img.ndim != 2 or img.size == 0:
        raise ConfigurationError(f"expected a non-empty 2D image, got shape {img.shape}")
    if img.min() < 0 or img.max() > 255:
        raise ConfigurationError("PGM samples must lie in [0, 255]")
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + img.astype(np.uint8).tobytes()


def load_image(path) -> np.ndarray:
    return read_pgm(Path(path).read_bytes())


def save_image(path, image) -> None:
    Path(path).write_bytes(write_pgm(image))


def scale_illumination(image, factor: float) -> np.ndarray:
    """Dim an image: ``round(value * factor)`` with halves rounded up."""
    if not (0 < factor <= 1) or math.isnan(factor):
        raise ConfigurationError(f"illumination factor must be in (0, 1], got {factor}")
    img = np.asarray(image, dtype=float)
    return np.clip(np.floor(img * factor + 0.5), 0, 255).astype(np.uint8)


def visualize(plane, signed: bool) -> np.ndarray:
    """Map a signed result plane to 8 bits: ``128 + v/2`` if signed, else ``v``, clamped."""
    v = np.asarray(plane, dtype=float)
    if signed:
        v = np.floor(128 + v / 2 + 0.5)
    return np.clip(v, 0, 255).astype(np.uint8)


def plane_to_csv(plane) -> str:
    values = np.asarray(plane)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"x{j}" for j in range(values.shape[1])])
    for row in values:
        writer.writerow([int(v) if float(v).is_integer() else repr(float(v)) for v in row])
    return buf.getvalue()


def csv_to_plane(text: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(text)))
    return np.array([[float(v) for v in row] for row in rows[1:]])
