"""Image data model, padding/cropping, and bit-exact file formats.

Images are immutable after construction (the pixel array is marked
read-only), so every operation here is pure and safe to share across
threads.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DDSF_MAGIC = b"DDSIMG01"
DDSF_HEADER = struct.Struct("<8sIId")  # magic, width, height, pitch


class FormatError(ValueError):
    """A DDSF payload is malformed (bad magic, truncation, size mismatch)."""


@dataclass(frozen=True, eq=False)
class Image:
    """A 2D real-valued intensity grid with a physical pixel pitch.

    Parameters
    ----------
    pixels : np.ndarray
        Row-major float64 array of shape (height, width). Converted and
        frozen (read-only) on construction. All values must be finite.
    pitch : float
        Physical sampling, nanometers per pixel. Must be positive and
        finite.
    """

    pixels: np.ndarray
    pitch: float

    def __post_init__(self) -> None:
        px = np.array(self.pixels, dtype=np.float64, order="C", copy=True)
        if px.ndim != 2:
            raise ValueError(f"pixels must be 2D, got ndim={px.ndim}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"image dimensions must be >= 1, got {px.shape}")
        if not np.all(np.isfinite(px)):
            raise ValueError("pixel values must all be finite")
        pitch = float(self.pitch)
        if not np.isfinite(pitch) or pitch <= 0.0:
            raise ValueError(f"pitch must be a positive finite value, got {self.pitch}")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)
        object.__setattr__(self, "pitch", pitch)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __repr__(self) -> str:
        return f"Image({self.width}x{self.height}, pitch={self.pitch} nm/px)"


@dataclass(frozen=True)
class Rect:
    """Pixel-aligned window. Offsets may be negative in scan-lattice
    coordinates; width and height are always >= 1."""

    x0: int
    y0: int
    width: int
    height: int

    def __post_init__(self) -> None:
        for name in ("x0", "y0", "width", "height"):
            value = getattr(self, name)
            if int(value) != value:
                raise ValueError(f"Rect.{name} must be an integer, got {value}")
            object.__setattr__(self, name, int(value))
        if self.width < 1 or self.height < 1:
            raise ValueError(f"Rect dimensions must be >= 1, got {self.width}x{self.height}")


def new_image(width: int, height: int, pitch: float, fill: float = 0.0) -> Image:
    """Create a constant-filled image.

    Raises ValueError for non-positive dimensions or pitch, or a
    non-finite fill value.
    """
    if width < 1 or height < 1:
        raise ValueError(f"image dimensions must be >= 1, got {width}x{height}")
    if not np.isfinite(fill):
        raise ValueError(f"fill must be finite, got {fill}")
    return Image(np.full((height, width), float(fill)), pitch)


def pad(image: Image, border: int, value: float = 0.0) -> Image:
    """Surround an image with a constant border on all four sides.

    The interior is copied bit-exactly; output dims grow by 2*border per
    axis. border = 0 returns an identical image.
    """
    if border < 0:
        raise ValueError(f"border must be >= 0, got {border}")
    if border == 0:
        return Image(image.pixels, image.pitch)
    out = np.pad(image.pixels, border, mode="constant", constant_values=float(value))
    return Image(out, image.pitch)


def crop(image: Image, window: Rect) -> Image:
    """Extract a sub-grid. The window must lie fully inside the image."""
    if window.x0 < 0 or window.y0 < 0:
        raise ValueError(f"crop window starts outside the image: ({window.x0}, {window.y0})")
    if window.x0 + window.width > image.width or window.y0 + window.height > image.height:
        raise ValueError(
            f"crop window {window} exceeds image extent {image.width}x{image.height}"
        )
    sub = image.pixels[window.y0 : window.y0 + window.height, window.x0 : window.x0 + window.width]
    return Image(sub, image.pitch)


def save_ddsf(image: Image, path: str | Path) -> None:
    """Write an image in the DDSF binary format (bit-exact round trip).

    Layout: 8-byte ASCII magic ``DDSIMG01``, u32le width, u32le height,
    f64le pitch, then width*height f64le samples, row-major from the
    top-left pixel.
    """
    header = DDSF_HEADER.pack(DDSF_MAGIC, image.width, image.height, image.pitch)
    payload = np.ascontiguousarray(image.pixels, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def load_ddsf(path: str | Path) -> Image:
    """Read a DDSF file written by :func:`save_ddsf`.

    Raises FormatError with a distinct message for bad magic, truncated
    header or payload, trailing bytes, or invalid header fields.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < DDSF_HEADER.size:
        raise FormatError(f"truncated header: {len(blob)} bytes < {DDSF_HEADER.size}")
    magic, width, height, pitch = DDSF_HEADER.unpack_from(blob)
    if magic != DDSF_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {DDSF_MAGIC!r}")
    if width < 1 or height < 1:
        raise FormatError(f"invalid dimensions {width}x{height}")
    if not np.isfinite(pitch) or pitch <= 0.0:
        raise FormatError(f"invalid pitch {pitch}")
    expected = width * height * 8
    got = len(blob) - DDSF_HEADER.size
    if got < expected:
        raise FormatError(f"truncated payload: {got} bytes < {expected}")
    if got > expected:
        raise FormatError(f"trailing bytes: {got - expected} past the payload")
    data = np.frombuffer(blob, dtype="<f8", count=width * height, offset=DDSF_HEADER.size)
    if not np.all(np.isfinite(data)):
        raise FormatError("non-finite pixel data")
    return Image(data.reshape(height, width), pitch)


def export_pgm(image: Image, path: str | Path, bit_depth: int = 8) -> None:
    """Write a binary PGM (P5) rendering of the image.

    Values are mapped linearly from [min, max] onto [0, 2**bit_depth - 1].
    A constant image maps to mid-gray (2**(bit_depth-1)) so blank canvases
    stay exportable. 16-bit samples are written big-endian per the
    graymap convention.
    """
    if bit_depth not in (8, 16):
        raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")
    maxval = (1 << bit_depth) - 1
    px = image.pixels
    lo = float(px.min())
    hi = float(px.max())
    if hi > lo:
        # divide before scaling: for near-degenerate ranges the ratio
        # stays in [0, 1] where a precomputed 1/(hi-lo) would overflow
        scaled = np.rint((px - lo) / (hi - lo) * maxval)
        levels = np.clip(scaled, 0, maxval)
    else:
        levels = np.full(px.shape, float(1 << (bit_depth - 1)))
    header = f"P5\n{image.width} {image.height}\n{maxval}\n".encode("ascii")
    body = levels.astype(">u2" if bit_depth == 16 else "u1").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)
