"""Forward model: point-scan simulation, wide-field baseline, noise.

A scan measures, at each lattice site, the spot-weighted sum of the
sample's optical response under the site's footprint. The sample is
extended outside its bounds by the declared background model (the
preprocessed periphery). With step 1 this is exactly a correlation of
the extended sample with the spot; coarser steps subsample that dense
field, so usual-scan outputs are bit-identical to subsampled dense-scan
outputs by construction.

Lattice convention: sites per axis are c_i = -extension + (step-1)//2 +
i*step for i in range(floor((N + 2*extension)/step)); footprints are
centered on their step cell, which reproduces side-by-side tiling when
the step equals the spot side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Image
from .psf import SpotImage


@dataclass(frozen=True)
class ZeroBackground:
    """Preprocessed periphery: zero response outside the sample."""


@dataclass(frozen=True)
class ConstantBackground:
    """Known constant response outside the sample."""

    level: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.level) or self.level < 0:
            raise ValueError(f"background level must be finite and >= 0, got {self.level}")


Background = ZeroBackground | ConstantBackground


@dataclass(frozen=True)
class ScanConfig:
    """Scan lattice geometry plus the periphery model."""

    step: int = 1
    extension: int = 0
    background: Background = field(default_factory=ZeroBackground)

    def __post_init__(self) -> None:
        if int(self.step) != self.step or self.step < 1:
            raise ValueError(f"step must be an integer >= 1, got {self.step}")
        if int(self.extension) != self.extension or self.extension < 0:
            raise ValueError(f"extension must be an integer >= 0, got {self.extension}")
        if not isinstance(self.background, (ZeroBackground, ConstantBackground)):
            raise ValueError(f"unknown background model {self.background!r}")
        object.__setattr__(self, "step", int(self.step))
        object.__setattr__(self, "extension", int(self.extension))


def _next_fast_len(n: int) -> int:
    # smallest 5-smooth integer >= n
    while True:
        m = n
        for p in (2, 3, 5):
            while m % p == 0:
                m //= p
        if m == 1:
            return n
        n += 1


def _corr_valid_fft(padded: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    kh, kw = kernel.shape
    ph, pw = padded.shape
    oh, ow = ph - kh + 1, pw - kw + 1
    fh, fw = _next_fast_len(ph), _next_fast_len(pw)
    spec = np.fft.rfft2(padded, (fh, fw)) * np.fft.rfft2(kernel[::-1, ::-1], (fh, fw))
    full = np.fft.irfft2(spec, (fh, fw))
    return full[kh - 1 : kh - 1 + oh, kw - 1 : kw - 1 + ow]


def _corr_valid_direct(padded: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # Accumulates kernel taps in row-major order; per-pixel summation
    # order is therefore fixed and results are bit-reproducible.
    kh, kw = kernel.shape
    oh, ow = padded.shape[0] - kh + 1, padded.shape[1] - kw + 1
    out = np.zeros((oh, ow))
    for uy in range(kh):
        row = kernel[uy]
        for ux in range(kw):
            out += row[ux] * padded[uy : uy + oh, ux : ux + ow]
    return out


def _corr_valid(padded: np.ndarray, kernel: np.ndarray, method: str) -> np.ndarray:
    if method == "auto":
        oh = padded.shape[0] - kernel.shape[0] + 1
        ow = padded.shape[1] - kernel.shape[1] + 1
        macs = kernel.size * max(oh, 1) * max(ow, 1)
        method = "direct" if macs < 2_000_000 else "fft"
    if method == "fft":
        return _corr_valid_fft(padded, kernel)
    if method == "direct":
        return _corr_valid_direct(padded, kernel)
    raise ValueError(f"unknown method {method!r}, expected fft, direct or auto")


def _dense_field(sample: np.ndarray, spot: np.ndarray, extension: int,
                 bg_level: float, method: str) -> np.ndarray:
    """Step-1 scan field over the full lattice, shape N + 2*extension."""
    nh, nw = sample.shape
    ctr = spot.shape[0] // 2
    pad = extension + ctr
    padded = np.full((nh + 2 * pad, nw + 2 * pad), float(bg_level))
    padded[pad : pad + nh, pad : pad + nw] = sample
    out = _corr_valid(padded, spot, method)
    if bg_level == 0.0:
        # Sites whose footprint misses the sample are structurally zero;
        # pin them to exact 0.0 so the support contract is bitwise.
        band = extension - ctr
        if band > 0:
            out[:band, :] = 0.0
            out[-band:, :] = 0.0
            out[:, :band] = 0.0
            out[:, -band:] = 0.0
    return out


def scan_dims(sample_width: int, sample_height: int, config: ScanConfig) -> tuple[int, int]:
    """Output (width, height) of :func:`simulate_scan` for this geometry."""
    w = (sample_width + 2 * config.extension) // config.step
    h = (sample_height + 2 * config.extension) // config.step
    return w, h


def simulate_scan(sample: Image, spot: SpotImage, config: ScanConfig,
                  method: str = "auto") -> Image:
    """Simulate a point scan of ``sample`` with the given spot.

    Each output pixel is sum(spot * extended_sample) under the footprint
    at its lattice site; the extended sample equals the background level
    outside the sample bounds. Output pitch is sample pitch times step.

    method selects the computation path: "fft" (fast), "direct"
    (vectorized row-major accumulation) or "auto".
    """
    out_w, out_h = scan_dims(sample.width, sample.height, config)
    if out_w < 1 or out_h < 1:
        raise ValueError(
            f"step {config.step} too large for scan extent "
            f"{sample.width + 2 * config.extension}x{sample.height + 2 * config.extension}"
        )
    bg = 0.0 if isinstance(config.background, ZeroBackground) else config.background.level
    dense = _dense_field(sample.pixels, spot.pixels, config.extension, bg, method)
    off = (config.step - 1) // 2
    sub = dense[off :: config.step, off :: config.step][:out_h, :out_w]
    return Image(sub, sample.pitch * config.step)


def widefield_blur(sample: Image, microscope_psf: Image, method: str = "auto") -> Image:
    """Same-size linear convolution of the sample with a microscope PSF.

    Zero boundary handling (the periphery is preprocessed to zero).
    The PSF must be square with an odd side.
    """
    psf = microscope_psf.pixels
    if psf.shape[0] != psf.shape[1]:
        raise ValueError(f"psf must be square, got {psf.shape[1]}x{psf.shape[0]}")
    if psf.shape[0] % 2 == 0:
        raise ValueError(f"psf side must be odd, got {psf.shape[0]}")
    ctr = psf.shape[0] // 2
    padded = np.zeros((sample.height + 2 * ctr, sample.width + 2 * ctr))
    padded[ctr : ctr + sample.height, ctr : ctr + sample.width] = sample.pixels
    # convolution = correlation with the flipped kernel
    out = _corr_valid(padded, psf[::-1, ::-1], method)
    return Image(out, sample.pitch)


def add_noise(image: Image, sigma: float, seed: int) -> Image:
    """Add i.i.d. Gaussian noise, N(0, sigma^2) per pixel.

    The generator is numpy's PCG64 ``Generator.standard_normal``, seeded
    with ``seed``; a given (seed, sigma) pair reproduces the output
    bit-identically. sigma = 0 returns the input unchanged.
    """
    if not (sigma >= 0) or not math.isfinite(sigma):
        raise ValueError(f"sigma must be finite and >= 0, got {sigma}")
    if sigma == 0.0:
        return image
    gen = np.random.Generator(np.random.PCG64(seed))
    noise = sigma * gen.standard_normal(image.pixels.shape)
    return Image(image.pixels + noise, image.pitch)
