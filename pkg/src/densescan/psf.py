"""Synthesis of compact-support illumination spots and wide-field PSFs.

A spot image is the illumination spot's intensity distribution sampled on
the sample grid; it acts as the convolution kernel of the dense-scan
forward model. Spots are sum-normalized so that scanning a constant
sample returns that constant. The conventional-microscope PSF keeps its
Airy rings (low-pass behavior), while the spot variants are compactly
supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Image

# First positive root of J1; sets the Airy first-zero radius scale.
AIRY_FIRST_ZERO = 3.8317059702

_SERIES_CUTOFF = 12.0
_SERIES_TERMS = 40
_ASYMPTOTIC_TERMS = 17


@dataclass(frozen=True)
class AiryCore:
    """Airy intensity pattern clamped to zero outside its first ring."""

    first_zero_radius: float

    def __post_init__(self) -> None:
        if not (self.first_zero_radius > 0) or not math.isfinite(self.first_zero_radius):
            raise ValueError(f"first_zero_radius must be > 0, got {self.first_zero_radius}")


@dataclass(frozen=True)
class Gaussian:
    """Isotropic Gaussian profile, truncated at the grid edge."""

    sigma: float

    def __post_init__(self) -> None:
        if not (self.sigma > 0) or not math.isfinite(self.sigma):
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class Disk:
    """Uniform disk: 1 inside the radius, 0 outside."""

    radius: float

    def __post_init__(self) -> None:
        if not (self.radius > 0) or not math.isfinite(self.radius):
            raise ValueError(f"radius must be > 0, got {self.radius}")


SpotProfile = AiryCore | Gaussian | Disk


@dataclass(frozen=True, eq=False)
class SpotImage:
    """A scan spot: square, odd-sided, nonnegative, sum-normalized image.

    The invariants are re-verified on construction, so loading a spot
    from disk through this wrapper re-checks normalization.
    """

    image: Image

    def __post_init__(self) -> None:
        im = self.image
        if im.width != im.height:
            raise ValueError(f"spot must be square, got {im.width}x{im.height}")
        if im.width % 2 == 0:
            raise ValueError(f"spot side must be odd, got {im.width}")
        px = im.pixels
        if px.min() < 0.0:
            raise ValueError("spot values must be nonnegative")
        total = float(px.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"spot must be sum-normalized, sum={total!r}")

    @property
    def side(self) -> int:
        return self.image.width

    @property
    def pixels(self) -> np.ndarray:
        return self.image.pixels


def _j1_series(x: np.ndarray) -> np.ndarray:
    # J1(x) = sum_m (-1)^m (x/2)^(2m+1) / (m! (m+1)!), |x| <= 12
    q = np.square(x / 2.0)
    term = x / 2.0
    total = term.copy()
    for m in range(1, _SERIES_TERMS + 1):
        term = term * (-q) / (m * (m + 1))
        total += term
    return total


def _j1_asymptotic(x: np.ndarray) -> np.ndarray:
    # Hankel expansion: J1(x) ~ sqrt(2/(pi x)) (P cos w - Q sin w),
    # w = x - 3pi/4, with P/Q series in 1/x (DLMF 10.17-style terms).
    ax = np.abs(x)
    term = np.ones_like(ax)
    p_sum = term.copy()
    q_sum = np.zeros_like(ax)
    sign_p = -1.0
    sign_q = 1.0
    for k in range(1, _ASYMPTOTIC_TERMS + 1):
        term = term * (4.0 - (2 * k - 1) ** 2) / (8.0 * k * ax)
        if k % 2 == 0:
            p_sum += sign_p * term
            sign_p = -sign_p
        else:
            q_sum += sign_q * term
            sign_q = -sign_q
    w = ax - 0.75 * np.pi
    val = np.sqrt(2.0 / (np.pi * ax)) * (p_sum * np.cos(w) - q_sum * np.sin(w))
    return np.copysign(1.0, x) * val


def bessel_j1(x):
    """Bessel function of the first kind, order 1.

    Power series below |x| = 12, Hankel asymptotic expansion above.
    Absolute accuracy is better than 1e-10 for |x| <= 30 and keeps
    improving beyond. Accepts a scalar or an ndarray.
    """
    arr = np.asarray(x, dtype=np.float64)
    scalar = arr.ndim == 0
    a = np.atleast_1d(arr)
    out = np.empty_like(a)
    small = np.abs(a) <= _SERIES_CUTOFF
    if small.any():
        out[small] = _j1_series(a[small])
    large = ~small
    if large.any():
        out[large] = _j1_asymptotic(a[large])
    return float(out[0]) if scalar else out


def _airy_intensity(r: np.ndarray, first_zero_radius: float) -> np.ndarray:
    # (2 J1(v)/v)^2 with v = AIRY_FIRST_ZERO * r / R; central limit 1.
    v = AIRY_FIRST_ZERO * r / first_zero_radius
    safe = np.where(v == 0.0, 1.0, v)
    return np.where(v == 0.0, 1.0, np.square(2.0 * bessel_j1(safe) / safe))


def _center_radii(side: int) -> np.ndarray:
    c = side // 2
    off = np.arange(side, dtype=np.float64) - c
    return np.hypot(off[:, None], off[None, :])


def make_spot(profile: SpotProfile, side: int, pitch: float = 1.0) -> SpotImage:
    """Sample a spot profile at pixel centers and sum-normalize it.

    side must be odd (well-defined center pixel) and large enough to
    contain the profile's support: Disk needs floor(radius) <= (side-1)/2,
    AiryCore needs first_zero_radius <= (side-1)/2. The Gaussian profile
    is simply truncated at the grid edge.
    """
    if side < 1 or side % 2 == 0:
        raise ValueError(f"spot side must be odd and >= 1, got {side}")
    half = (side - 1) // 2
    r = _center_radii(side)
    if isinstance(profile, Disk):
        if math.floor(profile.radius) > half:
            raise ValueError(
                f"disk radius {profile.radius} does not fit in side {side}"
            )
        values = (r <= profile.radius).astype(np.float64)
    elif isinstance(profile, Gaussian):
        values = np.exp(-np.square(r) / (2.0 * profile.sigma**2))
    elif isinstance(profile, AiryCore):
        if profile.first_zero_radius > half:
            raise ValueError(
                f"Airy first zero {profile.first_zero_radius} exceeds support "
                f"radius {half} for side {side}"
            )
        values = np.where(r > profile.first_zero_radius, 0.0,
                          _airy_intensity(r, profile.first_zero_radius))
    else:
        raise ValueError(f"unknown spot profile {profile!r}")
    total = values.sum()
    if not total > 0:
        raise ValueError("spot profile has no support on the grid")
    return SpotImage(Image(values / total, pitch))


def make_microscope_psf(first_zero_radius: float, side: int, pitch: float = 1.0) -> Image:
    """Full Airy intensity pattern (rings kept) on an odd square grid.

    Unlike the AiryCore spot, no clamping is applied beyond the first
    zero, so the PSF carries its diffraction rings within the grid;
    truncation to any odd side is allowed. Sum-normalized.
    """
    if side < 1 or side % 2 == 0:
        raise ValueError(f"psf side must be odd and >= 1, got {side}")
    if not (first_zero_radius > 0) or not math.isfinite(first_zero_radius):
        raise ValueError(f"first_zero_radius must be > 0, got {first_zero_radius}")
    values = _airy_intensity(_center_radii(side), first_zero_radius)
    return Image(values / values.sum(), pitch)
