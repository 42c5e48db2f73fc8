import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from densescan.grid import Image, load_ddsf, save_ddsf
from densescan.psf import (
    AIRY_FIRST_ZERO,
    AiryCore,
    Disk,
    Gaussian,
    SpotImage,
    bessel_j1,
    make_microscope_psf,
    make_spot,
)

# Values frozen from the power-series oracle
#   J1(x) = sum_m (-1)^m (x/2)^(2m+1) / (m! (m+1)!)
# summed to convergence at 50-digit precision (see j1_series below).
J1_FROZEN = {
    0.0: 0.0,
    0.25: 0.12402597732272692273,
    0.5: 0.24226845767487388638,
    1.0: 0.44005058574493351596,
    2.0: 0.5767248077568733872,
    3.0: 0.33905895852593645893,
    3.8317059702: 3.0257317610332283798e-12,
    5.0: -0.32757913759146522204,
    7.5: 0.13524842757970550518,
    10.0: 0.04347274616886143667,
    11.9: -0.22898324966192405505,
    12.0: -0.22344710449062761237,
    12.1: -0.21574897337692480827,
    13.0: -0.070318052121778371157,
    15.0: 0.20510403861352276115,
    18.5: -0.16663364001001603118,
    22.0: 0.11717778964385170066,
    26.0: 0.01504573058691581115,
    29.5: -0.064304378099192396782,
    30.0: -0.11875106261662293652,
}


def j1_series(x, dps=50):
    """High-precision power-series oracle, summed to convergence."""
    import mpmath as mp

    with mp.workdps(dps):
        x = mp.mpf(x)
        term = x / 2
        total = mp.mpf(0)
        m = 0
        while True:
            total += term
            m += 1
            term = -term * (x / 2) ** 2 / (m * (m + 1))
            if abs(term) < mp.mpf(10) ** (-dps + 5):
                return total


# --- bessel_j1 ---------------------------------------------------------------

@pytest.mark.parametrize("x,expected", sorted(J1_FROZEN.items()))
def test_j1_frozen_series_values(x, expected):
    assert bessel_j1(x) == pytest.approx(expected, abs=1e-10)


def test_j1_zero_is_exact():
    assert bessel_j1(0.0) == 0.0


def test_j1_first_zero_constant():
    # root of the series oracle near 3.83, and the J1 value there
    import mpmath as mp

    root = float(mp.findroot(lambda t: j1_series(t), 3.83))
    assert root == pytest.approx(AIRY_FIRST_ZERO, abs=1e-9)
    assert abs(bessel_j1(AIRY_FIRST_ZERO)) < 1e-8


def test_j1_matches_scipy_on_dense_grid():
    from scipy.special import j1 as scipy_j1

    xs = np.linspace(-30.0, 30.0, 24001)
    assert np.max(np.abs(bessel_j1(xs) - scipy_j1(xs))) < 1e-10


def test_j1_odd_symmetry_bitwise():
    xs = np.linspace(0.01, 30.0, 997)
    assert np.array_equal(bessel_j1(-xs), -bessel_j1(xs))


def test_j1_accepts_scalars_and_arrays():
    assert isinstance(bessel_j1(1.0), float)
    out = bessel_j1(np.array([[1.0, 2.0]]))
    assert out.shape == (1, 2)


# --- make_spot ---------------------------------------------------------------

def test_disk_identity_kernel():
    spot = make_spot(Disk(0.5), 1)
    assert spot.side == 1
    assert spot.pixels[0, 0] == 1.0


def test_gaussian_spot_basics():
    spot = make_spot(Gaussian(15.0), 101)
    px = spot.pixels
    assert spot.side == 101
    assert px[50, 50] == px.max()
    assert np.array_equal(px, px[::-1, ::-1])  # point symmetry, bit-exact
    assert abs(px.sum() - 1.0) <= 1e-12


def test_airy_core_first_zero_boundary():
    spot = make_spot(AiryCore(50.0), 101)
    px = spot.pixels
    peak = px.max()
    # on-axis pixel at exactly the first-zero radius
    assert px[50, 100] / peak < 1e-8
    # strictly compact support beyond the first zero
    c = 50
    yy, xx = np.mgrid[0:101, 0:101]
    outside = np.hypot(yy - c, xx - c) > 50.0
    assert np.all(px[outside] == 0.0)


def test_spot_profile_validation():
    with pytest.raises(ValueError):
        Gaussian(0.0)
    with pytest.raises(ValueError):
        Disk(-1.0)
    with pytest.raises(ValueError):
        AiryCore(float("nan"))


@pytest.mark.parametrize("side", [0, 2, 100])
def test_make_spot_rejects_even_or_empty_side(side):
    with pytest.raises(ValueError):
        make_spot(Gaussian(1.0), side)


def test_make_spot_rejects_oversized_support():
    with pytest.raises(ValueError):
        make_spot(Disk(8.0), 9)  # floor(8) > 4
    with pytest.raises(ValueError):
        make_spot(AiryCore(5.0), 9)
    make_spot(Disk(0.9), 1)  # sub-pixel disk still fits


profiles = st.one_of(
    st.floats(0.3, 20.0).map(Gaussian),
    st.floats(0.4, 6.0).map(Disk),
    st.floats(1.0, 6.0).map(AiryCore),
)


@settings(max_examples=40, deadline=None)
@given(profiles, st.integers(6, 20))
def test_spot_invariants_property(profile, half):
    side = 2 * half + 1
    spot = make_spot(profile, side)
    px = spot.pixels
    assert px.min() >= 0.0
    assert abs(px.sum() - 1.0) <= 1e-12
    assert np.array_equal(px, px[::-1, ::-1])


def test_spot_image_validation():
    with pytest.raises(ValueError, match="square"):
        SpotImage(Image(np.full((3, 5), 1.0 / 15), 1.0))
    with pytest.raises(ValueError, match="odd"):
        SpotImage(Image(np.full((4, 4), 1.0 / 16), 1.0))
    with pytest.raises(ValueError, match="normalized"):
        SpotImage(Image(np.full((3, 3), 1.0), 1.0))
    bad = np.full((3, 3), 1.0 / 9)
    bad[0, 0] = -bad[0, 0]
    bad[2, 2] += 2.0 / 9
    with pytest.raises(ValueError, match="nonnegative"):
        SpotImage(Image(bad, 1.0))


def test_spot_roundtrip_revalidates(tmp_path):
    spot = make_spot(Gaussian(5.0), 31)
    path = tmp_path / "spot.ddsf"
    save_ddsf(spot.image, path)
    again = SpotImage(load_ddsf(path))  # normalization re-verified on load
    assert np.array_equal(again.pixels, spot.pixels)


# --- make_microscope_psf ------------------------------------------------------

def test_microscope_psf_peak_and_ring():
    psf = make_microscope_psf(20.0, 81)
    px = psf.pixels
    c = 40
    assert px[c, c] == px.max()
    peak = px[c, c]
    # first-zero ring: on-axis local minimum, far below the peak
    assert px[c, c + 20] / peak < 1e-6
    assert px[c, c + 19] > px[c, c + 20] < px[c, c + 21]
    # rings are kept: intensity rises again past the first zero
    assert px[c, c + 25] > px[c, c + 20]


def test_microscope_psf_physical_radius():
    # 2000 px at 0.1 nm/px corresponds to a 200 nm first-zero radius
    psf = make_microscope_psf(2000.0, 101, pitch=0.1)
    assert psf.pitch * 2000.0 == pytest.approx(200.0)
    assert psf.pixels[50, 50] == psf.pixels.max()


def test_microscope_psf_point_symmetry_and_normalization():
    psf = make_microscope_psf(7.5, 41)
    px = psf.pixels
    assert np.array_equal(px, px[::-1, ::-1])
    assert abs(px.sum() - 1.0) <= 1e-12


def test_microscope_psf_rejects_even_side():
    with pytest.raises(ValueError):
        make_microscope_psf(10.0, 40)
