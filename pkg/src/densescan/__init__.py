"""Dense-scan imaging simulator and deconvolution toolkit."""

from .deconv import (
    DeconvRequest,
    InverseFilter,
    LeastSquaresCG,
    RecoveryResult,
    RichardsonLucy,
    Wiener,
    adjoint_apply,
    dft2_forward,
    dft2_inverse,
    recover,
)
from .grid import (
    FormatError,
    Image,
    Rect,
    crop,
    export_pgm,
    load_ddsf,
    new_image,
    pad,
    save_ddsf,
)
from .metrics import MetricsReport, compare, two_point_contrast
from .patterns import BarGrid, PatternSpec, PointPair, RandomBlobs, SiemensStar, generate
from .psf import (
    AIRY_FIRST_ZERO,
    AiryCore,
    Disk,
    Gaussian,
    SpotImage,
    SpotProfile,
    bessel_j1,
    make_microscope_psf,
    make_spot,
)
from .scanner import (
    Background,
    ConstantBackground,
    ScanConfig,
    ZeroBackground,
    add_noise,
    scan_dims,
    simulate_scan,
    widefield_blur,
)

__version__ = "0.1.0"
