"""specfuse: multispectral/hyperspectral image fusion.

Reconstructs a high-resolution hyperspectral cube from a sharp
multispectral observation and a blurred, decimated hyperspectral one.
The estimate lives in a low-dimensional spectral subspace learned from
the coarse data; only the component invisible to the multispectral
sensor is optimised, by proximal gradient descent on the data fit.
"""

from .benchmark import (
    BenchmarkSpec,
    bicubic_upsample,
    run_benchmark,
    run_evaluate,
    run_fuse,
    run_simulate,
    run_wald,
    simulate_observations,
)
from .composite import export_composite
from .cube import HsCube, fold, mode3_multiply, unfold
from .degradation import (
    NoiseSpec,
    SpatialDegradation,
    SpectralResponse,
    add_noise,
    adjoint_spatial_degradation,
    apply_spatial_degradation,
    apply_spectral_response,
    load_matrix_csv,
    save_matrix_csv,
    wald_downsample,
)
from .envi import header_path, read_cube, write_cube
from .errors import (
    ConfigError,
    DegeneracyError,
    DivergenceError,
    ParameterError,
    ParseError,
    ShapeError,
    SizeError,
    SpecfuseError,
)
from .metrics import (
    MetricReport,
    compute_report,
    ergas,
    format_metric_table,
    per_band_psnr,
    psnr,
    sam,
    ssim,
)
from .solver import (
    FusionConfig,
    FusionResult,
    compute_gradient_step,
    compute_residual,
    compute_x,
    estimate_step_size,
    fuse,
    prox_step,
)
from .subspace import (
    CoefficientPair,
    SpectralBasis,
    decompose_exact,
    derive_coefficients,
    spectral_subspace_from_lrhs,
    consistency_residual,
)
from .synthetic import (
    SyntheticProblem,
    random_orthonormal_basis,
    smooth_field,
    synthetic_decaying_cube,
    synthetic_fusion_problem,
    synthetic_rank_r_cube,
)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkSpec",
    "CoefficientPair",
    "ConfigError",
    "DegeneracyError",
    "DivergenceError",
    "FusionConfig",
    "FusionResult",
    "HsCube",
    "MetricReport",
    "NoiseSpec",
    "ParameterError",
    "ParseError",
    "ShapeError",
    "SizeError",
    "SpatialDegradation",
    "SpecfuseError",
    "SpectralBasis",
    "SpectralResponse",
    "SyntheticProblem",
    "add_noise",
    "adjoint_spatial_degradation",
    "apply_spatial_degradation",
    "apply_spectral_response",
    "bicubic_upsample",
    "compute_gradient_step",
    "compute_report",
    "compute_residual",
    "compute_x",
    "consistency_residual",
    "decompose_exact",
    "derive_coefficients",
    "ergas",
    "estimate_step_size",
    "export_composite",
    "fold",
    "format_metric_table",
    "fuse",
    "header_path",
    "load_matrix_csv",
    "mode3_multiply",
    "per_band_psnr",
    "prox_step",
    "psnr",
    "random_orthonormal_basis",
    "read_cube",
    "run_benchmark",
    "run_evaluate",
    "run_fuse",
    "run_simulate",
    "run_wald",
    "sam",
    "save_matrix_csv",
    "simulate_observations",
    "smooth_field",
    "spectral_subspace_from_lrhs",
    "ssim",
    "synthetic_decaying_cube",
    "synthetic_fusion_problem",
    "synthetic_rank_r_cube",
    "unfold",
    "wald_downsample",
    "write_cube",
]
