"""Deterministic synthetic scenes for tests, demos and benchmarks.

The central generator builds fusion problems with a known answer: the
cube has exact spectral rank ``r`` and its hidden component lies in the
range of the degradation adjoint, so a converged solver reproduces the
ground truth to numerical precision.  A second generator produces
full-rank cubes with a prescribed singular-value decay for studying
truncation behaviour.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .cube import HsCube, fold
from .degradation import (
    NoiseSpec,
    SpatialDegradation,
    SpectralResponse,
    add_noise,
    adjoint_spatial_degradation,
    apply_spatial_degradation,
    apply_spectral_response,
)
from .errors import ParameterError
from .solver import compute_x
from .subspace import CoefficientPair, SpectralBasis, _fix_column_signs, derive_coefficients

__all__ = [
    "SyntheticProblem",
    "random_orthonormal_basis",
    "smooth_field",
    "synthetic_rank_r_cube",
    "synthetic_decaying_cube",
    "synthetic_fusion_problem",
]


def random_orthonormal_basis(bands: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    """Random ``bands x rank`` matrix with orthonormal, sign-fixed columns."""
    if rank > bands:
        raise ParameterError(f"rank {rank} exceeds band count {bands}")
    q, _ = np.linalg.qr(rng.standard_normal((bands, rank)))
    return _fix_column_signs(q)


def smooth_field(
    height: int, width: int, rng: np.random.Generator, smoothness: float = 2.0
) -> np.ndarray:
    """Periodically smoothed unit-variance noise field."""
    field = gaussian_filter(rng.standard_normal((height, width)), smoothness, mode="wrap")
    std = field.std()
    if std > 0:
        field = field / std
    return field


def synthetic_rank_r_cube(
    height: int, width: int, bands: int, rank: int, rng: np.random.Generator
) -> HsCube:
    """Cube of exact spectral rank ``rank`` with Gaussian factors."""
    left = rng.standard_normal((height * width, rank))
    right = rng.standard_normal((rank, bands))
    return fold(left @ right, height, width)


def synthetic_decaying_cube(
    height: int,
    width: int,
    bands: int,
    rng: np.random.Generator,
    decay: float = 0.5,
) -> tuple[HsCube, np.ndarray]:
    """Full-rank cube with singular values ``decay ** k``; returns both."""
    if not 0 < decay < 1:
        raise ParameterError(f"decay must be in (0, 1), got {decay!r}")
    pixels = height * width
    if pixels < bands:
        raise ParameterError(f"need at least {bands} pixels to reach full rank, got {pixels}")
    q1, _ = np.linalg.qr(rng.standard_normal((pixels, bands)))
    q2, _ = np.linalg.qr(rng.standard_normal((bands, bands)))
    sv = decay ** np.arange(bands, dtype=np.float64)
    return fold((q1 * sv) @ q2.T, height, width), sv


@dataclass(frozen=True)
class SyntheticProblem:
    """Ground truth, observations and the exact hidden component."""

    x: HsCube
    y: HsCube
    z: HsCube
    coeff: CoefficientPair
    yhat_true: HsCube
    basis: SpectralBasis


def synthetic_fusion_problem(
    height: int,
    width: int,
    response: SpectralResponse,
    degradation: SpatialDegradation,
    rank: int,
    seed: int,
    noise_sigma: float = 0.0,
    offset: float = 1.0,
) -> SyntheticProblem:
    """Build a fusion problem whose exact answer is reachable by the solver.

    The sharp content is made of smooth positive fields; the hidden
    component is drawn on the coarse grid and lifted through the
    degradation adjoint, which keeps it inside the subspace the
    gradient iteration explores.  ``noise_sigma`` perturbs both
    observations with independent seeded noise; the returned ground
    truth stays clean.
    """
    f = degradation.factor
    if height % f or width % f:
        raise ParameterError(
            f"grid {height}x{width} is not divisible by the degradation factor {f}"
        )
    rng = np.random.default_rng(seed)
    s = response.channels
    if rank <= s:
        raise ParameterError(f"rank must exceed {s} response channels, got {rank}")

    basis = SpectralBasis(random_orthonormal_basis(response.bands, rank, rng))
    coeff = derive_coefficients(basis, response)

    sharp = np.stack(
        [offset + 0.35 * smooth_field(height, width, rng) for _ in range(s)]
    )
    coarse = np.stack(
        [smooth_field(height // f, width // f, rng) for _ in range(rank - s)]
    )
    hidden = adjoint_spatial_degradation(
        HsCube(coarse), degradation, height, width
    )
    hidden = HsCube(hidden.planes * float(f * f))

    x = compute_x(HsCube(sharp), hidden, coeff)
    y = apply_spectral_response(x, response)
    z = apply_spatial_degradation(x, degradation)
    if noise_sigma > 0:
        seed_y = int(rng.integers(2**63))
        seed_z = int(rng.integers(2**63))
        y = add_noise(y, NoiseSpec(noise_sigma, seed_y))
        z = add_noise(z, NoiseSpec(noise_sigma, seed_z))
    return SyntheticProblem(x=x, y=y, z=z, coeff=coeff, yhat_true=hidden, basis=basis)
