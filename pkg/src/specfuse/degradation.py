"""Observation operators linking the full-resolution cube to its measurements.

Two linear maps model the sensing chain.  The spectral response turns a
hyperspectral cube into a few broad bands (``Y = X R`` on unfolded
matrices).  The spatial degradation blurs each band with a periodic
kernel and keeps one sample per ``factor x factor`` block (``Z = C X``).
Both come with the small amount of machinery the solver needs: an exact
adjoint for ``C``, seeded Gaussian noise, CSV loading for kernels and
responses, and the reduced-scale protocol used when no ground truth
exists at full resolution.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .cube import HsCube, mode3_multiply
from .errors import DegeneracyError, ParameterError, ParseError, ShapeError

__all__ = [
    "SpectralResponse",
    "SpatialDegradation",
    "NoiseSpec",
    "apply_spectral_response",
    "apply_spatial_degradation",
    "adjoint_spatial_degradation",
    "add_noise",
    "wald_downsample",
    "load_matrix_csv",
    "save_matrix_csv",
]

#: Relative singular-value cutoff used for every rank decision in the package.
RANK_RTOL = 1e-8


def load_matrix_csv(path) -> np.ndarray:
    """Load a dense matrix from a comma-separated text file.

    One row per line, plain decimal fields.  Blank lines and lines
    starting with ``#`` are skipped.  Malformed content raises
    :class:`ParseError` naming the file and line.
    """
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            fields = [f.strip() for f in text.split(",")]
            try:
                row = [float(f) for f in fields]
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: non-numeric field") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ParseError(
                    f"{path}: line {lineno}: expected {width} fields, got {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def save_matrix_csv(matrix: np.ndarray, path) -> None:
    """Write a matrix as CSV with enough digits to round-trip float64."""
    mat = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    with open(path, "w", encoding="utf-8") as handle:
        for row in mat:
            handle.write(",".join(f"{v:.17g}" for v in row) + "\n")


@dataclass(frozen=True)
class SpectralResponse:
    """Bands-to-channels response matrix of shape ``(bands, channels)``.

    Column ``c`` holds the sensitivity of output channel ``c`` across the
    input bands.  The matrix must have full column rank; physically
    motivated presets are additionally non-negative with unit column
    sums.
    """

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.float64)
        if mat.ndim != 2:
            raise ShapeError(f"spectral response must be a matrix, got shape {mat.shape}")
        if not np.isfinite(mat).all():
            raise ParameterError("spectral response contains non-finite values")
        if mat.shape[0] < mat.shape[1] or mat.shape[1] < 1:
            raise ShapeError(
                f"spectral response needs at least as many bands as channels, "
                f"got shape {mat.shape}"
            )
        sv = np.linalg.svd(mat, compute_uv=False)
        if sv[0] == 0.0 or sv[-1] <= RANK_RTOL * sv[0]:
            raise DegeneracyError(
                "spectral response is rank deficient: "
                f"singular values range from {sv[-1]:.3e} to {sv[0]:.3e}"
            )
        mat = np.ascontiguousarray(mat)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def bands(self) -> int:
        return self.matrix.shape[0]

    @property
    def channels(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def from_csv(cls, path) -> "SpectralResponse":
        return cls(load_matrix_csv(path))

    @classmethod
    def gaussian(cls, bands, centers, widths) -> "SpectralResponse":
        """Smooth non-negative response made of one Gaussian bump per channel.

        ``centers`` and ``widths`` are in band-index units.  Columns are
        normalised to unit sum, so applying the response to a spectrally
        flat cube preserves its level.
        """
        centers = np.atleast_1d(np.asarray(centers, dtype=np.float64))
        widths = np.atleast_1d(np.asarray(widths, dtype=np.float64))
        if centers.shape != widths.shape:
            raise ShapeError("centers and widths must have matching lengths")
        if np.any(widths <= 0):
            raise ParameterError("bump widths must be positive")
        grid = np.arange(bands, dtype=np.float64)[:, None]
        bumps = np.exp(-0.5 * ((grid - centers[None, :]) / widths[None, :]) ** 2)
        return cls(bumps / bumps.sum(axis=0, keepdims=True))

    @classmethod
    def cave_rgb(cls) -> "SpectralResponse":
        """Packaged RGB response for 31-band cubes covering 400-700 nm."""
        ref = resources.files("specfuse.data").joinpath("cave_rgb_response.csv")
        with resources.as_file(ref) as path:
            matrix = load_matrix_csv(path)
        if np.any(matrix < 0):
            raise ParameterError("packaged RGB response must be non-negative")
        return cls(matrix)


@dataclass(frozen=True)
class SpatialDegradation:
    """Periodic blur followed by decimation, identical for every band.

    The kernel is anchored at the top-left sample: the blurred value at
    pixel ``(i, j)`` is ``sum_{p,q} kernel[p, q] * x[(i+p) % H, (j+q) % W]``,
    and decimation keeps the top-left pixel of every ``factor x factor``
    block.  A uniform ``f x f`` kernel with ``factor == f`` therefore
    averages disjoint blocks, which is the protocol used to simulate
    low-resolution acquisitions.  Kernels must sum to one.
    """

    kernel: np.ndarray
    factor: int

    def __post_init__(self):
        ker = np.asarray(self.kernel, dtype=np.float64)
        if ker.ndim != 2 or ker.size == 0:
            raise ShapeError(f"kernel must be a non-empty matrix, got shape {ker.shape}")
        if not np.isfinite(ker).all():
            raise ParameterError("kernel contains non-finite values")
        total = float(ker.sum())
        if abs(total - 1.0) > 1e-12:
            raise ParameterError(f"kernel must sum to 1, got {total!r}")
        if not isinstance(self.factor, (int, np.integer)) or self.factor < 1:
            raise ParameterError(f"decimation factor must be a positive integer, got {self.factor!r}")
        ker = np.ascontiguousarray(ker)
        ker.setflags(write=False)
        object.__setattr__(self, "kernel", ker)
        object.__setattr__(self, "factor", int(self.factor))

    @classmethod
    def uniform(cls, factor: int) -> "SpatialDegradation":
        """Block averaging: uniform ``factor x factor`` kernel, same factor."""
        if not isinstance(factor, (int, np.integer)) or factor < 1:
            raise ParameterError(f"decimation factor must be a positive integer, got {factor!r}")
        factor = int(factor)
        return cls(np.full((factor, factor), 1.0 / (factor * factor)), factor)

    @classmethod
    def from_csv(cls, path, factor: int) -> "SpatialDegradation":
        return cls(load_matrix_csv(path), factor)

    def _is_block_average(self) -> bool:
        f = self.factor
        return self.kernel.shape == (f, f) and bool(
            np.all(self.kernel == self.kernel.flat[0])
        )


@lru_cache(maxsize=64)
def _kernel_otf(kernel_bytes: bytes, kh: int, kw: int, height: int, width: int):
    """FFT of the kernel zero-padded into the image grid, top-left anchored."""
    kernel = np.frombuffer(kernel_bytes, dtype=np.float64).reshape(kh, kw)
    padded = np.zeros((height, width))
    padded[:kh, :kw] = kernel
    otf = np.fft.rfft2(padded)
    otf.setflags(write=False)
    return otf


def _correlate_periodic(planes: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Periodic cross-correlation of each plane with a top-left anchored kernel."""
    height, width = planes.shape[-2:]
    otf = _kernel_otf(kernel.tobytes(), *kernel.shape, height, width)
    return np.fft.irfft2(np.fft.rfft2(planes) * np.conj(otf), s=(height, width))


def _convolve_periodic(planes: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`_correlate_periodic` (periodic convolution)."""
    height, width = planes.shape[-2:]
    otf = _kernel_otf(kernel.tobytes(), *kernel.shape, height, width)
    return np.fft.irfft2(np.fft.rfft2(planes) * otf, s=(height, width))


def apply_spectral_response(x: HsCube, response: SpectralResponse) -> HsCube:
    """Project every pixel spectrum through the response columns."""
    if x.bands != response.bands:
        raise ShapeError(
            f"cube has {x.bands} bands but spectral response expects {response.bands}"
        )
    return mode3_multiply(x, response.matrix.T)


def _check_apply_shapes(x: HsCube, degradation: SpatialDegradation) -> None:
    f = degradation.factor
    if x.height % f or x.width % f:
        raise ShapeError(
            f"spatial dimensions {x.height}x{x.width} are not divisible by factor {f}"
        )
    kh, kw = degradation.kernel.shape
    if kh > x.height or kw > x.width:
        raise ShapeError(
            f"kernel {kh}x{kw} does not fit inside a {x.height}x{x.width} image"
        )


def apply_spatial_degradation(x: HsCube, degradation: SpatialDegradation) -> HsCube:
    """Blur each band periodically, then keep the top-left sample per block."""
    _check_apply_shapes(x, degradation)
    f = degradation.factor
    if degradation._is_block_average():
        weight = degradation.kernel.flat[0]
        sums = x.planes.reshape(
            x.bands, x.height // f, f, x.width // f, f
        ).sum(axis=(2, 4))
        return HsCube(sums * weight)
    blurred = _correlate_periodic(x.planes, degradation.kernel)
    return HsCube(blurred[:, ::f, ::f])


def adjoint_spatial_degradation(
    e: HsCube, degradation: SpatialDegradation, target_height: int, target_width: int
) -> HsCube:
    """Exact adjoint of :func:`apply_spatial_degradation`.

    Zero-upsamples ``e`` onto the ``target_height x target_width`` grid
    and runs the transposed blur, so that for every pair of cubes
    ``<C u, v> == <u, C^T v>`` holds to machine precision.
    """
    f = degradation.factor
    if target_height % f or target_width % f:
        raise ShapeError(
            f"target dimensions {target_height}x{target_width} are not divisible "
            f"by factor {f}"
        )
    if e.height != target_height // f or e.width != target_width // f:
        raise ShapeError(
            f"residual grid {e.height}x{e.width} does not match target "
            f"{target_height}x{target_width} at factor {f}"
        )
    kh, kw = degradation.kernel.shape
    if kh > target_height or kw > target_width:
        raise ShapeError(
            f"kernel {kh}x{kw} does not fit inside a {target_height}x{target_width} image"
        )
    if degradation._is_block_average():
        weight = degradation.kernel.flat[0]
        expanded = np.repeat(np.repeat(e.planes, f, axis=1), f, axis=2)
        return HsCube(expanded * weight)
    up = np.zeros((e.bands, target_height, target_width))
    up[:, ::f, ::f] = e.planes
    return HsCube(_convolve_periodic(up, degradation.kernel))


@dataclass(frozen=True)
class NoiseSpec:
    """Additive white Gaussian noise with a fixed seed."""

    sigma: float
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise ParameterError(f"noise sigma must be finite and >= 0, got {self.sigma!r}")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ParameterError(f"noise seed must be a non-negative integer, got {self.seed!r}")
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "seed", int(self.seed))


def add_noise(x: HsCube, noise: NoiseSpec) -> HsCube:
    """Add seeded i.i.d. Gaussian noise; ``sigma == 0`` returns ``x`` unchanged."""
    if noise.sigma == 0.0:
        return x
    rng = np.random.default_rng(noise.seed)
    return HsCube(x.planes + rng.normal(0.0, noise.sigma, x.planes.shape))


def wald_downsample(
    y: HsCube, z: HsCube, degradation: SpatialDegradation
) -> tuple[HsCube, HsCube, HsCube]:
    """Shift an observed pair to a reduced scale where ``z`` is ground truth.

    Both inputs are degraded by the same operator; the original ``z`` is
    returned untouched as the evaluation reference.  With ``factor == 1``
    and a ``[[1.0]]`` kernel the inputs pass through unchanged.
    """
    y_low = apply_spatial_degradation(y, degradation)
    z_low = apply_spatial_degradation(z, degradation)
    return y_low, z_low, z
