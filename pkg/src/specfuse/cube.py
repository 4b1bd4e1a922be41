"""Dense hyperspectral cube container and the matricisation helpers.

A cube is a ``height x width x bands`` image stored band-sequentially:
one full spatial plane per band, row-major inside each plane.  That is
the layout of the raw payload written by :mod:`specfuse.envi`, so cubes
round-trip through files without any shuffling.

The matrix view used throughout the fusion algebra is the *unfolding*:
an ``(height * width) x bands`` matrix whose row ``i * width + j`` is
the spectrum of pixel ``(i, j)``.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError, ShapeError

__all__ = ["HsCube", "unfold", "fold", "mode3_multiply"]


class HsCube:
    """Immutable hyperspectral cube of 64-bit floats.

    Parameters
    ----------
    planes : array_like
        Band-sequential stack of shape ``(bands, height, width)``.

    Notes
    -----
    The constructor copies its input when needed, coerces it to
    contiguous float64 and rejects non-finite values, so every cube in
    circulation satisfies the container invariants.  The wrapped array
    is marked read-only; derive new cubes instead of mutating.
    """

    __slots__ = ("planes",)

    def __init__(self, planes):
        arr = np.asarray(planes, dtype=np.float64)
        if arr.ndim != 3:
            raise ShapeError(
                f"cube data must be 3-d (bands, height, width), got shape {arr.shape}"
            )
        if arr.size == 0:
            raise ShapeError(f"cube dimensions must be positive, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ParameterError("cube contains non-finite values")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "planes", arr)

    def __setattr__(self, name, value):
        raise AttributeError("HsCube is immutable")

    @property
    def bands(self) -> int:
        return self.planes.shape[0]

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        """Spatial-first shape tuple ``(height, width, bands)``."""
        return (self.height, self.width, self.bands)

    def band(self, index: int) -> np.ndarray:
        """Read-only view of one spectral plane."""
        if not 0 <= index < self.bands:
            raise ParameterError(
                f"band index {index} out of range for {self.bands}-band cube"
            )
        return self.planes[index]

    def norm(self) -> float:
        """Frobenius norm of the cube seen as a flat vector."""
        return float(np.linalg.norm(self.planes.ravel()))

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"HsCube(height={self.height}, width={self.width}, bands={self.bands})"


def unfold(cube: HsCube) -> np.ndarray:
    """Matricise a cube into pixel rows.

    Returns the ``(height * width) x bands`` matrix whose row
    ``i * width + j`` is the spectrum at pixel ``(i, j)``.  The result
    is a read-only view; copy before mutating.
    """
    return cube.planes.reshape(cube.bands, -1).T


def fold(matrix: np.ndarray, height: int, width: int) -> HsCube:
    """Inverse of :func:`unfold` for the given spatial dimensions."""
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.ndim != 2:
        raise ShapeError(f"expected a 2-d matrix to fold, got shape {mat.shape}")
    if height <= 0 or width <= 0:
        raise ShapeError(f"fold target dimensions must be positive, got {height}x{width}")
    if mat.shape[0] != height * width:
        raise ShapeError(
            f"cannot fold {mat.shape[0]}x{mat.shape[1]} matrix into a "
            f"{height}x{width} grid ({height * width} pixels expected)"
        )
    return HsCube(mat.T.reshape(mat.shape[1], height, width))


def mode3_multiply(cube: HsCube, matrix: np.ndarray) -> HsCube:
    """Multiply every pixel spectrum by ``matrix`` from the left.

    For ``matrix`` of shape ``(out_bands, bands)`` the result ``w``
    satisfies ``w[i, j, l] = sum_k cube[i, j, k] * matrix[l, k]``,
    i.e. ``unfold(result) == unfold(cube) @ matrix.T``.
    """
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.ndim != 2:
        raise ShapeError(f"mode-3 factor must be a matrix, got shape {mat.shape}")
    if mat.shape[1] != cube.bands:
        raise ShapeError(
            f"mode-3 factor has {mat.shape[1]} columns but cube has {cube.bands} bands"
        )
    return fold(unfold(cube) @ mat.T, cube.height, cube.width)
