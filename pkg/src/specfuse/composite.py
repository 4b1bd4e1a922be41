"""False-colour PNG snapshots of selected cube bands."""

from __future__ import annotations

import numpy as np
from PIL import Image

from .cube import HsCube
from .errors import ParameterError

__all__ = ["export_composite"]


def _stretch(plane: np.ndarray) -> np.ndarray:
    """Min-max stretch one plane to uint8; constant planes map to mid-grey."""
    lo = float(plane.min())
    hi = float(plane.max())
    if hi <= lo:
        return np.full(plane.shape, 128, dtype=np.uint8)
    scaled = (plane - lo) * (255.0 / (hi - lo))
    return np.clip(np.rint(scaled), 0, 255).astype(np.uint8)


def export_composite(
    cube: HsCube, band_r: int, band_g: int, band_b: int, path
) -> None:
    """Write an 8-bit RGB PNG from three cube bands.

    Each channel is stretched to its own min-max range, so composites
    show spatial structure rather than calibrated radiance.
    """
    for name, band in (("red", band_r), ("green", band_g), ("blue", band_b)):
        if not isinstance(band, (int, np.integer)) or not 0 <= band < cube.bands:
            raise ParameterError(
                f"{name} band index {band!r} out of range for {cube.bands}-band cube"
            )
    rgb = np.stack(
        [_stretch(cube.planes[b]) for b in (band_r, band_g, band_b)], axis=-1
    )
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")
