"""Reconstruction quality measures for hyperspectral cubes.

All four measures compare a test cube against a reference of identical
shape: peak signal-to-noise ratio averaged over bands, the mean spectral
angle in degrees, the dimensionless relative global error (scaled by the
resolution factor), and mean structural similarity over local Gaussian
windows.  A :class:`MetricReport` bundles them and serialises to JSON,
CSV and an aligned text table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .cube import HsCube, unfold
from .errors import DegeneracyError, ParameterError, ShapeError

__all__ = [
    "psnr",
    "per_band_psnr",
    "sam",
    "ergas",
    "ssim",
    "MetricReport",
    "compute_report",
    "format_metric_table",
]

#: Reported PSNR never exceeds this value; identical inputs hit the cap.
PSNR_CAP_DB = 99.0

#: Pixels whose reference or test spectrum norm falls below this are
#: excluded from the spectral angle average.
SAM_NORM_FLOOR = 1e-12

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5


def _check_pair(ref: HsCube, test: HsCube) -> None:
    if ref.shape != test.shape:
        raise ShapeError(f"cube shapes differ: reference {ref.shape}, test {test.shape}")


def _resolve_peak(ref: HsCube, peak: float | None) -> float:
    if peak is None:
        peak = float(ref.planes.max())
    if not np.isfinite(peak) or peak <= 0:
        raise ParameterError(f"peak must be finite and > 0, got {peak!r}")
    return float(peak)


def per_band_psnr(ref: HsCube, test: HsCube, peak: float | None = None) -> np.ndarray:
    """PSNR of every band in dB, each capped at :data:`PSNR_CAP_DB`."""
    _check_pair(ref, test)
    peak = _resolve_peak(ref, peak)
    diff = ref.planes - test.planes
    mse = np.mean(diff * diff, axis=(1, 2))
    out = np.full(ref.bands, PSNR_CAP_DB)
    nonzero = mse > 0
    out[nonzero] = np.minimum(
        10.0 * np.log10(peak * peak / mse[nonzero]), PSNR_CAP_DB
    )
    return out


def psnr(ref: HsCube, test: HsCube, peak: float | None = None) -> float:
    """Mean over bands of the per-band PSNR in dB."""
    return float(np.mean(per_band_psnr(ref, test, peak)))


def sam(ref: HsCube, test: HsCube) -> float:
    """Mean spectral angle in degrees across spatial positions.

    Pixels where either spectrum has near-zero norm (below
    :data:`SAM_NORM_FLOOR`) carry no direction and are skipped; the mean
    runs over the remaining positions.
    """
    _check_pair(ref, test)
    if ref.bands < 2:
        raise ParameterError("spectral angle needs at least 2 bands")
    a = unfold(ref)
    b = unfold(test)
    norm_a = np.linalg.norm(a, axis=1)
    norm_b = np.linalg.norm(b, axis=1)
    valid = (norm_a >= SAM_NORM_FLOOR) & (norm_b >= SAM_NORM_FLOOR)
    if not valid.any():
        raise DegeneracyError("no pixel has a usable spectrum; all norms are near zero")
    cosines = np.sum(a[valid] * b[valid], axis=1) / (norm_a[valid] * norm_b[valid])
    angles = np.degrees(np.arccos(np.clip(cosines, -1.0, 1.0)))
    return float(np.mean(angles))


def ergas(ref: HsCube, test: HsCube, factor: float) -> float:
    """Relative global error: ``100 / factor * sqrt(mean_b MSE_b / mean_b^2)``.

    ``factor`` is the linear resolution ratio between the fused grid and
    the coarse observation.  Bands whose reference mean is near zero
    make the normalisation meaningless and raise an error naming the
    band.
    """
    _check_pair(ref, test)
    if not np.isfinite(factor) or factor <= 0:
        raise ParameterError(f"resolution factor must be finite and > 0, got {factor!r}")
    diff = ref.planes - test.planes
    mse = np.mean(diff * diff, axis=(1, 2))
    means = np.mean(ref.planes, axis=(1, 2))
    tiny = np.abs(means) < 1e-12
    if tiny.any():
        band = int(np.flatnonzero(tiny)[0])
        raise DegeneracyError(
            f"reference band {band} has near-zero mean; relative error is undefined"
        )
    return float(100.0 / factor * np.sqrt(np.mean(mse / means**2)))


def _ssim_window() -> np.ndarray:
    offsets = np.arange(SSIM_WINDOW, dtype=np.float64) - (SSIM_WINDOW - 1) / 2.0
    gauss = np.exp(-0.5 * (offsets / SSIM_SIGMA) ** 2)
    win = np.outer(gauss, gauss)
    return win / win.sum()


def _local_mean(plane: np.ndarray, window: np.ndarray) -> np.ndarray:
    return fftconvolve(plane, window, mode="valid")


def ssim(ref: HsCube, test: HsCube, peak: float | None = None) -> float:
    """Mean structural similarity over Gaussian windows and bands.

    Uses an ``11 x 11`` window with ``sigma = 1.5`` and the usual
    stabilisers ``C1 = (0.01 peak)^2`` and ``C2 = (0.03 peak)^2``; only
    windows that fit entirely inside the image contribute.  Identical
    cubes score exactly 1.
    """
    _check_pair(ref, test)
    if ref.height < SSIM_WINDOW or ref.width < SSIM_WINDOW:
        raise ParameterError(
            f"image {ref.height}x{ref.width} is smaller than the "
            f"{SSIM_WINDOW}x{SSIM_WINDOW} window"
        )
    peak = _resolve_peak(ref, peak)
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    window = _ssim_window()
    scores = np.empty(ref.bands)
    for band in range(ref.bands):
        x = ref.planes[band]
        y = test.planes[band]
        mu_x = _local_mean(x, window)
        mu_y = _local_mean(y, window)
        var_x = _local_mean(x * x, window) - mu_x * mu_x
        var_y = _local_mean(y * y, window) - mu_y * mu_y
        cov = _local_mean(x * y, window) - mu_x * mu_y
        score_map = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) / (
            (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
        )
        scores[band] = np.mean(score_map)
    return float(np.mean(scores))


@dataclass(frozen=True)
class MetricReport:
    """All four measures for one reference/test pair."""

    psnr: float
    sam: float
    ergas: float
    ssim: float
    per_band_psnr: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "psnr": self.psnr,
            "sam": self.sam,
            "ergas": self.ergas,
            "ssim": self.ssim,
            "per_band_psnr": list(self.per_band_psnr),
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8") as handle:
                handle.write(text)
        return text


def compute_report(
    ref: HsCube, test: HsCube, factor: float, peak: float | None = None
) -> MetricReport:
    """Evaluate every measure at once and bundle the values."""
    return MetricReport(
        psnr=psnr(ref, test, peak),
        sam=sam(ref, test),
        ergas=ergas(ref, test, factor),
        ssim=ssim(ref, test, peak),
        per_band_psnr=tuple(float(v) for v in per_band_psnr(ref, test, peak)),
    )


def format_metric_table(reports: dict[str, MetricReport]) -> str:
    """Aligned text table with one row per method, one column per measure."""
    headers = ["method", "PSNR", "SAM", "ERGAS", "SSIM"]
    rows = [
        [
            name,
            f"{report.psnr:.2f}",
            f"{report.sam:.2f}",
            f"{report.ergas:.2f}",
            f"{report.ssim:.3f}",
        ]
        for name, report in reports.items()
    ]
    widths = [
        max(len(headers[col]), *(len(row[col]) for row in rows)) if rows else len(headers[col])
        for col in range(len(headers))
    ]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"
