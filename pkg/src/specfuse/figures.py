"""Matplotlib figures written next to the delimited report files.

Every CLI report path calls into here so runs leave visual artifacts
(convergence traces, per-band quality, benchmark comparisons) beside
the CSV and JSON output.  Figures are built with the object-oriented
API rather than pyplot, so rendering touches no global figure registry
and stays safe under the threaded benchmark path; PNG output always
goes through the Agg canvas.  Variable metadata is stripped so repeated
runs produce identical bytes.
"""

from __future__ import annotations

import threading

from matplotlib.figure import Figure

__all__ = [
    "save_convergence_figure",
    "save_band_psnr_figure",
    "save_benchmark_figure",
]

_SAVE_KWARGS = {"dpi": 120, "metadata": {"Software": None}}

# Tick-label rendering on log axes goes through matplotlib's mathtext
# parser, which keeps global state; hold this across each render so the
# threaded benchmark path stays correct.
_RENDER_LOCK = threading.Lock()


def save_convergence_figure(result, path) -> None:
    """Objective and data-residual traces of one solver run."""
    with _RENDER_LOCK:
        _render_convergence(result, path)


def _render_convergence(result, path) -> None:
    fig = Figure(figsize=(9, 3.5))
    axes = fig.subplots(1, 2)
    iterations = range(1, len(result.objective_trace) + 1)
    axes[0].semilogy(iterations, result.objective_trace, color="tab:blue")
    axes[0].set_xlabel("iteration")
    axes[0].set_ylabel("objective")
    axes[0].set_title("objective trace")
    axes[1].semilogy(iterations, result.data_residual_trace, color="tab:orange")
    axes[1].set_xlabel("iteration")
    axes[1].set_ylabel("||C X - Z||_F")
    axes[1].set_title("data residual")
    for ax in axes:
        ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)


def save_band_psnr_figure(report, path) -> None:
    """Per-band PSNR of one evaluation."""
    with _RENDER_LOCK:
        _render_band_psnr(report, path)


def _render_band_psnr(report, path) -> None:
    fig = Figure(figsize=(7, 3.5))
    ax = fig.subplots()
    bands = range(len(report.per_band_psnr))
    ax.plot(bands, report.per_band_psnr, marker="o", markersize=3, color="tab:green")
    ax.set_xlabel("band")
    ax.set_ylabel("PSNR [dB]")
    ax.set_title(f"per-band PSNR (mean {report.psnr:.2f} dB)")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)


def save_benchmark_figure(names, fused_reports, baseline_reports, path) -> None:
    """Per-cube PSNR and SAM bars for the solver against the baseline."""
    with _RENDER_LOCK:
        _render_benchmark(names, fused_reports, baseline_reports, path)


def _render_benchmark(names, fused_reports, baseline_reports, path) -> None:
    positions = range(len(names))
    fig = Figure(figsize=(max(8.0, 1.0 + 0.8 * len(names)), 3.8))
    axes = fig.subplots(1, 2)
    specs = [("psnr", "PSNR [dB]"), ("sam", "SAM [deg]")]
    for ax, (attr, label) in zip(axes, specs):
        fused = [getattr(r, attr) for r in fused_reports]
        base = [getattr(r, attr) for r in baseline_reports]
        ax.bar([p - 0.2 for p in positions], fused, width=0.4, label="fused",
               color="tab:blue")
        ax.bar([p + 0.2 for p in positions], base, width=0.4, label="baseline",
               color="tab:gray")
        ax.set_xticks(list(positions))
        ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
        ax.set_ylabel(label)
        ax.grid(True, axis="y", alpha=0.3)
    axes[0].legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
