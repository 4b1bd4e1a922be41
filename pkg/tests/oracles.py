"""Slow reference implementations used to cross-check the package.

Everything here is written the dumb way on purpose: explicit Python
loops, dense matrices built from unit impulses, scalar formulas.  The
tests treat these as ground truth and require the fast vectorised code
to agree with them.
"""

import math

import numpy as np

from specfuse import HsCube, apply_spatial_degradation


def unfold_by_loop(cube):
    out = np.zeros((cube.height * cube.width, cube.bands))
    for b in range(cube.bands):
        for i in range(cube.height):
            for j in range(cube.width):
                out[i * cube.width + j, b] = cube.planes[b, i, j]
    return out


def mode3_by_loop(cube, matrix):
    matrix = np.asarray(matrix, dtype=np.float64)
    out = np.zeros((matrix.shape[0], cube.height, cube.width))
    for i in range(cube.height):
        for j in range(cube.width):
            out[:, i, j] = matrix @ cube.planes[:, i, j]
    return out


def dense_degradation_matrix(degradation, height, width):
    """Single-band matrix of the blur-decimate operator, one impulse at a time."""
    f = degradation.factor
    rows = (height // f) * (width // f)
    mat = np.zeros((rows, height * width))
    for idx in range(height * width):
        impulse = np.zeros((1, height, width))
        impulse[0, idx // width, idx % width] = 1.0
        out = apply_spatial_degradation(HsCube(impulse), degradation)
        mat[:, idx] = out.planes[0].ravel()
    return mat


def blur_decimate_by_loop(plane, kernel, factor):
    """Periodic correlation with a top-left anchored kernel, then decimation."""
    height, width = plane.shape
    kh, kw = kernel.shape
    blurred = np.zeros_like(plane)
    for i in range(height):
        for j in range(width):
            acc = 0.0
            for p in range(kh):
                for q in range(kw):
                    acc += kernel[p, q] * plane[(i + p) % height, (j + q) % width]
            blurred[i, j] = acc
    return blurred[::factor, ::factor]


def psnr_by_loop(ref, test, peak):
    values = []
    for b in range(ref.bands):
        mse = float(np.mean((ref.planes[b] - test.planes[b]) ** 2))
        if mse == 0.0:
            values.append(99.0)
        else:
            values.append(min(10.0 * math.log10(peak * peak / mse), 99.0))
    return sum(values) / len(values), values


def sam_by_loop(ref, test):
    total = 0.0
    count = 0
    for i in range(ref.height):
        for j in range(ref.width):
            u = ref.planes[:, i, j]
            v = test.planes[:, i, j]
            nu = math.sqrt(float(u @ u))
            nv = math.sqrt(float(v @ v))
            if nu < 1e-12 or nv < 1e-12:
                continue
            cosine = max(-1.0, min(1.0, float(u @ v) / (nu * nv)))
            total += math.degrees(math.acos(cosine))
            count += 1
    return total / count


def ergas_by_loop(ref, test, factor):
    acc = 0.0
    for b in range(ref.bands):
        mse = float(np.mean((ref.planes[b] - test.planes[b]) ** 2))
        mean = float(np.mean(ref.planes[b]))
        acc += mse / (mean * mean)
    return 100.0 / factor * math.sqrt(acc / ref.bands)


def gaussian_window(size=11, sigma=1.5):
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-0.5 * (offsets / sigma) ** 2)
    window = np.outer(g, g)
    return window / window.sum()


def ssim_by_loop(ref, test, peak, size=11):
    window = gaussian_window(size)
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    band_scores = []
    for b in range(ref.bands):
        x = ref.planes[b]
        y = test.planes[b]
        scores = []
        for i in range(ref.height - size + 1):
            for j in range(ref.width - size + 1):
                px = x[i : i + size, j : j + size]
                py = y[i : i + size, j : j + size]
                mx = float((window * px).sum())
                my = float((window * py).sum())
                vx = float((window * px * px).sum()) - mx * mx
                vy = float((window * py * py).sum()) - my * my
                cov = float((window * px * py).sum()) - mx * my
                num = (2.0 * mx * my + c1) * (2.0 * cov + c2)
                den = (mx * mx + my * my + c1) * (vx + vy + c2)
                scores.append(num / den)
        band_scores.append(sum(scores) / len(scores))
    return sum(band_scores) / len(band_scores)
