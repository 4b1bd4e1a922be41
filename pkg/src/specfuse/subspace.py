"""Spectral subspace estimation and the exact two-term decomposition.

Any cube whose pixel spectra live in an ``r``-dimensional subspace can
be written as ``X = Y A + Yhat B`` where ``Y`` is its projection through
a full-column-rank response and ``Yhat`` collects the ``r - s`` spectral
degrees of freedom the response cannot see.  This module estimates the
subspace from low-resolution data, derives one valid ``(A, B)`` pair in
closed form and provides the exact decomposition used as a test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cube import HsCube, fold, unfold
from .degradation import (
    RANK_RTOL,
    SpatialDegradation,
    SpectralResponse,
    apply_spatial_degradation,
    apply_spectral_response,
)
from .errors import DegeneracyError, ParameterError, ParseError, ShapeError

__all__ = [
    "SpectralBasis",
    "CoefficientPair",
    "spectral_subspace_from_lrhs",
    "derive_coefficients",
    "decompose_exact",
    "consistency_residual",
]


def _fix_column_signs(v: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry of each is positive.

    Makes SVD-derived bases deterministic: LAPACK fixes each singular
    vector only up to sign.
    """
    out = v.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        if col[np.argmax(np.abs(col))] < 0:
            out[:, j] = -col
    return out


@dataclass(frozen=True)
class SpectralBasis:
    """Orthonormal basis of a spectral subspace, shape ``(bands, rank)``."""

    v: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] < 1 or v.shape[0] < v.shape[1]:
            raise ShapeError(f"basis must be a tall matrix, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise ParameterError("basis contains non-finite values")
        gram = v.T @ v
        if np.max(np.abs(gram - np.eye(v.shape[1]))) > 1e-10:
            raise DegeneracyError("basis columns are not orthonormal to 1e-10")
        v = np.ascontiguousarray(v)
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    @property
    def bands(self) -> int:
        return self.v.shape[0]

    @property
    def rank(self) -> int:
        return self.v.shape[1]


@dataclass(frozen=True)
class CoefficientPair:
    """Mixing matrices ``(A, B)`` of the decomposition ``X = Y A + Yhat B``.

    ``a`` has shape ``(channels, bands)`` and ``b`` shape
    ``(rank - channels, bands)``; stacked they must span a subspace of
    dimension ``rank``, otherwise the decomposition loses information.
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(np.asarray(self.a, dtype=np.float64))
        b = np.ascontiguousarray(np.asarray(self.b, dtype=np.float64))
        if a.ndim != 2 or b.ndim != 2:
            raise ShapeError("coefficient factors must be matrices")
        if a.shape[1] != b.shape[1]:
            raise ShapeError(
                f"coefficient factors disagree on band count: {a.shape} vs {b.shape}"
            )
        if not (np.isfinite(a).all() and np.isfinite(b).all()):
            raise ParameterError("coefficients contain non-finite values")
        stacked = np.vstack([a, b])
        if stacked.shape[0] > stacked.shape[1]:
            raise ShapeError(
                f"stacked coefficients have {stacked.shape[0]} rows but only "
                f"{stacked.shape[1]} bands"
            )
        sv = np.linalg.svd(stacked, compute_uv=False)
        if sv[0] == 0.0 or sv[-1] <= RANK_RTOL * sv[0]:
            raise DegeneracyError(
                "stacked coefficient matrix is rank deficient: "
                f"singular values range from {sv[-1]:.3e} to {sv[0]:.3e}"
            )
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def channels(self) -> int:
        """Number of response channels ``s``."""
        return self.a.shape[0]

    @property
    def rank(self) -> int:
        """Total subspace dimension ``r``."""
        return self.a.shape[0] + self.b.shape[0]

    @property
    def bands(self) -> int:
        return self.a.shape[1]

    def to_csv(self, path) -> None:
        """Write ``A`` then ``B`` with a one-line ``s,r,bands`` header."""
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(f"{self.channels},{self.rank},{self.bands}\n")
            for row in np.vstack([self.a, self.b]):
                handle.write(",".join(f"{v:.17g}" for v in row) + "\n")

    @classmethod
    def from_csv(cls, path) -> "CoefficientPair":
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
        if not lines:
            raise ParseError(f"{path}: empty coefficient file")
        try:
            channels, rank, bands = (int(v) for v in lines[0].split(","))
        except ValueError:
            raise ParseError(f"{path}: line 1: expected header 's,r,bands'") from None
        if not 0 < channels < rank:
            raise ParseError(f"{path}: line 1: header requires 0 < s < r")
        rows = []
        for lineno, text in enumerate(lines[1:], start=2):
            if not text.strip():
                continue
            try:
                row = [float(f) for f in text.split(",")]
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: non-numeric field") from None
            if len(row) != bands:
                raise ParseError(
                    f"{path}: line {lineno}: expected {bands} fields, got {len(row)}"
                )
            rows.append(row)
        if len(rows) != rank:
            raise ParseError(f"{path}: expected {rank} coefficient rows, got {len(rows)}")
        mat = np.asarray(rows)
        return cls(mat[:channels], mat[channels:])


def spectral_subspace_from_lrhs(z: HsCube, rank: int) -> SpectralBasis:
    """Leading right singular subspace of the unfolded low-resolution cube.

    Deterministic: repeated calls on identical input produce bitwise
    identical bases thanks to the column sign convention.
    """
    limit = min(z.height * z.width, z.bands)
    if not isinstance(rank, (int, np.integer)) or not 1 <= rank <= limit:
        raise ParameterError(
            f"rank must be an integer in [1, {limit}] for a "
            f"{z.height}x{z.width}x{z.bands} cube, got {rank!r}"
        )
    _, _, vt = np.linalg.svd(unfold(z), full_matrices=False)
    return SpectralBasis(_fix_column_signs(vt[: int(rank)].T))


def derive_coefficients(
    basis: SpectralBasis, response: SpectralResponse
) -> CoefficientPair:
    """Closed-form ``(A, B)`` for a basis/response pair.

    With ``M = V^T R``, sets ``A = pinv(M) V^T`` and ``B = N^T V^T``
    where ``N`` is an orthonormal basis of the null space of ``M^T``.
    ``B`` then has exactly unit singular values, and for any cube whose
    spectra lie in ``span(V)`` the pair reproduces it exactly from
    ``(Y, Yhat)``.
    """
    if basis.bands != response.bands:
        raise ShapeError(
            f"basis covers {basis.bands} bands but response expects {response.bands}"
        )
    r, s = basis.rank, response.channels
    if r <= s:
        raise ParameterError(
            f"subspace rank must exceed the response channel count, got rank {r} "
            f"with {s} channels"
        )
    m = basis.v.T @ response.matrix
    u, sv, wt = np.linalg.svd(m, full_matrices=True)
    if sv[0] == 0.0 or sv[s - 1] <= RANK_RTOL * sv[0]:
        raise DegeneracyError(
            "spectral response collapses inside the subspace: "
            f"singular values of V^T R range from {sv[s - 1]:.3e} to {sv[0]:.3e}"
        )
    pinv_m = wt.T @ (u[:, :s] / sv).T
    a = pinv_m @ basis.v.T
    n = _fix_column_signs(u[:, s:])
    b = n.T @ basis.v.T
    return CoefficientPair(a, b)


def decompose_exact(
    x: HsCube, response: SpectralResponse, rank: int
) -> tuple[HsCube, HsCube, CoefficientPair]:
    """Split a cube into its response projection and the hidden remainder.

    Returns ``(y, yhat, coeff)`` with ``y`` the response projection of
    ``x`` and ``yhat`` the least-squares completion, so that
    ``x == compute_x(y, yhat, coeff)`` exactly whenever the spectra of
    ``x`` span at most ``rank`` dimensions.
    """
    if x.bands != response.bands:
        raise ShapeError(
            f"cube has {x.bands} bands but spectral response expects {response.bands}"
        )
    limit = min(x.height * x.width, x.bands)
    if not isinstance(rank, (int, np.integer)) or not 1 <= rank <= limit:
        raise ParameterError(
            f"rank must be an integer in [1, {limit}] for a "
            f"{x.height}x{x.width}x{x.bands} cube, got {rank!r}"
        )
    xmat = unfold(x)
    _, sv, vt = np.linalg.svd(xmat, full_matrices=False)
    if sv[0] == 0.0 or sv[int(rank) - 1] <= RANK_RTOL * sv[0]:
        raise DegeneracyError(
            f"cube has numerical rank below {rank}: singular value "
            f"{int(rank)} is {sv[int(rank) - 1]:.3e} against {sv[0]:.3e}"
        )
    basis = SpectralBasis(_fix_column_signs(vt[: int(rank)].T))
    coeff = derive_coefficients(basis, response)
    y = apply_spectral_response(x, response)
    yhat_mat = (xmat - unfold(y) @ coeff.a) @ coeff.b.T
    return y, fold(yhat_mat, x.height, x.width), coeff


def consistency_residual(
    y: HsCube,
    z: HsCube,
    degradation: SpatialDegradation,
    coeff: CoefficientPair,
    yhat: HsCube,
) -> float:
    """Relative residual of the degraded two-term reconstruction.

    Computes ``||Z - C(Y A + Yhat B)||_F / ||Z||_F``.  Zero for exact
    noise-free decompositions; tracks the injected noise energy when the
    observation is noisy.
    """
    if y.bands != coeff.channels:
        raise ShapeError(
            f"y has {y.bands} bands but coefficients expect {coeff.channels} channels"
        )
    if yhat.bands != coeff.rank - coeff.channels:
        raise ShapeError(
            f"yhat has {yhat.bands} bands but coefficients expect "
            f"{coeff.rank - coeff.channels}"
        )
    if (y.height, y.width) != (yhat.height, yhat.width):
        raise ShapeError(
            f"y grid {y.height}x{y.width} does not match yhat grid "
            f"{yhat.height}x{yhat.width}"
        )
    if z.bands != coeff.bands:
        raise ShapeError(f"z has {z.bands} bands but coefficients cover {coeff.bands}")
    z_norm = z.norm()
    if z_norm == 0.0:
        raise DegeneracyError("reference observation has zero norm")
    x = fold(unfold(y) @ coeff.a + unfold(yhat) @ coeff.b, y.height, y.width)
    predicted = apply_spatial_degradation(x, degradation)
    if predicted.shape != z.shape:
        raise ShapeError(
            f"degraded reconstruction has shape {predicted.shape} but z has {z.shape}"
        )
    return float(np.linalg.norm(predicted.planes - z.planes) / z_norm)
