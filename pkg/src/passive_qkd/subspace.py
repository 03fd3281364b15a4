"""Certified lower bound on multi-click probability for (>M)-photon inputs.

``lambda_min_point`` evaluates the semi-unitary bound at one detector
configuration. ``lambda_min_box`` extends it to a parameter box by a grid
search whose cells are covered with interval-arithmetic perturbation bounds.
Dark counts only help produce multi-clicks, so they are ignored here.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .config import ParamPoint, ParamRanges
from .intervals import Interval
from .operators import svd_small

log = logging.getLogger(__name__)

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
DEFAULT_GRID_STEP = 1e-3
DEFAULT_MAX_GRID_POINTS = 2_000_000
_CHUNK = 1 << 17


@dataclass(frozen=True)
class LambdaMinCertificate:
    value: float
    grid_step: float
    grid_points_evaluated: int
    s1_max: float
    s2_max: float
    valid: bool
    message: str = ""


def normalized_top_block(point: ParamPoint) -> np.ndarray:
    """V': the top 4x2 block of the mode transformation with unit-norm columns.

    Raises ZeroDivisionError when a column vanishes.
    """
    e1, e2, e3, e4 = point.eta
    s = point.s
    g_top = np.array(
        [
            [math.sqrt((1 - s) * e1), 0.0],
            [0.0, math.sqrt((1 - s) * e2)],
            [math.sqrt(s * e3 / 2), math.sqrt(s * e3 / 2)],
            [math.sqrt(s * e4 / 2), -math.sqrt(s * e4 / 2)],
        ]
    )
    norms = np.linalg.norm(g_top, axis=0)
    if np.any(norms == 0.0):
        raise ZeroDivisionError("a column of the mode transformation vanishes")
    return g_top / norms


def semi_unitary(point: ParamPoint) -> np.ndarray:
    """V_d = U V^T, the polar factor of V'."""
    u, _, v = svd_small(normalized_top_block(point))
    return u @ v.conj().T


def lambda_min_point(point: ParamPoint, M: int = 1) -> float:
    """1 - sigma_max(Lambda_1)^(2(M+1)) - sigma_max(Lambda_2)^(2(M+1)), clipped at 0.

    Returns 0 when the configuration is degenerate (a vanishing column or a
    rank-deficient V').
    """
    try:
        vp = normalized_top_block(point)
    except ZeroDivisionError:
        log.warning("degenerate column at %s; lambda_min set to 0", point)
        return 0.0
    u, sig, v = svd_small(vp)
    if sig[-1] <= 1e-14:
        log.warning("rank-deficient V' at %s; lambda_min set to 0", point)
        return 0.0
    vd = u @ v.conj().T
    p = 2 * (M + 1)
    s_top = np.linalg.norm(vd[:2], 2)
    s_bot = np.linalg.norm(vd[2:], 2)
    return max(0.0, 1.0 - s_top**p - s_bot**p)


def _sigma_max_2x2(a, b, c, d):
    """Largest singular value of [[a, b], [c, d]], elementwise over arrays."""
    fro = a * a + b * b + c * c + d * d
    det = a * d - b * c
    disc = np.sqrt(np.maximum(fro * fro - 4.0 * det * det, 0.0))
    return np.sqrt(0.5 * (fro + disc))


def _beta_point(eta: np.ndarray, s: np.ndarray) -> np.ndarray:
    """V' entries for a batch: shape (6, n), order b11, b22, b31, b41, b32, b42."""
    e1, e2, e3, e4 = eta
    f1 = np.sqrt(e1 * (1 - s) + 0.5 * s * (e3 + e4))
    f2 = np.sqrt(e2 * (1 - s) + 0.5 * s * (e3 + e4))
    return np.stack(
        [
            np.sqrt((1 - s) * e1) / f1,
            np.sqrt((1 - s) * e2) / f2,
            np.sqrt(0.5 * s * e3) / f1,
            np.sqrt(0.5 * s * e4) / f1,
            np.sqrt(0.5 * s * e3) / f2,
            -np.sqrt(0.5 * s * e4) / f2,
        ]
    )


def _beta_intervals(lo: np.ndarray, hi: np.ndarray) -> list[Interval]:
    """Enclosures of the V' entries over cells; every variable occurs once so the enclosure is tight."""
    e = [Interval.of(lo[i], hi[i]) for i in range(4)]
    s = Interval.of(lo[4], hi[4])
    t = (1.0 - s).reciprocal() - 1.0  # s / (1 - s)
    t = Interval(np.maximum(t.lo, 0.0), t.hi)
    one = 1.0

    def inv_sqrt_one_plus(x: Interval) -> Interval:
        return (one + x).sqrt().reciprocal()

    b11 = inv_sqrt_one_plus(t * (e[2] + e[3]) / (2.0 * e[0]))
    b22 = inv_sqrt_one_plus(t * (e[2] + e[3]) / (2.0 * e[1]))
    b31 = inv_sqrt_one_plus((2.0 * e[0] / t + e[3]) / e[2])
    b41 = inv_sqrt_one_plus((2.0 * e[0] / t + e[2]) / e[3])
    b32 = inv_sqrt_one_plus((2.0 * e[1] / t + e[3]) / e[2])
    b42 = -inv_sqrt_one_plus((2.0 * e[1] / t + e[2]) / e[3])
    return [b11, b22, b31, b41, b32, b42]


def _evaluate_cells(centers: np.ndarray, lo: np.ndarray, hi: np.ndarray, M: int):
    """Return (worst exponent sum, s1, s2, ok mask) for a batch of cells."""
    beta = _beta_point(centers[:4], centers[4])
    b11, b22, b31, b41, b32, b42 = beta
    g = b31 * b32 + b41 * b42
    w1 = np.sqrt(np.maximum(1.0 + g, 0.0))
    w2 = np.sqrt(np.maximum(1.0 - g, 0.0))

    # V_d = V' W with W = H diag(1/w) H.
    with np.errstate(divide="ignore", invalid="ignore"):
        p = 0.5 * (1.0 / w1 + 1.0 / w2)
        q = 0.5 * (1.0 / w1 - 1.0 / w2)
    vd = [
        (b11 * p, b11 * q),
        (b22 * q, b22 * p),
        (b31 * p + b32 * q, b31 * q + b32 * p),
        (b41 * p + b42 * q, b41 * q + b42 * p),
    ]
    sig1 = _sigma_max_2x2(vd[0][0], vd[0][1], vd[1][0], vd[1][1])
    sig2 = _sigma_max_2x2(vd[2][0], vd[2][1], vd[3][0], vd[3][1])

    iv = _beta_intervals(lo, hi)
    dev = [np.maximum(i.hi - c, c - i.lo) for i, c in zip(iv, beta)]
    d11, d22, d31, d41, d32, d42 = dev
    s1 = np.max(np.stack([d11, d22, d31 + d32, d41 + d42]), axis=0)
    # Outward nudge so the row sums stay upper bounds after rounding.
    s1 = np.nextafter(s1, np.inf)

    col1 = np.abs(b11) + np.abs(b31) + np.abs(b41)
    col2 = np.abs(b22) + np.abs(b32) + np.abs(b42)
    vp_norm1 = np.maximum(col1, col2)

    rt2 = math.sqrt(2.0)
    s2 = np.zeros_like(s1)
    ok = np.ones_like(s1, dtype=bool)
    for w in (w1, w2):
        gap = w - 2.0 * s1
        ok &= gap > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            term = 2 * rt2 * s1 * vp_norm1 / (gap * w) + 4 * rt2 * s1 / gap
        s2 = np.maximum(s2, np.where(gap > 0, term, np.inf))

    pw = 2 * (M + 1)
    worst = (sig1 + 2 * s2) ** pw + (sig2 + 2 * s2) ** pw
    return worst, s1, s2, ok


def _axis_cells(lo: float, hi: float, step: float):
    width = hi - lo
    if width <= 0:
        c = np.array([lo])
        return c, c.copy(), c.copy()
    k = max(1, math.ceil(width / step - 1e-9))
    edges = lo + width * np.arange(k + 1) / k
    edges[-1] = hi
    return 0.5 * (edges[:-1] + edges[1:]), edges[:-1], edges[1:]


def _grid_axes(ranges: ParamRanges, step: float):
    bounds = [(ranges.eta_lo[i], ranges.eta_hi[i]) for i in range(4)]
    bounds.append((ranges.s_lo, ranges.s_hi))
    return [_axis_cells(lo, hi, step) for lo, hi in bounds]


def grid_size(ranges: ParamRanges, grid_step: float) -> int:
    return int(np.prod([len(ax[0]) for ax in _grid_axes(ranges, grid_step)]))


def lambda_min_box(
    ranges: ParamRanges,
    M: int = 1,
    grid_step: float = DEFAULT_GRID_STEP,
    max_grid_points: int | None = DEFAULT_MAX_GRID_POINTS,
) -> LambdaMinCertificate:
    """Certified lower bound on lambda_min over the whole box.

    Each grid point is the center of a cell of side at most ``grid_step``;
    cells tile the box exactly. When the grid would exceed ``max_grid_points``
    the step is doubled until it fits, and the effective step is reported.
    """
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    if min(ranges.eta_lo) <= 0 or ranges.s_lo <= 0 or ranges.s_hi >= 1:
        return LambdaMinCertificate(0.0, grid_step, 0, math.inf, math.inf, False, "box reaches a degenerate boundary")

    if ranges.eta_lo == ranges.eta_hi and ranges.s_halfwidth == 0:
        value = lambda_min_point(ranges.center(), M)
        return LambdaMinCertificate(value, grid_step, 1, 0.0, 0.0, value > 0)

    step = grid_step
    if max_grid_points is not None:
        while grid_size(ranges, step) > max_grid_points:
            step *= 2.0
        if step != grid_step:
            log.info("grid_step coarsened from %g to %g to respect max_grid_points", grid_step, step)

    axes = _grid_axes(ranges, step)
    shape = tuple(len(ax[0]) for ax in axes)
    total = int(np.prod(shape))
    worst = -math.inf
    s1_max = 0.0
    s2_max = 0.0
    ok_all = True
    for start in range(0, total, _CHUNK):
        idx = np.unravel_index(np.arange(start, min(start + _CHUNK, total)), shape)
        centers = np.stack([axes[j][0][idx[j]] for j in range(5)])
        lo = np.stack([axes[j][1][idx[j]] for j in range(5)])
        hi = np.stack([axes[j][2][idx[j]] for j in range(5)])
        w, s1, s2, ok = _evaluate_cells(centers, lo, hi, M)
        worst = max(worst, float(np.max(w)))
        s1_max = max(s1_max, float(np.max(s1)))
        s2_max = max(s2_max, float(np.max(s2)))
        ok_all &= bool(np.all(ok))

    if not ok_all:
        return LambdaMinCertificate(0.0, step, total, s1_max, s2_max, False, "refine grid_step")
    return LambdaMinCertificate(max(0.0, 1.0 - worst), step, total, s1_max, s2_max, True)
