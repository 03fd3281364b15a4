"""Basis-mismatch constants: the a interval, the delta certificate and q_Z.

``delta_bound`` is the closed-form worst case over a parameter box;
``delta_exact`` evaluates the underlying operator norm at a single point
and exists to test the bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .config import ParamPoint, ParamRanges
from .operators import op_norm_inf, psd_sqrt
from .povm import build_joint_ops_1
from .subspace import DEFAULT_GRID_STEP, DEFAULT_MAX_GRID_POINTS, LambdaMinCertificate, lambda_min_box


@dataclass(frozen=True)
class MismatchCertificate:
    a_lo: float
    a_hi: float
    delta: float
    q_z: float
    lambda_min: float
    lambda_cert: LambdaMinCertificate | None = None
    diagnostics: dict[str, float] = field(default_factory=dict)


def choose_a(ranges: ParamRanges, p_x_alice: float) -> tuple[float, float]:
    """Endpoints of a = pX s / (pZ (1 - s)) over the s interval."""
    p_z = 1.0 - p_x_alice
    s_lo, s_hi = ranges.s_lo, ranges.s_hi
    return p_x_alice * s_lo / (p_z * (1 - s_lo)), p_x_alice * s_hi / (p_z * (1 - s_hi))


def _extrema(ranges: ParamRanges) -> dict[str, float]:
    return {
        "eta_z_min": min(ranges.eta_lo[:2]),
        "eta_z_max": max(ranges.eta_hi[:2]),
        "eta_x_min": min(ranges.eta_lo[2:]),
        "eta_x_max": max(ranges.eta_hi[2:]),
        "eta_min": ranges.eta_min,
        "eta_max": ranges.eta_max,
        "d_min": ranges.d_min,
        "d_max": ranges.d_max,
    }


def delta_diagnostics(ranges: ParamRanges, p_x_alice: float) -> dict[str, float]:
    """Every intermediate scalar of the delta bound, plus the alternative index pairing."""
    p_x, p_z = p_x_alice, 1.0 - p_x_alice
    e = _extrema(ranges)
    s, th = ranges.s_center, ranges.s_halfwidth
    dmin, dmax = e["d_min"], e["d_max"]
    dark_lo = (2 * dmin - 2 * dmax**2) * (1 - dmax) ** 2
    dark_hi = (2 * dmax - 2 * dmin**2) * (1 - dmin) ** 2

    lost_lo = (1 - s - th) * (1 - e["eta_z_max"]) + (s - th) * (1 - e["eta_x_max"])
    lost_hi = (1 - s + th) * (1 - e["eta_z_min"]) + (s + th) * (1 - e["eta_x_min"])
    l_z = lost_lo * dark_lo + (1 - s - th) * e["eta_z_min"] * (1 - dmax) ** 3
    l_x = lost_lo * dark_lo + (s - th) * e["eta_x_min"] * (1 - dmax) ** 3
    u_z = lost_hi * dark_hi + (1 - s + th) * e["eta_z_max"] * (1 - dmin) ** 3
    u_x = lost_hi * dark_hi + (s + th) * e["eta_x_max"] * (1 - dmin) ** 3

    denom_k = p_x * l_x + p_z * l_z
    k2 = 1.0 / denom_k if denom_k > 0 else math.inf

    delta1 = (s + th) * (2 * e["eta_max"] * (1 - dmin) ** 3 - (e["eta_x_min"] + e["eta_z_min"]) * (1 - dmax) ** 3)
    delta2 = (1 - e["eta_min"]) * dark_hi / (1 - s - th)
    zeta = delta1 + delta2

    a_lo, a_hi = choose_a(ranges, p_x_alice)
    upper = p_x * u_x + p_z * u_z
    out = {
        **e,
        "l_x": l_x,
        "l_z": l_z,
        "u_x": u_x,
        "u_z": u_z,
        "k2": k2,
        "delta1": delta1,
        "delta2": delta2,
        "zeta": zeta,
        "a_lo": a_lo,
        "a_hi": a_hi,
    }
    out["delta"] = _delta_from(p_x, p_z, zeta, k2, upper, l_z, l_x, a_lo, a_hi)
    # Pairing lX with the pX branch and lZ with the a pZ branch.
    out["delta_alt_pairing"] = _delta_from(p_x, p_z, zeta, k2, upper, l_x, l_z, a_lo, a_hi)
    return out


def _delta_from(p_x, p_z, zeta, k2, upper, l_first, l_second, a_lo, a_hi) -> float:
    if not math.isfinite(k2) or l_first <= 0 or l_second <= 0 or a_lo <= 0:
        return math.inf
    root = max(math.sqrt(upper / (p_x * l_first)), math.sqrt(upper / (a_lo * p_z * l_second)))
    return (1 + math.sqrt(a_hi)) * (p_x * max(zeta, 0.0) * k2 / 2) * root


def delta_bound(ranges: ParamRanges, p_x_alice: float) -> float:
    """Upper bound on delta over the box; +inf flags a degenerate box."""
    return delta_diagnostics(ranges, p_x_alice)["delta"]


def delta_exact(point: ParamPoint, p_x_alice: float, a: float) -> float:
    """||sqrt(F~X) G~ sqrt(F~X) - a sqrt(F~Z) G~ sqrt(F~Z)|| at one point."""
    ops = build_joint_ops_1(point, p_x_alice, a=a if a > 0 else None)
    sx = psd_sqrt(ops.f_tilde_x)
    sz = psd_sqrt(ops.f_tilde_z)
    diff = sx @ ops.g_tilde_x_neq @ sx - a * (sz @ ops.g_tilde_x_neq @ sz)
    return op_norm_inf(diff)


def qz_bound(ranges: ParamRanges, p_z_alice: float) -> float:
    dmin, dmax = ranges.d_min, ranges.d_max
    return p_z_alice * (1 - dmin) ** 2 * (2 * dmax - 2 * dmin**2)


def build_certificate(
    ranges: ParamRanges,
    p_x_alice: float,
    M: int = 1,
    grid_step: float = DEFAULT_GRID_STEP,
    max_grid_points: int | None = DEFAULT_MAX_GRID_POINTS,
    lambda_cert: LambdaMinCertificate | None = None,
) -> MismatchCertificate:
    """All four constants for one box. A precomputed lambda certificate may be passed in."""
    if lambda_cert is None:
        lambda_cert = lambda_min_box(ranges, M, grid_step, max_grid_points)
    diag = delta_diagnostics(ranges, p_x_alice)
    lam = lambda_cert.value if lambda_cert.valid else 0.0
    return MismatchCertificate(
        a_lo=diag["a_lo"],
        a_hi=diag["a_hi"],
        delta=diag["delta"],
        q_z=qz_bound(ranges, 1.0 - p_x_alice),
        lambda_min=lam,
        lambda_cert=lambda_cert,
        diagnostics=diag,
    )


__all__ = [
    "MismatchCertificate",
    "build_certificate",
    "choose_a",
    "delta_bound",
    "delta_diagnostics",
    "delta_exact",
    "qz_bound",
]
