"""Key length assembly, intensity optimization and parameter sweeps.

Concentration bounds use natural logarithms; the key-length line itself
counts bits, so entropy and the privacy-amplification and
error-verification costs are base 2.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .bounds import BoundInputs, b_imp, b_k
from .channel import expected_frequencies, observations_from_frequencies
from .config import ChannelConfig, EpsilonBudget, ParamRanges, ProtocolConfig
from .decoy import DecoyBounds, Observations, decoy_bounds
from .mismatch import MismatchCertificate, build_certificate
from .subspace import DEFAULT_GRID_STEP, DEFAULT_MAX_GRID_POINTS

STATUSES = ("ok", "vacuous_b1", "vacuous_lambda_min", "saturated_entropy")
MU1_GRID = tuple(round(0.3 + 0.1 * i, 10) for i in range(7))
MU2_GRID = tuple(round(0.02 * (i + 1), 10) for i in range(10))
AXES = ("loss_db", "delta_width", "l_c", "repetition_rate")


@dataclass(frozen=True)
class KeyRateResult:
    key_length_bits: float
    rate_per_signal: float
    b1: float
    be: float
    lambda_ec: float
    status: str
    certificate: MismatchCertificate
    decoy: DecoyBounds


@dataclass(frozen=True)
class Scenario:
    """Everything needed to evaluate one key rate from expected statistics."""

    ranges: ParamRanges
    protocol: ProtocolConfig = ProtocolConfig()
    eps: EpsilonBudget = EpsilonBudget()
    channel: ChannelConfig = ChannelConfig()
    correlated: bool = False
    grid_step: float = DEFAULT_GRID_STEP
    max_grid_points: int | None = DEFAULT_MAX_GRID_POINTS
    delta_width: float | None = None
    strict_scaling: bool = False

    def with_(self, **changes) -> "Scenario":
        return replace(self, **changes)


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    scenario: Scenario
    mu: tuple[float, float, float]
    result: KeyRateResult
    key_per_second: float | None = None


def binary_entropy(x: float) -> float:
    """h(x) in bits for x <= 1/2 and 1 above."""
    if x < 0:
        raise ValueError("binary entropy needs x >= 0")
    if x > 0.5:
        return 1.0
    if x == 0.0:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def lambda_ec(n_k: float, e_z: float, f_ec: float) -> float:
    return f_ec * n_k * binary_entropy(e_z)


def key_length(
    o: Observations,
    cert: MismatchCertificate,
    proto: ProtocolConfig,
    eps: EpsilonBudget,
    correlated: bool = False,
    strict_scaling: bool = False,
) -> KeyRateResult:
    """Decoy-state key length; status records which bound, if any, made it vacuous."""
    decoy = decoy_bounds(o, proto, eps.eps_at_d)
    inputs = BoundInputs(
        n_rounds=float(proto.n_rounds),
        n_mc=o.n_mc,
        lambda_min=cert.lambda_min,
        q_z=cert.q_z,
        delta=cert.delta,
        a=cert.a_lo,
        eps=eps,
        n_x=decoy.b_max1_x,
        n_k=decoy.b_min1_k,
        n_error=decoy.b_max1_xneq,
        correlated=correlated,
    )
    b1 = b_k(decoy.b_min1_k, inputs)
    be = b_imp(inputs, b1, strict_scaling) if b1 > 0 else math.inf
    leak = lambda_ec(o.n_k, o.e_z_obs, proto.f_ec)
    costs = leak + 2 * math.log2(1 / (2 * eps.eps_pa)) + math.log2(2 / eps.eps_ev)

    if not cert.lambda_min > 0:
        status = "vacuous_lambda_min"
    elif not b1 > 0:
        status = "vacuous_b1"
    elif not be < 0.5:
        status = "saturated_entropy"
    else:
        status = "ok"

    key = max(b1 * (1 - binary_entropy(be)) - costs, 0.0) if status == "ok" else 0.0
    return KeyRateResult(key, key / proto.n_rounds, b1, be, leak, status, cert, decoy)


@functools.lru_cache(maxsize=64)
def _cached_certificate(ranges, p_x_alice, M, grid_step, max_grid_points) -> MismatchCertificate:
    return build_certificate(ranges, p_x_alice, M, grid_step, max_grid_points)


def certificate_for(sc: Scenario) -> MismatchCertificate:
    return _cached_certificate(
        sc.ranges, sc.protocol.p_x_alice, sc.protocol.photon_cutoff, sc.grid_step, sc.max_grid_points
    )


def expected_observations(sc: Scenario) -> Observations:
    point = sc.channel.true_point or sc.ranges.center()
    dist = expected_frequencies(point, sc.channel, sc.protocol)
    return observations_from_frequencies(dist, sc.protocol, sc.correlated)


def evaluate_point(sc: Scenario) -> KeyRateResult:
    """Key rate at the scenario's intensities from closed-form expected statistics."""
    return key_length(
        expected_observations(sc), certificate_for(sc), sc.protocol, sc.eps, sc.correlated, sc.strict_scaling
    )


def optimize_intensities(
    sc: Scenario, mu1_grid: Sequence[float] = MU1_GRID, mu2_grid: Sequence[float] = MU2_GRID
) -> tuple[tuple[float, float, float], KeyRateResult]:
    """Exhaustive search over (mu1, mu2) with mu3 fixed; ties go to smaller mu1 then mu2."""
    mu3 = sc.protocol.mu[2]
    g1, g2 = sorted(mu1_grid), sorted(mu2_grid)
    best: tuple[tuple[float, float, float], KeyRateResult] | None = None
    for m1 in g1:
        for m2 in g2:
            if not (m1 > m2 + mu3 and m2 > mu3):
                continue
            mu = (float(m1), float(m2), float(mu3))
            res = evaluate_point(sc.with_(protocol=sc.protocol.with_(mu=mu)))
            if best is None or res.key_length_bits > best[1].key_length_bits:
                best = (mu, res)
    if best is None:
        raise ValueError("no admissible intensity pair in the search grids")
    mu, res = best
    if res.key_length_bits > 0 and (
        (len(g1) > 1 and mu[0] in (g1[0], g1[-1])) or (len(g2) > 1 and mu[1] in (g2[0], g2[-1]))
    ):
        warnings.warn(f"optimal intensities {mu[:2]} lie on the search-grid boundary", stacklevel=2)
    return mu, res


def box_with_width(ranges: ParamRanges, delta: float) -> ParamRanges:
    """Same nominal center, every parameter widened to x(1 - delta) .. x(1 + delta)."""
    c = ranges.center()
    return ParamRanges(
        eta_lo=tuple(e * (1 - delta) for e in c.eta),
        eta_hi=tuple(e * (1 + delta) for e in c.eta),
        d_lo=tuple(d * (1 - delta) for d in c.d),
        d_hi=tuple(d * (1 + delta) for d in c.d),
        s_center=c.s,
        s_halfwidth=c.s * delta,
    )


def correlation_length(rate_hz: float, dead_time_s: float) -> int:
    """Rounds affected by one click: none while a dead time fits in one period."""
    x = rate_hz * dead_time_s
    return 0 if x <= 1 + 1e-12 else math.ceil(x - 1e-12)


def scenario_for(sc: Scenario, axis: str, value: float, duration_s: float = 100.0, dead_time_s: float = 1e-9) -> Scenario:
    """Scenario with one axis set; also used to name the CSV columns consistently."""
    if axis == "loss_db":
        return sc.with_(channel=replace(sc.channel, loss_db=float(value)))
    if axis == "delta_width":
        return sc.with_(ranges=box_with_width(sc.ranges, float(value)), delta_width=float(value))
    if axis == "l_c":
        return sc.with_(protocol=sc.protocol.with_(l_c=int(value)), correlated=True)
    if axis == "repetition_rate":
        lc = correlation_length(value, dead_time_s)
        n = int(round(value * duration_s))
        return sc.with_(
            protocol=sc.protocol.with_(n_rounds=n, l_c=lc), correlated=sc.correlated or lc > 0
        )
    raise ValueError(f"unknown sweep axis {axis!r}; expected one of {AXES}")


def sweep(
    sc: Scenario,
    axis: str,
    values: Iterable[float],
    optimize: bool = True,
    mu1_grid: Sequence[float] = MU1_GRID,
    mu2_grid: Sequence[float] = MU2_GRID,
    duration_s: float = 100.0,
    dead_time_s: float = 1e-9,
) -> list[SweepRow]:
    """One row per value in input order."""
    rows = []
    for v in values:
        point_sc = scenario_for(sc, axis, v, duration_s, dead_time_s)
        if optimize:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                mu, res = optimize_intensities(point_sc, mu1_grid, mu2_grid)
        else:
            mu, res = point_sc.protocol.mu, evaluate_point(point_sc)
        kps = res.rate_per_signal * v if axis == "repetition_rate" else None
        rows.append(SweepRow(float(v), point_sc, mu, res, kps))
    return rows


def parse_values(text: str | Sequence[float]) -> list[float]:
    """'start:stop:step' (inclusive) or comma list or a sequence of numbers."""
    if not isinstance(text, str):
        return [float(v) for v in text]
    if ":" in text:
        start, stop, step = (float(p) for p in text.split(":"))
        if step <= 0:
            raise ValueError("range step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [float(x) for x in np.round(start + step * np.arange(max(count, 0)), 12)]
    return [float(p) for p in text.split(",") if p.strip()]
