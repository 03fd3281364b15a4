"""Protocol, detector and security-parameter configuration.

All value types are frozen dataclasses. Validation is report-style: it
collects every violated invariant instead of raising on the first one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

N_DETECTORS = 4


def _quad(values: Sequence[float], name: str) -> tuple[float, float, float, float]:
    vals = tuple(float(v) for v in values)
    if len(vals) != N_DETECTORS:
        raise ValueError(f"{name} needs {N_DETECTORS} entries, got {len(vals)}")
    return vals  # type: ignore[return-value]


@dataclass(frozen=True)
class ParamPoint:
    """One fully specified detector configuration.

    Detector order is (Z0, Z1, X0, X1), i.e. detectors 1..4 with Z on the
    reflected (1 - s) branch and X on the transmitted s branch.
    """

    eta: tuple[float, float, float, float]
    d: tuple[float, float, float, float]
    s: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "eta", _quad(self.eta, "eta"))
        object.__setattr__(self, "d", _quad(self.d, "d"))
        object.__setattr__(self, "s", float(self.s))

    @classmethod
    def uniform(cls, eta: float = 1.0, d: float = 0.0, s: float = 0.5) -> "ParamPoint":
        return cls((eta,) * 4, (d,) * 4, s)

    def in_unit_range(self) -> bool:
        vals = (*self.eta, *self.d, self.s)
        return all(0.0 <= v <= 1.0 for v in vals)

    def as_vector(self) -> np.ndarray:
        """Grid coordinates [eta1, eta2, eta3, eta4, s]."""
        return np.array([*self.eta, self.s])


@dataclass(frozen=True)
class ParamRanges:
    """Box of partially characterized detector parameters."""

    eta_lo: tuple[float, float, float, float]
    eta_hi: tuple[float, float, float, float]
    d_lo: tuple[float, float, float, float]
    d_hi: tuple[float, float, float, float]
    s_center: float
    s_halfwidth: float

    def __post_init__(self) -> None:
        for name in ("eta_lo", "eta_hi", "d_lo", "d_hi"):
            object.__setattr__(self, name, _quad(getattr(self, name), name))
        object.__setattr__(self, "s_center", float(self.s_center))
        object.__setattr__(self, "s_halfwidth", float(self.s_halfwidth))

    @classmethod
    def from_width(
        cls, delta: float, eta: float = 0.7, d: float = 1e-6, s: float = 0.3
    ) -> "ParamRanges":
        """Common relative width for every detector: x in [x(1-delta), x(1+delta)]."""
        e_lo, e_hi = eta * (1 - delta), eta * (1 + delta)
        return cls(
            eta_lo=(e_lo,) * 4,
            eta_hi=(e_hi,) * 4,
            d_lo=(d * (1 - delta),) * 4,
            d_hi=(d * (1 + delta),) * 4,
            s_center=s,
            s_halfwidth=s * delta,
        )

    @classmethod
    def point_box(cls, point: ParamPoint) -> "ParamRanges":
        return cls(point.eta, point.eta, point.d, point.d, point.s, 0.0)

    @property
    def s_lo(self) -> float:
        return self.s_center - self.s_halfwidth

    @property
    def s_hi(self) -> float:
        return self.s_center + self.s_halfwidth

    def center(self) -> ParamPoint:
        eta = tuple(0.5 * (lo + hi) for lo, hi in zip(self.eta_lo, self.eta_hi))
        d = tuple(0.5 * (lo + hi) for lo, hi in zip(self.d_lo, self.d_hi))
        return ParamPoint(eta, d, self.s_center)  # type: ignore[arg-type]

    def contains(self, point: ParamPoint, tol: float = 0.0) -> bool:
        ok = all(lo - tol <= v <= hi + tol for lo, v, hi in zip(self.eta_lo, point.eta, self.eta_hi))
        ok &= all(lo - tol <= v <= hi + tol for lo, v, hi in zip(self.d_lo, point.d, self.d_hi))
        return ok and self.s_lo - tol <= point.s <= self.s_hi + tol

    def sample(self, rng: np.random.Generator) -> ParamPoint:
        """Uniform random point inside the box."""
        eta = rng.uniform(self.eta_lo, self.eta_hi)
        d = rng.uniform(self.d_lo, self.d_hi)
        s = rng.uniform(self.s_lo, self.s_hi)
        return ParamPoint(tuple(eta), tuple(d), float(s))  # type: ignore[arg-type]

    @property
    def eta_min(self) -> float:
        return min(self.eta_lo)

    @property
    def eta_max(self) -> float:
        return max(self.eta_hi)

    @property
    def d_min(self) -> float:
        return min(self.d_lo)

    @property
    def d_max(self) -> float:
        return max(self.d_hi)


@dataclass(frozen=True)
class ProtocolConfig:
    p_x_alice: float = 0.3
    mu: tuple[float, float, float] = (0.5, 0.1, 0.0)
    p_mu: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    n_rounds: int = 10**12
    photon_cutoff: int = 1
    l_c: int = 0
    f_ec: float = 1.16

    def __post_init__(self) -> None:
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        object.__setattr__(self, "p_mu", tuple(float(p) for p in self.p_mu))
        if len(self.mu) != 3 or len(self.p_mu) != 3:
            raise ValueError("exactly three intensities are supported")

    @property
    def p_z_alice(self) -> float:
        return 1.0 - self.p_x_alice

    def with_(self, **changes) -> "ProtocolConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class EpsilonBudget:
    eps_az_a: float = 1e-12
    eps_az_b: float = 1e-12
    eps_pne: float = 1e-12
    eps_0: float = 1e-12
    eps_at_d: float = 1e-12
    eps_ev: float = 1e-12
    eps_pa: float = 1e-12

    @classmethod
    def uniform(cls, eps: float) -> "EpsilonBudget":
        return cls(*(eps,) * 7)

    def values(self) -> dict[str, float]:
        return {
            "eps_az_a": self.eps_az_a,
            "eps_az_b": self.eps_az_b,
            "eps_pne": self.eps_pne,
            "eps_0": self.eps_0,
            "eps_at_d": self.eps_at_d,
            "eps_ev": self.eps_ev,
            "eps_pa": self.eps_pa,
        }


@dataclass(frozen=True)
class ChannelConfig:
    loss_db: float = 0.0
    misalignment_deg: float = 2.0
    true_point: ParamPoint | None = None

    @property
    def transmittance(self) -> float:
        return 10.0 ** (-self.loss_db / 10.0)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_config(
    ranges: ParamRanges | None = None,
    proto: ProtocolConfig | None = None,
    eps: EpsilonBudget | None = None,
) -> ValidationReport:
    """Collect every violated invariant; inputs are never modified."""
    out: list[str] = []
    if ranges is not None:
        for i in range(N_DETECTORS):
            if not 0.0 <= ranges.eta_lo[i] <= ranges.eta_hi[i] <= 1.0:
                out.append(f"eta interval {i + 1} must satisfy 0 ≤ lo ≤ hi ≤ 1")
            if not 0.0 <= ranges.d_lo[i] <= ranges.d_hi[i] < 1.0:
                out.append(f"d interval {i + 1} must satisfy 0 ≤ lo ≤ hi < 1")
        if ranges.s_halfwidth < 0:
            out.append("s halfwidth must be nonnegative")
        if not (0.0 < ranges.s_lo and ranges.s_hi < 1.0):
            out.append("s interval leaves (0,1)")
    if proto is not None:
        mu1, mu2, mu3 = proto.mu
        if not 0.0 < proto.p_x_alice < 1.0:
            out.append("p_x_alice must lie in (0,1)")
        if not mu1 > mu2 + mu3:
            out.append("μ1 > μ2 + μ3 violated")
        if not mu2 > mu3:
            out.append("μ2 > μ3 violated")
        if not mu3 >= 0.0:
            out.append("μ3 ≥ 0 violated")
        if any(p < 0 for p in proto.p_mu) or not math.isclose(sum(proto.p_mu), 1.0, abs_tol=1e-12):
            out.append("Σ p_mu = 1 violated")
        if proto.n_rounds < 1:
            out.append("n_rounds ≥ 1 violated")
        if proto.photon_cutoff < 1:
            out.append("photon cutoff M ≥ 1 violated")
        if proto.l_c < 0:
            out.append("l_c ≥ 0 violated")
        if proto.f_ec < 1.0:
            out.append("f_ec ≥ 1 violated")
    if eps is not None:
        for name, value in eps.values().items():
            if not 0.0 < value < 1.0:
                out.append(f"{name} must lie in (0,1)")
    return ValidationReport(tuple(out))


def total_security(eps: EpsilonBudget) -> tuple[float, float]:
    """Return (eps_at, eps_total) with eps_total = 2 eps_at + eps_pa + eps_ev."""
    eps_at = math.sqrt(
        eps.eps_az_a**2 + eps.eps_az_b**2 + eps.eps_pne**2 + eps.eps_0**2 + 9 * eps.eps_at_d**2
    )
    return eps_at, 2 * eps_at + eps.eps_pa + eps.eps_ev
