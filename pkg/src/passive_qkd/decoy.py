"""Three-intensity decoy-state estimates of single-photon counts at Alice."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

from .config import ProtocolConfig

Which = Literal["X", "K", "X!="]


@dataclass(frozen=True)
class Observations:
    """Classical record: per-intensity test, key and test-error counts."""

    n_x_mu: tuple[float, float, float]
    n_k_mu: tuple[float, float, float]
    n_xneq_mu: tuple[float, float, float]
    n_mc: float
    e_z_obs: float
    n_rounds: float

    def __post_init__(self) -> None:
        for name in ("n_x_mu", "n_k_mu", "n_xneq_mu"):
            vals = tuple(float(v) for v in getattr(self, name))
            if len(vals) != 3:
                raise ValueError(f"{name} needs three entries")
            object.__setattr__(self, name, vals)
        object.__setattr__(self, "n_mc", float(self.n_mc))
        object.__setattr__(self, "e_z_obs", float(self.e_z_obs))
        object.__setattr__(self, "n_rounds", float(self.n_rounds))

    def counts(self, which: Which) -> tuple[float, float, float]:
        return {"X": self.n_x_mu, "K": self.n_k_mu, "X!=": self.n_xneq_mu}[which]

    @property
    def n_x(self) -> float:
        return sum(self.n_x_mu)

    @property
    def n_k(self) -> float:
        return sum(self.n_k_mu)

    @property
    def n_xneq(self) -> float:
        return sum(self.n_xneq_mu)


@dataclass(frozen=True)
class DecoyBounds:
    b_max1_xneq: float
    b_max1_x: float
    b_min1_k: float
    tau0: float
    tau1: float
    vacuous: bool = False


def tau(m: int, proto: ProtocolConfig) -> float:
    """Probability that Alice emits m photons, averaged over intensities."""
    return sum(p * _poisson(m, mu) for mu, p in zip(proto.mu, proto.p_mu))


def _poisson(m: int, mu: float) -> float:
    if mu == 0.0:
        return 1.0 if m == 0 else 0.0
    return math.exp(-mu + m * math.log(mu) - math.lgamma(m + 1))


def _hoeffding(total: float, eps: float) -> float:
    return math.sqrt(max(total, 0.0) / 2.0 * math.log(2.0 / eps**2))


def n_pm(
    counts: Sequence[float], k: int, sign: int, proto: ProtocolConfig, eps_at_d: float
) -> float:
    """(e^mu_k / p_k)(n_k + sign * sqrt(n/2 ln(2/eps^2))); sign is +1 or -1."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    mu, p = proto.mu[k], proto.p_mu[k]
    return math.exp(mu) / p * (counts[k] + sign * _hoeffding(sum(counts), eps_at_d))


def b_min0(counts: Sequence[float], proto: ProtocolConfig, eps_at_d: float) -> float:
    _, mu2, mu3 = proto.mu
    lo3 = n_pm(counts, 2, -1, proto, eps_at_d)
    hi2 = n_pm(counts, 1, +1, proto, eps_at_d)
    return tau(0, proto) * (mu2 * lo3 - mu3 * hi2) / (mu2 - mu3)


def b_min1(counts: Sequence[float], proto: ProtocolConfig, eps_at_d: float) -> float:
    mu1, mu2, mu3 = proto.mu
    denom = mu1 * (mu2 - mu3) - mu2**2 + mu3**2
    if denom <= 0:
        return -math.inf
    t0, t1 = tau(0, proto), tau(1, proto)
    inner = (
        n_pm(counts, 1, -1, proto, eps_at_d)
        - n_pm(counts, 2, +1, proto, eps_at_d)
        - (mu2**2 - mu3**2) / mu1**2 * (n_pm(counts, 0, +1, proto, eps_at_d) - b_min0(counts, proto, eps_at_d) / t0)
    )
    return mu1 * t1 / denom * inner


def b_max1(counts: Sequence[float], proto: ProtocolConfig, eps_at_d: float) -> float:
    _, mu2, mu3 = proto.mu
    hi2 = n_pm(counts, 1, +1, proto, eps_at_d)
    lo3 = n_pm(counts, 2, -1, proto, eps_at_d)
    return tau(1, proto) * (hi2 - lo3) / (mu2 - mu3)


def decoy_bounds(o: Observations, proto: ProtocolConfig, eps_at_d: float) -> DecoyBounds:
    """Single-photon bounds for test errors, test rounds and key rounds.

    The union of the nine Hoeffding estimates fails with probability at
    most 9 eps_at_d^2.
    """
    bk = b_min1(o.n_k_mu, proto, eps_at_d)
    return DecoyBounds(
        b_max1_xneq=b_max1(o.n_xneq_mu, proto, eps_at_d),
        b_max1_x=b_max1(o.n_x_mu, proto, eps_at_d),
        b_min1_k=bk,
        tau0=tau(0, proto),
        tau1=tau(1, proto),
        vacuous=not bk > 0,
    )
