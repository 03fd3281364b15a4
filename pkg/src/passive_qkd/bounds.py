"""Concentration bounds feeding the phase-error estimate.

All logarithms here are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import EpsilonBudget


@dataclass(frozen=True)
class BoundInputs:
    """Everything the round-count floor and phase-error ceiling consume.

    ``n_x`` and ``n_error`` are either raw observed counts or decoy upper
    bounds on their single-photon parts; ``n_k`` likewise for key rounds.
    """

    n_rounds: float
    n_mc: float
    lambda_min: float
    q_z: float
    delta: float
    a: float
    eps: EpsilonBudget
    n_x: float
    n_k: float
    n_error: float
    correlated: bool = False


@dataclass(frozen=True)
class PhaseErrorCertificate:
    b_rounds: float
    b_phase: float
    vacuous: bool


def gamma0(n: float, eps0: float) -> float:
    return math.sqrt(-math.log(eps0) / n)


def multi_photon_cap(n_mc: float, lambda_min: float, eps_pne: float) -> float:
    """Upper bound on kept (>M)-photon rounds given n_mc multi-clicks; +inf if lambda_min <= 0."""
    if lambda_min <= 0:
        return math.inf
    le = -math.log(eps_pne)
    lam = lambda_min
    try:
        return n_mc / lam + math.sqrt(le * (le + 4 * lam * n_mc)) / (2 * lam**2) + 2 * le / (4 * lam**2)
    except (ZeroDivisionError, OverflowError):
        # lambda_min so small that lambda^2 underflows: the cap is vacuous.
        return math.inf


def zero_photon_cap(n: float, q_z: float, eps0: float, correlated: bool = False) -> float:
    """Upper bound on 0-photon key rounds: n (q_z + c gamma0), c = 2 with memory."""
    factor = 2.0 if correlated else 1.0
    return n * (q_z + factor * gamma0(n, eps0)) if n > 0 else 0.0


def b_k(n_k: float, inputs: BoundInputs) -> float:
    """Lower bound on the number of (1..M)-photon key rounds; may be negative."""
    n = inputs.n_rounds
    zero = zero_photon_cap(n, inputs.q_z, inputs.eps.eps_0, inputs.correlated)
    return n_k - zero - multi_photon_cap(inputs.n_mc, inputs.lambda_min, inputs.eps.eps_pne)


def b_imp(inputs: BoundInputs, b_k_value: float, strict_scaling: bool = False) -> float:
    """Upper bound on the phase-error rate among the certified key rounds.

    By default the first Azuma term carries the 1/sqrt(a) scaling of the
    closed form; ``strict_scaling=True`` uses 1/a instead, which is what
    dividing the sampling bound by B gives exactly.
    """
    bb = b_k_value
    if not bb > 0:
        return math.inf
    a = inputs.a
    la = -2 * math.log(inputs.eps.eps_az_a**2)
    lb = -2 * math.log(inputs.eps.eps_az_b**2)
    spread = inputs.n_x / bb**2 + 1 / bb
    az_a = math.sqrt(la * spread) / a if strict_scaling else math.sqrt(la / a * spread)
    return (
        inputs.n_error / (a * bb)
        + az_a
        + inputs.delta / a * (inputs.n_x / bb + 1)
        + math.sqrt(lb * spread)
    )


def azuma_sampling_cap(
    n_a: float, n_total: float, a: float, delta: float, eps_a: float, eps_b: float
) -> float:
    """Bound on events of type b given n_a events of type a in n_total trials."""
    dev_a = math.sqrt(-2 * math.log(eps_a**2) * n_total)
    dev_b = math.sqrt(-2 * math.log(eps_b**2) * n_total)
    return (n_a + dev_a + delta * n_total) / a + dev_b


def phase_error_certificate(inputs: BoundInputs, strict_scaling: bool = False) -> PhaseErrorCertificate:
    rounds = b_k(inputs.n_k, inputs)
    if not rounds > 0:
        return PhaseErrorCertificate(rounds, math.inf, True)
    return PhaseErrorCertificate(rounds, b_imp(inputs, rounds, strict_scaling), False)


def failure_probability(eps: EpsilonBudget, decoy: bool = True) -> float:
    """Squared failure budget of the combined estimate."""
    total = eps.eps_az_a**2 + eps.eps_az_b**2 + eps.eps_pne**2 + eps.eps_0**2
    return total + (9 * eps.eps_at_d**2 if decoy else 0.0)
