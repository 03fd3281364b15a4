"""Simulated protocol statistics: closed-form expectations and a round sampler.

Outcome order everywhere is (X0, X1, Z0, Z1, mc, nc). Alice's (basis, bit)
index is b * 2 + x with b = 0 for X and b = 1 for Z. Detectors are
(Z0, Z1, X0, X1) = detectors 1..4, matching ``ParamPoint``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import ChannelConfig, ParamPoint, ProtocolConfig
from .decoy import Observations
from .povm import KET, build_joint_ops_1, two_step_key_phase_error_probability

OUTCOMES = ("X0", "X1", "Z0", "Z1", "mc", "nc")
# Polarization angle (rad) of each (basis, bit): X0 = +45, X1 = -45, Z0 = H, Z1 = V.
ALICE_ANGLE = {(0, 0): math.pi / 4, (0, 1): -math.pi / 4, (1, 0): 0.0, (1, 1): math.pi / 2}
# Outcome index of detectors (Z0, Z1, X0, X1).
_DETECTOR_OUTCOME = (2, 3, 0, 1)


@dataclass(frozen=True)
class OutcomeDistribution:
    """probs[b, x, k, o]: probability of outcome o given Alice's basis b, bit x, intensity k."""

    probs: np.ndarray
    p_no_click: float


@dataclass
class GroundTruth:
    """Hidden per-trial tallies that the certified bounds must respect.

    ``m_det`` is the number of photons that reach a detector and register;
    ``m_bob`` the number that survive the channel.
    """

    n_kept: int = 0
    key_det1: int = 0
    key_det0: int = 0
    kept_det_multi: int = 0
    mc_from_det_multi: int = 0
    single_bob_sifted: int = 0
    single_bob_x_errors: int = 0
    single_bob_key: int = 0
    single_bob_phase_errors: int = 0
    alice1_key: int = 0
    alice1_x: int = 0
    alice1_x_errors: int = 0
    outcome_counts: np.ndarray = field(default_factory=lambda: np.zeros((2, 2, 3, 6), dtype=np.int64))
    log: dict[str, np.ndarray] | None = None


def arm_weights(point: ParamPoint, ch: ChannelConfig) -> np.ndarray:
    """w[b*2+x, j]: probability that a surviving photon enters detector arm j."""
    theta = math.radians(ch.misalignment_deg)
    s = point.s
    w = np.empty((4, 4))
    for (b, x), phi in ALICE_ANGLE.items():
        ang = phi + theta
        ket = np.array([math.cos(ang), math.sin(ang)])
        ov = [float(abs(KET[k] @ ket) ** 2) for k in "01+-"]
        w[b * 2 + x] = [(1 - s) * ov[0], (1 - s) * ov[1], s * ov[2], s * ov[3]]
    return w


def _coarse_grain(click: np.ndarray) -> np.ndarray:
    """Click probabilities (..., 4) of independent detectors -> six outcome probabilities."""
    quiet = 1.0 - click
    nc = np.prod(quiet, axis=-1)
    out = np.zeros(click.shape[:-1] + (6,))
    for j in range(4):
        others = np.prod(np.delete(quiet, j, axis=-1), axis=-1)
        out[..., _DETECTOR_OUTCOME[j]] = click[..., j] * others
    out[..., 5] = nc
    out[..., 4] = np.clip(1.0 - nc - out[..., :4].sum(axis=-1), 0.0, 1.0)
    return out


def expected_frequencies(point: ParamPoint, ch: ChannelConfig, proto: ProtocolConfig) -> OutcomeDistribution:
    """Closed-form outcome probabilities for weak coherent pulses through the passive setup."""
    w = arm_weights(point, ch)
    eta = np.asarray(point.eta)
    d = np.asarray(point.d)
    mu = np.asarray(proto.mu)
    # nu[bx, k, j] = mean photon number registering at detector j.
    nu = mu[None, :, None] * ch.transmittance * (w * eta)[:, None, :]
    click = 1.0 - (1.0 - d) * np.exp(-nu)
    probs = _coarse_grain(click).reshape(2, 2, 3, 6)
    p_basis = np.array([proto.p_x_alice, proto.p_z_alice])
    weight = p_basis[:, None, None] * 0.5 * np.asarray(proto.p_mu)[None, None, :]
    p_nc = float(np.sum(weight * probs[..., 5]))
    return OutcomeDistribution(probs, p_nc)


def observations_from_frequencies(
    dist: OutcomeDistribution, proto: ProtocolConfig, correlated: bool = False
) -> Observations:
    """Expected counts: frequencies times n, or n p_nc^l_c when rounds after clicks are dropped."""
    scale = float(proto.n_rounds)
    if correlated:
        scale *= dist.p_no_click**proto.l_c
    p = dist.probs
    pm = np.asarray(proto.p_mu)
    px, pz = proto.p_x_alice, proto.p_z_alice
    n_x = scale * px * 0.5 * pm * (p[0, :, :, 0] + p[0, :, :, 1]).sum(axis=0)
    n_xneq = scale * px * 0.5 * pm * (p[0, 0, :, 1] + p[0, 1, :, 0])
    n_k = scale * pz * 0.5 * pm * (p[1, :, :, 2] + p[1, :, :, 3]).sum(axis=0)
    z_err = float(np.sum(pz * 0.5 * pm * (p[1, 0, :, 3] + p[1, 1, :, 2])))
    z_all = float(np.sum(pz * 0.5 * pm * (p[1, :, :, 2] + p[1, :, :, 3]).sum(axis=0)))
    weight = np.array([px, pz])[:, None, None] * 0.5 * pm[None, None, :]
    n_mc = scale * float(np.sum(weight * p[..., 4]))
    e_z = z_err / z_all if z_all > 0 else 0.0
    return Observations(tuple(n_x), tuple(n_k), tuple(n_xneq), n_mc, e_z, scale)


def single_photon_phase_error_probability(point: ParamPoint, ch: ChannelConfig, p_x_alice: float) -> float:
    """Conditional phase-error probability of a one-photon key round for the misaligned channel."""
    theta = math.radians(ch.misalignment_deg)
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    phi = (np.kron(KET["0"], KET["0"]) + np.kron(KET["1"], KET["1"])) / math.sqrt(2.0)
    psi = np.kron(np.eye(2), rot) @ phi
    rho = np.outer(psi, psi).astype(complex)
    ops = build_joint_ops_1(point, p_x_alice)
    key = float(np.real(np.trace(ops.f_z @ rho)))
    if key <= 0:
        return 0.0
    return min(1.0, max(0.0, two_step_key_phase_error_probability(ops, rho) / key))


def monte_carlo_run(
    point: ParamPoint,
    ch: ChannelConfig,
    proto: ProtocolConfig,
    n: int,
    seed: int | np.random.SeedSequence,
    correlated: bool = False,
    record: bool = False,
) -> tuple[Observations, GroundTruth]:
    """Sample n rounds photon by photon and tally observations and hidden truth."""
    rng = np.random.default_rng(seed)
    n = int(n)
    basis = (rng.random(n) >= proto.p_x_alice).astype(np.int64)  # 0 = X, 1 = Z
    bit = rng.integers(0, 2, n)
    k = rng.choice(3, size=n, p=np.asarray(proto.p_mu) / sum(proto.p_mu))
    m_alice = rng.poisson(np.asarray(proto.mu)[k])
    m_bob = rng.binomial(m_alice, ch.transmittance)

    w = arm_weights(point, ch) * np.asarray(point.eta)  # detected-at-j probability per photon
    probs = w[basis * 2 + bit]
    hits = np.zeros((n, 4), dtype=np.int64)
    remaining = m_bob.copy()
    mass = np.ones(n)
    for j in range(4):
        pj = np.clip(probs[:, j] / mass, 0.0, 1.0)
        hits[:, j] = rng.binomial(remaining, pj)
        remaining -= hits[:, j]
        mass = np.maximum(mass - probs[:, j], 1e-300)
    dark = rng.random((n, 4)) < np.asarray(point.d)
    click = (hits > 0) | dark
    m_det = hits.sum(axis=1)

    n_clicks = click.sum(axis=1)
    outcome = np.full(n, 5)
    outcome[n_clicks >= 2] = 4
    single = n_clicks == 1
    which = np.argmax(click, axis=1)
    outcome[single] = np.asarray(_DETECTOR_OUTCOME)[which[single]]

    clicked = n_clicks > 0
    if correlated and proto.l_c > 0:
        csum = np.concatenate([[0], np.cumsum(clicked)])
        idx = np.arange(n)
        start = np.maximum(idx - proto.l_c, 0)
        kept = (csum[idx] - csum[start]) == 0
    else:
        kept = np.ones(n, dtype=bool)

    px_key = kept & (basis == 0) & ((outcome == 0) | (outcome == 1))
    z_key = kept & (basis == 1) & ((outcome == 2) | (outcome == 3))
    x_err = px_key & (outcome != bit)
    z_err = z_key & ((outcome - 2) != bit)

    n_x = np.bincount(k[px_key], minlength=3).astype(float)
    n_xneq = np.bincount(k[x_err], minlength=3).astype(float)
    n_k = np.bincount(k[z_key], minlength=3).astype(float)
    n_mc = float(np.sum(kept & (outcome == 4)))
    e_z = float(z_err.sum() / z_key.sum()) if z_key.any() else 0.0
    obs = Observations(tuple(n_x), tuple(n_k), tuple(n_xneq), n_mc, e_z, float(kept.sum()))

    gt = GroundTruth()
    gt.n_kept = int(kept.sum())
    gt.key_det1 = int(np.sum(z_key & (m_det == 1)))
    gt.key_det0 = int(np.sum(z_key & (m_det == 0)))
    gt.kept_det_multi = int(np.sum(kept & (m_det >= 2)))
    gt.mc_from_det_multi = int(np.sum(kept & (m_det >= 2) & (outcome == 4)))
    sb = m_bob == 1
    gt.single_bob_sifted = int(np.sum(sb & (px_key | z_key)))
    gt.single_bob_x_errors = int(np.sum(sb & x_err))
    gt.single_bob_key = int(np.sum(sb & z_key))
    p_ph = single_photon_phase_error_probability(point, ch, proto.p_x_alice)
    gt.single_bob_phase_errors = int(rng.binomial(gt.single_bob_key, p_ph))
    a1 = m_alice == 1
    gt.alice1_key = int(np.sum(a1 & z_key))
    gt.alice1_x = int(np.sum(a1 & px_key))
    gt.alice1_x_errors = int(np.sum(a1 & x_err))
    flat = ((basis * 2 + bit) * 3 + k) * 6 + outcome
    gt.outcome_counts = np.bincount(flat[kept], minlength=72).reshape(2, 2, 3, 6)
    if record:
        gt.log = {
            "basis": basis,
            "bit": bit,
            "intensity": k,
            "m_alice": m_alice,
            "m_bob": m_bob,
            "m_det": m_det,
            "click": click,
            "outcome": outcome,
            "kept": kept,
        }
    return obs, gt


__all__ = [
    "OUTCOMES",
    "GroundTruth",
    "OutcomeDistribution",
    "arm_weights",
    "expected_frequencies",
    "monte_carlo_run",
    "observations_from_frequencies",
    "single_photon_phase_error_probability",
]
