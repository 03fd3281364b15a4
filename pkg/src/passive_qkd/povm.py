"""Bob's single- and zero-photon POVM elements and the two-step joint operators.

Bob's polarization qubit is written in the Z eigenbasis {|0>, |1>} (H, V).
Alice's qubit comes first in every tensor product.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .config import ParamPoint
from .operators import psd_sqrt, psd_sqrt_pinv, support_projector

log = logging.getLogger(__name__)

KET = {
    "0": np.array([1.0, 0.0]),
    "1": np.array([0.0, 1.0]),
    "+": np.array([1.0, 1.0]) / np.sqrt(2.0),
    "-": np.array([1.0, -1.0]) / np.sqrt(2.0),
}
PROJ = {k: np.outer(v, v).astype(complex) for k, v in KET.items()}
I2 = np.eye(2, dtype=complex)


class InvalidPointError(ValueError):
    pass


@dataclass(frozen=True)
class BobPovm1:
    gamma_x0: np.ndarray
    gamma_x1: np.ndarray
    gamma_z0: np.ndarray
    gamma_z1: np.ndarray
    gamma_x_con: np.ndarray
    gamma_z_con: np.ndarray
    gamma_con: np.ndarray


@dataclass(frozen=True)
class JointOps1:
    f_sc: np.ndarray
    f_x: np.ndarray
    f_z: np.ndarray
    f_tilde_x: np.ndarray
    f_tilde_z: np.ndarray
    gamma_x_neq: np.ndarray
    g_tilde_x_neq: np.ndarray
    full_support: bool


@dataclass(frozen=True)
class ZeroPhotonKeyOp:
    value: float


def _single_click_weights(point: ParamPoint) -> dict[str, dict[str, float]]:
    """Probability that only detector `target` clicks, given where the photon went.

    Keys of the inner dict are the routes ('0', '1', '+', '-'), i.e. which
    detector arm the photon entered. Dark counts act as independent
    post-processing on the photon-only outcome.
    """
    eta = dict(zip("01+-", point.eta))
    dk = dict(zip("01+-", point.d))
    quiet = {k: 1.0 - v for k, v in dk.items()}
    out: dict[str, dict[str, float]] = {}
    for target in "01+-":
        others_quiet = np.prod([quiet[k] for k in "01+-" if k != target])
        w: dict[str, float] = {}
        for route in "01+-":
            lost = (1.0 - eta[route]) * dk[target] * others_quiet
            hit = eta[route] * others_quiet if route == target else 0.0
            w[route] = hit + lost
        out[target] = w
    return out


def build_bob_povm_1(point: ParamPoint, p_x_alice: float = 0.5) -> BobPovm1:
    """Single-click elements of Bob's passive setup on the one-photon subspace.

    ``p_x_alice`` only enters the coarse-grained ``gamma_con``.
    """
    if not point.in_unit_range():
        raise InvalidPointError("every parameter must lie in [0, 1]")
    s = point.s
    branch = {"0": 1.0 - s, "1": 1.0 - s, "+": s, "-": s}
    weights = _single_click_weights(point)

    def element(target: str) -> np.ndarray:
        return sum(branch[r] * weights[target][r] * PROJ[r] for r in "01+-")

    gz0, gz1, gx0, gx1 = (element(t) for t in "01+-")
    gx_con = gx0 + gx1
    gz_con = gz0 + gz1
    g_con = p_x_alice * gx_con + (1.0 - p_x_alice) * gz_con
    return BobPovm1(gx0, gx1, gz0, gz1, gx_con, gz_con, g_con)


def heuristic_a(p_x_alice: float, s: float) -> float:
    return p_x_alice * s / ((1.0 - p_x_alice) * (1.0 - s))


def build_joint_ops_1(
    point: ParamPoint, p_x_alice: float, a: float | None = None, rank_tol: float = 1e-12
) -> JointOps1:
    """F_sc, the rescaled basis elements F~_X, F~_Z and the completed error element G~."""
    p_z = 1.0 - p_x_alice
    bob = build_bob_povm_1(point, p_x_alice)
    f_x = p_x_alice * np.kron(I2, bob.gamma_x_con)
    f_z = p_z * np.kron(I2, bob.gamma_z_con)
    f_sc = np.kron(I2, bob.gamma_con)
    s_inv = np.kron(I2, psd_sqrt_pinv(bob.gamma_con, rank_tol))
    f_tilde_x = s_inv @ f_x @ s_inv
    f_tilde_z = s_inv @ f_z @ s_inv

    lam = np.linalg.eigvalsh(bob.gamma_con)
    full = bool(lam[-1] > 0 and lam[0] > rank_tol * lam[-1])
    if not full:
        log.info("F_sc lacks full support; adding completion terms")
        if a is None:
            a = heuristic_a(p_x_alice, point.s) if 0 < point.s < 1 else 1.0
        comp = np.eye(4) - support_projector(f_sc, rank_tol)
        f_tilde_x = f_tilde_x + a / (a + 1.0) * comp
        f_tilde_z = f_tilde_z + 1.0 / (a + 1.0) * comp

    gamma_x_neq = p_x_alice * (np.kron(PROJ["+"], bob.gamma_x1) + np.kron(PROJ["-"], bob.gamma_x0))
    ftx_inv = psd_sqrt_pinv(f_tilde_x, rank_tol)
    g_tilde = ftx_inv @ s_inv @ gamma_x_neq @ s_inv @ ftx_inv
    return JointOps1(f_sc, f_x, f_z, f_tilde_x, f_tilde_z, gamma_x_neq, g_tilde, full)


def two_step_x_error_probability(ops: JointOps1, rho: np.ndarray) -> float:
    """Tr(sqrt F~_X sqrt F_sc rho sqrt F_sc sqrt F~_X G~): X-error probability via the two-step route."""
    k = psd_sqrt(ops.f_tilde_x) @ psd_sqrt(ops.f_sc)
    return float(np.real(np.trace(k @ rho @ k.conj().T @ ops.g_tilde_x_neq)))


def two_step_key_phase_error_probability(ops: JointOps1, rho: np.ndarray) -> float:
    """Probability of a key round that would have shown a phase error."""
    k = psd_sqrt(ops.f_tilde_z) @ psd_sqrt(ops.f_sc)
    return float(np.real(np.trace(k @ rho @ k.conj().T @ ops.g_tilde_x_neq)))


def zero_photon_key_norm(point: ParamPoint, p_z_alice: float) -> ZeroPhotonKeyOp:
    """Weight of a Z-basis single click produced by dark counts alone."""
    dz0, dz1, dx0, dx1 = point.d
    value = p_z_alice * (1 - dx0) * (1 - dx1) * (dz0 + dz1 - 2 * dz0 * dz1)
    return ZeroPhotonKeyOp(float(value))

