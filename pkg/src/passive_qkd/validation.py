"""Monte Carlo certification of every statistical bound against hidden ground truth."""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .bounds import BoundInputs, azuma_sampling_cap, b_k, multi_photon_cap, zero_photon_cap
from .channel import monte_carlo_run
from .decoy import decoy_bounds
from .keyrate import Scenario, certificate_for
from .mismatch import MismatchCertificate

log = logging.getLogger(__name__)

CHECKS = (
    "key_rounds_floor",
    "multi_photon_cap",
    "zero_photon_cap",
    "phase_error_cap",
    "decoy_min1_key",
    "decoy_max1_x",
    "decoy_max1_xneq",
)
INJECTABLE = ("lambda_min", "delta", "q_z", "a_lo")


@dataclass
class ValidationResult:
    trials: int
    n: int
    seed: int
    correlated: bool
    violations: dict[str, int] = field(default_factory=lambda: {c: 0 for c in CHECKS})
    min_slack: dict[str, float] = field(default_factory=lambda: {c: math.inf for c in CHECKS})
    inject: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(v == 0 for v in self.violations.values())

    def as_dict(self) -> dict:
        return {
            "trials": self.trials,
            "n": self.n,
            "seed": self.seed,
            "correlated": self.correlated,
            "inject": self.inject,
            "violations": self.violations,
            "min_slack": {k: (v if math.isfinite(v) else None) for k, v in self.min_slack.items()},
            "total_violations": sum(self.violations.values()),
            "ok": self.ok,
        }


def parse_inject(text: str | None) -> dict[str, float]:
    """Parse 'lambda_min*2' or 'delta=0' (comma separated).

    Factors are keyed by the plain name, assignments by 'name='.
    """
    out: dict[str, float] = {}
    if not text:
        return out
    for part in text.split(","):
        m = re.fullmatch(r"\s*(\w+)\s*([*=])\s*([-+0-9.eE]+)\s*", part)
        if not m or m.group(1) not in INJECTABLE:
            raise ValueError(f"cannot parse injection {part!r}; use e.g. lambda_min*2")
        key = m.group(1) + ("=" if m.group(2) == "=" else "")
        out[key] = float(m.group(3))
    return out


def apply_inject(cert: MismatchCertificate, inject: dict[str, float]) -> MismatchCertificate:
    changes = {}
    for key, value in inject.items():
        name = key.rstrip("=")
        changes[name] = value if key.endswith("=") else getattr(cert, name) * value
    return replace(cert, **changes) if changes else cert


# Checks whose bound is a strict inequality; the others allow equality.
_STRICT = {"key_rounds_floor", "zero_photon_cap"}


def _record(res: ValidationResult, name: str, slack: float) -> None:
    """slack is bound minus truth, oriented so that positive means the bound held."""
    res.min_slack[name] = min(res.min_slack[name], slack)
    held = slack > 0 if name in _STRICT else slack >= 0
    if not held:
        res.violations[name] += 1


def run_validation(
    sc: Scenario,
    trials: int,
    n: int,
    seed: int = 0,
    correlated: bool | None = None,
    inject: dict[str, float] | None = None,
) -> ValidationResult:
    """Sample ``trials`` independent runs of ``n`` rounds and count bound violations."""
    correlated = sc.correlated if correlated is None else correlated
    inject = inject or {}
    res = ValidationResult(trials, n, seed, correlated, inject=dict(inject))
    if trials <= 0:
        return res
    cert = apply_inject(certificate_for(sc), inject)
    proto = sc.protocol.with_(n_rounds=int(n))
    point = sc.channel.true_point or sc.ranges.center()
    eps = sc.eps
    children = np.random.SeedSequence(seed).spawn(trials)
    for child in children:
        obs, gt = monte_carlo_run(point, sc.channel, proto, n, child, correlated)
        inputs = BoundInputs(
            n_rounds=float(n),
            n_mc=obs.n_mc,
            lambda_min=cert.lambda_min,
            q_z=cert.q_z,
            delta=cert.delta,
            a=cert.a_lo,
            eps=eps,
            n_x=obs.n_x,
            n_k=obs.n_k,
            n_error=obs.n_xneq,
            correlated=correlated,
        )
        _record(res, "key_rounds_floor", gt.key_det1 - b_k(obs.n_k, inputs))
        _record(res, "multi_photon_cap", multi_photon_cap(obs.n_mc, cert.lambda_min, eps.eps_pne) - gt.kept_det_multi)
        _record(res, "zero_photon_cap", zero_photon_cap(n, cert.q_z, eps.eps_0, correlated) - gt.key_det0)
        cap = azuma_sampling_cap(
            gt.single_bob_x_errors, gt.single_bob_sifted, cert.a_lo, cert.delta, eps.eps_az_a, eps.eps_az_b
        )
        _record(res, "phase_error_cap", cap - gt.single_bob_phase_errors)
        db = decoy_bounds(obs, proto, eps.eps_at_d)
        _record(res, "decoy_min1_key", gt.alice1_key - db.b_min1_k)
        _record(res, "decoy_max1_x", db.b_max1_x - gt.alice1_x)
        _record(res, "decoy_max1_xneq", db.b_max1_xneq - gt.alice1_x_errors)
    log.info("validation finished: %s", res.violations)
    return res
