"""JSON run-configuration loading with schema and invariant checks."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .config import (
    ChannelConfig,
    EpsilonBudget,
    ParamPoint,
    ParamRanges,
    ProtocolConfig,
    validate_config,
)
from .keyrate import MU1_GRID, MU2_GRID, Scenario, parse_values
from .subspace import DEFAULT_GRID_STEP, DEFAULT_MAX_GRID_POINTS


class ConfigError(ValueError):
    """Configuration problem; ``pointer`` is a JSON pointer into the document."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
        self.message = message


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    axis: str
    values: tuple[float, ...]
    optimize: bool
    mu1_grid: tuple[float, ...]
    mu2_grid: tuple[float, ...]
    duration_s: float
    dead_time_s: float
    sha256: str


def load_schema() -> dict:
    text = resources.files("passive_qkd").joinpath("config_schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def parse_config(doc: dict[str, Any], sha256: str = "") -> RunConfig:
    """Validate a parsed document and build the run configuration."""
    validator = jsonschema.Draft202012Validator(load_schema())
    e = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if e is not None:
        # Descend into oneOf branches so the pointer names the offending field.
        while e.context:
            e = jsonschema.exceptions.best_match(e.context)
        raise ConfigError(_pointer(e.absolute_path), e.message)

    r = doc["ranges"]
    delta_width = None
    if "delta" in r:
        delta_width = float(r["delta"])
        ranges = ParamRanges.from_width(delta_width, r.get("eta", 0.7), r.get("d", 1e-6), r.get("s", 0.3))
    else:
        ranges = ParamRanges(r["eta_lo"], r["eta_hi"], r["d_lo"], r["d_hi"], r["s_center"], r["s_halfwidth"])

    p = dict(doc.get("protocol", {}))
    correlated = bool(p.pop("correlated", False))
    if "n_rounds" in p:
        p["n_rounds"] = int(round(p["n_rounds"]))
    if "mu" in p:
        p["mu"] = tuple(p["mu"])
    if "p_mu" in p:
        p["p_mu"] = tuple(p["p_mu"])
    proto = ProtocolConfig(**p)

    e = dict(doc.get("epsilons", {}))
    eps = EpsilonBudget.uniform(e.pop("all")) if "all" in e else EpsilonBudget()
    if e:
        eps = EpsilonBudget(**{**eps.values(), **e})

    c = dict(doc.get("channel", {}))
    tp = c.pop("true_point", None)
    channel = ChannelConfig(**c, true_point=ParamPoint(tp["eta"], tp["d"], tp["s"]) if tp else None)

    for pointer, report in (
        ("/ranges", validate_config(ranges=ranges)),
        ("/protocol", validate_config(proto=proto)),
        ("/epsilons", validate_config(eps=eps)),
    ):
        if not report.ok:
            raise ConfigError(pointer, "; ".join(report.violations))
    if channel.true_point is not None and not ranges.contains(channel.true_point, tol=1e-12):
        raise ConfigError("/channel/true_point", "true device lies outside the certified box")

    sw = doc.get("sweep", {})
    scenario = Scenario(
        ranges=ranges,
        protocol=proto,
        eps=eps,
        channel=channel,
        correlated=correlated,
        grid_step=float(sw.get("grid_step", DEFAULT_GRID_STEP)),
        max_grid_points=int(sw.get("max_grid_points", DEFAULT_MAX_GRID_POINTS)),
        delta_width=delta_width,
        strict_scaling=bool(sw.get("strict_scaling", False)),
    )
    axis = sw.get("axis", "loss_db")
    default_values = [channel.loss_db] if axis == "loss_db" else [0.0]
    try:
        values = tuple(parse_values(sw.get("values", default_values)))
    except ValueError as exc:
        raise ConfigError("/sweep/values", str(exc)) from exc
    return RunConfig(
        scenario=scenario,
        axis=axis,
        values=values,
        optimize=bool(sw.get("optimize", True)),
        mu1_grid=tuple(sw.get("mu1_grid", MU1_GRID)),
        mu2_grid=tuple(sw.get("mu2_grid", MU2_GRID)),
        duration_s=float(sw.get("duration_s", 100.0)),
        dead_time_s=float(sw.get("dead_time_s", 1e-9)),
        sha256=sha256,
    )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("", f"config file not found: {path}")
    raw = path.read_bytes()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError("", f"cannot parse {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("", "top level must be a JSON object")
    return parse_config(doc, hashlib.sha256(raw).hexdigest())
