"""Command-line entry point: key-rate sweeps and Monte Carlo bound validation.

Exit codes: 0 success, 2 configuration error, 3 certified-bound violation.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .configfile import ConfigError, RunConfig, load_config
from .keyrate import AXES, SweepRow, parse_values, sweep
from .validation import parse_inject, run_validation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VIOLATION = 3

CSV_COLUMNS = (
    "axis_value",
    "loss_db",
    "delta_width",
    "l_c",
    "mu1",
    "mu2",
    "lambda_min",
    "delta_bound",
    "q_z",
    "a_lo",
    "b1",
    "be",
    "lambda_ec",
    "key_length_bits",
    "rate_per_signal",
    "status",
)
AXIS_ALIASES = {"loss": "loss_db", "delta": "delta_width", "rate": "repetition_rate", "lc": "l_c"}

log = logging.getLogger("passive_qkd")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def row_values(row: SweepRow) -> list[str]:
    sc, res = row.scenario, row.result
    cert = res.certificate
    vals = [
        row.axis_value,
        sc.channel.loss_db,
        sc.delta_width,
        sc.protocol.l_c,
        row.mu[0],
        row.mu[1],
        cert.lambda_min,
        cert.delta,
        cert.q_z,
        cert.a_lo,
        res.b1,
        res.be,
        res.lambda_ec,
        res.key_length_bits,
        res.rate_per_signal,
        res.status,
    ]
    return [_fmt(v) for v in vals]


def write_csv(path: Path, rows: Sequence[SweepRow], axis: str) -> None:
    header = list(CSV_COLUMNS)
    extra = axis == "repetition_rate"
    if extra:
        header.append("key_per_second")
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            vals = row_values(r)
            if extra:
                vals.append(_fmt(r.key_per_second))
            w.writerow(vals)


def write_report(path: Path, rows: Sequence[SweepRow], axis: str) -> None:
    lines = [f"{axis:>16} {'mu1':>5} {'mu2':>5} {'rate/signal':>12} {'key bits':>12}  status"]
    for r in rows:
        lines.append(
            f"{r.axis_value:>16g} {r.mu[0]:>5g} {r.mu[1]:>5g} {r.result.rate_per_signal:>12.4e}"
            f" {r.result.key_length_bits:>12.4e}  {r.result.status}"
        )
    lines.append("manifest: manifest.json")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_manifest(out: Path, cfg: RunConfig, axis: str, outputs: Sequence[str], command: str) -> None:
    manifest = {
        "tool": "passive-qkd",
        "version": __version__,
        "command": command,
        "config_sha256": cfg.sha256,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "axis": axis,
        "outputs": list(outputs),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    if getattr(args, "correlated", False):
        cfg = replace(cfg, scenario=cfg.scenario.with_(correlated=True))
    return cfg


def cmd_keyrate(args) -> int:
    cfg = _load(args)
    axis = AXIS_ALIASES.get(args.axis, args.axis) if args.axis else cfg.axis
    if axis not in AXES:
        raise ConfigError("/sweep/axis", f"unknown axis {axis!r}")
    try:
        values = parse_values(args.values) if args.values else list(cfg.values)
    except ValueError as exc:
        raise ConfigError("/sweep/values", str(exc)) from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = sweep(
        cfg.scenario,
        axis,
        values,
        optimize=cfg.optimize,
        mu1_grid=cfg.mu1_grid,
        mu2_grid=cfg.mu2_grid,
        duration_s=cfg.duration_s,
        dead_time_s=cfg.dead_time_s,
    )
    write_csv(out / "results.csv", rows, axis)
    write_report(out / "report.txt", rows, axis)
    write_manifest(out, cfg, axis, ["results.csv", "report.txt"], "keyrate")
    for r in rows:
        log.info("%s=%g key=%.6g bits status=%s", axis, r.axis_value, r.result.key_length_bits, r.result.status)
    print(f"wrote {len(rows)} rows to {out / 'results.csv'}")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _load(args)
    try:
        inject = parse_inject(args.inject)
    except ValueError as exc:
        raise ConfigError("--inject", str(exc)) from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = run_validation(cfg.scenario, args.trials, int(args.n), args.seed, inject=inject)
    report = res.as_dict()
    report["manifest"] = "manifest.json"
    (out / "validation.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    write_manifest(out, cfg, "", ["validation.json"], "validate")
    total = report["total_violations"]
    print(f"{args.trials} trials, {total} violations; report in {out / 'validation.json'}")
    return EXIT_OK if res.ok else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="passive-qkd", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    k = sub.add_parser("keyrate", help="sweep key rates and write results.csv")
    k.add_argument("--config", required=True)
    k.add_argument("--axis", help=f"one of {', '.join(AXES)} (aliases: {', '.join(AXIS_ALIASES)})")
    k.add_argument("--values", help="start:stop:step (inclusive) or comma-separated list")
    k.add_argument("--out", default=".")
    k.add_argument("--correlated", action="store_true")
    k.set_defaults(func=cmd_keyrate)

    v = sub.add_parser("validate", help="Monte Carlo check of every certified bound")
    v.add_argument("--config", required=True)
    v.add_argument("--trials", type=int, default=1000)
    v.add_argument("--n", type=float, default=1e5)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", default=".")
    v.add_argument("--correlated", action="store_true")
    v.add_argument("--inject", help="test only: corrupt a certificate, e.g. lambda_min*2")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
