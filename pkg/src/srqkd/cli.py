"""Command-line interface: config handling, subcommand dispatch, dataset export.

Configuration is a flat ``key = value`` file (``#`` starts a comment) whose
keys match the RunConfig fields below; command-line flags override file
values, which override built-in defaults that mirror the reference setup
(eta=0.2, p_dc=2e-5, p_opt=0.02, NEP=25 pW/sqrt(Hz), tau=5 ns,
lambda=1550 nm, f_ec=1.2, t=65 dB, f=5 MHz). The SRQKD_CONFIG environment
variable names a default config file.

Datasets are written as CSV (default; lowercase-e scientific notation) or
JSON (an array of row objects with the same field names). Output for a
given config and seed is byte-identical between runs. Exit codes: 0 on
success, 1 on validation errors, 2 on numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .attack import maximize_eve_information
from .discrimination import build_povm, outcome_probabilities, povm_probabilities_fock, span_states
from .physics import DetectorConfig, Protocol, SetupConfig, derive_channel
from .rates import DecoyConfig, bb84_secret_rate
from .simulation import AttackKind, DoubleClickPolicy, SimConfig, simulate
from .sweeps import (
    GridSpec,
    evaluate_sr_point,
    min_srp_photons,
    optimize_mu,
    rate_vs_distance,
    rate_vs_t,
    sweep_mu_t,
    train_capacity,
)

CONFIG_ENV_VAR = "SRQKD_CONFIG"

SWEEP_FIELDS = ("mu", "t_db", "length_km", "delta", "qber", "i_e",
                "r_sec_per_pulse", "r_sec_hz", "flags")


@dataclass(frozen=True)
class RunConfig:
    """Flat merged view of every tunable; field names double as config keys."""

    # protocol / setup
    protocol: str = "b92-sr"
    mu: float = 0.3
    t_db: float = 65.0
    length_km: float = 10.0
    pulse_rate_hz: float = 5e6
    # detector
    eta: float = 0.2
    p_dc: float = 2e-5
    p_opt: float = 0.02
    nep: float = 25e-12
    tau_s: float = 5e-9
    lambda_m: float = 1550e-9
    f_ec: float = 1.2
    # decoy-state baseline
    nu1_ratio: float = 0.25
    nu2_ratio: float = 0.01
    p_mu: float = 0.5
    # sweep grids
    mu_lo: float = 0.01
    mu_hi: float = 1.0
    mu_points: int = 81
    mu_scale: str = "log"
    t_lo: float = 40.0
    t_hi: float = 90.0
    t_points: int = 101
    l_lo: float = 0.0
    l_hi: float = 120.0
    l_points: int = 61
    # simulation
    n_pulses: int = 1_000_000
    seed: int = 12345
    attack: str = "none"
    double_click: str = "discard"
    # output
    format: str = "csv"

    def setup(self) -> SetupConfig:
        return SetupConfig(protocol=self.protocol, mu=self.mu, t_db=self.t_db,
                           length_km=self.length_km, pulse_rate_hz=self.pulse_rate_hz)

    def detector(self) -> DetectorConfig:
        return DetectorConfig(eta=self.eta, p_dc=self.p_dc, p_opt=self.p_opt,
                              nep=self.nep, tau_s=self.tau_s,
                              lambda_m=self.lambda_m, f_ec=self.f_ec)

    def grid(self) -> GridSpec:
        return GridSpec(mu_range=(self.mu_lo, self.mu_hi, self.mu_points, self.mu_scale),
                        t_range_db=(self.t_lo, self.t_hi, self.t_points),
                        l_range_km=(self.l_lo, self.l_hi, self.l_points))

    def decoy(self, mu_sig: float) -> DecoyConfig:
        return DecoyConfig.from_signal(mu_sig, nu1_ratio=self.nu1_ratio,
                                       nu2_ratio=self.nu2_ratio, p_mu=self.p_mu)

    def validate(self) -> "RunConfig":
        """Re-run every domain validation on the merged values."""
        self.setup()
        self.detector()
        self.grid()
        self.decoy(self.mu)
        AttackKind(self.attack)
        DoubleClickPolicy(self.double_click)
        if self.n_pulses < 1:
            raise ValueError(f"n_pulses must be >= 1, got {self.n_pulses}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")
        return self


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _convert(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    if kind == "int":
        return int(float(raw))
    if kind == "float":
        return float(raw)
    return raw


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines; unknown keys are rejected by name."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _FIELD_TYPES:
            raise ValueError(f"{source}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = _convert(key, raw)
        except ValueError:
            raise ValueError(f"{source}:{lineno}: bad value for {key!r}: {raw!r}") from None
    return values


def dump_config(config: RunConfig) -> str:
    """Render a config file that re-parses to an identical RunConfig."""
    lines = []
    for field in dataclasses.fields(RunConfig):
        value = getattr(config, field.name)
        rendered = format(value, ".17g") if isinstance(value, float) else str(value)
        lines.append(f"{field.name} = {rendered}")
    return "\n".join(lines) + "\n"


def load_run_config(config_path: Optional[str], overrides: dict) -> RunConfig:
    values = {}
    path = config_path or os.environ.get(CONFIG_ENV_VAR)
    if path:
        values.update(parse_config_text(Path(path).read_text(), source=path))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values).validate()


# ---------------------------------------------------------------------------
# output rendering

def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".12g")
    if isinstance(value, (tuple, list)):
        return ";".join(str(v) for v in value)
    return str(value)


def _json_cell(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, tuple):
        return list(value)
    return value


def render_rows(rows: list[dict], fieldnames: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        payload = [{k: _json_cell(row[k]) for k in fieldnames} for row in rows]
        return json.dumps(payload, indent=2) + "\n"
    lines = [",".join(fieldnames)]
    lines.extend(",".join(_csv_cell(row[k]) for k in fieldnames) for row in rows)
    return "\n".join(lines) + "\n"


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _sweep_row_dict(row) -> dict:
    return {name: getattr(row, name) for name in SWEEP_FIELDS}


# ---------------------------------------------------------------------------
# subcommands

def _cmd_rate(config: RunConfig, args) -> tuple[list[dict], Sequence[str]]:
    setup, detector = config.setup(), config.detector()
    if setup.protocol.uses_reference_pulse:
        return [_sweep_row_dict(evaluate_sr_point(setup, detector))], SWEEP_FIELDS
    decoy = config.decoy(setup.mu) if setup.protocol is Protocol.BB84_DECOY else None
    breakdown = bb84_secret_rate(setup, detector, decoy=decoy)
    row = {
        "mu": setup.mu, "t_db": setup.t_db, "length_km": setup.length_km,
        "delta": math.nan, "qber": breakdown.qber, "i_e": breakdown.i_e,
        "r_sec_per_pulse": breakdown.per_pulse, "r_sec_hz": breakdown.r_sec,
        "flags": ("clamped",) if breakdown.r_sec_unclamped < 0 else (),
    }
    return [row], SWEEP_FIELDS


def _cmd_attack(config: RunConfig, args) -> tuple[list[dict], Sequence[str]]:
    setup, detector = config.setup(), config.detector()
    solution = maximize_eve_information(setup, detector, b_points=args.b_points,
                                        keep_trace=args.trace_out is not None)
    if args.trace_out is not None:
        trace_rows = [{"b": b, "i_e": v} for b, v in solution.scan_trace]
        Path(args.trace_out).write_text(render_rows(trace_rows, ("b", "i_e"), config.format))
    flags = []
    if solution.monitoring_unacceptable:
        flags.append("grey-region")
    if solution.interval_empty:
        flags.append("attack-infeasible")
    best = solution.best
    row = {
        "mu": setup.mu, "t_db": setup.t_db, "length_km": setup.length_km,
        "delta": solution.delta, "b_min": solution.b_min, "b_max": solution.b_max,
        "b": best.b, "p": best.p, "a": best.a,
        "beta_s_sq": best.beta_s_sq, "beta_f_sq": best.beta_f_sq,
        "eps_s_sq": best.eps_s_sq, "eps_f_sq": best.eps_f_sq,
        "i_e": best.i_e, "flags": tuple(flags),
    }
    return [row], tuple(row)


def _cmd_sweep_mu_t(config: RunConfig, args) -> tuple[list[dict], Sequence[str]]:
    rows = sweep_mu_t(config.length_km, config.grid(), config.detector(),
                      protocol=Protocol(config.protocol),
                      pulse_rate_hz=config.pulse_rate_hz)
    return [_sweep_row_dict(r) for r in rows], SWEEP_FIELDS


def _cmd_optimize_mu(config: RunConfig, args) -> tuple[list[dict], Sequence[str]]:
    opt = optimize_mu(config.length_km, config.t_db, config.detector(),
                      protocol=Protocol(config.protocol),
                      pulse_rate_hz=config.pulse_rate_hz,
                      mu_range=config.grid().mu_range)
    row = {"length_km": opt.length_km, "t_db": opt.t_db, "mu_opt": opt.mu_opt,
           "r_sec_hz": opt.r_sec_hz, "per_pulse": opt.per_pulse, "found": opt.found}
    return [row], tuple(row)


def _cmd_rate_vs_t(config: RunConfig, args) -> tuple[list[dict], Sequence[str]]:
    curve = rate_vs_t(config.length_km, config.mu, config.grid().t_values(),
                      config.detector(), protocol=Protocol(config.protocol),
                      pulse_rate_hz=config.pulse_rate_hz)
    print(f"t_sat_db = {curve.t_sat_db}  onset_t_db = {curve.onset_t_db}"
          f"  onset_nu = {curve.onset_nu}", file=sys.stderr)
    return [_sweep_row_dict(r) for r in curve.rows], SWEEP_FIELDS


def _cmd_rate_vs_distance(config: RunConfig, args) -> tuple[list[dict], Sequence[str]]:
    protocols = [Protocol(p.strip()) for p in args.protocols.split(",") if p.strip()]
    comparison = rate_vs_distance(protocols, config.detector(),
                                  config.grid().l_values(), t_db=config.t_db,
                                  pulse_rate_hz=config.pulse_rate_hz,
                                  mu_range=config.grid().mu_range)
    print(f"crossover_km = {comparison.crossover_km}", file=sys.stderr)
    fields = ("protocol", "length_km", "mu", "r_sec_hz", "per_pulse")
    return [{k: getattr(r, k) for k in fields} for r in comparison.rows], fields


def _cmd_min_srp(config: RunConfig, args) -> tuple[list[dict], Sequence[str]]:
    result = min_srp_photons(config.length_km, config.detector(),
                             t_grid=config.grid().t_values(),
                             mu_policy=args.mu_policy, fixed_mu=args.fixed_mu,
                             criterion=args.criterion,
                             protocol=Protocol(config.protocol),
                             pulse_rate_hz=config.pulse_rate_hz,
                             mu_range=config.grid().mu_range)
    row = {"length_km": config.length_km, "criterion": result.criterion,
           "mu_policy": args.mu_policy, "nu_threshold": result.nu_threshold,
           "mu_at": result.mu_at, "t_db_at": result.t_db_at,
           "r_sec_hz": result.r_sec_hz}
    return [row], tuple(row)


def _cmd_simulate(config: RunConfig, args) -> tuple[list[dict], Sequence[str]]:
    setup, detector = config.setup(), config.detector()
    kind = AttackKind(config.attack)
    point = None
    if kind is AttackKind.SOFT_FILTER:
        point = maximize_eve_information(setup, detector).best
    sim = SimConfig(n_pulses=config.n_pulses, seed=config.seed, attack=kind,
                    attack_point=point, double_click=config.double_click)
    result = simulate(setup, detector, sim)
    row = {
        "n_pulses": result.n_pulses, "seed": config.seed, "attack": kind.value,
        "double_click": DoubleClickPolicy(config.double_click).value,
        "conclusive_count": result.conclusive_count, "error_count": result.error_count,
        "qber_hat": result.qber_hat, "rate_hat": result.rate_hat,
        "qber_ci_lo": result.qber_ci[0], "qber_ci_hi": result.qber_ci[1],
        "rate_ci_lo": result.rate_ci[0], "rate_ci_hi": result.rate_ci[1],
    }
    return [row], tuple(row)


def _cmd_povm_check(config: RunConfig, args) -> tuple[list[dict], Sequence[str]]:
    mu = config.mu
    povm = build_povm(math.exp(-2.0 * mu))
    psi0, psi1 = span_states(math.exp(-2.0 * mu))
    p0 = outcome_probabilities(povm, psi0)
    p1 = outcome_probabilities(povm, psi1)
    fock = povm_probabilities_fock(mu)
    row = {
        "mu": mu, "cos_gamma": math.exp(-2.0 * mu),
        "completeness_residual": povm.completeness_residual(),
        "min_eigenvalue": povm.min_eigenvalue(),
        "p_ok_0": p0[0], "p_cross_0": p0[1], "p_inc_0": p0[2],
        "p_ok_1": p1[1], "p_cross_1": p1[0], "p_inc_1": p1[2],
        "fock_p_ok_0": fock["ok"], "fock_p_cross_0": fock["cross"],
        "fock_p_inc_0": fock["inc"],
    }
    return [row], tuple(row)


def _cmd_train_capacity(config: RunConfig, args) -> tuple[list[dict], Sequence[str]]:
    rate_hz = args.rate_hz if args.rate_hz is not None else config.pulse_rate_hz
    count = train_capacity(args.storage_km, rate_hz, n_fib=args.n_fib)
    row = {"storage_km": args.storage_km, "pulse_rate_hz": rate_hz,
           "n_fib": args.n_fib, "capacity": count}
    return [row], tuple(row)


_COMMANDS = {
    "rate": _cmd_rate,
    "attack": _cmd_attack,
    "sweep-mu-t": _cmd_sweep_mu_t,
    "optimize-mu": _cmd_optimize_mu,
    "rate-vs-t": _cmd_rate_vs_t,
    "rate-vs-distance": _cmd_rate_vs_distance,
    "min-srp": _cmd_min_srp,
    "simulate": _cmd_simulate,
    "povm-check": _cmd_povm_check,
    "train-capacity": _cmd_train_capacity,
}


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_override_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="config file path (default: $SRQKD_CONFIG)")
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--dump-config", action="store_true",
                        help="print the merged configuration and exit")
    for field in dataclasses.fields(RunConfig):
        flag = "--" + field.name.replace("_", "-")
        if field.type == "int":
            parser.add_argument(flag, dest=field.name, type=int, default=None)
        elif field.type == "float":
            parser.add_argument(flag, dest=field.name, type=float, default=None)
        else:
            parser.add_argument(flag, dest=field.name, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="srqkd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name in _COMMANDS:
        p = sub.add_parser(name)
        _add_override_flags(p)
        if name == "attack":
            p.add_argument("--b-points", type=int, default=2000,
                           help="attenuation grid resolution")
            p.add_argument("--trace-out", help="write the (b, i_e) scan to this file")
        elif name == "rate-vs-distance":
            p.add_argument("--protocols", default="b92-sr,bb84-standard,bb84-decoy",
                           help="comma-separated protocol list")
        elif name == "min-srp":
            p.add_argument("--criterion", default="positive-rate",
                           choices=("positive-rate", "0.99-of-max"))
            p.add_argument("--mu-policy", default="optimized-per-t",
                           choices=("optimized-per-t", "fixed"))
            p.add_argument("--fixed-mu", type=float, default=None)
        elif name == "train-capacity":
            p.add_argument("--storage-km", type=float, required=True,
                           help="storage-line fiber length in km")
            p.add_argument("--rate-hz", type=float, default=None,
                           help="pulse repetition rate (default: pulse_rate_hz)")
            p.add_argument("--n-fib", type=float, default=1.47,
                           help="fiber group refractive index")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {f.name: getattr(args, f.name, None) for f in dataclasses.fields(RunConfig)}
    try:
        config = load_run_config(args.config, overrides)
        if args.dump_config:
            _emit(dump_config(config), args.out)
            return 0
        rows, fields = _COMMANDS[args.command](config, args)
        for row in rows:
            for value in row.values():
                if isinstance(value, float) and math.isinf(value):
                    raise ArithmeticError(f"non-finite value in output: {row}")
        if args.command == "train-capacity" and config.format == "csv" and not args.out:
            # the common interactive use: just answer with the number
            sys.stdout.write(f"{rows[0]['capacity']}\n")
            return 0
        _emit(render_rows(rows, fields, config.format), args.out)
        return 0
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
