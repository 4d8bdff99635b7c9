"""Parameter sweeps and derived scalar results.

Produces the datasets behind the headline numbers: (mu, t) rate grids,
mu-optimization at fixed t, rate saturation in t, the protocol comparison
versus distance with its crossover point, the minimum usable reference-pulse
intensity, and the fiber storage-line pulse capacity. Everything here is a
thin deterministic layer over the physics/attack/rate modules: every row can
be reproduced by calling those modules directly with the row's inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import constants

from .attack import maximize_eve_information
from .optimize import grid_then_golden_max
from .physics import (
    GREY_REGION_DELTA,
    DetectorConfig,
    Protocol,
    SetupConfig,
    _delta_at_unit_mu,
    monitoring_unacceptable,
)
from .rates import DecoyConfig, bb84_secret_rate, sr_secret_rate

DEFAULT_PULSE_RATE_HZ = 5e6
DEFAULT_T_DB = 65.0
DEFAULT_FIBER_INDEX = 1.47

# Canonical flag order so serialized rows are byte-stable.
FLAG_GREY = "grey-region"
FLAG_CLAMPED = "clamped"
FLAG_INFEASIBLE = "attack-infeasible"


@dataclass(frozen=True)
class GridSpec:
    """Sweep axes; mu is log-spaced by default because rates span decades."""

    mu_range: tuple[float, float, int, str] = (0.01, 1.0, 81, "log")
    t_range_db: tuple[float, float, int] = (40.0, 90.0, 101)
    l_range_km: tuple[float, float, int] = (0.0, 120.0, 61)

    def __post_init__(self):
        lo, hi, points, scale = self.mu_range
        if scale not in ("linear", "log"):
            raise ValueError(f"mu scale must be linear or log, got {scale!r}")
        if scale == "log" and lo <= 0:
            raise ValueError("log-spaced mu grid needs lo > 0")
        for name, (a, b, n) in (("mu", (lo, hi, points)),
                                ("t", self.t_range_db),
                                ("l", self.l_range_km)):
            if not a < b:
                raise ValueError(f"{name} range needs lo < hi")
            if n < 2:
                raise ValueError(f"{name} range needs at least 2 points")

    def mu_values(self) -> np.ndarray:
        lo, hi, points, scale = self.mu_range
        if scale == "log":
            xs = np.logspace(math.log10(lo), math.log10(hi), points)
            xs[0], xs[-1] = lo, hi
            return xs
        return np.linspace(lo, hi, points)

    def t_values(self) -> np.ndarray:
        return np.linspace(*self.t_range_db)

    def l_values(self) -> np.ndarray:
        return np.linspace(*self.l_range_km)


@dataclass(frozen=True)
class SweepRow:
    """One evaluated setup; flags mark suspect points instead of masking them."""

    mu: float
    t_db: float
    length_km: float
    delta: float
    qber: float
    i_e: float
    r_sec_per_pulse: float
    r_sec_hz: float
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if (FLAG_GREY in self.flags) != (self.delta > GREY_REGION_DELTA):
            raise ValueError("grey-region flag inconsistent with delta")


@dataclass(frozen=True)
class MuOptimum:
    length_km: float
    t_db: float
    mu_opt: float
    r_sec_hz: float
    per_pulse: float
    found: bool


@dataclass(frozen=True)
class TSaturation:
    """Rate-vs-attenuation curve with its saturation and positive-rate onsets."""

    rows: list[SweepRow]
    t_sat_db: Optional[float]
    onset_t_db: Optional[float]
    onset_nu: Optional[float]


@dataclass(frozen=True)
class DistancePoint:
    protocol: str
    length_km: float
    mu: float
    r_sec_hz: float
    per_pulse: float


@dataclass(frozen=True)
class DistanceComparison:
    rows: list[DistancePoint]
    crossover_km: Optional[float]


@dataclass(frozen=True)
class MinSrpResult:
    nu_threshold: float
    mu_at: float
    t_db_at: float
    r_sec_hz: float
    criterion: str


def evaluate_sr_point(setup: SetupConfig, detector: DetectorConfig) -> SweepRow:
    """Full evaluation of one SR setup: attack maximization plus rate assembly."""
    solution = maximize_eve_information(setup, detector)
    breakdown = sr_secret_rate(setup, detector, i_e=solution.best.i_e)
    flags = []
    if solution.monitoring_unacceptable:
        flags.append(FLAG_GREY)
    if breakdown.r_sec_unclamped < 0.0:
        flags.append(FLAG_CLAMPED)
    if solution.interval_empty:
        flags.append(FLAG_INFEASIBLE)
    return SweepRow(
        mu=setup.mu, t_db=setup.t_db, length_km=setup.length_km,
        delta=solution.delta, qber=breakdown.qber, i_e=breakdown.i_e,
        r_sec_per_pulse=breakdown.per_pulse, r_sec_hz=breakdown.r_sec,
        flags=tuple(flags),
    )


def sweep_mu_t(length_km: float, grid: GridSpec, detector: DetectorConfig,
               protocol: Protocol = Protocol.B92_SR,
               pulse_rate_hz: float = DEFAULT_PULSE_RATE_HZ) -> list[SweepRow]:
    """Rate grid over (mu, t) at fixed distance; row order is mu-major."""
    rows = []
    for mu in grid.mu_values():
        for t_db in grid.t_values():
            setup = SetupConfig(protocol=protocol, mu=float(mu), t_db=float(t_db),
                                length_km=length_km, pulse_rate_hz=pulse_rate_hz)
            rows.append(evaluate_sr_point(setup, detector))
    return rows


def grey_region_mu_floor(length_km: float, t_db: float,
                         detector: DetectorConfig) -> float:
    """Smallest mu with acceptable monitoring (delta <= 0.5) at this (t, L)."""
    probe = SetupConfig(protocol=Protocol.B92_SR, mu=1.0, t_db=t_db,
                        length_km=length_km, pulse_rate_hz=1.0)
    return _delta_at_unit_mu(probe, detector) / GREY_REGION_DELTA


def _sr_rate_at(mu: float, length_km: float, t_db: float, detector: DetectorConfig,
                protocol: Protocol, pulse_rate_hz: float) -> float:
    setup = SetupConfig(protocol=protocol, mu=mu, t_db=t_db,
                        length_km=length_km, pulse_rate_hz=pulse_rate_hz)
    i_e = maximize_eve_information(setup, detector).best.i_e
    return sr_secret_rate(setup, detector, i_e=i_e).r_sec


def optimize_mu(length_km: float, t_db: float, detector: DetectorConfig,
                protocol: Protocol = Protocol.B92_SR,
                pulse_rate_hz: float = DEFAULT_PULSE_RATE_HZ,
                mu_range: tuple[float, float, int, str] = GridSpec().mu_range,
                mu_floor: Optional[float] = None) -> MuOptimum:
    """Maximize r_sec over mu at fixed (t, L): coarse log grid, then golden search.

    mu_floor restricts the search from below (used to stay out of the
    grey-monitoring region); a floor above the whole range, or an all-zero
    rate, is reported with found=False and an undefined mu_opt.
    """
    lo, hi, points, scale = mu_range
    if mu_floor is not None:
        lo = max(lo, mu_floor)
    if lo > hi:
        return MuOptimum(length_km=length_km, t_db=t_db, mu_opt=math.nan,
                         r_sec_hz=0.0, per_pulse=0.0, found=False)

    def objective(mu: float) -> float:
        return _sr_rate_at(mu, length_km, t_db, detector, protocol, pulse_rate_hz)

    mu_best, r_best = grid_then_golden_max(
        lambda xs: np.array([objective(float(x)) for x in xs]),
        objective, lo, hi, points, log_spaced=(scale == "log"),
    )
    if r_best <= 0.0:
        return MuOptimum(length_km=length_km, t_db=t_db, mu_opt=math.nan,
                         r_sec_hz=0.0, per_pulse=0.0, found=False)
    return MuOptimum(length_km=length_km, t_db=t_db, mu_opt=mu_best,
                     r_sec_hz=r_best, per_pulse=r_best / pulse_rate_hz, found=True)


def rate_vs_t(length_km: float, mu: float, t_grid: Sequence[float],
              detector: DetectorConfig, protocol: Protocol = Protocol.B92_SR,
              pulse_rate_hz: float = DEFAULT_PULSE_RATE_HZ) -> TSaturation:
    """Rate versus SRP attenuation at fixed mu.

    Reports the saturation onset (smallest t whose rate is within 1% of the
    rate at the top of the grid) and the positive-rate onset with its
    reference-pulse intensity nu = mu*10^(t/10). Both onsets are computed
    over rows with acceptable monitoring only: in the grey region the rate
    formula can stay positive (the attack degenerates to beam splitting),
    but the monitor cannot vouch for the reference pulse there, so those
    rows are returned flagged and skipped for the scalar summaries.
    """
    rows = []
    for t_db in np.asarray(t_grid, dtype=float):
        setup = SetupConfig(protocol=protocol, mu=mu, t_db=float(t_db),
                            length_km=length_km, pulse_rate_hz=pulse_rate_hz)
        rows.append(evaluate_sr_point(setup, detector))

    rates = np.array([row.r_sec_hz for row in rows])
    t_vals = np.array([row.t_db for row in rows])
    ok = np.nonzero([FLAG_GREY not in row.flags for row in rows])[0]
    t_sat = onset_t = onset_nu = None
    if ok.size and rates[ok[-1]] > 0.0:
        k = int(ok[np.argmax(rates[ok] >= 0.99 * rates[ok[-1]])])
        t_sat = float(t_vals[k])
    positive = ok[rates[ok] > 0.0] if ok.size else ok
    if positive.size:
        onset_t = float(t_vals[positive[0]])
        onset_nu = mu * 10.0 ** (onset_t / 10.0)
    return TSaturation(rows=rows, t_sat_db=t_sat, onset_t_db=onset_t, onset_nu=onset_nu)


def _bb84_optimize_mu(protocol: Protocol, length_km: float, detector: DetectorConfig,
                      pulse_rate_hz: float,
                      mu_range: tuple[float, float, int, str]) -> tuple[float, float]:
    def objective(mu: float) -> float:
        setup = SetupConfig(protocol=protocol, mu=mu, t_db=0.0,
                            length_km=length_km, pulse_rate_hz=pulse_rate_hz)
        decoy = DecoyConfig.from_signal(mu) if protocol is Protocol.BB84_DECOY else None
        return bb84_secret_rate(setup, detector, decoy=decoy).r_sec

    lo, hi, points, scale = mu_range
    return grid_then_golden_max(
        lambda xs: np.array([objective(float(x)) for x in xs]),
        objective, lo, hi, points, log_spaced=(scale == "log"),
    )


def rate_vs_distance(protocols: Sequence[Protocol], detector: DetectorConfig,
                     l_grid: Sequence[float], t_db: float = DEFAULT_T_DB,
                     pulse_rate_hz: float = DEFAULT_PULSE_RATE_HZ,
                     mu_range: tuple[float, float, int, str] = GridSpec().mu_range,
                     ) -> DistanceComparison:
    """Per-protocol rate curves vs distance, mu optimized at every point.

    SR protocols run at the given SRP attenuation; BB84 baselines have no
    reference pulse. The crossover is where the B92-SR and decoy-BB84 curves
    intersect, interpolated linearly in log-rate between grid points.
    """
    protocols = [Protocol(p) for p in protocols]
    rows = []
    by_protocol: dict[Protocol, list[float]] = {p: [] for p in protocols}
    for length_km in np.asarray(l_grid, dtype=float):
        for protocol in protocols:
            if protocol.uses_reference_pulse:
                opt = optimize_mu(float(length_km), t_db, detector, protocol=protocol,
                                  pulse_rate_hz=pulse_rate_hz, mu_range=mu_range)
                mu_opt, rate = opt.mu_opt, opt.r_sec_hz
            else:
                mu_opt, rate = _bb84_optimize_mu(protocol, float(length_km), detector,
                                                 pulse_rate_hz, mu_range)
                if rate <= 0.0:
                    mu_opt = math.nan
            rows.append(DistancePoint(protocol=protocol.value, length_km=float(length_km),
                                      mu=mu_opt, r_sec_hz=max(rate, 0.0),
                                      per_pulse=max(rate, 0.0) / pulse_rate_hz))
            by_protocol[protocol].append(max(rate, 0.0))

    crossover = None
    if Protocol.B92_SR in by_protocol and Protocol.BB84_DECOY in by_protocol:
        crossover = crossover_distance(np.asarray(l_grid, dtype=float),
                                       by_protocol[Protocol.B92_SR],
                                       by_protocol[Protocol.BB84_DECOY])
    return DistanceComparison(rows=rows, crossover_km=crossover)


def crossover_distance(lengths: Sequence[float], rates_a: Sequence[float],
                       rates_b: Sequence[float]) -> Optional[float]:
    """First distance where two positive rate curves cross, log-interpolated.

    Swapping the curves flips the sign of the gap but returns the same
    distance. None when the curves never cross where both are positive.
    """
    lengths = np.asarray(lengths, dtype=float)
    ra = np.asarray(rates_a, dtype=float)
    rb = np.asarray(rates_b, dtype=float)
    valid = (ra > 0.0) & (rb > 0.0)
    gap = np.where(valid, np.log(np.where(valid, ra, 1.0)) - np.log(np.where(valid, rb, 1.0)),
                   np.nan)
    for i in range(len(lengths) - 1):
        if not (valid[i] and valid[i + 1]):
            continue
        if gap[i] == 0.0:
            return float(lengths[i])
        if gap[i] * gap[i + 1] < 0.0:
            frac = gap[i] / (gap[i] - gap[i + 1])
            return float(lengths[i] + frac * (lengths[i + 1] - lengths[i]))
    if valid[-1] and gap[-1] == 0.0:
        return float(lengths[-1])
    return None


def min_srp_photons(length_km: float, detector: DetectorConfig,
                    t_grid: Optional[Sequence[float]] = None,
                    mu_policy: str = "optimized-per-t",
                    fixed_mu: Optional[float] = None,
                    criterion: str = "positive-rate",
                    protocol: Protocol = Protocol.B92_SR,
                    pulse_rate_hz: float = DEFAULT_PULSE_RATE_HZ,
                    mu_range: tuple[float, float, int, str] = GridSpec().mu_range,
                    ) -> MinSrpResult:
    """Smallest usable reference-pulse intensity nu = mu*10^(t/10).

    Scans the attenuation grid, keeping only points with acceptable
    monitoring (delta <= 0.5): with delta beyond that bound the SRP monitor
    cannot vouch for the reference pulse at all, so such operating points
    do not count as secure even if the rate formula stays positive.

    criterion "positive-rate" returns the smallest nu with r_sec > 0;
    "0.99-of-max" the smallest nu whose rate is within 1% of the scan
    maximum (the intensity needed to stop paying rate for dimming the SRP).
    """
    if mu_policy not in ("optimized-per-t", "fixed"):
        raise ValueError(f"unknown mu_policy {mu_policy!r}")
    if criterion not in ("positive-rate", "0.99-of-max"):
        raise ValueError(f"unknown criterion {criterion!r}")
    if (mu_policy == "fixed") != (fixed_mu is not None):
        raise ValueError("fixed_mu is required for the fixed policy and only then")
    if t_grid is None:
        t_grid = GridSpec().t_values()

    candidates = []  # (nu, mu, t_db, r_sec)
    for t_db in np.asarray(t_grid, dtype=float):
        floor = grey_region_mu_floor(length_km, float(t_db), detector)
        if mu_policy == "fixed":
            if fixed_mu < floor:
                continue
            rate = _sr_rate_at(fixed_mu, length_km, float(t_db), detector,
                               protocol, pulse_rate_hz)
            mu_at = fixed_mu
        else:
            opt = optimize_mu(length_km, float(t_db), detector, protocol=protocol,
                              pulse_rate_hz=pulse_rate_hz, mu_range=mu_range,
                              mu_floor=floor)
            if not opt.found:
                continue
            rate, mu_at = opt.r_sec_hz, opt.mu_opt
        if rate > 0.0:
            candidates.append((mu_at * 10.0 ** (float(t_db) / 10.0),
                               mu_at, float(t_db), rate))

    if not candidates:
        raise RuntimeError("no positive secret rate anywhere in the scan")
    if criterion == "0.99-of-max":
        r_max = max(c[3] for c in candidates)
        candidates = [c for c in candidates if c[3] >= 0.99 * r_max]
    nu, mu_at, t_at, rate = min(candidates, key=lambda c: c[0])
    return MinSrpResult(nu_threshold=nu, mu_at=mu_at, t_db_at=t_at,
                        r_sec_hz=rate, criterion=criterion)


def train_capacity(storage_km: float, pulse_rate_hz: float,
                   n_fib: float = DEFAULT_FIBER_INDEX) -> int:
    """Pulses that fit in a fiber storage line: floor(l*n_fib*f/c)."""
    if storage_km < 0:
        raise ValueError(f"storage_km must be >= 0, got {storage_km}")
    if pulse_rate_hz <= 0 or n_fib <= 0:
        raise ValueError("pulse_rate_hz and n_fib must be > 0")
    return math.floor(storage_km * 1e3 * n_fib * pulse_rate_hz / constants.c)
