"""Soft-filtering eavesdropper model and its information maximization.

Eve applies a probabilistic filtering unitary to each intercepted pulse:
with probability p the signal states become more distinguishable (intensity
amplified by a > 1), otherwise less (attenuated by b < 1). She then forwards
enough light to Bob over a lossless channel to keep his strong-pulse
monitor and his conclusive-click rate unchanged, and keeps the rest. The
operation interpolates between plain beam splitting (b -> 1) and
unambiguous state discrimination (b -> 0).

Two constraints pin p and a once b is chosen: unitarity of the filtering,

    p*exp(-2*a*mu) + (1-p)*exp(-2*b*mu) = exp(-2*mu),

and preservation of Bob's conclusive rate,

    p*(1-exp(-2*eta*bs)) + (1-p)*(1-exp(-2*eta*bf)) = 1-exp(-2*eta*mu'),

with the forwarded intensities bs/bf pinned to the edges mu'*(1 +/- delta)
of Bob's monitoring window. Eve's extractable information per conclusive
bit is the click-weighted Holevo quantity of her retained states, maximized
over the single free parameter b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .optimize import golden_max
from .physics import (
    DetectorConfig,
    SetupConfig,
    derive_channel,
    holevo_chi,
    monitor_precision_delta,
    monitoring_unacceptable,
)

# Holevo arguments this far below zero are treated as rounding at an exact
# feasibility boundary; anything more negative means an infeasible b.
_EPS_CLAMP = 1e-12

DEFAULT_B_GRID_POINTS = 2000


@dataclass(frozen=True)
class AttackPoint:
    """One soft-filtering configuration and the information it yields.

    beta_*_sq are the intensities forwarded to Bob on success/fail,
    eps_*_sq the intensities Eve retains. In the nonphysical grey-monitoring
    regime (delta >= 1) beta_f_sq goes negative; such points are only ever
    produced flagged as unacceptable.
    """

    b: float
    p: float
    a: float
    beta_s_sq: float
    beta_f_sq: float
    eps_s_sq: float
    eps_f_sq: float
    i_e: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must be in (0, 1), got {self.p}")
        if self.b > 1.0 + 1e-12 or self.b < 0.0:
            raise ValueError(f"b must be in [0, 1], got {self.b}")
        if self.a < 1.0 - 1e-12:
            raise ValueError(f"a must be >= 1, got {self.a}")
        if min(self.eps_s_sq, self.eps_f_sq) < -_EPS_CLAMP:
            raise ValueError("Eve's retained intensities must be non-negative")


@dataclass(frozen=True)
class AttackSolution:
    """Result of maximizing Eve's information over the attenuation b."""

    best: AttackPoint
    b_min: float
    b_max: float
    delta: float
    interval_empty: bool = False
    monitoring_unacceptable: bool = False
    scan_trace: Optional[list[tuple[float, float]]] = None


def success_probability(eta: float, mu_prime: float, delta: float) -> float:
    """Filtering success probability p = 1/(1 + exp(-2*eta*mu'*delta))."""
    if min(eta, mu_prime, delta) < 0:
        raise ValueError("arguments must be >= 0")
    return 1.0 / (1.0 + math.exp(-2.0 * eta * mu_prime * delta))


def amplification(b: float, mu: float, eta: float, mu_prime: float, delta: float) -> float:
    """Amplification coefficient a solving the unitarity constraint for given b."""
    log_arg = 1.0 - math.exp(-2.0 * eta * mu_prime * delta) * math.expm1(2.0 * mu * (1.0 - b))
    if log_arg <= 0.0:
        raise ValueError(f"b={b} infeasible: unitarity has no solution with a >= 1")
    return 1.0 - math.log(log_arg) / (2.0 * mu)


def unitarity_residual(p: float, a: float, b: float, mu: float) -> float:
    """|p*exp(-2*a*mu) + (1-p)*exp(-2*b*mu) - exp(-2*mu)|."""
    return abs(p * math.exp(-2.0 * a * mu) + (1.0 - p) * math.exp(-2.0 * b * mu)
               - math.exp(-2.0 * mu))


def rate_residual(p: float, beta_s_sq: float, beta_f_sq: float,
                  eta: float, mu_prime: float) -> float:
    """Deviation of Bob's conclusive-click rate under attack from the expected one."""
    under_attack = (p * -math.expm1(-2.0 * eta * beta_s_sq)
                    + (1.0 - p) * -math.expm1(-2.0 * eta * beta_f_sq))
    return abs(under_attack - -math.expm1(-2.0 * eta * mu_prime))


def b_interval(setup: SetupConfig, detector: DetectorConfig,
               delta: Optional[float] = None) -> tuple[float, float]:
    """Feasible attenuation interval (b_min, b_max).

    The lower bound combines solvability of the unitarity constraint with
    Eve's fail-branch forwarding limit beta_f^2 < b*mu (and b >= 0, which
    the closed forms can violate once delta > 1). The upper bound enforces
    beta_s^2 < a*mu and b <= 1; for mu > mu'*(1+delta) the closed form
    exceeds 1 and the unitarity limit b_max = 1 applies. An empty interval
    (b_min >= b_max) means the attack degenerates to beam splitting.
    """
    if delta is None:
        delta = monitor_precision_delta(setup, detector)
    channel = derive_channel(setup, detector)
    mu, mu_prime, eta = setup.mu, channel.mu_prime, detector.eta

    x = 2.0 * eta * mu_prime * delta
    b_lo = max(
        1.0 - math.log1p(math.exp(x)) / (2.0 * mu),
        (1.0 - delta) * channel.transmittance,
        0.0,
    )
    log_arg = 1.0 - math.exp(x) * math.expm1(2.0 * (mu - mu_prime * (1.0 + delta)))
    if log_arg <= 0.0:
        b_hi = 1.0
    else:
        b_hi = min(1.0 - math.log(log_arg) / (2.0 * mu), 1.0)
    return b_lo, b_hi


def _information_curve(b, mu: float, eta: float, mu_prime: float, delta: float) -> np.ndarray:
    """Eve's information at each b; -inf marks infeasible points."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    q = math.exp(-2.0 * eta * mu_prime * delta)
    p = 1.0 / (1.0 + q)

    log_arg = 1.0 - q * np.expm1(2.0 * mu * (1.0 - b))
    valid = log_arg > 0.0
    a = np.where(valid, 1.0 - np.log(np.where(valid, log_arg, 1.0)) / (2.0 * mu), np.nan)

    mu_max = mu_prime * (1.0 + delta)
    mu_min = mu_prime * (1.0 - delta)
    eps_s = a * mu - mu_max
    eps_f = b * mu - mu_min
    valid &= (eps_s >= -_EPS_CLAMP) & (eps_f >= -_EPS_CLAMP)
    eps_s = np.clip(eps_s, 0.0, None)
    eps_f = np.clip(eps_f, 0.0, None)

    conclusive = -math.expm1(-2.0 * eta * mu_prime)
    if conclusive <= 0.0:
        return np.where(valid, 0.0, -np.inf)

    w_s = -np.expm1(-2.0 * eta * mu_max)
    w_f = -np.expm1(-2.0 * eta * mu_min)  # negative once delta > 1 (flagged regime)
    info = (p * w_s * holevo_chi(np.where(valid, eps_s, 0.0))
            + (1.0 - p) * w_f * holevo_chi(np.where(valid, eps_f, 0.0))) / conclusive
    info = np.clip(info, 0.0, 1.0)
    return np.where(valid, info, -np.inf)


def eve_information(b: float, setup: SetupConfig, detector: DetectorConfig,
                    delta: Optional[float] = None) -> float:
    """Eve's information per conclusive bit at attenuation b, in bits."""
    if delta is None:
        delta = monitor_precision_delta(setup, detector)
    channel = derive_channel(setup, detector)
    b_lo, b_hi = b_interval(setup, detector, delta)
    if not b_lo - 1e-12 <= b <= b_hi + 1e-12:
        raise ValueError(f"b={b} outside feasible interval [{b_lo}, {b_hi}]")
    value = float(_information_curve(b, setup.mu, detector.eta, channel.mu_prime, delta)[0])
    if not math.isfinite(value):
        raise ValueError(f"b={b} infeasible: unitarity has no solution with a >= 1")
    return value


def beam_splitting_information(mu: float, mu_prime: float) -> float:
    """Information from plain beam splitting: the Holevo quantity of the tapped light."""
    return float(holevo_chi(max(mu - mu_prime, 0.0)))


def attack_point(b: float, setup: SetupConfig, detector: DetectorConfig,
                 delta: Optional[float] = None) -> AttackPoint:
    """Assemble the full parameter set (p, a, intensities, information) at b."""
    if delta is None:
        delta = monitor_precision_delta(setup, detector)
    channel = derive_channel(setup, detector)
    mu, eta, mu_prime = setup.mu, detector.eta, channel.mu_prime
    p = success_probability(eta, mu_prime, delta)
    a = amplification(b, mu, eta, mu_prime, delta)
    beta_s_sq = mu_prime * (1.0 + delta)
    beta_f_sq = mu_prime * (1.0 - delta)
    return AttackPoint(
        b=b, p=p, a=a,
        beta_s_sq=beta_s_sq, beta_f_sq=beta_f_sq,
        eps_s_sq=a * mu - beta_s_sq, eps_f_sq=b * mu - beta_f_sq,
        i_e=eve_information(b, setup, detector, delta),
    )


def _beam_splitting_point(setup: SetupConfig, detector: DetectorConfig,
                          delta: float, mu_prime: float) -> AttackPoint:
    # b = a = 1: no filtering; Eve taps mu - mu' from every pulse.
    p = success_probability(detector.eta, mu_prime, delta)
    i_e = beam_splitting_information(setup.mu, mu_prime)
    return AttackPoint(
        b=1.0, p=p, a=1.0,
        beta_s_sq=mu_prime, beta_f_sq=mu_prime,
        eps_s_sq=setup.mu - mu_prime, eps_f_sq=setup.mu - mu_prime,
        i_e=i_e,
    )


def maximize_eve_information(setup: SetupConfig, detector: DetectorConfig,
                             b_points: int = DEFAULT_B_GRID_POINTS,
                             keep_trace: bool = False) -> AttackSolution:
    """Maximize Eve's information over the feasible attenuation interval.

    A dense grid locates the best cell (the objective is not proven
    unimodal), golden-section search refines it, and interval endpoints are
    always evaluated exactly so endpoint optima are returned untouched.
    The result is deterministic for a given grid size.
    """
    delta = monitor_precision_delta(setup, detector)
    channel = derive_channel(setup, detector)
    mu, eta, mu_prime = setup.mu, detector.eta, channel.mu_prime
    grey = monitoring_unacceptable(delta)

    b_lo, b_hi = b_interval(setup, detector, delta)
    if b_lo >= b_hi:
        return AttackSolution(
            best=_beam_splitting_point(setup, detector, delta, mu_prime),
            b_min=b_lo, b_max=b_hi, delta=delta,
            interval_empty=True, monitoring_unacceptable=grey,
        )

    grid = np.linspace(b_lo, b_hi, max(b_points, 2))
    values = _information_curve(grid, mu, eta, mu_prime, delta)
    trace = None
    if keep_trace:
        trace = [(float(b), float(v) if math.isfinite(v) else math.nan)
                 for b, v in zip(grid, values)]

    if not np.any(np.isfinite(values)):
        return AttackSolution(
            best=_beam_splitting_point(setup, detector, delta, mu_prime),
            b_min=b_lo, b_max=b_hi, delta=delta,
            interval_empty=True, monitoring_unacceptable=grey, scan_trace=trace,
        )

    def objective(b: float) -> float:
        return float(_information_curve(b, mu, eta, mu_prime, delta)[0])

    k = int(np.nanargmax(np.where(np.isfinite(values), values, -np.inf)))
    bracket = (float(grid[max(k - 1, 0)]), float(grid[min(k + 1, len(grid) - 1)]))
    b_ref, v_ref = golden_max(objective, *bracket, tol=1e-10)

    candidates = [(float(grid[k]), float(values[k])), (b_ref, v_ref)]
    for edge in (float(grid[0]), float(grid[-1])):
        candidates.append((edge, float(_information_curve(edge, mu, eta, mu_prime, delta)[0])))
    b_best, i_best = max(candidates, key=lambda pair: pair[1]
                         if math.isfinite(pair[1]) else -math.inf)

    p = success_probability(eta, mu_prime, delta)
    a = amplification(b_best, mu, eta, mu_prime, delta)
    beta_s_sq = mu_prime * (1.0 + delta)
    beta_f_sq = mu_prime * (1.0 - delta)
    best = AttackPoint(
        b=b_best, p=p, a=a,
        beta_s_sq=beta_s_sq, beta_f_sq=beta_f_sq,
        eps_s_sq=a * mu - beta_s_sq, eps_f_sq=b_best * mu - beta_f_sq,
        i_e=min(max(i_best, 0.0), 1.0),
    )
    return AttackSolution(
        best=best, b_min=b_lo, b_max=b_hi, delta=delta,
        interval_empty=False, monitoring_unacceptable=grey, scan_trace=trace,
    )
