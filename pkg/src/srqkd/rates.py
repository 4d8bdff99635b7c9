"""Secret-key rates for the SR protocols and the BB84 baselines.

The strong-reference protocols use R_sec = R_raw*(I_AB - I_E) with the
eavesdropper information supplied by the soft-filtering maximization. The
BB84 baselines use the GLLP rate

    R = (1/2)*f*{Q1*[1 - H(E1)] - Q_mu*f_ec*H(E_mu)},

with (Q1, E1) replaced by a lower/upper bound pair: the photon-number-
splitting bound for standard BB84, or two-decoy experimental bounds for
the decoy variant (times the signal emission probability p_mu). All rates
are clamped at zero; the unclamped value is kept for diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .attack import maximize_eve_information
from .physics import (
    DetectorConfig,
    Protocol,
    SetupConfig,
    binary_entropy,
    derive_channel,
    transmittance,
)

_TOL = 1e-9


@dataclass(frozen=True)
class RateBreakdown:
    """Secret-rate decomposition R_sec = R_raw*(i_ab - i_e), clamped at 0.

    r_raw and r_sec are absolute rates in Hz; per_pulse is r_sec divided by
    the pulse repetition frequency. For the BB84 baselines i_e is the
    fraction of each sifted bit conceded to the eavesdropper under the
    bounds in use, defined so that the decomposition identity still holds.
    """

    r_raw: float
    qber: float
    i_ab: float
    i_e: float
    r_sec: float
    per_pulse: float
    r_sec_unclamped: float

    def __post_init__(self):
        if self.r_sec < 0.0:
            raise ValueError("r_sec must be clamped at 0")
        if self.r_sec > self.r_raw * (1.0 + _TOL) + _TOL:
            raise ValueError("r_sec cannot exceed r_raw")
        if (self.r_sec == 0.0) != (self.i_ab <= self.i_e or self.r_raw == 0.0):
            raise ValueError("r_sec must vanish exactly when i_ab <= i_e")


@dataclass(frozen=True)
class DecoyConfig:
    """Two-decoy configuration: signal, weak decoy and vacuum-like decoy."""

    mu_sig: float
    nu1: float
    nu2: float
    p_mu: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.nu2 < self.nu1 < self.mu_sig:
            raise ValueError("intensities must satisfy 0 <= nu2 < nu1 < mu_sig")
        if self.nu1 + self.nu2 >= self.mu_sig:
            raise ValueError("need nu1 + nu2 < mu_sig")
        if not 0.0 < self.p_mu <= 1.0:
            raise ValueError(f"p_mu must be in (0, 1], got {self.p_mu}")

    @classmethod
    def from_signal(cls, mu_sig: float, nu1_ratio: float = 0.25,
                    nu2_ratio: float = 0.01, p_mu: float = 0.5) -> "DecoyConfig":
        """Scale decoy intensities off the signal; defaults give nu2:nu1:mu = 1:25:100."""
        return cls(mu_sig=mu_sig, nu1=nu1_ratio * mu_sig, nu2=nu2_ratio * mu_sig, p_mu=p_mu)


@dataclass(frozen=True)
class Bb84Yields:
    """Gains/errors entering the GLLP formula, already clamped to range."""

    q_mu: float
    e_mu: float
    y0: float
    q1_lower: float
    e1_upper: float

    def __post_init__(self):
        if not 0.0 <= self.q1_lower <= self.q_mu * (1.0 + _TOL):
            raise ValueError("need 0 <= q1_lower <= q_mu")
        if not 0.0 <= self.e1_upper <= 0.5:
            raise ValueError("e1_upper must lie in [0, 0.5] after clamping")
        if self.y0 < 0.0:
            raise ValueError("y0 must be >= 0")


def _breakdown(r_raw: float, qber: float, i_ab: float, i_e: float,
               pulse_rate_hz: float) -> RateBreakdown:
    unclamped = r_raw * (i_ab - i_e)
    r_sec = max(unclamped, 0.0)
    return RateBreakdown(
        r_raw=r_raw, qber=qber, i_ab=i_ab, i_e=i_e,
        r_sec=r_sec, per_pulse=r_sec / pulse_rate_hz, r_sec_unclamped=unclamped,
    )


def sr_secret_rate(setup: SetupConfig, detector: DetectorConfig,
                   i_e: Optional[float] = None) -> RateBreakdown:
    """Secret rate of a strong-reference protocol under the soft-filtering attack.

    i_e overrides the optimized eavesdropper information when given; sweeps
    use this to avoid re-running the maximization, and property tests use
    it to probe the no-attack (i_e=0) and fully-compromised (i_e=1) limits.
    """
    if not setup.protocol.uses_reference_pulse:
        raise ValueError(f"sr_secret_rate needs an SR protocol, got {setup.protocol.value}")
    channel = derive_channel(setup, detector)
    if i_e is None:
        i_e = maximize_eve_information(setup, detector).best.i_e
    conclusive = -math.expm1(-2.0 * detector.eta * channel.mu_prime)
    r_raw = setup.protocol.sifting_factor * setup.pulse_rate_hz * conclusive
    i_ab = 1.0 - detector.f_ec * binary_entropy(channel.qber)
    return _breakdown(r_raw, channel.qber, i_ab, i_e, setup.pulse_rate_hz)


def bb84_gain_error(intensity: float, detector: DetectorConfig,
                    length_km: float) -> tuple[float, float]:
    """No-eavesdropping model (Q, E) for one BB84 intensity.

    Q = Y0 + 1 - exp(-eta*mu*T), E = (Y0/2 + p_opt*(1 - exp(-eta*mu*T)))/Q
    with Y0 = 2*p_dc. A vacuum pulse clicks only through dark counts and
    carries a random bit, hence E = 1/2.
    """
    if intensity < 0:
        raise ValueError(f"intensity must be >= 0, got {intensity}")
    y0 = 2.0 * detector.p_dc
    detected = -math.expm1(-detector.eta * intensity * transmittance(length_km))
    q = y0 + detected
    if q <= 0.0:
        return 0.0, 0.5
    e = (0.5 * y0 + detector.p_opt * detected) / q
    return q, e


def bb84_pns_bounds(setup: SetupConfig, detector: DetectorConfig) -> Bb84Yields:
    """Single-photon bounds for standard BB84 under photon-number splitting.

    Eve blocks single-photon pulses and forwards one photon less from every
    multi-photon pulse over a lossless line, so the surviving photons see
    only the detector efficiency eta:

        Q1 >= Q_mu - 1 + (exp(-eta*mu) - eta*exp(-mu))/(1 - eta).

    A non-positive bound (long distance) floors at 0 and kills the rate.
    """
    if not 0.0 < detector.eta < 1.0:
        raise ValueError("photon-number-splitting bound requires 0 < eta < 1")
    mu, eta = setup.mu, detector.eta
    q_mu, e_mu = bb84_gain_error(mu, detector, setup.length_km)
    q1 = q_mu - 1.0 + (math.exp(-eta * mu) - eta * math.exp(-mu)) / (1.0 - eta)
    q1 = min(max(q1, 0.0), q_mu)
    e1 = min(q_mu * e_mu / q1, 0.5) if q1 > 0.0 else 0.5
    return Bb84Yields(q_mu=q_mu, e_mu=e_mu, y0=2.0 * detector.p_dc,
                      q1_lower=q1, e1_upper=e1)


def decoy_bounds(decoy: DecoyConfig, detector: DetectorConfig,
                 length_km: float) -> Bb84Yields:
    """Two-decoy experimental bounds on (Y0, Q1, E1).

    The observable gains/errors at the three intensities come from the
    no-eavesdropping model; the bounds are the standard weak+vacuum decoy
    estimates built from them.
    """
    mu, nu1, nu2 = decoy.mu_sig, decoy.nu1, decoy.nu2
    q_mu, e_mu = bb84_gain_error(mu, detector, length_km)
    q_n1, e_n1 = bb84_gain_error(nu1, detector, length_km)
    q_n2, e_n2 = bb84_gain_error(nu2, detector, length_km)

    y0 = max((nu1 * q_n2 * math.exp(nu2) - nu2 * q_n1 * math.exp(nu1)) / (nu1 - nu2), 0.0)
    q1 = (mu ** 2 * math.exp(-mu) / ((nu1 - nu2) * (mu - nu1 - nu2))) * (
        q_n1 * math.exp(nu1) - q_n2 * math.exp(nu2)
        - (nu1 ** 2 - nu2 ** 2) / mu ** 2 * (q_mu * math.exp(mu) - y0)
    )
    q1 = min(max(q1, 0.0), q_mu)
    if q1 > 0.0:
        e1 = ((e_n1 * q_n1 * math.exp(nu1) - e_n2 * q_n2 * math.exp(nu2))
              * mu * math.exp(-mu) / ((nu1 - nu2) * q1))
        e1 = min(max(e1, 0.0), 0.5)
    else:
        e1 = 0.5
    return Bb84Yields(q_mu=q_mu, e_mu=e_mu, y0=y0, q1_lower=q1, e1_upper=e1)


def bb84_secret_rate(setup: SetupConfig, detector: DetectorConfig,
                     decoy: Optional[DecoyConfig] = None) -> RateBreakdown:
    """GLLP secret rate for a BB84 baseline (standard or decoy-state).

    The decomposition fields are defined so r_sec = r_raw*(i_ab - i_e)
    holds exactly: r_raw = (1/2)*f*p_mu*Q_mu (p_mu = 1 for standard BB84),
    i_ab = 1 - f_ec*H(E_mu), and i_e = 1 - (Q1/Q_mu)*(1 - H(E1)) is the
    sifted-bit fraction conceded under the single-photon bounds.
    """
    if setup.protocol is Protocol.BB84_STANDARD:
        yields = bb84_pns_bounds(setup, detector)
        p_mu = 1.0
    elif setup.protocol is Protocol.BB84_DECOY:
        if decoy is None:
            decoy = DecoyConfig.from_signal(setup.mu)
        if decoy.mu_sig != setup.mu:
            raise ValueError("decoy.mu_sig must match setup.mu")
        yields = decoy_bounds(decoy, detector, setup.length_km)
        p_mu = decoy.p_mu
    else:
        raise ValueError(f"bb84_secret_rate needs a BB84 baseline, got {setup.protocol.value}")

    r_raw = 0.5 * setup.pulse_rate_hz * p_mu * yields.q_mu
    i_ab = 1.0 - detector.f_ec * binary_entropy(yields.e_mu)
    if yields.q_mu > 0.0:
        i_e = 1.0 - yields.q1_lower / yields.q_mu * (1.0 - binary_entropy(yields.e1_upper))
    else:
        i_e = 1.0
    return _breakdown(r_raw, yields.e_mu, i_ab, i_e, setup.pulse_rate_hz)


def secret_rate(setup: SetupConfig, detector: DetectorConfig,
                decoy: Optional[DecoyConfig] = None,
                i_e: Optional[float] = None) -> RateBreakdown:
    """Dispatch to the SR or BB84 rate according to setup.protocol."""
    if setup.protocol.uses_reference_pulse:
        return sr_secret_rate(setup, detector, i_e=i_e)
    return bb84_secret_rate(setup, detector, decoy=decoy)
