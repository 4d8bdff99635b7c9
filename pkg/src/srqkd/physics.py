"""Physical parameters and elementary channel/information functions.

Everything downstream (attack optimization, key rates, sweeps) consumes the
functions defined here: fiber transmittance, received intensities, the
relative precision of strong-reference-pulse (SRP) monitoring, the QBER
model, Shannon binary entropy and the Holevo quantity for binary coherent
ensembles.

All functions are pure and accept scalars or numpy arrays where it makes
sense; none of them mutates shared state, so unrestricted concurrent use is
safe.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import constants, special

# Fiber attenuation assumed for telecom wavelengths; overridable per setup.
FIBER_LOSS_DB_PER_KM = 0.2

# SRP monitoring counts as unusable once its relative precision is worse
# than 50% (the "grey region" rule in contour scans).
GREY_REGION_DELTA = 0.5


class Protocol(str, Enum):
    """Protocol selector for rate calculations."""

    B92_SR = "b92-sr"
    BB84_SR = "bb84-sr"
    BB84_STANDARD = "bb84-standard"
    BB84_DECOY = "bb84-decoy"

    @property
    def uses_reference_pulse(self) -> bool:
        return self in (Protocol.B92_SR, Protocol.BB84_SR)

    @property
    def sifting_factor(self) -> float:
        """Conclusive-bit retention factor: 1 for B92, 1/2 for the 4+2 scheme."""
        if self is Protocol.B92_SR:
            return 1.0
        if self is Protocol.BB84_SR:
            return 0.5
        raise ValueError(f"no sifting factor for non-SR protocol {self.value}")


@dataclass(frozen=True)
class SetupConfig:
    """Transmitter-side protocol configuration.

    mu is the mean photon number of the signal pulse (SP), t_db the relative
    attenuation between SP and SRP in dB, so the SRP intensity is
    nu = mu * 10**(t_db/10).
    """

    protocol: Protocol
    mu: float
    t_db: float
    length_km: float
    pulse_rate_hz: float
    fiber_loss_db_km: float = FIBER_LOSS_DB_PER_KM

    def __post_init__(self):
        if isinstance(self.protocol, str):
            object.__setattr__(self, "protocol", Protocol(self.protocol))
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if self.t_db < 0:
            raise ValueError(f"t_db must be >= 0, got {self.t_db}")
        if self.length_km < 0:
            raise ValueError(f"length_km must be >= 0, got {self.length_km}")
        if not self.pulse_rate_hz > 0:
            raise ValueError(f"pulse_rate_hz must be > 0, got {self.pulse_rate_hz}")
        if self.fiber_loss_db_km < 0:
            raise ValueError(f"fiber_loss_db_km must be >= 0, got {self.fiber_loss_db_km}")

    @property
    def nu(self) -> float:
        """SRP mean photon number at the transmitter (>= mu since t_db >= 0)."""
        return self.mu * 10.0 ** (self.t_db / 10.0)


@dataclass(frozen=True)
class DetectorConfig:
    """Receiver-side detector and post-processing parameters.

    eta      single-photon detector efficiency
    p_dc     dark-count probability per detector per gate
    p_opt    optical (wrong-detector) error probability
    nep      noise-equivalent power of the SRP monitoring photodiode, W/sqrt(Hz)
    tau_s    pulse width in seconds
    lambda_m wavelength in meters
    f_ec     error-correction inefficiency (>= 1)
    """

    eta: float = 0.2
    p_dc: float = 2e-5
    p_opt: float = 0.02
    nep: float = 25e-12
    tau_s: float = 5e-9
    lambda_m: float = 1550e-9
    f_ec: float = 1.2

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise ValueError(f"eta must be in (0, 1], got {self.eta}")
        if not 0 <= self.p_dc < 0.5:
            raise ValueError(f"p_dc must be in [0, 0.5), got {self.p_dc}")
        # 0.5 admitted: a detector with random outcomes is a useful degenerate case.
        if not 0 <= self.p_opt <= 0.5:
            raise ValueError(f"p_opt must be in [0, 0.5], got {self.p_opt}")
        if self.nep < 0:
            raise ValueError(f"nep must be >= 0, got {self.nep}")
        if not self.tau_s > 0:
            raise ValueError(f"tau_s must be > 0, got {self.tau_s}")
        if not self.lambda_m > 0:
            raise ValueError(f"lambda_m must be > 0, got {self.lambda_m}")
        if self.f_ec < 1:
            raise ValueError(f"f_ec must be >= 1, got {self.f_ec}")

    @property
    def monitor_photon_uncertainty(self) -> float:
        """Absolute photon-number uncertainty of SRP monitoring: NEP*sqrt(tau)*lambda/(h*c)."""
        return self.nep * math.sqrt(self.tau_s) * self.lambda_m / (constants.h * constants.c)


@dataclass(frozen=True)
class ChannelDerived:
    """Receiver-side quantities derived from a (setup, detector) pair."""

    transmittance: float
    mu_prime: float
    nu_prime: float
    delta: float
    qber: float

    @property
    def monitoring_unacceptable(self) -> bool:
        return self.delta > GREY_REGION_DELTA


def transmittance(length_km, loss_db_per_km: float = FIBER_LOSS_DB_PER_KM):
    """Fiber power transmittance 10**(-loss_db_per_km * L / 10)."""
    length_km = np.asarray(length_km, dtype=float)
    if np.any(length_km < 0):
        raise ValueError("length_km must be >= 0")
    out = 10.0 ** (-loss_db_per_km * length_km / 10.0)
    return float(out) if out.ndim == 0 else out


def _delta_at_unit_mu(setup: SetupConfig, detector: DetectorConfig) -> float:
    # SRP intensity at Bob for mu = 1: 10**(t/10) * T(L).
    nu_prime_unit = 10.0 ** (setup.t_db / 10.0) * transmittance(
        setup.length_km, setup.fiber_loss_db_km
    )
    return detector.monitor_photon_uncertainty / nu_prime_unit


def monitor_precision_delta(setup: SetupConfig, detector: DetectorConfig) -> float:
    """Relative precision of Bob's SRP intensity monitoring.

    delta = NEP*sqrt(tau)*lambda/(h*c) / nu', where nu' is the expected SRP
    intensity at the receiver. Computed from exact physical constants.
    delta factorizes as delta(mu, t, L) = delta(1, t, L)/mu; the division by
    mu is done last so that identity holds exactly in floating point.

    Values above ``GREY_REGION_DELTA`` mean the monitoring is too coarse to
    be trusted (callers flag such points rather than masking them).
    """
    return _delta_at_unit_mu(setup, detector) / setup.mu


def monitoring_unacceptable(delta: float) -> bool:
    """True when SRP monitoring precision is worse than the 50% grey-region bound."""
    return delta > GREY_REGION_DELTA


def qber(setup: SetupConfig, detector: DetectorConfig) -> float:
    """Receiver QBER from dark counts and optical errors.

    (p_dc + p_opt*(1 - exp(-2*eta*mu'))) / (2*p_dc + 1 - exp(-2*eta*mu')),
    capped at 0.5. With no clicks at all (mu'=0 and p_dc=0) the bit value is
    undefined and 0.5 is returned.
    """
    mu_prime = setup.mu * transmittance(setup.length_km, setup.fiber_loss_db_km)
    return qber_from_received(mu_prime, detector)


def qber_from_received(mu_prime: float, detector: DetectorConfig) -> float:
    """QBER for a given received signal intensity (see :func:`qber`)."""
    if mu_prime < 0:
        raise ValueError("mu_prime must be >= 0")
    click = -np.expm1(-2.0 * detector.eta * mu_prime)
    denom = 2.0 * detector.p_dc + click
    if denom == 0.0:
        return 0.5
    value = (detector.p_dc + detector.p_opt * click) / denom
    if value > 0.5:
        # Possible only outside the validated parameter ranges.
        warnings.warn(f"QBER model value {value:.4g} > 0.5 capped; nonphysical regime")
        return 0.5
    return float(value)


def binary_entropy(x):
    """Shannon binary entropy in bits, H(0) = H(1) = 0 by convention."""
    arr = np.asarray(x, dtype=float)
    if np.any((arr < 0.0) | (arr > 1.0)):
        raise ValueError("binary_entropy argument must lie in [0, 1]")
    # xlogy handles the 0*log(0) endpoints without special-casing.
    out = -(special.xlogy(arr, arr) + special.xlogy(1.0 - arr, 1.0 - arr)) / math.log(2.0)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def holevo_chi(intensity):
    """Holevo bound for the binary ensemble {|alpha>, |-alpha>} with |alpha|^2 = intensity.

    chi(mu) = H((1 - exp(-2*mu))/2); 0 at mu=0, saturating at 1 bit for
    orthogonal (bright) states.
    """
    arr = np.asarray(intensity, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("intensity must be >= 0")
    out = binary_entropy(-np.expm1(-2.0 * arr) / 2.0)
    return float(out) if np.ndim(out) == 0 else out


def derive_channel(setup: SetupConfig, detector: DetectorConfig) -> ChannelDerived:
    """Bundle the receiver-side quantities used by the attack and rate models."""
    trans = transmittance(setup.length_km, setup.fiber_loss_db_km)
    mu_prime = setup.mu * trans
    nu_prime = setup.nu * trans
    return ChannelDerived(
        transmittance=trans,
        mu_prime=mu_prime,
        nu_prime=nu_prime,
        delta=monitor_precision_delta(setup, detector),
        qber=qber_from_received(mu_prime, detector),
    )
