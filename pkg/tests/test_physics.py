import math

import numpy as np
import pytest

from srqkd import (
    ChannelDerived,
    DetectorConfig,
    Protocol,
    SetupConfig,
    binary_entropy,
    derive_channel,
    holevo_chi,
    monitor_precision_delta,
    monitoring_unacceptable,
    qber,
    qber_from_received,
    transmittance,
)

# Frozen oracle values (computed by direct, independent evaluation of the
# closed forms; see the entropy duplicates below for the double route).
K_MONITOR = 13793.674603497862          # NEP*sqrt(tau)*lambda/(h*c)
DELTA_REF = 0.023044045386939514        # delta(mu=0.3, t=65, L=10)
QBER_REF = 0.020263159686760963         # QBER(mu=0.3, L=10)
MU_PRIME_REF = 0.18928720334405796      # 0.3 * 10^(-0.2)
H_011 = 0.499915958164528               # H(0.11)
CHI_025 = 0.7153491667107217            # chi(0.25)


def test_transmittance_basics():
    assert transmittance(0.0) == 1.0
    assert transmittance(10.0) == pytest.approx(10 ** -0.2, rel=1e-15)
    # 0.2 dB/km: 50 km is one decade
    assert transmittance(50.0) == pytest.approx(0.1, rel=1e-15)
    out = transmittance(np.array([0.0, 10.0, 50.0]))
    assert out.shape == (3,)
    with pytest.raises(ValueError):
        transmittance(-1.0)


def test_setup_validation_and_nu():
    s = SetupConfig(protocol="b92-sr", mu=0.3, t_db=65.0, length_km=10.0,
                    pulse_rate_hz=5e6)
    assert s.protocol is Protocol.B92_SR
    assert s.nu == pytest.approx(0.3 * 10 ** 6.5, rel=1e-15)
    for bad in (dict(mu=0.0), dict(mu=-0.1), dict(t_db=-1.0),
                dict(length_km=-5.0), dict(pulse_rate_hz=0.0)):
        kwargs = dict(protocol="b92-sr", mu=0.3, t_db=65.0, length_km=10.0,
                      pulse_rate_hz=5e6)
        kwargs.update(bad)
        with pytest.raises(ValueError):
            SetupConfig(**kwargs)


def test_detector_validation():
    DetectorConfig(p_opt=0.5)  # degenerate random-outcome detector is allowed
    with pytest.raises(ValueError):
        DetectorConfig(p_opt=0.51)
    with pytest.raises(ValueError):
        DetectorConfig(eta=0.0)
    with pytest.raises(ValueError):
        DetectorConfig(eta=1.2)
    with pytest.raises(ValueError):
        DetectorConfig(p_dc=-1e-9)


def test_monitor_prefactor_value(detector):
    assert detector.monitor_photon_uncertainty == pytest.approx(K_MONITOR, rel=1e-12)


def test_delta_reference_point(b92_setup, detector):
    assert monitor_precision_delta(b92_setup, detector) == pytest.approx(
        DELTA_REF, rel=1e-12)


def test_delta_scalings(detector):
    base = SetupConfig(protocol="b92-sr", mu=0.3, t_db=65.0, length_km=10.0,
                       pulse_rate_hz=5e6)
    d0 = monitor_precision_delta(base, detector)

    # exact 1/mu separability: delta(mu) = delta(1)/mu bit-for-bit
    unit = SetupConfig(protocol="b92-sr", mu=1.0, t_db=65.0, length_km=10.0,
                       pulse_rate_hz=5e6)
    d_unit = monitor_precision_delta(unit, detector)
    for mu in (0.01, 0.07, 0.3, 0.9):
        s = SetupConfig(protocol="b92-sr", mu=mu, t_db=65.0, length_km=10.0,
                        pulse_rate_hz=5e6)
        assert monitor_precision_delta(s, detector) == d_unit / mu

    # +10 dB on t brightens the SRP tenfold -> delta/10; +50 km -> 10x delta
    s_t = SetupConfig(protocol="b92-sr", mu=0.3, t_db=75.0, length_km=10.0,
                      pulse_rate_hz=5e6)
    assert monitor_precision_delta(s_t, detector) == pytest.approx(d0 / 10, rel=1e-12)
    s_l = SetupConfig(protocol="b92-sr", mu=0.3, t_db=65.0, length_km=60.0,
                      pulse_rate_hz=5e6)
    assert monitor_precision_delta(s_l, detector) == pytest.approx(10 * d0, rel=1e-12)


def test_grey_region_predicate():
    assert not monitoring_unacceptable(0.5)
    assert monitoring_unacceptable(0.5000001)
    assert not monitoring_unacceptable(0.01)


def test_qber_reference_point(b92_setup, detector):
    assert qber(b92_setup, detector) == pytest.approx(QBER_REF, rel=1e-12)


def test_qber_limits(detector):
    # no light at all: dark counts only, random bit
    assert qber_from_received(0.0, DetectorConfig(p_dc=0.0)) == 0.5
    assert qber_from_received(0.0, detector) == 0.5
    # bright limit: optical misalignment dominates
    assert qber_from_received(1e3, DetectorConfig(p_dc=0.0)) == pytest.approx(
        0.02, rel=1e-9)
    # p_opt = 0.5 detector: QBER pinned at 1/2 for any intensity
    half = DetectorConfig(p_opt=0.5, p_dc=0.0)
    for mu_prime in (0.01, 0.2, 2.0):
        assert qber_from_received(mu_prime, half) == pytest.approx(0.5, rel=1e-12)


def test_qber_monotone_in_distance(detector):
    values = []
    for length in (0.0, 20.0, 40.0, 60.0, 80.0, 100.0):
        s = SetupConfig(protocol="b92-sr", mu=0.3, t_db=65.0, length_km=length,
                        pulse_rate_hz=5e6)
        values.append(qber(s, detector))
    assert all(a <= b for a, b in zip(values, values[1:]))
    assert all(v <= 0.5 for v in values)


def test_binary_entropy_values():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.11) == pytest.approx(H_011, rel=1e-12)
    # independent route: direct formula at generic points
    rng = np.random.default_rng(42)
    for x in rng.uniform(1e-6, 1 - 1e-6, size=50):
        direct = -x * math.log2(x) - (1 - x) * math.log2(1 - x)
        assert binary_entropy(float(x)) == pytest.approx(direct, abs=1e-14)
    with pytest.raises(ValueError):
        binary_entropy(-0.01)
    with pytest.raises(ValueError):
        binary_entropy(1.01)


def test_binary_entropy_symmetry_and_array():
    xs = np.linspace(0.0, 1.0, 101)
    h = binary_entropy(xs)
    assert np.allclose(h, h[::-1], atol=1e-14)
    assert h.max() == 1.0


def test_holevo_chi():
    assert holevo_chi(0.0) == 0.0
    assert holevo_chi(0.25) == pytest.approx(CHI_025, rel=1e-12)
    # saturates at one bit once the states become orthogonal
    assert holevo_chi(50.0) == pytest.approx(1.0, abs=1e-12)
    # equals H((1 - overlap)/2) by definition
    for mu in (0.05, 0.3, 1.7):
        assert holevo_chi(mu) == pytest.approx(
            binary_entropy((1 - math.exp(-2 * mu)) / 2), rel=1e-14)


def test_derive_channel_consistency(b92_setup, detector):
    ch = derive_channel(b92_setup, detector)
    assert isinstance(ch, ChannelDerived)
    assert ch.transmittance == pytest.approx(10 ** -0.2, rel=1e-15)
    assert ch.mu_prime == pytest.approx(MU_PRIME_REF, rel=1e-14)
    assert ch.nu_prime == pytest.approx(ch.mu_prime * 10 ** 6.5, rel=1e-12)
    assert ch.delta == monitor_precision_delta(b92_setup, detector)
    assert ch.qber == qber(b92_setup, detector)
    assert not ch.monitoring_unacceptable


def test_sifting_factors():
    assert Protocol.B92_SR.sifting_factor == 1.0
    assert Protocol.BB84_SR.sifting_factor == 0.5
    assert Protocol.B92_SR.uses_reference_pulse
    assert not Protocol.BB84_DECOY.uses_reference_pulse
    with pytest.raises(ValueError):
        Protocol.BB84_STANDARD.sifting_factor
