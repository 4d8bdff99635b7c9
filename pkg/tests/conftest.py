import pytest

from srqkd import DetectorConfig, Protocol, SetupConfig


@pytest.fixture
def detector() -> DetectorConfig:
    """Reference detector: eta=0.2, p_dc=2e-5, p_opt=0.02, NEP=25 pW/rtHz."""
    return DetectorConfig()


@pytest.fixture
def b92_setup() -> SetupConfig:
    """Workhorse operating point: mu=0.3, t=65 dB, L=10 km, f=5 MHz."""
    return SetupConfig(protocol=Protocol.B92_SR, mu=0.3, t_db=65.0,
                       length_km=10.0, pulse_rate_hz=5e6)
