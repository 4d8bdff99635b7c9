"""Secret-key rate modeling for strong-reference-pulse QKD.

Covers the soft-filtering eavesdropping attack on SR protocols (B92-SR and
the 4+2 BB84 variant), unambiguous-state-discrimination receiver modeling,
BB84 baselines (photon-number-splitting bounded and decoy-state GLLP),
a pulse-level Monte-Carlo cross-check, and the sweep/optimization layer
that turns all of it into datasets.
"""

from .attack import (
    AttackPoint,
    AttackSolution,
    amplification,
    attack_point,
    b_interval,
    beam_splitting_information,
    eve_information,
    maximize_eve_information,
    rate_residual,
    success_probability,
    unitarity_residual,
)
from .discrimination import (
    CoherentPair,
    PovmSet,
    acceptance_rate,
    build_povm,
    coherent_state_fock,
    conclusive_prob_ideal,
    fock_dimension,
    outcome_probabilities,
    overlap,
    povm_probabilities_fock,
    span_states,
)
from .physics import (
    FIBER_LOSS_DB_PER_KM,
    GREY_REGION_DELTA,
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
from .rates import (
    Bb84Yields,
    DecoyConfig,
    RateBreakdown,
    bb84_gain_error,
    bb84_pns_bounds,
    bb84_secret_rate,
    decoy_bounds,
    secret_rate,
    sr_secret_rate,
)
from .simulation import (
    AttackKind,
    DoubleClickPolicy,
    SimConfig,
    SimResult,
    simulate,
    wilson_interval,
)
from .sweeps import (
    DistanceComparison,
    DistancePoint,
    GridSpec,
    MinSrpResult,
    MuOptimum,
    SweepRow,
    TSaturation,
    crossover_distance,
    evaluate_sr_point,
    grey_region_mu_floor,
    min_srp_photons,
    optimize_mu,
    rate_vs_distance,
    rate_vs_t,
    sweep_mu_t,
    train_capacity,
)

__version__ = "0.1.0"

__all__ = [
    "AttackKind",
    "AttackPoint",
    "AttackSolution",
    "Bb84Yields",
    "ChannelDerived",
    "CoherentPair",
    "DecoyConfig",
    "DetectorConfig",
    "DistanceComparison",
    "DistancePoint",
    "DoubleClickPolicy",
    "FIBER_LOSS_DB_PER_KM",
    "GREY_REGION_DELTA",
    "GridSpec",
    "MinSrpResult",
    "MuOptimum",
    "PovmSet",
    "Protocol",
    "RateBreakdown",
    "SetupConfig",
    "SimConfig",
    "SimResult",
    "SweepRow",
    "TSaturation",
    "acceptance_rate",
    "amplification",
    "attack_point",
    "b_interval",
    "bb84_gain_error",
    "bb84_pns_bounds",
    "bb84_secret_rate",
    "beam_splitting_information",
    "binary_entropy",
    "build_povm",
    "coherent_state_fock",
    "conclusive_prob_ideal",
    "crossover_distance",
    "decoy_bounds",
    "derive_channel",
    "fock_dimension",
    "eve_information",
    "evaluate_sr_point",
    "grey_region_mu_floor",
    "holevo_chi",
    "maximize_eve_information",
    "min_srp_photons",
    "monitor_precision_delta",
    "monitoring_unacceptable",
    "optimize_mu",
    "outcome_probabilities",
    "overlap",
    "povm_probabilities_fock",
    "qber",
    "qber_from_received",
    "rate_residual",
    "rate_vs_distance",
    "rate_vs_t",
    "secret_rate",
    "simulate",
    "span_states",
    "sr_secret_rate",
    "success_probability",
    "sweep_mu_t",
    "train_capacity",
    "transmittance",
    "unitarity_residual",
    "wilson_interval",
]
