"""Exact small-qubit simulator for GHZ master-key QKD protocols.

An exact state-vector engine for up to six spin-1/2 particles drives
Monte-Carlo rounds of three key-distribution protocols (the BB84/Eckert
baseline and the two GHZ master-key variants) under configurable
depolarizing noise and eavesdropper strategies.
"""

from ._kernels import BACKEND_NAME as kernel_backend
from .adversary import ChannelModel, EveKind, EveRecord, EveStrategy, GuessPolicy
from .harness import (
    ConfigError,
    RunStats,
    SimulationConfig,
    Stage,
    TrialStats,
    derive_stream,
    load_config,
    run_experiment,
    write_stats,
)
from .pipeline import (
    CodingRole,
    DetectionReport,
    KeyMaterial,
    Verdict,
    code_bit,
    disclose_and_check,
    master_bit,
    qber,
    sift,
    vernam,
    xor_combine,
)
from .protocols import (
    ProtocolKind,
    RoundRecord,
    Transcript,
    run_bb84_round,
    run_mkc_round,
    run_mks_round,
    run_protocol,
)
from .quantum import (
    Basis,
    DensityMatrix,
    Outcome,
    StateVector,
    UndefinedConditionError,
    conditional_correlator,
    correlator,
    eraser_parity_check,
    make_ghz,
    make_singlet,
    measure,
    outcome_probability,
    project,
    purity,
    reduced_density,
)

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "ChannelModel",
    "CodingRole",
    "ConfigError",
    "DensityMatrix",
    "DetectionReport",
    "EveKind",
    "EveRecord",
    "EveStrategy",
    "GuessPolicy",
    "KeyMaterial",
    "Outcome",
    "ProtocolKind",
    "RoundRecord",
    "RunStats",
    "SimulationConfig",
    "Stage",
    "StateVector",
    "Transcript",
    "TrialStats",
    "UndefinedConditionError",
    "Verdict",
    "code_bit",
    "conditional_correlator",
    "correlator",
    "derive_stream",
    "disclose_and_check",
    "eraser_parity_check",
    "kernel_backend",
    "load_config",
    "make_ghz",
    "make_singlet",
    "master_bit",
    "measure",
    "outcome_probability",
    "project",
    "purity",
    "qber",
    "reduced_density",
    "run_bb84_round",
    "run_experiment",
    "run_mkc_round",
    "run_mks_round",
    "run_protocol",
    "sift",
    "vernam",
    "write_stats",
    "xor_combine",
]
