"""Teleportation-based verification of quantum information scrambling.

A dense simulator for the 7-qubit scrambling/decoding experiment: scrambler
families, probabilistic and Grover decoders, noise models, averaged OTOCs and
the noise-factor diagnostics built from teleportation data.
"""

from .circuits import (
    Circuit,
    PauliString,
    ScramblerSpec,
    build_classical_scrambler,
    build_grover_scrambler,
    build_identity_control,
    build_scrambler,
    conjugate_circuit,
    is_maximal_scrambler,
    pauli_propagate,
    total_unitary,
)
from .metrics import StateAverages, aggregate, noise_factor, otoc_bound
from .noisemodel import CALIBRATED, IDEAL, NoiseConfig
from .otoc import OtocQuery, average_otoc, otoc_value
from .protocol import (
    InputState,
    ProtocolConfig,
    RunResult,
    build_protocol_circuit,
    run,
    run_grover,
    run_mismatch_control,
    run_probabilistic,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "PauliString",
    "ScramblerSpec",
    "build_classical_scrambler",
    "build_grover_scrambler",
    "build_identity_control",
    "build_scrambler",
    "conjugate_circuit",
    "is_maximal_scrambler",
    "pauli_propagate",
    "total_unitary",
    "InputState",
    "ProtocolConfig",
    "RunResult",
    "build_protocol_circuit",
    "run",
    "run_grover",
    "run_mismatch_control",
    "run_probabilistic",
    "sweep",
    "StateAverages",
    "aggregate",
    "noise_factor",
    "otoc_bound",
    "CALIBRATED",
    "IDEAL",
    "NoiseConfig",
    "OtocQuery",
    "average_otoc",
    "otoc_value",
]
