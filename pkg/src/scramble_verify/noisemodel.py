"""Error injection: coherent mismatch, gate depolarization, readout flips."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import gates as G
from .errors import DomainError
from .simkernel import GateOp, KrausChannel

LAYERS = frozenset({"mismatch", "gate", "readout"})

# single-qubit 99.0%, two-qubit 98.5%, readout 99.4% hardware fidelities
CALIBRATED_DEPOL_1Q = 0.01
CALIBRATED_DEPOL_2Q = 0.015
CALIBRATED_READOUT = 0.006


@dataclass(frozen=True)
class NoiseConfig:
    """Noise settings for one run. A layer acts only if enabled *and* nonzero."""

    mismatch_theta: float = 0.0
    mismatch_axis: str = "x"
    depol_1q: float = 0.0
    depol_2q: float = 0.0
    readout_flip: float = 0.0
    layers: frozenset = LAYERS

    def __post_init__(self):
        object.__setattr__(self, "layers", frozenset(self.layers))
        if self.layers - LAYERS:
            raise DomainError(f"unknown noise layers {sorted(self.layers - LAYERS)}")
        if not 0.0 <= self.mismatch_theta < 2 * np.pi:
            raise DomainError(f"mismatch_theta must lie in [0, 2pi), got {self.mismatch_theta}")
        if self.mismatch_axis not in ("x", "y", "z"):
            raise DomainError(f"mismatch_axis must be x, y or z, got {self.mismatch_axis!r}")
        for name in ("depol_1q", "depol_2q", "readout_flip"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise DomainError(f"{name} must be a probability, got {p}")

    @property
    def mismatch_active(self) -> bool:
        return "mismatch" in self.layers and self.mismatch_theta != 0.0

    @property
    def gate_noise_active(self) -> bool:
        return "gate" in self.layers and (self.depol_1q > 0 or self.depol_2q > 0)

    @property
    def readout_active(self) -> bool:
        return "readout" in self.layers and self.readout_flip > 0

    @property
    def has_channels(self) -> bool:
        """Whether any incoherent layer is active (forces density-matrix execution)."""
        return self.gate_noise_active or self.readout_active

    def replace(self, **changes) -> "NoiseConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["layers"] = sorted(self.layers)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseConfig":
        d = dict(d)
        if "layers" in d:
            d["layers"] = frozenset(d["layers"])
        return cls(**d)


IDEAL = NoiseConfig()
CALIBRATED = NoiseConfig(
    depol_1q=CALIBRATED_DEPOL_1Q, depol_2q=CALIBRATED_DEPOL_2Q, readout_flip=CALIBRATED_READOUT
)
PRESETS = {"ideal": IDEAL, "calibrated": CALIBRATED}


def preset(name: str) -> NoiseConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise DomainError(f"unknown noise preset {name!r}; expected one of {sorted(PRESETS)}") from None


def depolarizing_channel(p: float, qubit: int) -> KrausChannel:
    """``rho -> (1 - p) rho + p I/2`` on one qubit."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"depolarizing strength must be in [0, 1], got {p}")
    ops = [np.sqrt(1 - 3 * p / 4) * G.I2] + [np.sqrt(p / 4) * P for P in (G.X, G.Y, G.Z)]
    return KrausChannel(tuple(ops), (qubit,), f"depol({p:g})")


def readout_flip_channel(p: float, qubit: int = 0) -> KrausChannel:
    """Classical bit flip with probability ``p`` in the computational basis."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"flip probability must be in [0, 1], got {p}")
    return KrausChannel((np.sqrt(1 - p) * G.I2, np.sqrt(p) * G.X), (qubit,), f"flip({p:g})")


def mismatch_layer(theta: float, axis: str = "x", qubits: Sequence[int] = (0, 1, 2)) -> list[GateOp]:
    """One ``R_axis(theta)`` per scrambled qubit, placed after the forward unitary only."""
    build = {"x": G.rx, "y": G.ry, "z": G.rz}
    if axis not in build:
        raise DomainError(f"mismatch axis must be x, y or z, got {axis!r}")
    return [build[axis](theta, q) for q in qubits]


@dataclass(frozen=True)
class NoisyCircuit:
    """Gates interleaved with Kraus channels."""

    n_qubits: int
    ops: tuple

    @property
    def has_channels(self) -> bool:
        return any(isinstance(op, KrausChannel) for op in self.ops)

    @property
    def n_channels(self) -> int:
        return sum(isinstance(op, KrausChannel) for op in self.ops)

    def channel_positions(self) -> list[tuple]:
        """(op index, targets) for each channel; describes channel placement."""
        return [(i, op.targets) for i, op in enumerate(self.ops) if isinstance(op, KrausChannel)]


def gate_noise_channels(gate: GateOp, cfg: NoiseConfig) -> list[KrausChannel]:
    if not cfg.gate_noise_active:
        return []
    # two-qubit noise: independent single-qubit depolarizing on each target
    p = cfg.depol_1q if gate.n_targets == 1 else cfg.depol_2q
    if p == 0:
        return []
    return [depolarizing_channel(p, q) for q in gate.targets]


def attach_gate_noise(circuit, cfg: NoiseConfig) -> NoisyCircuit:
    """Follow every gate with depolarizing noise on its targets."""
    ops: list = []
    for gate in circuit.gates:
        ops.append(gate)
        ops.extend(gate_noise_channels(gate, cfg))
    return NoisyCircuit(circuit.n_qubits, tuple(ops))
