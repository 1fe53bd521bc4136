"""Seven-qubit teleportation experiments.

Register: q0 carries the input state, (q1, q2) are the scrambled partners of
the memory qubits (q3, q4), and (q5, q6) is the ancilla EPR pair. The
scrambler acts on (q0, q1, q2); its complex conjugate acts on (q5, q3, q4),
position by position, so that q5 mirrors q0, q3 mirrors q1 and q4 mirrors
q2. Decoding succeeds when a mirror pair is found in the EPR state; the
decoded state is read from q6.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import gates as G
from .circuits import Circuit, ScramblerSpec, conjugate_circuit
from .errors import DomainError, ScrambleVerifyError
from .noisemodel import IDEAL, NoiseConfig, attach_gate_noise, gate_noise_channels, mismatch_layer
from .noisemodel import readout_flip_channel
from .simkernel import (
    DensityMatrix,
    GateOp,
    KrausChannel,
    StateVector,
    apply_channel,
    apply_gate,
    apply_gate_dm,
    epr_project_dm,
    fidelity_pure,
    init_basis,
    project_epr,
    reduced_density,
)

N_QUBITS = 7
INPUT_LABELS = ("0x", "1x", "0y", "1y", "0z", "1z")
DECODERS = ("probabilistic", "grover", "grover_purified")


@dataclass(frozen=True)
class RegisterLayout:
    alice: int = 0
    blackhole: tuple = (1, 2)
    memory: tuple = (3, 4)
    ancilla_in: int = 5
    ancilla_out: int = 6
    epr_pairs: tuple = ((1, 3), (2, 4), (5, 6))

    @property
    def scrambled(self) -> tuple:
        return (self.alice, *self.blackhole)

    @property
    def decoder_register(self) -> tuple:
        """Where the conjugate scrambler acts, aligned with ``scrambled``."""
        return (self.ancilla_in, *self.memory)

    @property
    def mirror(self) -> dict:
        pairs = dict(zip(self.scrambled, self.decoder_register))
        return {**pairs, **{b: a for a, b in pairs.items()}}

    @property
    def pairs(self) -> tuple:
        """Projection pairs ``pair0..pair2``: scrambled qubit and its mirror."""
        return tuple((q, self.mirror[q]) for q in self.scrambled)


LAYOUT = RegisterLayout()
PAIRS = LAYOUT.pairs

# u3 angles preparing each Pauli eigenstate from |0>
_PREP_ANGLES = {
    "0z": (0.0, 0.0, 0.0),
    "1z": (math.pi, 0.0, 0.0),
    "0x": (math.pi / 2, 0.0, 0.0),
    "1x": (math.pi / 2, math.pi, 0.0),
    "0y": (math.pi / 2, math.pi / 2, 0.0),
    "1y": (math.pi / 2, -math.pi / 2, 0.0),
}


@dataclass(frozen=True)
class InputState:
    """One of the six single-qubit Pauli eigenstates, e.g. ``"0x"`` = +1 of X."""

    label: str

    def __post_init__(self):
        if self.label not in _PREP_ANGLES:
            raise DomainError(f"unknown input state {self.label!r}; expected one of {INPUT_LABELS}")

    def prep_gate(self, qubit: int = 0) -> GateOp:
        return G.u3(*_PREP_ANGLES[self.label], qubit)

    @property
    def amplitudes(self) -> np.ndarray:
        return G.u3_matrix(*_PREP_ANGLES[self.label])[:, 0]

    @property
    def vector(self) -> StateVector:
        return StateVector(1, self.amplitudes)


ALL_INPUTS = tuple(InputState(lbl) for lbl in INPUT_LABELS)


@dataclass(frozen=True)
class ProtocolConfig:
    scrambler: ScramblerSpec = ScramblerSpec()
    input: InputState = InputState("0z")
    pair: int = 1
    decoder: str = "probabilistic"
    noise: NoiseConfig = IDEAL
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.input, str):
            object.__setattr__(self, "input", InputState(self.input))
        if self.pair not in (0, 1, 2):
            raise DomainError(f"pair must be 0, 1 or 2, got {self.pair}")
        if self.decoder not in DECODERS:
            raise DomainError(f"unknown decoder {self.decoder!r}; expected one of {DECODERS}")
        if self.seed < 0:
            raise DomainError("seed must be a nonnegative integer")

    @property
    def projection_pair(self) -> tuple:
        return PAIRS[self.pair]

    def replace(self, **changes) -> "ProtocolConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class RunResult:
    """Exact outcome of one run.

    ``fidelity`` is NaN with ``fidelity_defined=False`` when the EPR outcome
    has probability <= 1e-12.
    """

    p_success: float
    fidelity: float
    fidelity_defined: bool = True
    raw: DensityMatrix | None = field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------- circuits


def epr_prep_gates(layout: RegisterLayout = LAYOUT) -> list[GateOp]:
    out = []
    for a, b in layout.epr_pairs:
        out += [G.h(a), G.cx(a, b)]
    return out


def epr_reflection_gates(a: int, b: int) -> list[GateOp]:
    """``1 - 2|EPR><EPR|`` on ``(a, b)`` from basis change, CZ and X gates."""
    to_bell = [G.cx(a, b), G.h(a)]
    flip00 = [G.x(a), G.x(b), G.cz(a, b), G.x(a), G.x(b)]
    return to_bell + flip00 + [G.h(a), G.cx(a, b)]


def forward_and_decoder(cfg: ProtocolConfig) -> tuple[Circuit, Circuit]:
    """The scrambler on (q0, q1, q2) and its conjugate on (q5, q3, q4)."""
    u = cfg.scrambler.build()
    u_s = u.remap(LAYOUT.scrambled, N_QUBITS)
    u_d = conjugate_circuit(u).remap(LAYOUT.decoder_register, N_QUBITS)
    return u_s, u_d


def build_protocol_circuit(cfg: ProtocolConfig) -> Circuit:
    """State prep, EPR prep, scrambler, mismatch layer, conjugate decoder."""
    u_s, u_d = forward_and_decoder(cfg)
    gates = [cfg.input.prep_gate(LAYOUT.alice)] + epr_prep_gates()
    gates += list(u_s.gates)
    if cfg.noise.mismatch_active:
        gates += mismatch_layer(cfg.noise.mismatch_theta, cfg.noise.mismatch_axis, LAYOUT.scrambled)
    gates += list(u_d.gates)
    return Circuit(N_QUBITS, gates)


def build_grover_circuit(cfg: ProtocolConfig) -> Circuit:
    """Protocol circuit followed by one Grover iteration searching for the EPR pair.

    The oracle reflects about EPR on the projection pair; the diffusion step
    undoes the decoder, reflects about the ancilla EPR pair and redoes it.
    """
    _, u_d = forward_and_decoder(cfg)
    a, b = cfg.projection_pair
    gates = list(build_protocol_circuit(cfg).gates)
    gates += epr_reflection_gates(a, b)
    gates += list(u_d.inverse().gates)
    gates += epr_reflection_gates(LAYOUT.ancilla_in, LAYOUT.ancilla_out)
    gates += list(u_d.gates)
    return Circuit(N_QUBITS, gates)


# ---------------------------------------------------------------- execution


def _evolve_pure(circuit: Circuit) -> StateVector:
    state = init_basis(circuit.n_qubits, 0)
    for g in circuit.gates:
        state = apply_gate(state, g)
    return state


def _evolve_mixed(circuit: Circuit, noise: NoiseConfig) -> DensityMatrix:
    rho = init_basis(circuit.n_qubits, 0).to_density()
    for op in attach_gate_noise(circuit, noise).ops:
        rho = apply_channel(rho, op) if isinstance(op, KrausChannel) else apply_gate_dm(rho, op)
    return rho


def _measure_epr_mixed(rho: DensityMatrix, pair: tuple, noise: NoiseConfig):
    """Bell measurement as basis change plus computational readout.

    The basis-change gates carry gate noise; readout flips hit both measured
    bits; the ideal inverse basis change then makes the ``|00>`` outcome an
    EPR projection again.
    """
    a, b = pair
    for g in (G.cx(a, b), G.h(a)):
        rho = apply_gate_dm(rho, g)
        for ch in gate_noise_channels(g, noise):
            rho = apply_channel(rho, ch)
    if noise.readout_active:
        for q in pair:
            rho = apply_channel(rho, readout_flip_channel(noise.readout_flip, q))
    rho = apply_gate_dm(rho, G.h(a))
    rho = apply_gate_dm(rho, G.cx(a, b))
    return epr_project_dm(rho, a, b)


def _decoded_fidelity(rho_out: DensityMatrix, psi: InputState, noise: NoiseConfig) -> float:
    """Overlap with ``psi``, read out in the ``psi`` basis with readout flips."""
    if not noise.readout_active:
        return fidelity_pure(rho_out, psi.vector)
    rotated = apply_gate_dm(rho_out, G.inverse_gate(psi.prep_gate(0)))
    rotated = apply_channel(rotated, readout_flip_channel(noise.readout_flip, 0))
    return float(rotated.rho[0, 0].real)


def _undefined(prob: float) -> RunResult:
    return RunResult(p_success=max(prob, 0.0), fidelity=float("nan"), fidelity_defined=False)


def _finish(cfg: ProtocolConfig, final, project: bool) -> RunResult:
    """Project (optionally) and read the decoded qubit from ``final``."""
    noise = cfg.noise
    if isinstance(final, StateVector):
        prob, post = project_epr(final, *cfg.projection_pair) if project else (1.0, final)
    else:
        prob, post = _measure_epr_mixed(final, cfg.projection_pair, noise) if project else (1.0, final)
    if post is None:
        return _undefined(prob)
    rho_out = reduced_density(post, [LAYOUT.ancilla_out])
    fid = _decoded_fidelity(rho_out, cfg.input, noise)
    return RunResult(p_success=prob, fidelity=fid, fidelity_defined=True, raw=rho_out)


def _execute(cfg: ProtocolConfig, circuit: Circuit, project: bool) -> RunResult:
    if cfg.noise.has_channels:
        return _finish(cfg, _evolve_mixed(circuit, cfg.noise), project)
    return _finish(cfg, _evolve_pure(circuit), project)


def run_probabilistic(cfg: ProtocolConfig) -> RunResult:
    """Post-selected decoding: EPR projection on ``cfg.pair``, fidelity of q6."""
    if cfg.decoder != "probabilistic":
        raise DomainError(f"run_probabilistic needs decoder='probabilistic', got {cfg.decoder!r}")
    return _execute(cfg, build_protocol_circuit(cfg), project=True)


def run_grover(cfg: ProtocolConfig, purify: bool | None = None) -> RunResult:
    """Deterministic decoding with one Grover iteration.

    Without purification ``p_success`` is 1 by construction. With it, a
    final EPR projection on ``cfg.pair`` post-selects the output.
    """
    if cfg.decoder not in ("grover", "grover_purified"):
        raise DomainError(f"run_grover needs a grover decoder, got {cfg.decoder!r}")
    if purify is None:
        purify = cfg.decoder == "grover_purified"
    return _execute(cfg, build_grover_circuit(cfg), project=purify)


def run_mismatch_control(theta: float, base: ProtocolConfig | None = None) -> RunResult:
    """Identity scrambler with rotation errors after the forward unitary only."""
    if base is None:
        base = ProtocolConfig(scrambler=ScramblerSpec("identity_control"), pair=1)
    if base.scrambler.family != "identity_control":
        raise DomainError("the mismatch control runs on the identity_control scrambler")
    noise = base.noise.replace(mismatch_theta=float(theta), layers=base.noise.layers | {"mismatch"})
    return run_probabilistic(base.replace(noise=noise))


def run(cfg: ProtocolConfig) -> RunResult:
    if cfg.decoder == "probabilistic":
        return run_probabilistic(cfg)
    return run_grover(cfg)


def ideal_table(scrambler: Circuit | ScramblerSpec) -> dict:
    """Noiseless probabilistic results keyed by ``(pair, input label)``."""
    if isinstance(scrambler, Circuit):
        scrambler = ScramblerSpec("custom", circuit=scrambler)
    out = {}
    for pair in range(3):
        for psi in ALL_INPUTS:
            cfg = ProtocolConfig(scrambler=scrambler, input=psi, pair=pair)
            out[(pair, psi.label)] = run_probabilistic(cfg)
    return out


# ---------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class SweepRow:
    config: ProtocolConfig
    result: RunResult | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _run_row(cfg: ProtocolConfig) -> SweepRow:
    try:
        return SweepRow(cfg, run(cfg))
    except ScrambleVerifyError as exc:
        return SweepRow(cfg, None, f"{type(exc).__name__}: {exc}")


def sweep(configs: Iterable[ProtocolConfig], workers: int | None = None) -> list[SweepRow]:
    """Run every config; rows come back in input order whatever ``workers`` is.

    Per-run package errors are recorded on the row instead of aborting.
    """
    configs = list(configs)
    if not workers or workers <= 1 or len(configs) < 2:
        return [_run_row(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_row, configs, chunksize=max(1, len(configs) // (4 * workers))))


def state_grid(base: ProtocolConfig, labels: Sequence[str] = INPUT_LABELS) -> list[ProtocolConfig]:
    return [base.replace(input=InputState(lbl)) for lbl in labels]
