"""Scrambler families, circuit algebra and Pauli propagation.

The maximally scrambling family is written as

    U(alpha) = W^dagger . [Rz(alpha*pi/2) on q0, q1, q2] . W

with a fixed Clifford skeleton ``W``. Equivalently
``U(alpha) = exp(-i alpha pi/4 (X0 Z1 X2 + Z0 X1 X2 + Z0 Z1 Z2))`` (letters
indexed by qubit), which is the identity at ``alpha = 0`` and at ``alpha = 1``
maps every weight-1 Pauli to a weight-3 Pauli. Only the z-rotation angles
depend on ``alpha``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from os import PathLike
from typing import Sequence

import numpy as np

from . import gates as G
from .errors import CapabilityError, DomainError, NotCliffordError
from .simkernel import GateOp, _contract

MAX_DENSE_QUBITS = 10

FAMILIES = ("interpolating", "classical", "identity_control", "grover_family", "custom")


@dataclass(frozen=True)
class Circuit:
    """Ordered gates on a fixed register. Immutable."""

    n_qubits: int
    gates: tuple = ()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise DomainError("a circuit needs at least one qubit")
        gates = tuple(self.gates)
        for g in gates:
            if not isinstance(g, GateOp):
                raise DomainError(f"circuit entries must be GateOp, got {type(g).__name__}")
            if max(g.targets) >= self.n_qubits:
                raise DomainError(f"gate {g.label} on {g.targets} outside {self.n_qubits} qubits")
        object.__setattr__(self, "gates", gates)

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise DomainError("cannot concatenate circuits on different registers")
        return Circuit(self.n_qubits, self.gates + other.gates)

    def remap(self, mapping: Sequence[int], n_qubits: int) -> "Circuit":
        """Relabel qubit ``q`` as ``mapping[q]`` on an ``n_qubits`` register."""
        m = dict(enumerate(mapping))
        return Circuit(n_qubits, tuple(G.remap_gate(g, m) for g in self.gates))

    def inverse(self) -> "Circuit":
        return Circuit(self.n_qubits, tuple(G.inverse_gate(g) for g in reversed(self.gates)))

    def count(self, n_targets: int | None = None) -> int:
        if n_targets is None:
            return len(self.gates)
        return sum(1 for g in self.gates if g.n_targets == n_targets)

    def to_dict(self) -> dict:
        out = []
        for g in self.gates:
            try:
                rebuilt = G.gate_matrix(g.label, g.params)
            except DomainError:
                rebuilt = None
            if rebuilt is None or not np.array_equal(rebuilt, g.matrix):
                raise DomainError(f"gate {g.label!r} cannot be rebuilt from its label")
            out.append({"label": g.label, "targets": list(g.targets), "params": list(g.params)})
        return {"n_qubits": self.n_qubits, "gates": out}

    @classmethod
    def from_dict(cls, payload: dict) -> "Circuit":
        try:
            n = int(payload["n_qubits"])
            gates = tuple(
                G.make_gate(d["label"], d["targets"], d.get("params", ())) for d in payload["gates"]
            )
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed circuit document: {exc}") from exc
        return cls(n, gates)

    def to_json(self, path: str | PathLike | None = None, **kwargs) -> str:
        text = json.dumps(self.to_dict(), **kwargs)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_json(cls, source: str | PathLike) -> "Circuit":
        """Load from a JSON string or a path to a JSON file."""
        text = str(source)
        if not text.lstrip().startswith("{"):
            with open(source) as fh:
                text = fh.read()
        return cls.from_dict(json.loads(text))


def total_unitary(c: Circuit) -> np.ndarray:
    """Dense ``2**n x 2**n`` product of the circuit's gates (qubit 0 = LSB)."""
    n = c.n_qubits
    if n > MAX_DENSE_QUBITS:
        raise CapabilityError(f"dense unitary limited to {MAX_DENSE_QUBITS} qubits, got {n}")
    dim = 2**n
    # trailing axis indexes the columns of the running product
    t = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for g in c.gates:
        t = _contract(t, g.matrix, [n - 1 - q for q in g.targets])
    return t.reshape(dim, dim)


def conjugate_circuit(c: Circuit) -> Circuit:
    """Circuit whose total unitary is ``conj(total_unitary(c))``."""
    return Circuit(c.n_qubits, tuple(G.conjugate_gate(g) for g in c.gates))


def inverse_circuit(c: Circuit) -> Circuit:
    return c.inverse()


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-9) -> bool:
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[idx]) < atol:
        return np.allclose(a, b, atol=atol)
    phase = a[idx] / b[idx]
    if abs(abs(phase) - 1) > atol:
        return False
    return np.allclose(a, phase * b, atol=atol)


def distance_to_identity(u: np.ndarray) -> float:
    """Max elementwise distance from ``u`` to ``e^{i g} I`` with the best phase."""
    phase = np.trace(u) / u.shape[0]
    phase = phase / abs(phase) if abs(phase) > 0 else 1.0
    return float(np.max(np.abs(u - phase * np.eye(u.shape[0]))))


# ---------------------------------------------------------------- Pauli strings

_PHASES = (1, 1j, -1, -1j)


@dataclass(frozen=True)
class PauliString:
    """``phase * P[n-1] (x) ... (x) P[0]``; ``letters[q]`` acts on qubit ``q``."""

    n_qubits: int
    letters: str
    phase: complex = 1

    def __post_init__(self):
        letters = self.letters.upper()
        if len(letters) != self.n_qubits or set(letters) - set("IXYZ"):
            raise DomainError(f"bad Pauli letters {self.letters!r} for {self.n_qubits} qubits")
        phase = complex(self.phase)
        if not any(abs(phase - p) < 1e-12 for p in _PHASES):
            raise DomainError(f"Pauli phase must be one of +-1, +-i, got {self.phase}")
        phase = complex(round(phase.real), round(phase.imag))
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "phase", phase)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str) -> "PauliString":
        letters = ["I"] * n_qubits
        letters[qubit] = letter
        return cls(n_qubits, "".join(letters))

    @property
    def weight(self) -> int:
        return sum(ch != "I" for ch in self.letters)

    def matrix(self) -> np.ndarray:
        m = np.array([[self.phase]], dtype=complex)
        for ch in reversed(self.letters):
            m = np.kron(m, G.PAULI_MATRICES[ch])
        return m

    def __str__(self):
        sign = {1: "+", -1: "-", 1j: "+i", -1j: "-i"}[self.phase]
        return sign + self.letters


def all_pauli_strings(n_qubits: int, include_identity: bool = False) -> list[PauliString]:
    out = [PauliString(n_qubits, "".join(t)) for t in itertools.product("IXYZ", repeat=n_qubits)]
    return out if include_identity else [p for p in out if p.weight > 0]


def _local_letters(gate: GateOp, letters: str) -> str:
    # kron order of the gate matrix: targets[0] leftmost
    return "".join(letters[q] for q in gate.targets)


def _conjugate_local(gate: GateOp, local: str):
    """Return ``(letters, phase)`` with ``g^dag P g = phase * letters``."""
    p = np.array([[1]], dtype=complex)
    for ch in local:
        p = np.kron(p, G.PAULI_MATRICES[ch])
    m = gate.matrix.conj().T @ p @ gate.matrix
    k = gate.n_targets
    for cand in itertools.product("IXYZ", repeat=k):
        q = np.array([[1]], dtype=complex)
        for ch in cand:
            q = np.kron(q, G.PAULI_MATRICES[ch])
        coeff = np.trace(q.conj().T @ m) / 2**k
        if abs(coeff) > 1e-9:
            if abs(abs(coeff) - 1) > 1e-9:
                raise NotCliffordError(
                    f"gate {gate.label!r} on {gate.targets} maps {local} to a Pauli sum; "
                    "use dense conjugation via total_unitary instead"
                )
            return "".join(cand), coeff
    raise NotCliffordError(f"gate {gate.label!r} produced a zero operator")  # pragma: no cover


def pauli_propagate(c: Circuit, p: PauliString) -> PauliString:
    """Heisenberg-evolve ``p`` through ``c``: returns ``U^dagger p U``."""
    if p.n_qubits != c.n_qubits:
        raise DomainError("Pauli string and circuit act on different registers")
    letters = list(p.letters)
    phase = p.phase
    for g in reversed(c.gates):
        local = _local_letters(g, letters)
        new_local, coeff = _conjugate_local(g, local)
        for q, ch in zip(g.targets, new_local):
            letters[q] = ch
        phase *= coeff
    phase = complex(np.round(phase.real, 9), np.round(phase.imag, 9))
    return PauliString(c.n_qubits, "".join(letters), phase)


def is_clifford(c: Circuit) -> bool:
    try:
        for q in range(c.n_qubits):
            for ch in "XZ":
                pauli_propagate(c, PauliString.single(c.n_qubits, q, ch))
    except NotCliffordError:
        return False
    return True


# ---------------------------------------------------------------- scramblers


@dataclass(frozen=True)
class ScramblerSpec:
    """Which 3-qubit unitary plays the role of the scrambler.

    ``alpha`` is only read by the ``interpolating`` family; ``circuit`` only
    by ``custom``.
    """

    family: str = "interpolating"
    alpha: float = 1.0
    circuit: Circuit | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown scrambler family {self.family!r}; expected one of {FAMILIES}")
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.family == "custom" and (self.circuit is None or self.circuit.n_qubits != 3):
            raise DomainError("custom scramblers need a 3-qubit circuit")

    @property
    def name(self) -> str:
        if self.family == "interpolating":
            return f"interpolating(alpha={self.alpha:g})"
        return self.family

    def build(self) -> Circuit:
        if self.family == "interpolating":
            return build_scrambler(self.alpha)
        if self.family == "classical":
            return build_classical_scrambler()
        if self.family == "identity_control":
            return build_identity_control()
        if self.family == "grover_family":
            return build_grover_scrambler()
        return self.circuit


def _skeleton() -> list[GateOp]:
    return [G.cx(1, 2), G.cx(0, 2), G.h(0), G.cx(0, 1), G.h(0)]


def build_scrambler(alpha: float) -> Circuit:
    """Interpolating family: identity at ``alpha=0``, maximal at ``alpha=1``."""
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    w = Circuit(3, _skeleton())
    layer = Circuit(3, [G.rz(alpha * np.pi / 2, q) for q in range(3)])
    return w + layer + w.inverse()


def build_identity_control() -> Circuit:
    """Identity built from the same gates as ``build_scrambler(1)``.

    The z-rotations are set to zero angle, so gate count and gate types match
    the maximal scrambler exactly.
    """
    return build_scrambler(0.0)


def build_classical_scrambler() -> Circuit:
    """Diagonal Clifford: commutes with every ``Z_i``, scrambles phase only."""
    return Circuit(3, [G.cz(0, 1), G.cz(1, 2), G.cz(0, 2)])


def build_grover_scrambler() -> Circuit:
    """A second maximal scrambler (real, graph-state type) used with the Grover decoder."""
    ring = [G.cz(0, 1), G.cz(1, 2), G.cz(0, 2)]
    return Circuit(3, ring + [G.h(q) for q in range(3)] + ring)


def random_clifford(rng: np.random.Generator, n_qubits: int = 3, depth: int = 20) -> Circuit:
    """Random circuit of H, S and CNOT gates (a Clifford, not Haar over the group)."""
    out = []
    for _ in range(depth):
        kind = rng.integers(3)
        if kind == 0:
            out.append(G.h(int(rng.integers(n_qubits))))
        elif kind == 1:
            out.append(G.s(int(rng.integers(n_qubits))))
        else:
            a, b = rng.choice(n_qubits, size=2, replace=False)
            out.append(G.cx(int(a), int(b)))
    return Circuit(n_qubits, out)


def is_maximal_scrambler(c: Circuit) -> bool:
    """True iff ideal teleportation has fidelity > 1 - 1e-6 for all states and pairs."""
    from .protocol import ideal_table

    if c.n_qubits != 3:
        raise DomainError("maximality is defined for 3-qubit scramblers")
    table = ideal_table(c)
    return all(r.fidelity_defined and r.fidelity > 1 - 1e-6 for r in table.values())


def gate_signature(c: Circuit) -> list[tuple]:
    """(label, targets) per gate; equal signatures mean equal skeletons."""
    return [(g.label, g.targets) for g in c.gates]

