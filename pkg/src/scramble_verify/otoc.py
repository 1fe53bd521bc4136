"""Out-of-time-ordered correlators of 3-qubit scramblers.

``otoc_value`` is the infinite-temperature four-point function
``Tr[A^dag H(t)^dag A H(t)] / 2**3`` with ``H(t) = U^dag H U``, where
``A = |psi><phi|`` acts on qubit 0 and ``H`` is a Pauli on the Hawking qubit.

``average_otoc`` averages ``phi`` over the six Pauli eigenstates and ``H``
over ``{I, X, Y, Z}``, and multiplies by the input dimension ``d_A = 2``.
With that normalization the average equals the noiseless EPR success
probability on the mirror pair of the Hawking qubit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, PauliString, total_unitary
from .errors import DomainError, InvariantViolation
from .protocol import ALL_INPUTS, InputState

D_A = 2


@dataclass(frozen=True)
class OtocQuery:
    scrambler: Circuit
    hawking_qubit: int
    psi: np.ndarray
    phi: np.ndarray
    o_h: PauliString

    def __post_init__(self):
        if self.scrambler.n_qubits != 3:
            raise DomainError("OTOC queries are defined on 3-qubit scramblers")
        if self.hawking_qubit not in (0, 1, 2):
            raise DomainError(f"hawking_qubit must be 0, 1 or 2, got {self.hawking_qubit}")
        for name in ("psi", "phi"):
            v = np.asarray(getattr(self, name), dtype=complex).reshape(-1)
            if v.shape != (2,) or abs(np.vdot(v, v).real - 1) > 1e-10:
                raise DomainError(f"{name} must be a unit-norm single-qubit state")
            object.__setattr__(self, name, v)
        if self.o_h.n_qubits != 3:
            raise DomainError("o_h must be a 3-qubit Pauli string")
        support = {q for q, ch in enumerate(self.o_h.letters) if ch != "I"}
        if not support <= {self.hawking_qubit}:
            raise DomainError("o_h must act only on the Hawking qubit")


def _alice_operator(psi: np.ndarray, phi: np.ndarray) -> np.ndarray:
    # qubit 0 is the least significant bit, so it is the rightmost kron factor
    return np.kron(np.eye(4), np.outer(psi, phi.conj()))


def _otoc(u: np.ndarray, a: np.ndarray, h: np.ndarray) -> complex:
    ht = u.conj().T @ h @ u
    return complex(np.trace(a.conj().T @ ht.conj().T @ a @ ht) / u.shape[0])


def otoc_value(q: OtocQuery) -> complex:
    u = total_unitary(q.scrambler)
    return _otoc(u, _alice_operator(q.psi, q.phi), q.o_h.matrix())


def average_otoc(
    scrambler: Circuit, hawking_qubit: int, psi: InputState | str, *, d_a: float = D_A
) -> float:
    """Discrete state/Pauli average of the OTOC, scaled by ``d_a``.

    ``d_a`` exists so a deliberately wrong weighting can be injected in
    negative-control runs; leave it at the default otherwise.
    """
    if isinstance(psi, str):
        psi = InputState(psi)
    if scrambler.n_qubits != 3 or hawking_qubit not in (0, 1, 2):
        raise DomainError("average_otoc needs a 3-qubit scrambler and hawking_qubit in {0, 1, 2}")
    u = total_unitary(scrambler)
    paulis = [PauliString.single(3, hawking_qubit, ch).matrix() for ch in "IXYZ"]
    total = 0j
    for phi in ALL_INPUTS:
        a = _alice_operator(psi.amplitudes, phi.amplitudes)
        total += sum(_otoc(u, a, h) for h in paulis)
    value = d_a * total / (len(ALL_INPUTS) * len(paulis))
    if abs(value.imag) > 1e-9:
        raise InvariantViolation(f"averaged OTOC has imaginary residue {value.imag:.3e}")  # pragma: no cover
    return float(value.real)
