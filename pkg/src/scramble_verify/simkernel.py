"""Dense state-vector and density-matrix engine.

Conventions
-----------
* Qubit 0 is the least significant bit of a register's amplitude index.
* A ``GateOp`` matrix is written in the tensor-product order of its
  ``targets``: ``targets[0]`` is the leftmost Kronecker factor (the most
  significant bit of the *local* index). ``CNOT`` on ``targets=(c, t)`` is
  therefore the textbook matrix with control ``c``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, InvariantViolation

ATOL_STRUCT = 1e-10
MAX_QUBITS = 20
IMPOSSIBLE_PROB = 1e-12

EPR_VECTOR = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
EPR_PROJECTOR = np.outer(EPR_VECTOR, EPR_VECTOR.conj())


def _check_register(n_qubits: int) -> None:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise DomainError(f"register size must be in [1, {MAX_QUBITS}], got {n_qubits}")


def _check_targets(targets: Sequence[int], n_qubits: int) -> None:
    if len(set(targets)) != len(targets):
        raise DomainError(f"targets must be distinct, got {tuple(targets)}")
    for q in targets:
        if not 0 <= q < n_qubits:
            raise DomainError(f"qubit {q} outside a {n_qubits}-qubit register")


@dataclass(frozen=True)
class StateVector:
    """Pure state of ``n_qubits`` qubits as ``2**n_qubits`` amplitudes."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        _check_register(self.n_qubits)
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if amps.shape[0] != 2**self.n_qubits:
            raise DomainError(f"expected {2**self.n_qubits} amplitudes, got {amps.shape[0]}")
        object.__setattr__(self, "amps", amps)

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(self.n_qubits, np.outer(self.amps, self.amps.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state as a ``2**n x 2**n`` complex matrix."""

    n_qubits: int
    rho: np.ndarray

    def __post_init__(self):
        _check_register(self.n_qubits)
        rho = np.asarray(self.rho, dtype=complex)
        dim = 2**self.n_qubits
        if rho.shape != (dim, dim):
            raise DomainError(f"expected a {dim}x{dim} matrix, got {rho.shape}")
        object.__setattr__(self, "rho", rho)

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    @property
    def purity(self) -> float:
        return float(np.einsum("ij,ji->", self.rho, self.rho).real)

    def validate(self, atol: float = ATOL_STRUCT) -> None:
        """Raise ``InvariantViolation`` unless hermitian, unit-trace and PSD."""
        if not np.allclose(self.rho, self.rho.conj().T, atol=atol):
            raise InvariantViolation("density matrix is not hermitian")
        if abs(np.trace(self.rho) - 1) > atol:
            raise InvariantViolation(f"density matrix trace {np.trace(self.rho)} != 1")
        if np.linalg.eigvalsh(self.rho).min() < -1e-9:
            raise InvariantViolation("density matrix has a negative eigenvalue")


@dataclass(frozen=True, eq=False)
class GateOp:
    """A unitary on 1 to 3 target qubits.

    ``params`` carries the angles the gate was built from so that the gate
    can be serialized by label; the matrix is authoritative for simulation.
    """

    matrix: np.ndarray
    targets: tuple
    label: str = "unitary"
    params: tuple = field(default=())

    def __post_init__(self):
        targets = tuple(int(q) for q in self.targets)
        k = len(targets)
        if k not in (1, 2, 3):
            raise DomainError(f"gates act on 1 to 3 qubits, got {k}")
        if len(set(targets)) != k:
            raise DomainError(f"gate targets must be distinct, got {targets}")
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2**k, 2**k):
            raise DomainError(f"{k}-qubit gate needs a {2**k}x{2**k} matrix, got {m.shape}")
        if not np.allclose(m.conj().T @ m, np.eye(2**k), atol=ATOL_STRUCT):
            raise InvariantViolation(f"gate {self.label!r} is not unitary")
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    @property
    def n_targets(self) -> int:
        return len(self.targets)

    def __eq__(self, other):
        if not isinstance(other, GateOp):
            return NotImplemented
        return (
            self.label == other.label
            and self.targets == other.targets
            and self.params == other.params
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):
        return hash((self.label, self.targets, self.params))

    def dagger(self) -> "GateOp":
        return GateOp(self.matrix.conj().T, self.targets, self.label + "^dg", self.params)


@dataclass(frozen=True)
class KrausChannel:
    """Trace-preserving channel given by Kraus operators on ``targets``."""

    operators: tuple
    targets: tuple
    label: str = "kraus"

    def __post_init__(self):
        targets = tuple(int(q) for q in self.targets)
        k = len(targets)
        if len(set(targets)) != k or k == 0:
            raise DomainError(f"channel targets must be distinct and nonempty, got {targets}")
        ops = tuple(np.asarray(K, dtype=complex) for K in self.operators)
        if not ops:
            raise DomainError("a channel needs at least one Kraus operator")
        for K in ops:
            if K.shape != (2**k, 2**k):
                raise DomainError(f"Kraus operator shape {K.shape} does not match {k} targets")
        total = sum(K.conj().T @ K for K in ops)
        if not np.allclose(total, np.eye(2**k), atol=ATOL_STRUCT):
            raise InvariantViolation(f"channel {self.label!r} is not trace preserving")
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "operators", ops)


def _contract(tensor: np.ndarray, matrix: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Multiply ``matrix`` into ``tensor`` along ``axes`` (kron order)."""
    k = len(axes)
    op = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(op, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _row_axes(targets: Sequence[int], n: int) -> list:
    return [n - 1 - q for q in targets]


def _col_axes(targets: Sequence[int], n: int) -> list:
    return [2 * n - 1 - q for q in targets]


def _apply_matrix_sv(state: StateVector, matrix: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    n = state.n_qubits
    t = state.amps.reshape((2,) * n)
    return _contract(t, matrix, _row_axes(targets, n)).reshape(-1)


def _apply_matrix_dm(rho: DensityMatrix, left: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Return ``left @ rho @ left^dagger`` restricted to ``targets``."""
    n = rho.n_qubits
    t = rho.rho.reshape((2,) * (2 * n))
    t = _contract(t, left, _row_axes(targets, n))
    t = _contract(t, left.conj(), _col_axes(targets, n))
    return t.reshape(2**n, 2**n)


def init_basis(n_qubits: int, bitstring: int) -> StateVector:
    """Computational basis state ``|bitstring>`` on ``n_qubits`` qubits."""
    _check_register(n_qubits)
    if not 0 <= bitstring < 2**n_qubits:
        raise DomainError(f"basis index {bitstring} out of range for {n_qubits} qubits")
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[bitstring] = 1.0
    return StateVector(n_qubits, amps)


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    _check_targets(gate.targets, state.n_qubits)
    return StateVector(state.n_qubits, _apply_matrix_sv(state, gate.matrix, gate.targets))


def apply_gate_dm(rho: DensityMatrix, gate: GateOp) -> DensityMatrix:
    _check_targets(gate.targets, rho.n_qubits)
    return DensityMatrix(rho.n_qubits, _apply_matrix_dm(rho, gate.matrix, gate.targets))


def apply_channel(rho: DensityMatrix, ch: KrausChannel) -> DensityMatrix:
    """Evolve ``rho`` through ``ch``: ``sum_i K_i rho K_i^dagger``."""
    _check_targets(ch.targets, rho.n_qubits)
    out = sum(_apply_matrix_dm(rho, K, ch.targets) for K in ch.operators)
    return DensityMatrix(rho.n_qubits, out)


def project_epr(state: StateVector, qa: int, qb: int):
    """Project qubits ``(qa, qb)`` onto ``(|00> + |11>)/sqrt(2)``.

    Returns ``(prob, post_state)``. When ``prob <= 1e-12`` the outcome is
    treated as impossible and ``post_state`` is ``None``.
    """
    if qa == qb:
        raise DomainError("EPR projection needs two distinct qubits")
    _check_targets((qa, qb), state.n_qubits)
    projected = _apply_matrix_sv(state, EPR_PROJECTOR, (qa, qb))
    prob = float(np.vdot(projected, projected).real)
    if prob <= IMPOSSIBLE_PROB:
        return prob, None
    return min(prob, 1.0), StateVector(state.n_qubits, projected / np.sqrt(prob))


def epr_project_dm(rho: DensityMatrix, qa: int, qb: int):
    """Mixed-state form of :func:`project_epr`; ``prob = Tr[P_EPR rho]``."""
    if qa == qb:
        raise DomainError("EPR projection needs two distinct qubits")
    _check_targets((qa, qb), rho.n_qubits)
    projected = _apply_matrix_dm(rho, EPR_PROJECTOR, (qa, qb))
    prob = float(np.trace(projected).real)
    if prob <= IMPOSSIBLE_PROB:
        return prob, None
    return min(prob, 1.0), DensityMatrix(rho.n_qubits, projected / prob)


def reduced_density(state: StateVector | DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Partial trace onto ``keep``; ``keep[i]`` becomes qubit ``i`` of the result."""
    keep = [int(q) for q in keep]
    if not keep:
        raise DomainError("keep must be nonempty")
    n = state.n_qubits
    _check_targets(keep, n)
    m = len(keep)
    kept_axes = [n - 1 - keep[i] for i in reversed(range(m))]
    traced_axes = [a for a in range(n) if a not in kept_axes]
    if isinstance(state, StateVector):
        t = state.amps.reshape((2,) * n).transpose(kept_axes + traced_axes)
        t = t.reshape(2**m, -1)
        return DensityMatrix(m, t @ t.conj().T)
    t = state.rho.reshape((2,) * (2 * n))
    perm = kept_axes + traced_axes + [a + n for a in kept_axes] + [a + n for a in traced_axes]
    t = t.transpose(perm).reshape(2**m, 2 ** (n - m), 2**m, 2 ** (n - m))
    return DensityMatrix(m, np.einsum("ajbj->ab", t))


def fidelity_pure(rho: DensityMatrix, target: StateVector) -> float:
    """``<target| rho |target>``."""
    if rho.n_qubits != target.n_qubits:
        raise DomainError(
            f"dimension mismatch: {rho.n_qubits}-qubit state vs {target.n_qubits}-qubit target"
        )
    return float(np.vdot(target.amps, rho.rho @ target.amps).real)
