"""Named gates, rebuildable from ``(label, targets, params)``.

Every gate used by the package is created through :func:`make_gate`, so a
circuit can be serialized as labels plus angles and rebuilt bit-exactly.
A label ending in ``*`` denotes the elementwise complex conjugate of the
base gate.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .simkernel import GateOp

_SQ2 = 1 / np.sqrt(2)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_MATRICES = {"I": I2, "X": X, "Y": Y, "Z": Z}


def rx_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s], [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]],
        dtype=complex,
    )


_FIXED = {
    "i": (1, I2),
    "x": (1, X),
    "y": (1, Y),
    "z": (1, Z),
    "h": (1, np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2),
    "s": (1, np.diag([1, 1j])),
    "sdg": (1, np.diag([1, -1j])),
    "cx": (2, np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)),
    "cz": (2, np.diag([1, 1, 1, -1]).astype(complex)),
    "swap": (2, np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)),
    "ccz": (3, np.diag([1, 1, 1, 1, 1, 1, 1, -1]).astype(complex)),
}

_PARAMETRIC: dict[str, tuple[int, int, Callable[..., np.ndarray]]] = {
    # label: (n_targets, n_params, builder)
    "rx": (1, 1, rx_matrix),
    "ry": (1, 1, ry_matrix),
    "rz": (1, 1, rz_matrix),
    "u3": (1, 3, u3_matrix),
}

# label -> (conjugate label, param map); gates with real matrices map to themselves
_CONJ_RULES: dict[str, tuple[str, Callable[[tuple], tuple]]] = {
    "s": ("sdg", lambda p: p),
    "sdg": ("s", lambda p: p),
    "rx": ("rx", lambda p: (-p[0],)),
    "rz": ("rz", lambda p: (-p[0],)),
    "u3": ("u3", lambda p: (p[0], -p[1], -p[2])),
}
_REAL_LABELS = {"i", "x", "z", "h", "cx", "cz", "swap", "ccz", "ry"}

TWO_QUBIT_LABELS = frozenset(lbl for lbl, (k, _) in _FIXED.items() if k == 2)


def gate_matrix(label: str, params: Sequence[float] = ()) -> np.ndarray:
    if label.endswith("*"):
        return gate_matrix(label[:-1], params).conj()
    if label in _FIXED:
        if params:
            raise DomainError(f"gate {label!r} takes no parameters")
        return _FIXED[label][1]
    if label in _PARAMETRIC:
        _, n_params, build = _PARAMETRIC[label]
        if len(params) != n_params:
            raise DomainError(f"gate {label!r} takes {n_params} parameter(s), got {len(params)}")
        return build(*params)
    raise DomainError(f"unknown gate label {label!r}")


def make_gate(label: str, targets: Sequence[int], params: Sequence[float] = ()) -> GateOp:
    params = tuple(float(p) for p in params)
    return GateOp(gate_matrix(label, params), tuple(targets), label, params)


def conjugate_gate(gate: GateOp) -> GateOp:
    """Gate whose matrix is the elementwise conjugate of ``gate.matrix``."""
    label = gate.label
    if label in _REAL_LABELS:
        return gate
    if label in _CONJ_RULES:
        new_label, pmap = _CONJ_RULES[label]
        return make_gate(new_label, gate.targets, pmap(gate.params))
    if label.endswith("*"):
        return make_gate(label[:-1], gate.targets, gate.params)
    if label in _FIXED or label in _PARAMETRIC:
        return make_gate(label + "*", gate.targets, gate.params)
    return GateOp(gate.matrix.conj(), gate.targets, label + "*", gate.params)


_SELF_INVERSE = {"i", "x", "y", "z", "h", "cx", "cz", "swap", "ccz"}
_INV_RULES: dict[str, tuple[str, Callable[[tuple], tuple]]] = {
    "s": ("sdg", lambda p: p),
    "sdg": ("s", lambda p: p),
    "rx": ("rx", lambda p: (-p[0],)),
    "ry": ("ry", lambda p: (-p[0],)),
    "rz": ("rz", lambda p: (-p[0],)),
    "u3": ("u3", lambda p: (-p[0], -p[2], -p[1])),
}


def inverse_gate(gate: GateOp) -> GateOp:
    label = gate.label
    if label in _SELF_INVERSE:
        return gate
    if label in _INV_RULES:
        new_label, pmap = _INV_RULES[label]
        return make_gate(new_label, gate.targets, pmap(gate.params))
    if label.endswith("*") and label[:-1] in (_SELF_INVERSE | set(_INV_RULES)):
        base = make_gate(label[:-1], gate.targets, gate.params)
        return conjugate_gate(inverse_gate(base))
    return gate.dagger()


def remap_gate(gate: GateOp, mapping: dict) -> GateOp:
    return GateOp(gate.matrix, tuple(mapping[q] for q in gate.targets), gate.label, gate.params)


def h(q):
    return make_gate("h", (q,))


def x(q):
    return make_gate("x", (q,))


def s(q):
    return make_gate("s", (q,))


def rx(theta, q):
    return make_gate("rx", (q,), (theta,))


def ry(theta, q):
    return make_gate("ry", (q,), (theta,))


def rz(theta, q):
    return make_gate("rz", (q,), (theta,))


def u3(theta, phi, lam, q):
    return make_gate("u3", (q,), (theta, phi, lam))


def cx(control, target):
    return make_gate("cx", (control, target))


def cz(a, b):
    return make_gate("cz", (a, b))
