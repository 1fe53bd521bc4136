"""Brute-force reference simulation, sharing no code with the engine.

Operators are embedded by explicit loops over basis indices and states are
assembled amplitude by amplitude. Slow, but obviously correct.
"""

import itertools

import numpy as np

SQ2 = np.sqrt(2)
EPR = np.array([1, 0, 0, 1], dtype=complex) / SQ2

PSI = {
    "0z": np.array([1, 0], dtype=complex),
    "1z": np.array([0, 1], dtype=complex),
    "0x": np.array([1, 1], dtype=complex) / SQ2,
    "1x": np.array([1, -1], dtype=complex) / SQ2,
    "0y": np.array([1, 1j], dtype=complex) / SQ2,
    "1y": np.array([1, -1j], dtype=complex) / SQ2,
}
PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def bit(i, q):
    return (i >> q) & 1


def embed(matrix, targets, n):
    """Full 2**n operator; ``targets[0]`` is the most significant local bit."""
    k = len(targets)
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        local_in = sum(bit(col, t) << (k - 1 - j) for j, t in enumerate(targets))
        rest = col
        for t in targets:
            rest &= ~(1 << t)
        for local_out in range(2**k):
            amp = matrix[local_out, local_in]
            if amp == 0:
                continue
            row = rest
            for j, t in enumerate(targets):
                row |= ((local_out >> (k - 1 - j)) & 1) << t
            out[row, col] += amp
    return out


def circuit_matrix(gates, n, mapping=None):
    mapping = mapping or list(range(n))
    u = np.eye(2**n, dtype=complex)
    for g in gates:
        u = embed(g.matrix, [mapping[q] for q in g.targets], n) @ u
    return u


def pauli_matrix(letters):
    """``letters[q]`` acts on qubit q (qubit 0 least significant)."""
    m = np.array([[1]], dtype=complex)
    for ch in reversed(letters):
        m = np.kron(m, PAULI[ch])
    return m


def pauli_decompose(m):
    n = int(np.log2(m.shape[0]))
    out = {}
    for letters in itertools.product("IXYZ", repeat=n):
        c = np.trace(pauli_matrix(letters).conj().T @ m) / m.shape[0]
        if abs(c) > 1e-9:
            out["".join(letters)] = c
    return out


def initial_state(psi):
    """|psi>_q0 (x) EPR(q1,q3) (x) EPR(q2,q4) (x) EPR(q5,q6)."""
    amps = np.zeros(128, dtype=complex)
    for i in range(128):
        if bit(i, 1) != bit(i, 3) or bit(i, 2) != bit(i, 4) or bit(i, 5) != bit(i, 6):
            continue
        amps[i] = psi[bit(i, 0)] / (SQ2**3)
    return amps


def reduced_q6(state):
    rho = np.zeros((2, 2), dtype=complex)
    for i in range(128):
        for j in range(128):
            if (i & 63) == (j & 63):
                rho[bit(i, 6), bit(j, 6)] += state[i] * np.conj(state[j])
    return rho


PAIRS = [(0, 5), (1, 3), (2, 4)]


def protocol_state(u8, psi_label, mismatch=None):
    """State after U on (q0,q1,q2) and conj(U) on (q5,q3,q4); ``u8`` in qubit-0-LSB order."""
    s = initial_state(PSI[psi_label])
    s = embed(u8, [2, 1, 0], 7) @ s
    if mismatch is not None:
        for q in (0, 1, 2):
            s = embed(mismatch, [q], 7) @ s
    s = embed(u8.conj(), [4, 3, 5], 7) @ s
    return s


def probabilistic(u8, psi_label, pair, mismatch=None):
    s = protocol_state(u8, psi_label, mismatch)
    proj = embed(np.outer(EPR, EPR.conj()), list(PAIRS[pair]), 7)
    s = proj @ s
    p = float(np.vdot(s, s).real)
    if p < 1e-12:
        return p, None
    rho = reduced_q6(s / np.sqrt(p))
    v = PSI[psi_label]
    return p, float(np.vdot(v, rho @ v).real)


def grover(u8, psi_label, pair, purify=False):
    s = protocol_state(u8, psi_label)
    p_pair = embed(np.outer(EPR, EPR.conj()), list(PAIRS[pair]), 7)
    p_anc = embed(np.outer(EPR, EPR.conj()), [5, 6], 7)
    ud = embed(u8.conj(), [4, 3, 5], 7)
    eye = np.eye(128)
    g = ud @ (2 * p_anc - eye) @ ud.conj().T @ (eye - 2 * p_pair)
    s = g @ s
    p = 1.0
    if purify:
        s = p_pair @ s
        p = float(np.vdot(s, s).real)
        s = s / np.sqrt(p)
    rho = reduced_q6(s)
    v = PSI[psi_label]
    return p, float(np.vdot(v, rho @ v).real)
