import numpy as np
import pytest

import dense_oracle as oracle
from scramble_verify import gates as G
from scramble_verify.circuits import (
    Circuit,
    PauliString,
    build_classical_scrambler,
    build_grover_scrambler,
    build_identity_control,
    build_scrambler,
    random_clifford,
)
from scramble_verify.errors import DomainError
from scramble_verify.otoc import OtocQuery, average_otoc, otoc_value
from scramble_verify.protocol import INPUT_LABELS, ideal_table

ZERO = np.array([1, 0])


def brute_otoc(u, psi, phi, h_letters):
    # independent construction: Alice operator placed with the oracle's embedding
    a = oracle.embed(np.outer(psi, np.conj(phi)), [0], 3)
    h = oracle.pauli_matrix(h_letters)
    ht = u.conj().T @ h @ u
    return np.trace(a.conj().T @ ht.conj().T @ a @ ht) / 8


def test_identity_disjoint_operators():
    q = OtocQuery(build_identity_control(), 1, ZERO, ZERO, PauliString(3, "IXI"))
    assert abs(otoc_value(q) - 0.5) < 1e-12


@pytest.mark.parametrize("circuit", [build_scrambler(1.0), build_scrambler(0.3), build_classical_scrambler()])
def test_identity_pauli_gives_half(circuit):
    q = OtocQuery(circuit, 2, oracle.PSI["0y"], oracle.PSI["1x"], PauliString(3, "III"))
    assert abs(otoc_value(q) - 0.5) < 1e-12


def test_otoc_value_against_brute_force():
    rng = np.random.default_rng(4)
    for circuit in (build_scrambler(0.65), random_clifford(rng)):
        u = oracle.circuit_matrix(circuit.gates, 3)
        for letters in ("XII", "IYI", "IIZ"):
            hq = next(i for i, ch in enumerate(letters) if ch != "I")
            for psi, phi in (("0x", "1y"), ("0z", "0z")):
                q = OtocQuery(circuit, hq, oracle.PSI[psi], oracle.PSI[phi], PauliString(3, letters))
                assert abs(otoc_value(q) - brute_otoc(u, oracle.PSI[psi], oracle.PSI[phi], letters)) < 1e-12


def test_query_validation():
    c = build_scrambler(1.0)
    with pytest.raises(DomainError):
        OtocQuery(c, 1, ZERO, ZERO, PauliString(3, "XII"))
    with pytest.raises(DomainError):
        OtocQuery(c, 1, np.array([1, 1]), ZERO, PauliString(3, "IXI"))
    with pytest.raises(DomainError):
        OtocQuery(c, 3, ZERO, ZERO, PauliString(3, "III"))
    with pytest.raises(DomainError):
        OtocQuery(Circuit(2), 1, ZERO, ZERO, PauliString(3, "III"))


@pytest.mark.parametrize("circuit", [build_scrambler(1.0), build_grover_scrambler()])
def test_maximal_average(circuit):
    for h in range(3):
        for label in INPUT_LABELS:
            assert abs(average_otoc(circuit, h, label) - 0.25) < 1e-12


def test_identity_average():
    for label in INPUT_LABELS:
        assert abs(average_otoc(build_identity_control(), 1, label) - 1.0) < 1e-12
        assert abs(average_otoc(build_identity_control(), 0, label) - 0.25) < 1e-12


def _check_equality(circuit):
    for (pair, label), r in ideal_table(circuit).items():
        assert abs(average_otoc(circuit, pair, label) - r.p_success) < 1e-9


@pytest.mark.parametrize("seed", range(20))
def test_equality_random_clifford(seed):
    _check_equality(random_clifford(np.random.default_rng(seed)))


@pytest.mark.parametrize("alpha", [0.13, 0.5, 0.91])
def test_equality_non_clifford(alpha):
    _check_equality(build_scrambler(alpha))


def test_equality_named_families():
    for c in (build_identity_control(), build_classical_scrambler(), build_grover_scrambler()):
        _check_equality(c)


def test_corrupted_weighting_breaks_equality():
    c = build_scrambler(1.0)
    assert abs(average_otoc(c, 0, "0z", d_a=1) - 0.25) > 0.1


@pytest.mark.parametrize("hawking", [0, 1, 2])
def test_invariance_under_local_z_rotations(hawking):
    base = random_clifford(np.random.default_rng(100 + hawking))
    angles = {q: 0.3 + 0.4 * q for q in range(3) if q != hawking}
    rot = Circuit(3, [G.rz(t, q) for q, t in angles.items()])
    conj = rot + base + rot.inverse()
    mean = lambda c: np.mean([average_otoc(c, hawking, lbl) for lbl in INPUT_LABELS])
    assert abs(mean(conj) - mean(base)) < 1e-9
