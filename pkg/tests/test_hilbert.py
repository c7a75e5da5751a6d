import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperepp import hilbert as H
from hyperepp.errors import ArgumentError, DomainError

SQRT_HALF = 1.0 / math.sqrt(2.0)


def random_state(rng, register):
    amps = rng.normal(size=2 ** len(register)) + 1j * rng.normal(size=2 ** len(register))
    amps /= np.linalg.norm(amps)
    return H.StateVector(tuple(register), amps)


def test_register_canonical_order():
    labels = [
        H.nv_qubit("nv2"),
        H.photon_qubit("B", "P"),
        H.photon_qubit("A", "S"),
        H.photon_qubit("A", "P"),
        H.nv_qubit("nv1"),
        H.photon_qubit("A'", "P"),
    ]
    ordered = H.canonical_register(labels)
    assert [str(lbl) for lbl in ordered] == ["A.P", "A.S", "B.P", "A'.P", "nv:nv1", "nv:nv2"]


def test_duplicate_labels_rejected():
    lbl = H.photon_qubit("A", "P")
    with pytest.raises(ArgumentError):
        H.StateVector((lbl, lbl), np.zeros(4))
    with pytest.raises(ArgumentError):
        H.make_hyper_bell(H.HyperBellSpec(H.PHI_PLUS, H.PHI_PLUS, H.PHI_PLUS), ("A", "A"))


def test_bell_amplitudes():
    q1, q2 = H.photon_qubit("A", "P"), H.photon_qubit("C", "P")
    phi_plus = H.make_bell(H.PHI_PLUS, q1, q2)
    assert phi_plus.amps[0b00] == pytest.approx(SQRT_HALF)
    assert phi_plus.amps[0b11] == pytest.approx(SQRT_HALF)
    psi_minus = H.make_bell(H.PSI_MINUS, q1, q2)
    # + amplitude on |A=R, C=L> (bit pattern q1=0, q2=1)
    assert psi_minus.amps[0b10] == pytest.approx(SQRT_HALF)
    assert psi_minus.amps[0b01] == pytest.approx(-SQRT_HALF)


def test_hyper_bell_has_eight_aligned_components():
    spec = H.HyperBellSpec(H.PHI_PLUS, H.PHI_PLUS, H.PHI_PLUS)
    state = H.make_hyper_bell(spec, ("A", "B"))
    nonzero = np.nonzero(state.amps)[0]
    assert len(nonzero) == 8
    assert np.allclose(state.amps[nonzero], 1.0 / (2.0 * math.sqrt(2.0)))
    assert state.norm2() == pytest.approx(1.0)
    # every spec is normalized
    for spec in H.all_hyper_specs()[:8]:
        assert H.make_hyper_bell(spec, ("A", "B")).norm2() == pytest.approx(1.0)


def test_hyper_bell_specs_mutually_orthogonal():
    states = [H.make_hyper_bell(spec, ("A", "B")) for spec in H.all_hyper_specs()]
    mat = np.array([s.amps for s in states])
    gram = mat.conj() @ mat.T
    assert np.allclose(gram, np.eye(64), atol=1e-12)


def test_tensor_and_reorder_round_trip():
    rng = np.random.default_rng(3)
    a = random_state(rng, [H.photon_qubit("A", "P"), H.photon_qubit("A", "F")])
    b = random_state(rng, [H.photon_qubit("B", "P")])
    joint = H.tensor(a, b)
    assert joint.n_qubits == 3
    shuffled = H.reorder(joint, (joint.register[2], joint.register[0], joint.register[1]))
    back = H.reorder(shuffled, joint.register)
    assert np.allclose(back.amps, joint.amps)
    with pytest.raises(ArgumentError):
        H.tensor(a, a)


def test_apply_single_on_chosen_qubit_only():
    rng = np.random.default_rng(5)
    reg = [H.photon_qubit("A", "P"), H.photon_qubit("A", "F")]
    state = random_state(rng, reg)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    flipped = H.apply_single(state, reg[1], x)
    # bit 1 toggled
    expect = state.amps.reshape(2, 2)[::-1, :].reshape(-1)
    assert np.allclose(flipped.amps, expect)


def test_swap_qubits_permutes_amplitudes():
    reg = (H.photon_qubit("A", "P"), H.photon_qubit("A", "F"))
    state = H.basis_state(reg, (1, 0))
    swapped = H.swap_qubits(state, *reg)
    assert np.allclose(swapped.amps, H.basis_state(reg, (0, 1)).amps)


def test_measure_deterministic_branch():
    nv = H.nv_qubit("n")
    phi_plus = H.StateVector((nv,), np.array([SQRT_HALF, SQRT_HALF]))
    result = H.measure(phi_plus, nv, ((SQRT_HALF, SQRT_HALF), (SQRT_HALF, -SQRT_HALF)), ("even", "odd"))
    assert result.survival == pytest.approx(1.0)
    assert len(result.branches) == 1
    assert result.branches[0].outcome == "even"
    assert result.branches[0].probability == pytest.approx(1.0)


def test_measure_balanced_branches():
    nv = H.nv_qubit("n")
    up = H.StateVector((nv,), np.array([1.0, 0.0]))
    result = H.measure(up, nv, ((SQRT_HALF, SQRT_HALF), (SQRT_HALF, -SQRT_HALF)), ("even", "odd"))
    assert [b.outcome for b in result.branches] == ["even", "odd"]
    for branch in result.branches:
        assert branch.probability == pytest.approx(0.5)
        assert branch.state.norm2() == pytest.approx(1.0)


def test_measure_accounts_for_loss():
    nv = H.nv_qubit("n")
    lossy = H.StateVector((nv,), np.array([0.6, 0.3]))  # norm^2 = 0.45
    result = H.measure(lossy, nv, ((1.0, 0.0), (0.0, 1.0)))
    total = sum(b.probability for b in result.branches)
    assert total == pytest.approx(1.0)
    assert result.survival + (1.0 - result.survival) == pytest.approx(1.0)
    assert result.survival == pytest.approx(0.45)
    with pytest.raises(DomainError):
        H.measure(H.StateVector((nv,), np.zeros(2)), nv, ((1.0, 0.0), (0.0, 1.0)))
    with pytest.raises(ArgumentError):
        H.measure(lossy, nv, ((1.0, 0.0), (1.0, 0.0)))


def test_measure_remove_matches_measure():
    rng = np.random.default_rng(11)
    reg = [H.photon_qubit("A", "P"), H.nv_qubit("n")]
    state = random_state(rng, reg)
    basis = ((SQRT_HALF, SQRT_HALF), (SQRT_HALF, -SQRT_HALF))
    full = H.measure(state, reg[1], basis, ("e", "o"))
    survival, reduced = H.measure_remove(state, reg[1], basis, ("e", "o"))
    assert survival == pytest.approx(full.survival)
    for branch, (name, prob, small) in zip(full.branches, reduced):
        assert branch.outcome == name
        assert branch.probability == pytest.approx(prob)
        vec = np.asarray(basis[0 if name == "e" else 1])
        assert np.allclose(H.project_out(branch.state, reg[1], vec).amps, small.amps)


def test_fidelity_properties():
    rng = np.random.default_rng(7)
    reg = [H.photon_qubit("A", "P"), H.photon_qubit("B", "P")]
    a = random_state(rng, reg)
    b = random_state(rng, reg)
    assert H.fidelity(a, a) == pytest.approx(1.0)
    assert H.fidelity(a, b) == pytest.approx(H.fidelity(b, a))
    scaled = H.StateVector(a.register, 0.9 * a.amps)
    assert H.fidelity(scaled, a) == pytest.approx(1.0)
    orthogonal = H.StateVector(tuple(reg), np.array([1, 0, 0, 0], dtype=complex))
    other = H.StateVector(tuple(reg), np.array([0, 1, 0, 0], dtype=complex))
    assert H.fidelity(orthogonal, other) == pytest.approx(0.0)
    with pytest.raises(DomainError):
        H.fidelity(H.StateVector(tuple(reg), np.zeros(4)), a)


@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_measure_probability_conservation(data):
    rng = np.random.default_rng(data.draw(st.integers(min_value=0, max_value=10_000)))
    reg = [H.photon_qubit("A", "P"), H.photon_qubit("A", "F"), H.nv_qubit("n")]
    state = random_state(rng, reg)
    scale = data.draw(st.floats(min_value=0.1, max_value=1.0))
    lossy = H.StateVector(state.register, scale * state.amps)
    result = H.measure(lossy, reg[2], ((SQRT_HALF, SQRT_HALF), (SQRT_HALF, -SQRT_HALF)))
    branch_mass = sum(b.probability for b in result.branches) * result.survival
    assert branch_mass + (1.0 - result.survival) == pytest.approx(1.0, abs=1e-12)


def test_measure_in_complex_basis():
    nv = H.nv_qubit("n")
    state = H.StateVector((nv,), np.array([1.0, 0.0]))
    circular = ((SQRT_HALF, SQRT_HALF * 1j), (SQRT_HALF, -SQRT_HALF * 1j))
    result = H.measure(state, nv, circular, ("left", "right"))
    assert [b.outcome for b in result.branches] == ["left", "right"]
    for branch, vec in zip(result.branches, circular):
        assert branch.probability == pytest.approx(0.5)
        assert np.allclose(branch.state.amps, np.asarray(vec) * np.exp(1j * np.angle(branch.state.amps[0])))


def test_fidelity_register_order_independent():
    rng = np.random.default_rng(21)
    reg = [H.photon_qubit("A", "P"), H.photon_qubit("B", "P"), H.photon_qubit("A", "F")]
    state = random_state(rng, reg)
    shuffled = H.reorder(state, (reg[2], reg[0], reg[1]))
    assert H.fidelity(state, shuffled) == pytest.approx(1.0, abs=1e-12)


def test_canonical_ensemble_weights():
    ens = H.canonical_ensemble(0.8, 0.8, 0.8)
    assert len(ens.terms) == 8
    weights = {str(spec): w for w, spec in ens.terms}
    assert weights["phi+xphi+xphi+"] == pytest.approx(0.512)
    assert sum(w for w, _ in ens.terms) == pytest.approx(1.0)
    pure = H.canonical_ensemble(1.0, 1.0, 1.0)
    live = [(w, spec) for w, spec in pure.terms if w > 0]
    assert len(live) == 1 and str(live[0][1]) == "phi+xphi+xphi+"
    ens2 = H.canonical_ensemble(0.7, 0.6, 0.9)
    assert sum(w for w, _ in ens2.terms) == pytest.approx(1.0)
    with pytest.raises(ArgumentError):
        H.canonical_ensemble(1.2, 0.5, 0.5)


def test_serialization_round_trip_and_cutoff():
    reg = (H.photon_qubit("A", "P"), H.photon_qubit("B", "P"))
    amps = np.array([SQRT_HALF, 1e-16, 0.0, -SQRT_HALF], dtype=complex)
    state = H.StateVector(reg, amps)
    text = H.serialize_amplitudes(state)
    lines = text.strip().splitlines()
    assert len(lines) == 2  # tiny amplitude omitted
    assert lines[0].split("\t")[0] == "00"
    parsed = H.deserialize_amplitudes(text, reg)
    assert np.allclose(parsed.amps, [SQRT_HALF, 0, 0, -SQRT_HALF])


def test_bell_label_parsing():
    assert H.BellLabel.parse("phi+") == H.PHI_PLUS
    assert H.BellLabel.parse("PSI-") == H.PSI_MINUS
    with pytest.raises(ArgumentError):
        H.BellLabel.parse("chi+")
