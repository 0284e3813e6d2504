import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udwgates.channels import (
    FIELD_NAMES,
    REFERENCE_NAMES,
    FieldStep,
    Layout,
    QuantumChannel,
    QubitStep,
    channel_from_circuit,
    dephasing_channel,
    depolarizing_channel,
    field_channels,
    random_channel,
    receiver_state,
    reference_channels,
)
from udwgates.errors import DimensionMismatchError, InvariantError
from udwgates.field import FockBackend, SmearingSpec, calibrate_gamma
from udwgates.gates import u_zphi
from udwgates.numerics import random_density
from udwgates.qubit import basis_ket, single_qubit_gate, swap_gate


def _dm(k):
    return np.outer(k, k.conj())


@pytest.fixture(scope="module")
def strong_cal():
    return calibrate_gamma(SmearingSpec(), 6.0)


# --- the channel type ---------------------------------------------------------


@pytest.mark.parametrize("in_dim, out_dim, rank", [(2, 2, 1), (2, 2, 4), (2, 4, 3), (4, 2, 8)])
def test_random_channel_is_cptp(rng, in_dim, out_dim, rank):
    ch = random_channel(in_dim, out_dim, rng, rank)
    assert ch.is_cptp(1e-10)
    assert ch.kraus_completeness() < 1e-10
    assert ch.choi_min_eigenvalue() > -1e-10


def test_kraus_and_choi_actions_agree(rng):
    ch = random_channel(2, 3, rng, 3)
    rho = random_density(2, rng).data
    assert np.allclose(ch.apply(rho), ch.apply_choi(rho), atol=1e-12)


def test_choi_roundtrip_preserves_action(rng):
    ch = random_channel(2, 2, rng)
    again = QuantumChannel.from_choi(ch.choi.data, 2, 2)
    rho = random_density(2, rng).data
    assert np.allclose(ch.apply(rho), again.apply(rho), atol=1e-12)
    assert ch.choi_distance(again) < 1e-12


def test_identity_choi_is_unnormalized_bell_projector():
    v = np.zeros(4)
    v[0] = v[3] = 1
    assert np.allclose(QuantumChannel.identity().choi.data, np.outer(v, v))


def test_non_trace_preserving_kraus_rejected():
    with pytest.raises(InvariantError):
        QuantumChannel.from_kraus([0.5 * np.eye(2)]).validate()


def test_wrong_input_size_rejected():
    with pytest.raises(DimensionMismatchError):
        QuantumChannel.identity(2).apply(np.eye(3) / 3)


def test_dephasing_plus_state_is_maximally_mixed():
    plus = _dm(basis_ket("x", 1))
    assert np.allclose(dephasing_channel(1.0).apply(plus), np.eye(2) / 2)


def test_depolarizing_contracts_bloch_vector():
    rho = _dm(basis_ket("z", 1))
    out = depolarizing_channel(0.2).apply(rho)
    assert np.allclose(out, 0.8 * rho + 0.2 * np.eye(2) / 2)


def test_composition_is_associative(rng):
    a, b, c = (random_channel(2, 2, rng) for _ in range(3))
    left = a.compose(b).compose(c)
    right = a.compose(b.compose(c))
    assert left.choi_distance(right) < 1e-10


def test_composition_order(rng):
    x = QuantumChannel.unitary(np.array([[0, 1], [1, 0]]))
    h = QuantumChannel.unitary(single_qubit_gate("H").data)
    rho = _dm(basis_ket("z", 1))
    # x.compose(h) applies h first
    assert np.allclose(x.compose(h).apply(rho), x.apply(h.apply(rho)))


def test_json_roundtrip(rng):
    ch = random_channel(2, 2, rng, 2)
    back = QuantumChannel.from_dict(json.loads(ch.to_json()))
    assert back.choi_distance(ch) < 1e-14
    assert (back.in_dim, back.out_dim) == (2, 2)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 4))
def test_random_channels_property(seed, rank):
    ch = random_channel(2, 2, np.random.default_rng(seed), rank)
    assert ch.is_cptp(1e-9)
    rho = ch.apply(np.eye(2) / 2)
    assert np.trace(rho).real == pytest.approx(1.0)


# --- circuits and reference channels ------------------------------------------------


def test_empty_circuit_is_identity():
    layout = Layout(("A",), ("A",), ("A",))
    assert channel_from_circuit([], layout).choi_distance(QuantumChannel.identity()) < 1e-14


def test_two_swap_circuits_compose_to_identity():
    sw = reference_channels("swap_qubit")
    assert sw.compose(sw).choi_distance(QuantumChannel.identity(4)) < 1e-12


def test_swap_reference_is_unitary_swap():
    sw = reference_channels("swap_qubit")
    assert np.linalg.matrix_rank(sw.choi.data, tol=1e-9) == 1
    assert sw.choi_distance(QuantumChannel.unitary(swap_gate().data)) < 1e-12


def test_qst_reference_delivers_the_input():
    assert reference_channels("qst_qubit").choi_distance(QuantumChannel.identity()) < 1e-12


def test_mediated_cnot_reference_is_a_classical_copy():
    # B ends up with A's z value while A is traced out
    assert reference_channels("cnot_qubit_mediated").choi_distance(dephasing_channel(1.0)) < 1e-12


def test_cnot_two_qubit_reference_copies_computational_basis():
    ch = reference_channels("cnot_two_qubit")
    assert np.allclose(ch.apply(_dm(basis_ket("z", -1))), _dm(basis_ket("z", -1)))
    assert np.allclose(ch.apply(_dm(basis_ket("x", 1))), np.diag([0.5, 0.5]))


def test_hadamard_reference_choi():
    ch = reference_channels("hadamard_local")
    v = single_qubit_gate("H").data.T.reshape(-1)
    assert np.allclose(ch.choi.data, np.outer(v, v.conj()))


@pytest.mark.parametrize("name", REFERENCE_NAMES)
def test_reference_channels_cptp(name):
    assert reference_channels(name).is_cptp(1e-12)


def test_unknown_reference_rejected():
    with pytest.raises(ValueError):
        reference_channels("toffoli")


def test_layout_validation():
    with pytest.raises(ValueError):
        Layout(("A", "B"), ("A",), ("B",))
    with pytest.raises(ValueError):
        Layout(("A", "A"), ("A",), ("A",))
    with pytest.raises(ValueError):
        Layout(("A",), ("A",), ("A",), field_init="thermal")


def test_step_size_checked():
    layout = Layout(("A",), ("A",), ("A",))
    with pytest.raises(DimensionMismatchError):
        channel_from_circuit([QubitStep(np.eye(4), ("A",), "big")], layout)


def test_receiver_state_validation():
    assert np.allclose(receiver_state("+y"), basis_ket("y", 1))
    assert np.allclose(receiver_state([0, 1]), basis_ket("z", -1))
    with pytest.raises(ValueError):
        receiver_state("up")
    with pytest.raises(ValueError):
        receiver_state([1, 1])


# --- field-mediated channels ---------------------------------------------------------


@pytest.mark.parametrize("name", FIELD_NAMES)
def test_weyl_and_fock_agree(cal_by_s_phi, name):
    weyl = field_channels(name, cal_by_s_phi, backend="weyl")
    fock = field_channels(name, cal_by_s_phi, backend=FockBackend(cal_by_s_phi, 60))
    assert weyl.choi_distance(fock) < 1e-6


def test_encode_with_field_in_vacuum_dephases(cal_by_s_phi):
    # tracing a field that has recorded the z value removes the coherence
    layout = Layout(("A",), ("A",), ("A",))
    ch = channel_from_circuit([FieldStep(u_zphi(), "A")], layout, cal_by_s_phi)
    out = ch.apply(_dm(basis_ket("x", 1)))
    assert abs(out[0, 1]) == pytest.approx(0.5 * np.exp(-2 * cal_by_s_phi.s_phi), abs=1e-12)


@pytest.mark.parametrize("name, ref", [("qst", "qst_qubit"), ("cnot_mediated", "cnot_qubit_mediated"),
                                       ("s", "s_local"), ("t", "t_local")])
def test_field_channels_approach_references_at_strong_coupling(strong_cal, name, ref):
    ch = field_channels(name, strong_cal)
    assert ch.choi_distance(reference_channels(ref)) < 0.02


def test_literal_decoder_breaks_transfer(strong_cal):
    ref = reference_channels("qst_qubit")
    adjoint = field_channels("qst", strong_cal, decoder="adjoint")
    literal = field_channels("qst", strong_cal, decoder="literal")
    assert adjoint.choi_distance(ref) < 0.02
    assert literal.choi_distance(ref) > 0.5


def test_field_hadamard_on_zero_gives_even_populations(strong_cal):
    out = field_channels("hadamard", strong_cal).apply(_dm(basis_ket("z", 1)))
    assert np.allclose(np.diag(out).real, [0.5, 0.5], atol=1e-6)


def test_plus_alpha_field_init_supported(cal_by_s_phi):
    layout = Layout(("A",), ("A",), ("A",), field_init="plus_alpha")
    ch = channel_from_circuit([FieldStep(u_zphi(), "A")], layout, cal_by_s_phi)
    fock = channel_from_circuit([FieldStep(u_zphi(), "A")], layout, cal_by_s_phi, "fock")
    assert ch.choi_distance(fock) < 1e-6


def test_unknown_backend_rejected(cal_by_s_phi):
    with pytest.raises(ValueError):
        field_channels("qst", cal_by_s_phi, backend="lattice")
    with pytest.raises(ValueError):
        field_channels("qst", cal_by_s_phi, decoder="mirror")
