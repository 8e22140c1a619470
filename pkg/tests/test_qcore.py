"""Register algebra and simulation primitives."""

import math

import numpy as np
import pytest

from ussd_lab.qcore import (
    CNOT,
    HADAMARD,
    PAULI,
    DensityMatrix,
    PureState,
    Unitary,
    apply,
    basis_state,
    complete_unitary,
    factor_out,
    partial_trace,
    projective_measure,
    reorder,
    tensor,
)
from ussd_lab.errors import (
    BasisError,
    NotIsometric,
    RegisterClash,
    ShapeError,
    UnknownQubit,
)


def bell() -> PureState:
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1 / math.sqrt(2)
    return PureState(("S", "C"), v)


class TestPureState:
    def test_norm_enforced(self):
        with pytest.raises(ShapeError):
            PureState(("S",), np.array([1.0, 1.0]))

    def test_register_must_match_dimension(self):
        with pytest.raises(ShapeError):
            PureState(("S", "C"), np.array([1.0, 0.0]))

    def test_axis_lookup(self):
        psi = bell()
        assert psi.axis_of("C") == 1
        with pytest.raises(UnknownQubit):
            psi.axis_of("B")

    def test_density_is_projector(self):
        rho = bell().density().matrix
        assert np.allclose(rho @ rho, rho)
        assert abs(np.trace(rho) - 1.0) < 1e-12

    def test_overlap(self):
        z = basis_state(("S", "C"), (0, 0))
        assert abs(bell().overlap(z) - 1 / math.sqrt(2)) < 1e-12


class TestTensorReorder:
    def test_register_clash(self):
        with pytest.raises(RegisterClash):
            tensor(basis_state(("S",), (0,)), basis_state(("S",), (1,)))

    def test_reorder_roundtrip(self):
        psi = tensor(bell(), basis_state(("A",), (1,)))
        flipped = reorder(psi, ("A", "C", "S"))
        back = reorder(flipped, ("S", "C", "A"))
        assert flipped.register == ("A", "C", "S")
        assert np.allclose(back.amplitudes, psi.amplitudes)

    def test_reorder_moves_amplitudes(self):
        psi = basis_state(("S", "C"), (0, 1))
        assert np.argmax(np.abs(reorder(psi, ("C", "S")).amplitudes)) == 2


class TestPartialTrace:
    def test_bell_marginal_is_maximally_mixed(self):
        red = partial_trace(bell(), ["S"])
        assert red.register == ("S",)
        assert np.allclose(red.matrix, np.eye(2) / 2)

    def test_product_marginal_is_pure(self):
        psi = tensor(basis_state(("A",), (1,)), bell())
        red = partial_trace(psi, ["A"]).matrix
        assert np.allclose(red, np.diag([0.0, 1.0]))

    def test_keep_order_follows_register(self):
        # kept labels come back in register order, not caller order
        psi = tensor(bell(), basis_state(("A",), (0,)))
        red = partial_trace(psi, ["A", "S"])
        assert red.register == ("S", "A")
        assert np.allclose(red.matrix, np.kron(np.eye(2) / 2, np.diag([1.0, 0.0])))

    def test_density_matrix_input(self):
        dm = bell().density()
        red = partial_trace(dm, ["C"])
        assert np.allclose(red.matrix, np.eye(2) / 2)


class TestApply:
    def test_hadamard_on_named_target(self):
        psi = basis_state(("S", "C"), (0, 0))
        out = apply(Unitary(("S",), HADAMARD), psi)
        expect = np.array([1, 0, 1, 0]) / math.sqrt(2)
        assert np.allclose(out.amplitudes, expect)

    def test_bell_from_circuit(self):
        psi = basis_state(("S", "C"), (0, 0))
        psi = apply(Unitary(("S",), HADAMARD), psi)
        psi = apply(Unitary(("S", "C"), CNOT), psi)
        assert abs(abs(psi.overlap(bell())) - 1.0) < 1e-12

    def test_control_is_first_label(self):
        # CNOT with control C: |01> on (S, C) must flip S
        psi = basis_state(("S", "C"), (0, 1))
        out = apply(Unitary(("C", "S"), CNOT), psi, targets=("C", "S"))
        assert abs(abs(out.overlap(basis_state(("S", "C"), (1, 1)))) - 1) < 1e-12

    def test_unitarity_checked(self):
        with pytest.raises(ShapeError):
            Unitary(("S",), np.array([[1.0, 1.0], [0.0, 1.0]]))


class TestMeasurement:
    def test_probabilities_and_posts(self):
        out = projective_measure(bell(), "S", (np.array([1, 0]), np.array([0, 1])))
        assert [k for k, _, _ in out] == [0, 1]
        for _, p, post in out:
            assert abs(p - 0.5) < 1e-12
            assert post.register == ("S", "C")
        # post state of outcome 0 is |00>
        assert abs(abs(out[0][2].overlap(basis_state(("S", "C"), (0, 0)))) - 1) < 1e-12

    def test_impossible_outcome_has_no_post(self):
        psi = basis_state(("S",), (0,))
        out = projective_measure(psi, "S", (np.array([1, 0]), np.array([0, 1])))
        assert out[1][1] == 0.0 and out[1][2] is None

    def test_basis_must_be_orthonormal(self):
        with pytest.raises(BasisError):
            projective_measure(bell(), "S",
                               (np.array([1, 0]), np.array([1, 1]) / math.sqrt(2)))


class TestFactorOut:
    def test_drops_product_qubit(self):
        psi = tensor(basis_state(("A",), (1,)), bell())
        rest = factor_out(psi, "A", np.array([0.0, 1.0]))
        assert rest.register == ("S", "C")
        assert abs(abs(rest.overlap(bell())) - 1) < 1e-12

    def test_phase_travels_to_remainder(self):
        vec = np.exp(0.7j) * np.array([0.0, 1.0])
        psi = tensor(PureState(("A",), vec), basis_state(("S",), (0,)))
        rest = factor_out(psi, "A", np.array([0.0, 1.0]))
        assert abs(rest.amplitudes[0] - np.exp(0.7j)) < 1e-12

    def test_entangled_qubit_refuses(self):
        with pytest.raises(ShapeError):
            factor_out(bell(), "S", np.array([1.0, 0.0]))


class TestCompleteUnitary:
    def test_exact_mapping_and_unitarity(self):
        a = np.array([1, 0, 0, 0], dtype=complex)
        b = np.array([0, 0, 1, 0], dtype=complex)
        ta = np.array([0.6, 0.8j, 0, 0], dtype=complex)
        tb = np.array([0, 0, 0.8, -0.6j], dtype=complex)
        u = complete_unitary([(a, ta), (b, tb)])
        m = u.matrix
        assert np.max(np.abs(m.conj().T @ m - np.eye(4))) < 1e-10
        assert np.max(np.abs(m @ a - ta)) < 1e-10
        assert np.max(np.abs(m @ b - tb)) < 1e-10

    def test_gram_mismatch_rejected(self):
        a = np.array([1, 0], dtype=complex)
        b = np.array([0, 1], dtype=complex)
        t = np.array([1, 0], dtype=complex)
        with pytest.raises(NotIsometric):
            complete_unitary([(a, t), (b, t)])

    def test_completion_seed_does_not_move_constraints(self):
        rng = np.random.default_rng(5)
        a = np.array([1, 0, 0, 0], dtype=complex)
        ta = np.array([0, 1, 0, 0], dtype=complex)
        u1 = complete_unitary([(a, ta)])
        seed = [np.array([0, 0, 1j, 0], dtype=complex)]
        u2 = complete_unitary([(a, ta)], seed_basis=seed)
        assert np.max(np.abs(u1.matrix @ a - u2.matrix @ a)) < 1e-10
        z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        z /= np.linalg.norm(z)
        # both completions are unitary even though they differ elsewhere
        for u in (u1, u2):
            assert abs(np.linalg.norm(u.matrix @ z) - 1) < 1e-10


def test_pauli_algebra():
    assert np.allclose(PAULI["Z"] @ PAULI["X"], 1j * PAULI["Y"])
    assert np.allclose(HADAMARD @ HADAMARD, np.eye(2))


def test_density_matrix_validation():
    with pytest.raises(ShapeError):
        DensityMatrix(("S",), np.array([[0.5, 0.5], [0.2, 0.5]]))
    with pytest.raises(ShapeError):
        DensityMatrix(("S",), np.array([[0.9, 0.0], [0.0, 0.5]]))
