"""Discrimination protocol: instances, strategies, optima, separability,
conservation, and the loop phase."""

import dataclasses
import math

import numpy as np
import pytest

from ussd_lab.qcore import partial_trace
from ussd_lab.coherence import initial_coherence, wootters_concurrence
from ussd_lab.ussd import (
    Embedding,
    UssdStrategy,
    bargmann_loop,
    bargmann_phase,
    build_chi,
    canonical_embedding,
    check_pair,
    coupled_state,
    coupling_unitary,
    make_instance,
    optimal_strategy,
    p_suc_max,
    run_protocol,
    separability_params,
    separable_strategy,
    success_probability,
    system_ancilla_density,
    total_coherence_conservation,
)
from ussd_lab.errors import (
    DegenerateOverlap,
    EmbeddingError,
    RangeError,
    UndefinedPhase,
)


def random_instance(rng, saturated=None):
    while True:
        inst = make_instance(rng.uniform(0.05, 0.5),
                             rng.uniform(0.05, 0.95) * np.exp(1j * rng.uniform(0, 2 * math.pi)),
                             rng.uniform(0.0, 0.95) * np.exp(1j * rng.uniform(0, 2 * math.pi)))
        if saturated is None or (inst.case == "saturated") == saturated:
            return inst


class TestInstance:
    def test_prior_range(self):
        with pytest.raises(RangeError):
            make_instance(1.2, 0.3, 0.0)
        with pytest.raises(RangeError):
            make_instance(-0.1, 0.3, 0.0)

    def test_overlap_must_be_subunit(self):
        with pytest.raises(DegenerateOverlap):
            make_instance(0.3, 1.0, 0.0)
        with pytest.raises(RangeError):
            make_instance(0.3, 0.5, 1.2)

    def test_majority_prior_is_canonicalized(self):
        inst = make_instance(0.7, 0.4 * np.exp(0.5j), 0.6 * np.exp(0.2j))
        assert inst.swapped
        assert abs(inst.p_plus - 0.3) < 1e-15
        # swapping the labels conjugates both overlaps
        assert abs(inst.alpha - 0.4 * np.exp(-0.5j)) < 1e-15
        assert abs(inst.alpha_c - 0.6 * np.exp(-0.2j)) < 1e-15

    def test_posterior_weights_normalization(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            inst = random_instance(rng)
            s = (inst.r_plus + inst.r_minus
                 + 2 * math.sqrt(inst.r_plus * inst.r_minus)
                 * abs(inst.alpha) * abs(inst.alpha_c) * math.cos(inst.gamma))
            assert abs(s - 1.0) < 1e-12

    def test_case_split_at_prior_ratio(self):
        tilde = math.sqrt(0.2 / 0.8)
        assert make_instance(0.2, tilde - 1e-6, 0.3).case == "interior"
        assert make_instance(0.2, tilde + 1e-6, 0.3).case == "saturated"

    def test_landmark_weights(self):
        inst = make_instance(0.5, 0.4 * np.exp(1j * math.pi), 0.8)
        assert abs(inst._denominator - 0.68) < 1e-15
        assert abs(inst.r_plus - 0.5 / 0.68) < 1e-14


class TestEmbedding:
    def test_canonical_overlaps(self):
        inst = make_instance(0.3, 0.5 * np.exp(0.7j), 0.6 * np.exp(1.1j))
        emb = canonical_embedding(inst)
        # overlap convention: the barred vector is the bra side
        assert abs(np.vdot(emb.xi_bar, emb.xi) - inst.alpha) < 1e-12
        assert abs(np.vdot(emb.phi_bar, emb.phi) - inst.alpha_c) < 1e-12
        emb.validate(inst)

    def test_wrong_embedding_rejected(self):
        inst = make_instance(0.3, 0.5, 0.6)
        other = canonical_embedding(make_instance(0.3, 0.2, 0.6))
        with pytest.raises(EmbeddingError):
            other.validate(inst)

    def test_chi_reduces_to_initial_coherence(self):
        inst = make_instance(0.35, 0.45 * np.exp(0.3j), 0.7 * np.exp(2.0j))
        chi = build_chi(inst)
        det = np.linalg.det(partial_trace(chi, ["C"]).matrix).real
        assert abs(4 * det - initial_coherence(inst)) < 1e-12


class TestStrategy:
    def test_constraint_enforced(self):
        inst = make_instance(0.3, 0.5, 0.0)
        good = optimal_strategy(inst)
        check_pair(inst, good)
        bad = dataclasses.replace(good, alpha_minus=good.alpha_minus * 0.5)
        with pytest.raises(RangeError):
            check_pair(inst, bad)

    def test_angle_ranges(self):
        with pytest.raises(RangeError):
            UssdStrategy(0.5, 0.5, beta=2.0)
        with pytest.raises(RangeError):
            UssdStrategy(0.5, 0.5, delta=-0.1)
        with pytest.raises(RangeError):
            UssdStrategy(1.2, 0.5)

    def test_interior_optimum_landmark(self):
        strat = optimal_strategy(make_instance(0.2, 0.4, 0.0))
        assert abs(abs(strat.alpha_plus) - math.sqrt(0.8)) < 1e-15
        assert abs(abs(strat.alpha_minus) - math.sqrt(0.2)) < 1e-15

    def test_saturated_optimum_pins_the_first_amplitude(self):
        strat = optimal_strategy(make_instance(0.4, 0.9, 0.0))
        assert abs(abs(strat.alpha_plus) - 1.0) < 1e-15
        assert abs(abs(strat.alpha_minus) - 0.9) < 1e-15

    def test_phases_carry_the_overlap_phase(self):
        inst = make_instance(0.3, 0.5 * np.exp(0.9j), 0.0)
        strat = optimal_strategy(inst)
        assert abs(strat.alpha_plus * np.conj(strat.alpha_minus) - inst.alpha) < 1e-14


class TestSuccess:
    def test_landmarks(self):
        assert abs(p_suc_max(make_instance(0.2, 0.4, 0.0)) - 0.68) < 1e-12
        assert abs(p_suc_max(make_instance(0.4, 0.9, 0.0)) - 0.114) < 1e-12

    def test_interior_closed_form(self):
        inst = make_instance(0.3, 0.25 * np.exp(0.4j), 0.5 * np.exp(1.3j))
        rp, rm = inst.r_plus, inst.r_minus
        expect = rp + rm - 2 * math.sqrt(rp * rm) * 0.25
        assert abs(p_suc_max(inst) - expect) < 1e-14

    def test_saturated_closed_form(self):
        inst = make_instance(0.35, 0.85, 0.4)
        assert inst.case == "saturated"
        assert abs(p_suc_max(inst) - inst.r_minus * (1 - 0.85 ** 2)) < 1e-14

    def test_success_probability_of_any_strategy(self):
        inst = make_instance(0.3, 0.5, 0.2)
        strat = UssdStrategy(0.9, 0.5 / 0.9)
        expect = inst.r_plus * (1 - 0.81) + inst.r_minus * (1 - (0.5 / 0.9) ** 2)
        assert abs(success_probability(inst, strat) - expect) < 1e-14
        assert success_probability(inst, strat) <= p_suc_max(inst) + 1e-14


class TestProtocol:
    def test_born_statistics_match_closed_form(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            inst = random_instance(rng)
            res = run_protocol(inst, optimal_strategy(inst))
            assert abs(res.success_probability - p_suc_max(inst)) < 1e-10
            assert abs(sum(o.probability for o in res.outcomes) - 1.0) < 1e-12

    def test_failure_leaves_system_along_the_chosen_direction(self):
        inst = make_instance(0.3, 0.5, 0.4)
        strat = optimal_strategy(inst, beta=0.8, delta=1.9)
        res = run_protocol(inst, strat)
        fail_state = res.outcomes[1].state
        red = partial_trace(fail_state, ["S"]).matrix
        eta = strat.failure_direction()
        assert abs(float(np.real(eta.conj() @ red @ eta)) - 1.0) < 1e-10

    def test_coupled_state_matches_protocol_state(self):
        inst = make_instance(0.25, 0.45 * np.exp(0.6j), 0.7 * np.exp(0.9j))
        strat = separable_strategy(inst)
        direct = coupled_state(inst, strat)
        res = run_protocol(inst, strat)
        assert abs(abs(np.vdot(direct.amplitudes, res.state.amplitudes)) - 1) < 1e-12

    def test_coupling_gram_preserved(self):
        inst = make_instance(0.3, 0.5 * np.exp(0.3j), 0.2)
        strat = optimal_strategy(inst, beta=0.4, delta=2.2)
        u = coupling_unitary(inst, strat)
        m = u.matrix
        assert np.max(np.abs(m.conj().T @ m - np.eye(4))) < 1e-10

    def test_observables_ignore_completion_seed(self):
        inst = make_instance(0.3, 0.5, 0.6)
        strat = optimal_strategy(inst)
        seed = [np.array([0, 0.6, 0.8, 0], dtype=complex)]
        r1 = run_protocol(inst, strat)
        r2 = run_protocol(inst, strat, seed_basis=seed)
        for o1, o2 in zip(r1.outcomes, r2.outcomes):
            assert abs(o1.probability - o2.probability) < 1e-12


class TestSeparability:
    def test_concurrence_vanishes_at_the_tuned_direction(self):
        rng = np.random.default_rng(4)
        for _ in range(8):
            inst = random_instance(rng)
            rho = system_ancilla_density(inst, separable_strategy(inst))
            assert wootters_concurrence(rho) < 1e-10

    def test_generic_direction_stays_entangled(self):
        inst = make_instance(0.3, 0.5 * np.exp(0.8j), 0.6)
        strat = separable_strategy(inst)
        off = dataclasses.replace(strat, beta=max(strat.beta - 0.4, 0.0))
        assert wootters_concurrence(system_ancilla_density(inst, off)) > 1e-3

    def test_landmark_angles(self):
        # q+- = 0.16 each, so tan(beta*) = sqrt(0.8*0.16*0.8 / (0.2*0.16*0.2))
        par = separability_params(make_instance(0.2, 0.4, 0.0),
                                  separable_strategy(make_instance(0.2, 0.4, 0.0)))
        assert abs(par.beta_star - math.atan(4.0)) < 1e-14
        assert abs(par.delta_star) < 1e-14

    def test_weight_partition_is_exact(self):
        rng = np.random.default_rng(6)
        for _ in range(6):
            inst = random_instance(rng)
            par = separability_params(inst, separable_strategy(inst))
            assert abs(par.q1_plus ** 2 + par.q2_plus ** 2 - inst.r_plus) < 1e-13
            assert abs(par.q1_minus ** 2 + par.q2_minus ** 2 - inst.r_minus) < 1e-13

    def test_saturated_case_flags_along_the_equator(self):
        inst = make_instance(0.4, 0.9, 0.5)
        par = separability_params(inst, separable_strategy(inst))
        assert abs(par.beta_star - math.pi / 2) < 1e-12

    def test_vanishing_overlap_has_no_failure_branch(self):
        inst = make_instance(0.3, 0.0, 0.6)
        par = separability_params(inst, separable_strategy(inst))
        assert par.q1_plus == 0.0 and par.q2_plus == 0.0
        assert par.beta_star == 0.0 and par.delta_star == 0.0

    def test_density_assembly_matches_partial_trace(self):
        inst = make_instance(0.35, 0.5 * np.exp(0.2j), 0.6 * np.exp(1.4j))
        strat = separable_strategy(inst)
        direct = system_ancilla_density(inst, strat)
        traced = partial_trace(coupled_state(inst, strat), ["S", "A"]).matrix
        assert np.max(np.abs(direct - traced)) < 1e-12


class TestConservation:
    def test_residual_is_machine_zero(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            inst = random_instance(rng)
            strat = optimal_strategy(inst, beta=rng.uniform(0, math.pi / 2),
                                     delta=rng.uniform(0, 2 * math.pi))
            rep = total_coherence_conservation(inst, strat)
            assert rep.residual < 1e-10
            assert abs(rep.before - initial_coherence(inst)) < 1e-12


class TestLoopPhase:
    def test_equals_total_overlap_phase(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            inst = random_instance(rng)
            target = (inst.gamma + math.pi) % (2 * math.pi) - math.pi
            d = abs(bargmann_phase(inst) - target) % (2 * math.pi)
            assert min(d, 2 * math.pi - d) < 1e-10

    def test_gauge_invariance(self):
        inst = make_instance(0.3, 0.5 * np.exp(0.7j), 0.6 * np.exp(1.9j))
        emb = canonical_embedding(inst)
        v1 = np.kron(emb.xi, emb.phi)
        v3 = np.kron(emb.xi_bar, emb.phi_bar)
        v2 = build_chi(inst, emb).amplitudes
        base = bargmann_loop(v1, v2, v3)
        moved = bargmann_loop(np.exp(0.4j) * v1, np.exp(1.8j) * v2,
                              np.exp(5.1j) * v3)
        assert abs(base - moved) < 1e-12

    def test_extreme_priors_are_undefined(self):
        with pytest.raises(UndefinedPhase):
            bargmann_phase(make_instance(1.0, 0.3, 0.2))

    def test_decoupled_environment_collapses_loop(self):
        # alpha_c = 0 zeroes the closing overlap; by the documented
        # convention a vanishing edge contributes no phase, so the system
        # phase is not recoverable from this loop
        inst = make_instance(0.3, 0.5 * np.exp(0.7j), 0.0)
        assert bargmann_phase(inst) == 0.0
