"""Tangle accounting: concurrences, the three-qubit ledger, closed forms."""

import math

import numpy as np
import pytest

from ussd_lab.qcore import PureState, Unitary, apply, basis_state, tensor
from ussd_lab.coherence import (
    BandScan,
    CoherenceLedger,
    closed_form_coherences,
    coherence_band,
    initial_coherence,
    ledger,
    pure_concurrence,
    three_tangle,
    wootters_concurrence,
)
from ussd_lab.ussd import coupled_state, make_instance, separable_strategy
from ussd_lab.errors import NumericalError, PartitionError, ShapeError


def ghz() -> PureState:
    v = np.zeros(8, dtype=complex)
    v[0] = v[7] = 1 / math.sqrt(2)
    return PureState(("S", "A", "C"), v)


def w_state() -> PureState:
    v = np.zeros(8, dtype=complex)
    v[1] = v[2] = v[4] = 1 / math.sqrt(3)
    return PureState(("S", "A", "C"), v)


class TestWootters:
    def test_bell_is_maximal(self):
        v = np.array([1, 0, 0, 1]) / math.sqrt(2)
        rho = np.outer(v, v)
        assert abs(wootters_concurrence(rho) - 1.0) < 1e-12

    def test_product_is_zero(self):
        assert wootters_concurrence(np.diag([1.0, 0, 0, 0])) < 1e-12

    def test_isotropic_mixture(self):
        # concurrence (3p - 1)/2 for a Bell state mixed with white noise
        v = np.array([1, 0, 0, 1]) / math.sqrt(2)
        for p, expect in ((0.9, 0.85), (0.5, 0.25), (0.2, 0.0)):
            rho = p * np.outer(v, v) + (1 - p) * np.eye(4) / 4
            assert abs(wootters_concurrence(rho) - expect) < 1e-12

    def test_rank_deficient_mixture_is_clean(self):
        # rank-2 mixture, where a square-root route loses half the digits
        a = np.array([1, 0, 0, 1]) / math.sqrt(2)
        b = np.array([0, 1, 1, 0]) / math.sqrt(2)
        rho = 0.7 * np.outer(a, a) + 0.3 * np.outer(b, b)
        assert abs(wootters_concurrence(rho) - 0.4) < 1e-12


class TestPureConcurrence:
    def test_matches_mixed_formula(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            v /= np.linalg.norm(v)
            psi = PureState(("S", "A"), v)
            assert abs(pure_concurrence(psi) -
                       wootters_concurrence(np.outer(v, v.conj()))) < 1e-10

    def test_single_label_cut(self):
        psi = ghz()
        assert abs(pure_concurrence(psi, part="S") - 1.0) < 1e-12

    def test_partition_rules(self):
        with pytest.raises(PartitionError):
            pure_concurrence(ghz(), part="SA")


class TestThreeTangle:
    def test_ghz_unity(self):
        assert abs(three_tangle(ghz()) - 1.0) < 1e-12

    def test_w_zero(self):
        assert three_tangle(w_state()) < 1e-12

    def test_local_unitary_invariance(self):
        rng = np.random.default_rng(7)
        v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        psi = PureState(("S", "A", "C"), v / np.linalg.norm(v))
        t0 = three_tangle(psi)
        for lab in psi.register:
            z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            q, r = np.linalg.qr(z)
            q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
            psi = apply(Unitary((lab,), q), psi)
        assert abs(three_tangle(psi) - t0) < 1e-10


class TestLedger:
    def test_keys_and_accessors(self):
        led = ledger(ghz())
        assert set(led.c_bipartite) == {"S:AC", "A:SC", "C:SA"}
        assert set(led.c_pairwise) == {"S:A", "S:C", "A:C"}
        assert led.pair("C", "A") == led.c_pairwise["A:C"]
        assert led.bipartite_of("A") == led.c_bipartite["A:SC"]
        with pytest.raises(KeyError):
            led.pair("S", "B")

    def test_ghz_numbers(self):
        led = ledger(ghz())
        assert abs(led.c_total - 1.0) < 1e-12
        assert abs(led.c_genuine - 1.0) < 1e-12
        assert all(v < 1e-12 for v in led.c_pairwise.values())

    def test_w_numbers(self):
        led = ledger(w_state())
        assert abs(led.c_total - 4.0 / 3.0) < 1e-12
        assert led.c_genuine < 1e-12
        assert all(abs(v - 4.0 / 9.0) < 1e-12 for v in led.c_pairwise.values())

    def test_product_state_is_empty(self):
        psi = tensor(basis_state(("S",), (0,)),
                     tensor(basis_state(("A",), (1,)), basis_state(("C",), (0,))))
        led = ledger(psi)
        assert led.c_total < 1e-12 and led.c_genuine < 1e-12

    def test_needs_three_qubits(self):
        with pytest.raises(ShapeError):
            ledger(basis_state(("S", "C"), (0, 0)))

    def test_invariants_enforced(self):
        with pytest.raises(NumericalError):
            CoherenceLedger(register=("S", "A", "C"), c_total=0.5,
                            c_bipartite={"S:AC": 1.4}, c_pairwise={},
                            c_genuine=0.0, monogamy_residual=0.0)
        with pytest.raises(NumericalError):
            CoherenceLedger(register=("S", "A", "C"), c_total=0.5,
                            c_bipartite={}, c_pairwise={}, c_genuine=0.0,
                            monogamy_residual=1e-3)


class TestClosedForms:
    def test_initial_coherence_landmark(self):
        # 4 * 0.2 * 0.8 * 1 * 0.84
        inst = make_instance(0.2, 0.4, 0.0)
        assert abs(initial_coherence(inst) - 0.5376) < 1e-15

    def test_exact_fractions_on_symmetric_instance(self):
        # p = 1/2, overlap 0.4 at phase pi, environment overlap 0.8:
        # the posterior weights are 12.5/17 each and the ledger entries
        # reduce to fractions with denominator 289
        inst = make_instance(0.5, 0.4 * np.exp(1j * math.pi), 0.8)
        assert abs(inst.r_plus - 12.5 / 17) < 1e-15
        strat = separable_strategy(inst)
        ct, ca, cg = closed_form_coherences(inst, strat)
        assert abs(ct - 189.0 / 289.0) < 1e-13
        assert abs(ca - 108.0 / 289.0) < 1e-13
        led = ledger(coupled_state(inst, strat))
        assert abs(led.c_total - ct) < 1e-12
        assert abs(led.bipartite_of("A") - ca) < 1e-12
        assert abs(led.c_genuine - cg) < 1e-12
        assert abs(led.pair("S", "C") - 81.0 / 289.0) < 1e-12
        assert led.pair("C", "A") < 1e-12

    def test_total_equals_environment_tangle_everywhere(self):
        rng = np.random.default_rng(9)
        for _ in range(15):
            p = rng.uniform(0.05, 0.5)
            inst = make_instance(p, rng.uniform(0.05, 0.9) * np.exp(1j * rng.uniform(0, 6.28)),
                                 rng.uniform(0, 0.95))
            strat = separable_strategy(inst)
            led = ledger(coupled_state(inst, strat))
            assert abs(closed_form_coherences(inst, strat)[0] - led.c_total) < 1e-12

    def test_genuine_holds_off_the_separable_point(self):
        # the three-way entry is an identity in beta and delta
        import dataclasses
        inst = make_instance(0.3, 0.5 * np.exp(0.4j), 0.6)
        strat = dataclasses.replace(separable_strategy(inst), beta=0.9, delta=2.7)
        led = ledger(coupled_state(inst, strat))
        assert abs(closed_form_coherences(inst, strat)[2] - led.c_genuine) < 1e-12


class TestBand:
    def test_peak_at_stationary_phase(self):
        scan = coherence_band(0.4, 0.5, 0.8, scan_points=720)
        assert isinstance(scan, BandScan)
        assert abs(math.cos(scan.argmax) + 0.8) < 1e-3
        assert 0.0 <= scan.minimum <= scan.maximum <= 1.0

    def test_minimum_sits_at_the_phase_edges(self):
        scan = coherence_band(0.35, 0.45, 0.7, scan_points=360)
        edges = {round(g, 6) for g in scan.argmin}
        assert edges <= {0.0, round(math.pi, 6)}

    def test_flat_profile_when_environment_decouples(self):
        scan = coherence_band(0.3, 0.5, 0.0, scan_points=240)
        assert scan.maximum - scan.minimum < 1e-10
        assert abs(scan.argmax - math.pi / 2) < 1e-12

    def test_saturated_case_share_is_one(self):
        # above the saturation overlap the whole coherence sits on the
        # environment-ancilla pair for every phase
        scan = coherence_band(0.4, 0.9, 0.6, scan_points=120)
        assert abs(scan.minimum - 1.0) < 1e-10
        assert abs(scan.maximum - 1.0) < 1e-10

    def test_scan_needs_points(self):
        with pytest.raises(ShapeError):
            coherence_band(0.4, 0.5, 0.8, scan_points=4)
