"""Built-in verification battery.

Every check reduces to a single non-negative number compared against a
tolerance, so a run is summarizable as pass/fail lines and the whole
battery can be tightened or loosened with one override. The checks mix
frozen landmark values, closed-form-versus-simulation comparisons, and
brute-force oracle searches; together they exercise every public result
of the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import RangeError
from .qcore import PureState, Unitary, apply
from .coherence import (
    closed_form_coherences,
    coherence_band,
    ledger,
    three_tangle,
    wootters_concurrence,
)
from .ussd import (
    bargmann_loop,
    bargmann_phase,
    build_chi,
    canonical_embedding,
    coupled_state,
    coupling_unitary,
    make_instance,
    optimal_strategy,
    p_suc_max,
    run_protocol,
    separable_strategy,
    separability_params,
    system_ancilla_density,
    total_coherence_conservation,
)
from .oracle import (
    GridSpec,
    decomposition_check,
    grid_min_concurrence,
    grid_optimize_success,
    quadrature_refine,
)
from .teleport import (
    TeleportInstance,
    branch_to_ussd,
    enumerate_runs,
    fig4_sweep,
    run_teleport,
    square_mean_root,
)

_TWO_PI = 2.0 * math.pi


def _wrap(x: float) -> float:
    return (x + math.pi) % _TWO_PI - math.pi


def _circ_dist(a: float, b: float) -> float:
    d = abs(a - b) % _TWO_PI
    return min(d, _TWO_PI - d)


def _random_instance(rng, saturated: Optional[bool] = None):
    """Admissible instance with uniform-ish parameters; saturated picks
    the optimizer case when not None."""
    for _ in range(200):
        p = rng.uniform(0.05, 0.5)
        aa = rng.uniform(0.05, 0.95)
        ac = rng.uniform(0.0, 0.98)
        gs = rng.uniform(0.0, _TWO_PI)
        gc = rng.uniform(0.0, _TWO_PI)
        inst = make_instance(p, aa * np.exp(1j * gs), ac * np.exp(1j * gc))
        if saturated is None or (inst.case == "saturated") == saturated:
            return inst
    raise RangeError("failed to draw a matching instance")  # pragma: no cover


def _haar_unitary(rng, n: int = 2) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _random_pure(rng, labels=("S", "A", "C")) -> PureState:
    v = rng.standard_normal(2 ** len(labels)) + 1j * rng.standard_normal(2 ** len(labels))
    return PureState(tuple(labels), v / np.linalg.norm(v))


# --------------------------------------------------------------------------
# individual checks: each returns (value, detail); pass means value <= tol

def _spot_success_interior():
    v = abs(p_suc_max(make_instance(0.2, 0.4, 0.0)) - 0.68)
    return v, "p=0.2, overlap 0.4, decoupled environment -> 0.68"


def _spot_success_saturated():
    v = abs(p_suc_max(make_instance(0.4, 0.9, 0.0)) - 0.114)
    return v, "p=0.4, overlap 0.9 (saturated case) -> 0.114"


def _spot_optimal_amplitudes():
    s = optimal_strategy(make_instance(0.2, 0.4, 0.0))
    v = max(abs(abs(s.alpha_plus) - math.sqrt(0.8)),
            abs(abs(s.alpha_minus) - math.sqrt(0.2)))
    return v, "optimal flip amplitudes sqrt(0.8), sqrt(0.2)"


def _normalization_identity():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(50):
        inst = _random_instance(rng)
        s = (inst.r_plus + inst.r_minus
             + 2.0 * math.sqrt(inst.r_plus * inst.r_minus)
             * abs(inst.alpha) * abs(inst.alpha_c) * math.cos(inst.gamma))
        worst = max(worst, abs(s - 1.0))
    return worst, "posterior weights resum to 1 on 50 random instances"


def _success_grid_oracle():
    rng = np.random.default_rng(12)
    worst = 0.0
    for k in range(6):
        inst = _random_instance(rng, saturated=bool(k % 2))
        res = grid_optimize_success(inst, GridSpec(0.0, 1.0, 3001, 2))
        worst = max(worst, abs(res.value - p_suc_max(inst)))
    return worst, "closed-form optimum vs brute-force amplitude search"


def _success_born_rule():
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(6):
        inst = _random_instance(rng)
        r = run_protocol(inst, optimal_strategy(inst))
        worst = max(worst, abs(r.success_probability - p_suc_max(inst)))
    return worst, "simulated outcome statistics vs closed form"


def _success_strategy_independent():
    rng = np.random.default_rng(14)
    worst = 0.0
    for _ in range(5):
        inst = _random_instance(rng)
        anc = np.array([math.cos(0.4), math.sin(0.4) * np.exp(0.9j)])
        strat = optimal_strategy(inst, beta=rng.uniform(0, math.pi / 2),
                                 delta=rng.uniform(0, _TWO_PI), ancilla_init=anc)
        r = run_protocol(inst, strat)
        worst = max(worst, abs(r.success_probability - p_suc_max(inst)))
    return worst, "failure direction and ancilla ready state do not move P"


def _separability_zero():
    rng = np.random.default_rng(15)
    worst = 0.0
    for k in range(6):
        inst = _random_instance(rng, saturated=bool(k % 3 == 0))
        rho = system_ancilla_density(inst, separable_strategy(inst))
        worst = max(worst, wootters_concurrence(rho))
    return worst, "system-ancilla concurrence at the tuned failure direction"


def _separability_argmin():
    inst = make_instance(0.3, 0.45 * np.exp(0.8j), 0.6 * np.exp(0.4j))
    strat = separable_strategy(inst)
    par = separability_params(inst, strat)
    res = grid_min_concurrence(inst, strat,
                               GridSpec(0.0, math.pi / 2, 25, 2),
                               GridSpec(0.0, _TWO_PI, 49, 2))
    v = max(abs(res.beta - par.beta_star), _circ_dist(res.delta, par.delta_star))
    return v, f"grid argmin vs closed form (residual concurrence {res.value:.2e})"


def _decomposition_residuals():
    rng = np.random.default_rng(16)
    worst = 0.0
    for _ in range(6):
        inst = _random_instance(rng)
        strat = separable_strategy(inst)
        par = separability_params(inst, strat)
        rep = decomposition_check(system_ancilla_density(inst, strat),
                                  par, inst, strat)
        worst = max(worst, rep.worst)
    return worst, "rank-two split rebuilt from scalars matches the state"


def _decomposition_sensitivity():
    import dataclasses
    inst = make_instance(0.35, 0.5 * np.exp(0.5j), 0.7)
    strat = separable_strategy(inst)
    par = separability_params(inst, strat)
    bad = dataclasses.replace(par, gamma2=par.gamma2 + 0.1)
    rep = decomposition_check(system_ancilla_density(inst, strat),
                              bad, inst, strat)
    v = 0.0 if rep.reconstruction > 1e-3 else 1e-3 - rep.reconstruction
    return v, f"perturbing a split phase by 0.1 leaves residual {rep.reconstruction:.2e}"


def _conservation():
    rng = np.random.default_rng(17)
    worst = 0.0
    for _ in range(20):
        inst = _random_instance(rng)
        strat = optimal_strategy(inst, beta=rng.uniform(0, math.pi / 2),
                                 delta=rng.uniform(0, _TWO_PI))
        worst = max(worst, total_coherence_conservation(inst, strat).residual)
    return worst, "environment tangle untouched by the system-ancilla coupling"


def _closed_form_ledger_grid():
    worst = 0.0
    for p in (0.18, 0.33, 0.5):
        for aa in (0.12, 0.45, 0.8):
            for ac in (0.0, 0.55, 0.9):
                for g in (0.0, 1.1, math.pi):
                    inst = make_instance(p, aa * np.exp(1j * 0.6 * g),
                                         ac * np.exp(1j * 0.4 * g))
                    strat = separable_strategy(inst)
                    led = ledger(coupled_state(inst, strat))
                    ct, ca, cg = closed_form_coherences(inst, strat)
                    worst = max(worst,
                                abs(ct - led.c_total),
                                abs(ca - led.bipartite_of("A")),
                                abs(cg - led.c_genuine))
    return worst, "closed-form coherence triple vs numeric ledger on a 3^4 grid"


def _retained_pair_identity():
    worst = 0.0
    for p in (0.2, 0.42):
        for aa in (0.15, 0.6, 0.85):
            for ac in (0.1, 0.75):
                inst = make_instance(p, aa * np.exp(0.7j), ac)
                strat = separable_strategy(inst)
                led = ledger(coupled_state(inst, strat))
                ct, ca, _ = closed_form_coherences(inst, strat)
                worst = max(worst, abs((ct - ca) - led.pair("S", "C")))
    return worst, "total minus converted equals the retained pair tangle"


def _monogamy_random():
    rng = np.random.default_rng(18)
    worst = 0.0
    for _ in range(60):
        led = ledger(_random_pure(rng))
        worst = max(worst, led.monogamy_residual)
    return worst, "three monogamy sums agree on 60 random pure states"


def _ghz_w_landmarks():
    ghz = np.zeros(8, dtype=complex)
    ghz[0] = ghz[7] = 1 / math.sqrt(2)
    w = np.zeros(8, dtype=complex)
    w[1] = w[2] = w[4] = 1 / math.sqrt(3)
    sg = PureState(("S", "A", "C"), ghz)
    sw = PureState(("S", "A", "C"), w)
    v = max(abs(three_tangle(sg) - 1.0), three_tangle(sw),
            abs(ledger(sw).c_total - 4.0 / 3.0))
    return v, "GHZ genuine tangle 1, W genuine tangle 0, W total 4/3"


def _lu_invariance():
    rng = np.random.default_rng(19)
    worst = 0.0
    for _ in range(10):
        psi = _random_pure(rng)
        led = ledger(psi)
        rotated = psi
        for lab in psi.register:
            rotated = apply(Unitary((lab,), _haar_unitary(rng)), rotated)
        led2 = ledger(rotated)
        worst = max(worst, abs(led.c_total - led2.c_total),
                    abs(led.c_genuine - led2.c_genuine),
                    max(abs(led.c_bipartite[k] - led2.c_bipartite[k])
                        for k in led.c_bipartite),
                    max(abs(led.c_pairwise[k] - led2.c_pairwise[k])
                        for k in led.c_pairwise))
    return worst, "every ledger entry survives local basis changes"


def _bargmann_equality():
    rng = np.random.default_rng(20)
    worst = 0.0
    for _ in range(20):
        inst = _random_instance(rng)
        worst = max(worst, _circ_dist(bargmann_phase(inst), _wrap(inst.gamma)))
    return worst, "loop phase equals the summed overlap phase"


def _bargmann_gauge():
    rng = np.random.default_rng(21)
    worst = 0.0
    for _ in range(20):
        inst = _random_instance(rng)
        emb = canonical_embedding(inst)
        v1 = np.kron(emb.xi, emb.phi)
        v3 = np.kron(emb.xi_bar, emb.phi_bar)
        v2 = build_chi(inst, emb).amplitudes
        base = bargmann_loop(v1, v2, v3)
        th = rng.uniform(0, _TWO_PI, size=3)
        redone = bargmann_loop(np.exp(1j * th[0]) * v1,
                               np.exp(1j * th[1]) * v2,
                               np.exp(1j * th[2]) * v3)
        worst = max(worst, _circ_dist(base, redone))
    return worst, "loop phase ignores independent rephasings"


def _bargmann_teleport_branches():
    worst = 0.0
    for rho in (0.2, 0.6):
        for mu in (0.7, 2.4):
            for b in (0, 1):
                rec = branch_to_ussd(TeleportInstance(rho, mu, 1.3), b)
                ph = bargmann_phase(rec.ussd_instance)
                worst = max(worst, min(_circ_dist(ph, 0.0), _circ_dist(ph, math.pi)))
    return worst, "carrier branches carry loop phase 0 or pi exactly"


def _fig2_monotone():
    acs = np.linspace(0.0, 1.0 - 1e-9, 101)
    p0 = [p_suc_max(make_instance(0.2, 0.4, ac)) for ac in acs]
    ppi = [p_suc_max(make_instance(0.2, -0.4, ac)) for ac in acs]
    worst = 0.0
    for a, b in zip(p0, p0[1:]):
        worst = max(worst, b - a)          # must not increase
    for a, b in zip(ppi, ppi[1:]):
        worst = max(worst, a - b)          # must not decrease
    return worst, "success falls with environment overlap in phase, rises out of phase"


def _fig2_limit():
    v = abs(p_suc_max(make_instance(0.2, -0.4, 1.0 - 1e-9)) - 1.0)
    return v, "out-of-phase success reaches 1 as the environment overlap saturates"


def _fig3_share_monotone_interior():
    tilde = math.sqrt(0.4 / 0.6)
    aas = np.linspace(0.02, tilde - 0.02, 40)
    shares = []
    for aa in aas:
        inst = make_instance(0.4, aa * np.exp(1j * math.pi / 2), 0.8)
        ct, ca, _ = closed_form_coherences(inst, separable_strategy(inst))
        shares.append(ca / ct)
    worst = max(max(a - b for a, b in zip(shares, shares[1:])), 0.0)
    return worst, "converted share grows with overlap below the saturation point"


def _fig3_share_saturated():
    tilde = math.sqrt(0.4 / 0.6)
    worst = 0.0
    for aa in np.linspace(tilde + 0.01, 0.98, 15):
        inst = make_instance(0.4, aa * np.exp(1j * math.pi / 2), 0.8)
        ct, ca, _ = closed_form_coherences(inst, separable_strategy(inst))
        worst = max(worst, abs(ca / ct - 1.0))
    return worst, "above saturation the whole coherence is converted"


def _band_argmax():
    scan = coherence_band(0.4, 0.5, 0.8, scan_points=720)
    v = abs(math.cos(scan.argmax) + 0.8)
    return v, "environment-ancilla share peaks where cos gamma = -|alpha_c|"


def _band_flat():
    scan = coherence_band(0.3, 0.5, 0.0, scan_points=240)
    v = max(scan.maximum - scan.minimum, abs(scan.argmax - math.pi / 2))
    return v, "decoupled environment flattens the share profile"


def _teleport_total_closed():
    worst = 0.0
    for rho in np.linspace(0.0, math.pi / 4, 12):
        runs = enumerate_runs(TeleportInstance(float(rho), 1.1, 2.2))
        tot = sum(r.probability for r in runs if r.success)
        worst = max(worst, abs(tot - (1.0 - math.sin(2.0 * rho))))
    return worst, "summed success paths equal 1 - sin(2 rho)"


def _teleport_state_independent():
    worst = 0.0
    base = None
    for mu in np.linspace(0.0, math.pi, 5):
        for nu in np.linspace(0.0, _TWO_PI * (1 - 1e-12), 5):
            inst = TeleportInstance(0.35, float(mu), float(nu))
            tot = 0.0
            for b in (0, 1):
                rec = branch_to_ussd(inst, b)
                tot += rec.probability * rec.success_probability
            base = tot if base is None else base
            worst = max(worst, abs(tot - base))
    return worst, "total success ignores the sent state"


def _teleport_fidelity():
    worst = 0.0
    for (rho, mu, nu) in ((0.2, 0.8, 0.3), (0.5, 1.9, 4.0), (0.7, 2.8, 5.5)):
        for r in enumerate_runs(TeleportInstance(rho, mu, nu)):
            if r.success:
                worst = max(worst, 1.0 - r.fidelity)
    return worst, "every corrected success path delivers the state exactly"


def _teleport_failure_leak():
    r = run_teleport(TeleportInstance(0.3, 1.1, 0.7), 0, None)
    v = max(0.0, r.fidelity - 0.999)
    return v, f"failure path is not faithful (fidelity {r.fidelity:.4f})"


def _teleport_branch_priors():
    worst = 0.0
    for rho in (0.15, 0.45, 0.75):
        for mu in (0.5, 1.7, 2.9):
            inst = TeleportInstance(rho, mu, 0.9)
            for b in (0, 1):
                rec = branch_to_ussd(inst, b)
                ui = rec.ussd_instance
                expected = 1.0 / (4.0 * rec.probability)
                worst = max(worst, abs(ui.r_plus - expected),
                            abs(ui.r_minus - expected))
    return worst, "branch posterior weights are 1/(4 x branch probability)"


def _teleport_branch_ledger():
    worst = 0.0
    for rho in (0.2, 0.45, 0.7):
        for mu in (0.5, 1.6, 2.7):
            inst = TeleportInstance(rho, mu, 0.4)
            for b in (0, 1):
                rec = branch_to_ussd(inst, b)
                ui = rec.ussd_instance
                led = ledger(coupled_state(ui, separable_strategy(ui)))
                ct, ca, cg = rec.coherences
                worst = max(worst,
                            abs(ct - led.c_total),
                            abs(ca - led.bipartite_of("A")),
                            abs(cg - led.c_genuine),
                            led.pair("C", "A"),
                            abs((ct - ca) - led.pair("S", "C")))
    return worst, "branch coherence formulas vs ledgers, incl. vanishing C-A pair"


def _smr_maximal_channel():
    v = abs(square_mean_root(0.0, "total") - math.pi ** 2 / 16.0)
    return v, "maximally entangled channel averages to pi^2/16"


def _smr_product_channel():
    v = max(square_mean_root(math.pi / 4, k) for k in ("total", "converted", "retained"))
    return v, "product channel carries no coherence"


def _fig4_share_profile():
    rows = fig4_sweep(np.linspace(0.0, 1.0, 21), nodes=32)
    shares = [r.converted_share for r in rows]
    worst = max(abs(shares[0] - 1.0), abs(shares[-1]))
    for a, b in zip(shares, shares[1:]):
        worst = max(worst, b - a)          # must not increase with tangle
    return worst, "converted share walks from 1 to 0 as channel tangle grows"


def _quadrature_table():
    table = quadrature_refine(lambda m: math.sin(m) ** 2)
    v = max(abs(table.value - math.pi / 2.0), table.final_delta)
    return v, "node-doubling table locks onto the polar test integral"


def _coupling_unitarity():
    rng = np.random.default_rng(22)
    worst = 0.0
    for _ in range(5):
        inst = _random_instance(rng)
        strat = separable_strategy(inst)
        u = coupling_unitary(inst, strat)
        m = u.matrix
        worst = max(worst, float(np.max(np.abs(m.conj().T @ m - np.eye(4)))))
    return worst, "completed coupling is unitary"


def _born_sums():
    rng = np.random.default_rng(23)
    inst = _random_instance(rng)
    res = run_protocol(inst, optimal_strategy(inst))
    s1 = abs(sum(o.probability for o in res.outcomes) - 1.0)
    runs = enumerate_runs(TeleportInstance(0.4, 1.2, 0.8))
    s2 = abs(sum(r.probability for r in runs) - 1.0)
    return max(s1, s2), "outcome probabilities resolve to 1 in both pipelines"


_CHECKS = (
    ("spot_success_interior", 1e-12, _spot_success_interior),
    ("spot_success_saturated", 1e-12, _spot_success_saturated),
    ("spot_optimal_amplitudes", 1e-12, _spot_optimal_amplitudes),
    ("normalization_identity", 1e-12, _normalization_identity),
    ("success_grid_oracle", 1e-6, _success_grid_oracle),
    ("success_born_rule", 1e-10, _success_born_rule),
    ("success_strategy_independent", 1e-10, _success_strategy_independent),
    ("separability_zero", 1e-10, _separability_zero),
    ("separability_argmin", 0.14, _separability_argmin),
    ("decomposition_residuals", 1e-10, _decomposition_residuals),
    ("decomposition_sensitivity", 1e-12, _decomposition_sensitivity),
    ("conservation", 1e-10, _conservation),
    ("closed_form_ledger_grid", 1e-9, _closed_form_ledger_grid),
    ("retained_pair_identity", 1e-9, _retained_pair_identity),
    ("monogamy_random", 1e-9, _monogamy_random),
    ("ghz_w_landmarks", 1e-9, _ghz_w_landmarks),
    ("lu_invariance", 1e-9, _lu_invariance),
    ("bargmann_equality", 1e-10, _bargmann_equality),
    ("bargmann_gauge", 1e-10, _bargmann_gauge),
    ("bargmann_teleport_branches", 1e-10, _bargmann_teleport_branches),
    ("fig2_monotone", 1e-12, _fig2_monotone),
    ("fig2_limit", 1e-6, _fig2_limit),
    ("fig3_share_monotone_interior", 1e-10, _fig3_share_monotone_interior),
    ("fig3_share_saturated", 1e-10, _fig3_share_saturated),
    ("band_argmax", 1e-3, _band_argmax),
    ("band_flat", 1e-10, _band_flat),
    ("teleport_total_closed", 1e-12, _teleport_total_closed),
    ("teleport_state_independent", 1e-12, _teleport_state_independent),
    ("teleport_fidelity", 1e-10, _teleport_fidelity),
    ("teleport_failure_leak", 1e-12, _teleport_failure_leak),
    ("teleport_branch_priors", 1e-12, _teleport_branch_priors),
    ("teleport_branch_ledger", 1e-9, _teleport_branch_ledger),
    ("smr_maximal_channel", 1e-8, _smr_maximal_channel),
    ("smr_product_channel", 1e-12, _smr_product_channel),
    ("fig4_share_profile", 1e-9, _fig4_share_profile),
    ("quadrature_table", 1e-12, _quadrature_table),
    ("coupling_unitarity", 1e-10, _coupling_unitarity),
    ("born_sums", 1e-10, _born_sums),
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: Optional[float]
    tolerance: float
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "value": self.value,
                "tolerance": self.tolerance, "detail": self.detail}


@dataclass(frozen=True)
class SelftestReport:
    passed: bool
    n_passed: int
    n_failed: int
    checks: tuple

    def to_dict(self) -> dict:
        return {"passed": self.passed, "n_passed": self.n_passed,
                "n_failed": self.n_failed,
                "checks": [c.to_dict() for c in self.checks]}


def available_checks() -> tuple:
    return tuple(name for name, _, _ in _CHECKS)


def run_selftest(tolerance_override: Optional[float] = None,
                 only: Optional[str] = None) -> SelftestReport:
    """Run the verification battery.

    tolerance_override, when given, replaces every per-check tolerance;
    only filters checks to those whose name contains the substring.
    """
    if tolerance_override is not None and tolerance_override <= 0.0:
        raise RangeError(f"tolerance must be positive, got {tolerance_override!r}")
    selected = [(n, t, f) for n, t, f in _CHECKS
                if only is None or only in n]
    if not selected:
        raise RangeError(f"no check matches {only!r}; see available_checks()")
    results = []
    for name, tol, fn in selected:
        tol_used = float(tolerance_override if tolerance_override is not None else tol)
        try:
            value, detail = fn()
            value = float(value)
            results.append(CheckResult(name, value <= tol_used, value,
                                       tol_used, detail))
        except Exception as exc:   # a crash is a failed check, not a crash
            results.append(CheckResult(name, False, None, tol_used,
                                       f"raised {type(exc).__name__}: {exc}"))
    n_pass = sum(1 for r in results if r.passed)
    return SelftestReport(passed=(n_pass == len(results)), n_passed=n_pass,
                          n_failed=len(results) - n_pass, checks=tuple(results))
