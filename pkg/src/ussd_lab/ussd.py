"""Unambiguous discrimination of two sub-states entangled with an
environment qubit, assisted by a single ancilla.

The preparation is a two-qubit pure state on system S and environment C:
a mixture weight p_plus puts the system in a reference state with the
environment in its partner state, and 1 - p_plus pairs the alternative
system state with the alternative environment state. Both overlaps are
complex numbers fixed by the instance: alpha between the system
sub-states and alpha_c between the environment ones. A coupling unitary
on system and ancilla, followed by a projective ancilla measurement,
either identifies the sub-state without error (ancilla outcome 0) or
declares failure (outcome 1).

The instance is canonicalized so that p_plus <= 1/2; an input with
p_plus > 1/2 is mapped to the equivalent instance with the roles of the
two sub-states exchanged, which conjugates both overlaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import (
    DegenerateOverlap,
    EmbeddingError,
    RangeError,
    ShapeError,
    UndefinedPhase,
)
from .qcore import (
    PureState,
    Unitary,
    apply,
    complete_unitary,
    partial_trace,
    projective_measure,
    reorder,
    tensor,
)
from .tolerances import DEFAULT as TOL

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class UssdInstance:
    """One discrimination problem, already canonicalized.

    p_plus is the prior weight of the reference sub-state, alpha the
    complex overlap between the system sub-states, alpha_c the complex
    overlap between the environment partner states. swapped records
    whether canonicalization exchanged the two sub-states.
    """

    p_plus: float
    alpha: complex
    alpha_c: complex
    swapped: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p_plus <= 1.0:
            raise RangeError(f"p_plus must lie in [0, 1], got {self.p_plus!r}")
        if self.p_plus > 0.5 + 1e-15:
            raise RangeError("instances must be canonicalized to p_plus <= 1/2; "
                             "use make_instance")
        if abs(self.alpha) >= 1.0:
            raise DegenerateOverlap(
                f"|alpha| = {abs(self.alpha)!r} leaves nothing to discriminate"
            )
        if abs(self.alpha_c) > 1.0 + 1e-15:
            raise RangeError(f"|alpha_c| = {abs(self.alpha_c)!r} exceeds 1")

    @property
    def gamma(self) -> float:
        """Total relative phase of the two overlaps."""
        return float(np.angle(self.alpha) + np.angle(self.alpha_c))

    @property
    def _denominator(self) -> float:
        return 1.0 + 2.0 * math.sqrt(self.p_plus * (1.0 - self.p_plus)) \
            * abs(self.alpha) * abs(self.alpha_c) * math.cos(self.gamma)

    @property
    def r_plus(self) -> float:
        """Effective weight of the reference branch in the joint state."""
        return self.p_plus / self._denominator

    @property
    def r_minus(self) -> float:
        return (1.0 - self.p_plus) / self._denominator

    @property
    def tilde_alpha(self) -> float:
        """Prior-ratio threshold separating the two optimal regimes."""
        if self.p_plus == 1.0:
            return math.inf
        return math.sqrt(self.p_plus / (1.0 - self.p_plus))

    @property
    def case(self) -> str:
        """Optimal-strategy regime: "interior" when both failure overlaps
        can stay below 1, "saturated" when one of them pins at 1."""
        return "interior" if abs(self.alpha) < self.tilde_alpha else "saturated"


def make_instance(p_plus: float, alpha, alpha_c) -> UssdInstance:
    """Validate, canonicalize and build a discrimination instance.

    alpha and alpha_c may be complex or real. Instances with
    p_plus > 1/2 are converted to the swapped equivalent (priors
    exchanged, both overlaps conjugated).
    """
    p = float(p_plus)
    a = complex(alpha)
    ac = complex(alpha_c)
    if not 0.0 <= p <= 1.0:
        raise RangeError(f"p_plus must lie in [0, 1], got {p!r}")
    if abs(a) >= 1.0:
        raise DegenerateOverlap(f"|alpha| must be < 1, got {abs(a)!r}")
    if abs(ac) > 1.0 + 1e-15:
        raise RangeError(f"|alpha_c| must be <= 1, got {abs(ac)!r}")
    if p > 0.5:
        return UssdInstance(1.0 - p, a.conjugate(), ac.conjugate(), swapped=True)
    return UssdInstance(p, a, ac, swapped=False)


# ---------------------------------------------------------------------------
# embeddings and state assembly

@dataclass(frozen=True)
class Embedding:
    """Concrete single-qubit vectors realizing the instance overlaps."""

    xi: np.ndarray
    xi_bar: np.ndarray
    phi: np.ndarray
    phi_bar: np.ndarray

    def validate(self, inst: UssdInstance) -> None:
        pairs = (
            ("system", self.xi_bar, self.xi, inst.alpha),
            ("environment", self.phi_bar, self.phi, inst.alpha_c),
        )
        for name, bar, plain, target in pairs:
            for v in (bar, plain):
                if abs(np.vdot(v, v) - 1.0) > TOL.overlap * 10:
                    raise EmbeddingError(f"{name} vector not normalized")
            got = complex(np.vdot(bar, plain))
            if abs(got - target) > TOL.overlap * 10:
                raise EmbeddingError(
                    f"{name} overlap {got!r} does not match instance {target!r}"
                )


def _pair_with_overlap(ov: complex) -> tuple:
    v0 = np.array([1.0, 0.0], dtype=complex)
    v1 = np.array([np.conj(ov), math.sqrt(max(0.0, 1.0 - abs(ov) ** 2))],
                  dtype=complex)
    return v0, v1


def canonical_embedding(inst: UssdInstance) -> Embedding:
    """Reference embedding: each plain vector is |0> and its partner
    carries the overlap in the |0> component with a real, nonnegative
    |1> component."""
    xi, xi_bar = _pair_with_overlap(inst.alpha)
    phi, phi_bar = _pair_with_overlap(inst.alpha_c)
    return Embedding(xi=xi, xi_bar=xi_bar, phi=phi, phi_bar=phi_bar)


def build_chi(inst: UssdInstance, embedding: Optional[Embedding] = None) -> PureState:
    """Joint system-environment preparation on register (S, C)."""
    emb = embedding if embedding is not None else canonical_embedding(inst)
    emb.validate(inst)
    vec = (math.sqrt(inst.r_plus) * np.kron(emb.xi, emb.phi)
           + math.sqrt(inst.r_minus) * np.kron(emb.xi_bar, emb.phi_bar))
    return PureState(("S", "C"), vec)


# ---------------------------------------------------------------------------
# strategies

@dataclass(frozen=True)
class UssdStrategy:
    """Coupling-unitary parameters.

    alpha_plus and alpha_minus are the complex failure overlaps left on
    the two sub-states (their product with the second conjugated must
    reproduce the instance overlap; that pairing is checked wherever an
    instance and a strategy meet). beta and delta parameterize the
    single-qubit failure direction, and ancilla_init is the known pure
    state the ancilla starts in.
    """

    alpha_plus: complex
    alpha_minus: complex
    beta: float = 0.0
    delta: float = 0.0
    ancilla_init: np.ndarray = None

    def __post_init__(self):
        if abs(self.alpha_plus) > 1.0 + 1e-12 or abs(self.alpha_minus) > 1.0 + 1e-12:
            raise RangeError("failure overlaps cannot exceed unit modulus")
        if not 0.0 <= self.beta <= math.pi / 2.0 + 1e-12:
            raise RangeError(f"beta must lie in [0, pi/2], got {self.beta!r}")
        if not 0.0 <= self.delta < _TWO_PI + 1e-12:
            raise RangeError(f"delta must lie in [0, 2 pi), got {self.delta!r}")
        k = self.ancilla_init
        if k is None:
            k = np.array([1.0, 0.0], dtype=complex)
        else:
            if isinstance(k, PureState):
                k = k.amplitudes
            k = np.asarray(k, dtype=complex).reshape(-1)
            if k.size != 2:
                raise ShapeError("ancilla_init must be a single-qubit vector")
            nrm = float(np.linalg.norm(k))
            if abs(nrm - 1.0) > 1e-10:
                raise RangeError("ancilla_init must be normalized")
        arr = np.array(k, dtype=complex)
        arr.setflags(write=False)
        object.__setattr__(self, "ancilla_init", arr)

    def failure_direction(self) -> np.ndarray:
        return np.array(
            [math.cos(self.beta), math.sin(self.beta) * np.exp(1j * self.delta)],
            dtype=complex,
        )


def check_pair(inst: UssdInstance, strat: UssdStrategy) -> None:
    """The two failure overlaps must multiply back to the instance overlap."""
    prod = strat.alpha_plus * np.conj(strat.alpha_minus)
    if abs(prod - inst.alpha) > 1e-12:
        raise RangeError(
            f"strategy overlaps give {prod!r}, instance needs {inst.alpha!r}"
        )


def optimal_strategy(inst: UssdInstance, beta: float = 0.0, delta: float = 0.0,
                     ancilla_init=None) -> UssdStrategy:
    """Failure overlaps minimizing the failure probability.

    In the interior regime both moduli sit strictly inside (0, 1) at the
    geometric-mean split; in the saturated regime the reference overlap
    pins at 1 and the alternative carries all of |alpha|. The overall
    phase is placed on the reference side, leaving the alternative
    overlap real and nonnegative. beta and delta are passed through
    untouched; they do not affect the success probability.
    """
    aa = abs(inst.alpha)
    phase = np.exp(1j * np.angle(inst.alpha))
    if inst.case == "interior":
        mp = math.sqrt(aa / inst.tilde_alpha)
        mm = math.sqrt(aa * inst.tilde_alpha)
    else:
        mp, mm = 1.0, aa
    return UssdStrategy(alpha_plus=mp * phase, alpha_minus=complex(mm),
                        beta=beta, delta=delta, ancilla_init=ancilla_init)


def success_probability(inst: UssdInstance, strat: UssdStrategy) -> float:
    """Heralded success probability of a strategy on an instance."""
    check_pair(inst, strat)
    mp2 = abs(strat.alpha_plus) ** 2
    mm2 = abs(strat.alpha_minus) ** 2
    return float(inst.r_plus * (1.0 - mp2) + inst.r_minus * (1.0 - mm2))


def p_suc_max(inst: UssdInstance) -> float:
    """Optimal success probability in closed form."""
    aa = abs(inst.alpha)
    if inst.case == "interior":
        return float(inst.r_plus + inst.r_minus
                     - 2.0 * math.sqrt(inst.r_plus * inst.r_minus) * aa)
    return float(inst.r_minus * (1.0 - aa * aa))


# ---------------------------------------------------------------------------
# post-coupling states

def _zeta_vectors(strat: UssdStrategy) -> tuple:
    """Images of the two sub-states (with ancilla attached) under the
    coupling, on register (S, A). Success lands the ancilla on |0> with
    the system pointing at its flag state; failure funnels both
    sub-states onto the shared failure direction with the ancilla on |1>.
    """
    eta = strat.failure_direction()
    e0 = np.array([1.0, 0.0], dtype=complex)
    e1 = np.array([0.0, 1.0], dtype=complex)
    bp = math.sqrt(max(0.0, 1.0 - abs(strat.alpha_plus) ** 2))
    bm = math.sqrt(max(0.0, 1.0 - abs(strat.alpha_minus) ** 2))
    zeta_p = bp * np.kron(e0, e0) + strat.alpha_plus * np.kron(eta, e1)
    zeta_m = bm * np.kron(e1, e0) + strat.alpha_minus * np.kron(eta, e1)
    return zeta_p, zeta_m


def coupled_state(inst: UssdInstance, strat: UssdStrategy) -> PureState:
    """Joint state on (S, A, C) after the coupling, assembled directly.

    This is the closed-form image of the preparation: each sub-state
    branch maps to its coupled image while the environment partner
    states ride along unchanged (canonical embedding).
    """
    check_pair(inst, strat)
    zp, zm = _zeta_vectors(strat)
    phi, phi_bar = _pair_with_overlap(inst.alpha_c)
    vec = (math.sqrt(inst.r_plus) * np.kron(zp, phi)
           + math.sqrt(inst.r_minus) * np.kron(zm, phi_bar))
    return PureState(("S", "A", "C"), vec)


def coupling_unitary(inst: UssdInstance, strat: UssdStrategy,
                     embedding: Optional[Embedding] = None,
                     seed_basis=None) -> Unitary:
    """Two-qubit coupling on (S, A) built by unitary completion from the
    two defining constraints."""
    check_pair(inst, strat)
    emb = embedding if embedding is not None else canonical_embedding(inst)
    emb.validate(inst)
    k = strat.ancilla_init
    zp, zm = _zeta_vectors(strat)
    constraints = [
        (np.kron(emb.xi, k), zp),
        (np.kron(emb.xi_bar, k), zm),
    ]
    u = complete_unitary(constraints, seed_basis=seed_basis)
    return Unitary(("S", "A"), u.matrix)


@dataclass(frozen=True)
class OutcomeRecord:
    outcome: int
    probability: float
    state: Optional[PureState]


@dataclass(frozen=True)
class ProtocolResult:
    """Everything the protocol produces on one instance/strategy pair."""

    instance: UssdInstance
    strategy: UssdStrategy
    unitary: Unitary
    state: PureState          # joint (S, A, C) state after the coupling
    outcomes: tuple           # ancilla measurement branches

    @property
    def success_probability(self) -> float:
        return self.outcomes[0].probability


def run_protocol(inst: UssdInstance, strat: UssdStrategy,
                 embedding: Optional[Embedding] = None,
                 seed_basis=None) -> ProtocolResult:
    """Simulate the protocol end to end through the completed unitary.

    The preparation is embedded, the ancilla attached in its initial
    state, the coupling applied, and the ancilla measured in the
    computational basis. Outcome 0 heralds success.
    """
    emb = embedding if embedding is not None else canonical_embedding(inst)
    chi = build_chi(inst, emb)
    psi0 = reorder(
        tensor(chi, PureState(("A",), strat.ancilla_init)), ("S", "A", "C")
    )
    u = coupling_unitary(inst, strat, embedding=emb, seed_basis=seed_basis)
    psi = apply(u, psi0, targets=("S", "A"))
    e0 = np.array([1.0, 0.0], dtype=complex)
    e1 = np.array([0.0, 1.0], dtype=complex)
    branches = tuple(
        OutcomeRecord(outcome=k, probability=p, state=post)
        for k, p, post in projective_measure(psi, "A", (e0, e1))
    )
    return ProtocolResult(instance=inst, strategy=strat, unitary=u,
                          state=psi, outcomes=branches)


# ---------------------------------------------------------------------------
# failure-branch separability

@dataclass(frozen=True)
class SeparabilityParams:
    """Two-term decomposition of the system-ancilla state and the failure
    angles that disentangle the pair.

    The post-coupling system-ancilla density operator always splits into
    exactly two (subnormalized) pure pieces built on the coupled images
    of the sub-states; the combination weights q_plus/q_minus and phases
    omega_plus/omega_minus are functions of the instance and the strategy
    radii only. beta_star and delta_star are the failure angles at which
    the system-ancilla concurrence vanishes.
    """

    q_plus: float             # squared moduli of the combination amplitudes
    q_minus: float
    omega_plus: float         # arguments of the combination amplitudes
    omega_minus: float
    q1_plus: float            # first piece: coefficients on the two images
    q1_minus: float
    gamma1: float
    q2_plus: float            # second piece
    q2_minus: float
    gamma2: float
    beta_star: float
    delta_star: float
    zeta1: np.ndarray         # subnormalized vectors on (S, A)
    zeta2: np.ndarray


def separability_params(inst: UssdInstance, strat: UssdStrategy) -> SeparabilityParams:
    """Decompose the system-ancilla state and locate the separable point.

    The two pieces are evaluated at the strategy's current failure
    angles (the decomposition holds for any of them); beta_star and
    delta_star report where the residual system-ancilla entanglement
    vanishes. Degenerate combination amplitudes (possible when the
    environment overlap has unit modulus) fall back to the arctangent
    limits beta_star in {0, pi/2} and delta_star = 0.
    """
    check_pair(inst, strat)
    rp, rm = inst.r_plus, inst.r_minus
    ac = inst.alpha_c
    acm, gc = abs(ac), float(np.angle(ac))
    ap, am = strat.alpha_plus, strat.alpha_minus

    amp_p = math.sqrt(rp) * ap + math.sqrt(rm) * am * acm * np.exp(-1j * gc)
    amp_m = math.sqrt(rm) * am + math.sqrt(rp) * ap * acm * np.exp(+1j * gc)
    qp, qm = float(abs(amp_p) ** 2), float(abs(amp_m) ** 2)
    wp, wm = float(np.angle(amp_p)), float(np.angle(amp_m))
    g2 = (float(np.angle(inst.alpha)) - math.pi) % _TWO_PI

    fail = 1.0 - success_probability(inst, strat)
    if fail < 1e-15:
        # no failure branch: the ancilla never flags, the system-ancilla
        # state is already a product, and every angle choice is separable
        zero = np.zeros(4, dtype=complex)
        return SeparabilityParams(
            q_plus=qp, q_minus=qm, omega_plus=wp, omega_minus=wm,
            q1_plus=0.0, q1_minus=0.0, gamma1=0.0,
            q2_plus=0.0, q2_minus=0.0, gamma2=g2,
            beta_star=0.0, delta_star=0.0, zeta1=zero, zeta2=zero.copy(),
        )

    c1p = math.sqrt(rp * qp / fail)
    c1m = math.sqrt(rm * qm / fail)
    env_gap = math.sqrt(max(0.0, 1.0 - acm * acm))
    c2p = abs(am) * env_gap * math.sqrt(rp * rm / fail)
    c2m = abs(ap) * env_gap * math.sqrt(rp * rm / fail)
    g1 = wp - wm

    num = rm * qm * (1.0 - abs(am) ** 2)
    den = rp * qp * (1.0 - abs(ap) ** 2)
    beta_star = math.atan2(math.sqrt(max(num, 0.0)), math.sqrt(max(den, 0.0)))
    delta_star = g1 % _TWO_PI

    zp, zm = _zeta_vectors(strat)
    zeta1 = c1p * zp + c1m * np.exp(1j * g1) * zm
    zeta2 = c2p * zp + c2m * np.exp(1j * g2) * zm
    return SeparabilityParams(
        q_plus=qp, q_minus=qm, omega_plus=wp, omega_minus=wm,
        q1_plus=c1p, q1_minus=c1m, gamma1=g1,
        q2_plus=c2p, q2_minus=c2m, gamma2=g2,
        beta_star=beta_star, delta_star=delta_star,
        zeta1=zeta1, zeta2=zeta2,
    )


def separable_strategy(inst: UssdInstance, ancilla_init=None) -> UssdStrategy:
    """Optimal strategy with the failure angles set to the separable point."""
    base = optimal_strategy(inst, ancilla_init=ancilla_init)
    params = separability_params(inst, base)
    return replace(base, beta=params.beta_star, delta=params.delta_star)


def system_ancilla_density(inst: UssdInstance, strat: UssdStrategy) -> np.ndarray:
    """Post-coupling reduced density operator of the system-ancilla pair,
    assembled in closed form on register (S, A)."""
    check_pair(inst, strat)
    zp, zm = _zeta_vectors(strat)
    rp, rm, ac = inst.r_plus, inst.r_minus, inst.alpha_c
    cross = math.sqrt(rp * rm)
    return (rp * np.outer(zp, zp.conj()) + rm * np.outer(zm, zm.conj())
            + cross * (ac * np.outer(zp, zm.conj())
                       + np.conj(ac) * np.outer(zm, zp.conj())))


# ---------------------------------------------------------------------------
# conservation and geometric phase

@dataclass(frozen=True)
class ConservationReport:
    before: float     # system-vs-environment tangle of the preparation
    after: float      # environment-vs-rest tangle after the coupling
    residual: float


def total_coherence_conservation(inst: UssdInstance,
                                 strat: UssdStrategy) -> ConservationReport:
    """The environment's tangle with everything else cannot change under
    a coupling that never touches the environment."""
    chi = build_chi(inst)
    before = 4.0 * max(
        float(np.linalg.det(partial_trace(chi, ["C"]).matrix).real), 0.0
    )
    psi = coupled_state(inst, strat)
    after = 4.0 * max(
        float(np.linalg.det(partial_trace(psi, ["C"]).matrix).real), 0.0
    )
    return ConservationReport(before=before, after=after,
                              residual=float(abs(before - after)))


def bargmann_loop(psi1, psi2, psi3) -> float:
    """Geometric phase of the loop through three states, with the middle
    state expanded in the dual frame of the outer two.

    The first and third states span a two-dimensional frame; the middle
    state's components in the biorthogonal dual frame supply two edge
    phases, and the closing edge is the direct overlap from third to
    first. The combination is invariant under independent phase changes
    of all three inputs. A zero overlap contributes zero phase.
    """
    vecs = []
    for p in (psi1, psi2, psi3):
        v = p.amplitudes if isinstance(p, PureState) else np.asarray(p, dtype=complex)
        vecs.append(v.reshape(-1))
    v1, v2, v3 = vecs
    if not (v1.size == v2.size == v3.size):
        raise ShapeError("loop states must share a dimension")
    gram = np.array([[np.vdot(v1, v1), np.vdot(v1, v3)],
                     [np.vdot(v3, v1), np.vdot(v3, v3)]])
    rhs = np.array([np.vdot(v1, v2), np.vdot(v3, v2)])
    try:
        coeff = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise UndefinedPhase("outer loop states are linearly dependent") from exc
    phase = (np.angle(coeff[0]) - np.angle(coeff[1]) + np.angle(np.vdot(v3, v1)))
    return float((phase + math.pi) % _TWO_PI - math.pi)


def bargmann_phase(inst: UssdInstance) -> float:
    """Geometric phase of the preparation against its two extreme-prior
    siblings (all weight on one sub-state or the other).

    Equals the total relative phase of the two overlaps, wrapped to
    (-pi, pi]. Undefined when the instance itself sits at an extreme
    prior.
    """
    if inst.p_plus <= 0.0 or inst.p_plus >= 1.0:
        raise UndefinedPhase("extreme prior collapses the loop")
    emb = canonical_embedding(inst)
    v1 = np.kron(emb.xi, emb.phi)
    v3 = np.kron(emb.xi_bar, emb.phi_bar)
    v2 = build_chi(inst, emb).amplitudes
    return bargmann_loop(v1, v2, v3)
