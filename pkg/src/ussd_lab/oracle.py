"""Slow, independent checks for the closed-form results.

Everything here recomputes from first principles: success probabilities
by brute-force search over coupling amplitudes, separability by direct
minimization of the system-ancilla concurrence, the rank-two
decomposition by rebuilding both vectors from the reported scalars, and
integrals by a node-doubling quadrature table. Nothing in this module
imports the closed-form layer; instances and strategies are consumed as
plain attribute bags so that agreement between the two layers is
evidence rather than tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NumericalError, RangeError
from .coherence import wootters_concurrence

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class GridSpec:
    """Closed search interval with an inclusive point count.

    refine counts golden-section passes run after the coarse sweep; zero
    means take the raw grid winner.
    """

    lower: float
    upper: float
    count: int
    refine: int = 2

    def __post_init__(self):
        if not self.upper > self.lower:
            raise RangeError(
                f"grid bounds must be ordered, got [{self.lower!r}, {self.upper!r}]"
            )
        if self.count < 2:
            raise RangeError(f"grid needs at least 2 points, got {self.count!r}")
        if self.refine < 0:
            raise RangeError(f"refine must be non-negative, got {self.refine!r}")

    def points(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.count)


def _golden_min(f: Callable[[float], float], lo: float, hi: float,
                tol: float = 1e-10) -> tuple:
    """Golden-section minimum of a unimodal scalar function on [lo, hi]."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


@dataclass(frozen=True)
class SuccessSearchResult:
    abs_alpha_plus: float
    value: float


def grid_optimize_success(inst, grid: Optional[GridSpec] = None) -> SuccessSearchResult:
    """Maximize the conclusive-outcome probability by brute force.

    Scans the flagged-by-ancilla amplitude for the first sub-state over a
    dense grid (the partner amplitude is pinned by the overlap
    constraint), then golden-sections around the grid winner. Used as the
    oracle for the closed-form optimum.
    """
    if grid is None:
        grid = GridSpec(0.0, 1.0, 10000, 2)
    rp, rm = float(inst.r_plus), float(inst.r_minus)
    a = abs(inst.alpha)
    lo = max(grid.lower, a)
    hi = min(grid.upper, 1.0)
    if not hi > lo:
        raise RangeError("search interval is empty for this instance")

    def objective(m: float) -> float:
        if a == 0.0:
            partner = 0.0
        elif m <= 0.0:
            return -math.inf
        else:
            partner = a / m
        if partner > 1.0 + 1e-12:
            return -math.inf
        return rp * (1.0 - m * m) + rm * (1.0 - partner * partner)

    pts = np.linspace(lo, hi, grid.count)
    vals = np.array([objective(float(m)) for m in pts])
    i = int(np.argmax(vals))
    best_m, best_v = float(pts[i]), float(vals[i])
    cell = (hi - lo) / (grid.count - 1)
    for _ in range(grid.refine):
        wlo = max(lo, best_m - cell)
        whi = min(hi, best_m + cell)
        x, neg = _golden_min(lambda m: -objective(m), wlo, whi, tol=1e-12)
        if -neg >= best_v:
            best_m, best_v = x, -neg
        cell = max((whi - wlo) * 1e-3, 1e-12)
    return SuccessSearchResult(abs_alpha_plus=best_m, value=best_v)


def _zeta_pair(alpha_plus: complex, alpha_minus: complex,
               beta: float, delta: float) -> tuple:
    """Coupled sub-states on the system-ancilla pair, assembled directly.

    Basis order is (system, ancilla) with the system qubit most
    significant; the failure direction is cos(beta), sin(beta) e^{i
    delta} on the system with the ancilla reading 1.
    """
    ap, am = complex(alpha_plus), complex(alpha_minus)
    bp = math.sqrt(max(0.0, 1.0 - abs(ap) ** 2))
    bm = math.sqrt(max(0.0, 1.0 - abs(am) ** 2))
    e0, e1 = math.cos(beta), math.sin(beta) * np.exp(1j * delta)
    zp = np.array([bp, ap * e0, 0.0, ap * e1], dtype=complex)
    zm = np.array([0.0, am * e0, bm, am * e1], dtype=complex)
    return zp, zm


def _rho_sa(inst, strat, beta: float, delta: float) -> np.ndarray:
    zp, zm = _zeta_pair(strat.alpha_plus, strat.alpha_minus, beta, delta)
    rp, rm = float(inst.r_plus), float(inst.r_minus)
    ac = complex(inst.alpha_c)
    rho = rp * np.outer(zp, zp.conj()) + rm * np.outer(zm, zm.conj())
    cross = math.sqrt(rp * rm) * ac * np.outer(zp, zm.conj())
    return rho + cross + cross.conj().T


@dataclass(frozen=True)
class ConcurrenceSearchResult:
    beta: float
    delta: float
    value: float


def grid_min_concurrence(inst, strat_base, beta_grid: GridSpec,
                         delta_grid: GridSpec) -> ConcurrenceSearchResult:
    """Minimize the system-ancilla concurrence over the failure direction.

    Coarse grid over both angles, then alternating golden-section sweeps
    in each coordinate around the winner. Oracle for the closed-form
    direction that renders the pair separable.
    """
    betas = beta_grid.points()
    deltas = delta_grid.points()

    def conc(beta: float, delta: float) -> float:
        return wootters_concurrence(_rho_sa(inst, strat_base, beta, delta))

    best = (math.inf, 0.0, 0.0)
    for b in betas:
        for d in deltas:
            v = conc(float(b), float(d))
            if v < best[0]:
                best = (v, float(b), float(d))
    value, beta, delta = best
    bcell = (beta_grid.upper - beta_grid.lower) / (beta_grid.count - 1)
    dcell = (delta_grid.upper - delta_grid.lower) / (delta_grid.count - 1)
    rounds = max(beta_grid.refine, delta_grid.refine)
    for _ in range(rounds):
        blo = max(beta_grid.lower, beta - bcell)
        bhi = min(beta_grid.upper, beta + bcell)
        beta, value = _golden_min(lambda b: conc(b, delta), blo, bhi, tol=1e-12)
        dlo = max(delta_grid.lower, delta - dcell)
        dhi = min(delta_grid.upper, delta + dcell)
        delta, value = _golden_min(lambda d: conc(beta, d), dlo, dhi, tol=1e-12)
        bcell = max(bhi - blo, 1e-9) * 1e-2
        dcell = max(dhi - dlo, 1e-9) * 1e-2
    return ConcurrenceSearchResult(beta=beta, delta=delta, value=value)


@dataclass(frozen=True)
class DecompositionReport:
    """Residuals of the reported rank-two decomposition, all of which
    should sit at machine precision for a valid report."""

    reconstruction: float
    weight_plus: float
    weight_minus: float
    cross: float

    @property
    def worst(self) -> float:
        return max(self.reconstruction, self.weight_plus,
                   self.weight_minus, self.cross)


def decomposition_check(rho_sa, params, inst, strat) -> DecompositionReport:
    """Audit a separability report against the state it claims to split.

    Both decomposition vectors are rebuilt from the scalar weights and
    phases in the report (the vectors stored inside it are ignored), so a
    wrong phase or weight shows up as a reconstruction residual instead
    of being copied through.
    """
    rho = np.asarray(getattr(rho_sa, "matrix", rho_sa), dtype=complex)
    if rho.shape != (4, 4):
        raise RangeError(f"expected a 4x4 two-qubit density matrix, got {rho.shape}")
    zp, zm = _zeta_pair(strat.alpha_plus, strat.alpha_minus,
                        float(strat.beta), float(strat.delta))
    z1 = params.q1_plus * zp + params.q1_minus * np.exp(1j * params.gamma1) * zm
    z2 = params.q2_plus * zp + params.q2_minus * np.exp(1j * params.gamma2) * zm
    recon = np.outer(z1, z1.conj()) + np.outer(z2, z2.conj())
    rp, rm = float(inst.r_plus), float(inst.r_minus)
    cross_target = math.sqrt(rp * rm) * np.conj(complex(inst.alpha_c))
    cross_built = (params.q1_plus * params.q1_minus * np.exp(1j * params.gamma1)
                   + params.q2_plus * params.q2_minus * np.exp(1j * params.gamma2))
    return DecompositionReport(
        reconstruction=float(np.max(np.abs(recon - rho))),
        weight_plus=abs(params.q1_plus ** 2 + params.q2_plus ** 2 - rp),
        weight_minus=abs(params.q1_minus ** 2 + params.q2_minus ** 2 - rm),
        cross=abs(cross_built - cross_target),
    )


@dataclass(frozen=True)
class QuadratureRow:
    nodes: int
    value: float
    delta: float    # change from the previous row; nan on the first


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple

    @property
    def value(self) -> float:
        return self.rows[-1].value

    @property
    def final_delta(self) -> float:
        return self.rows[-1].delta


def quadrature_refine(f: Callable[[float], float],
                      node_counts: Sequence[int] = (8, 16, 32, 64, 128)) -> ConvergenceTable:
    """Integrate f over the polar interval [0, pi] at increasing
    Gauss-Legendre node counts and tabulate the successive differences.

    The integrands used here are analytic in the polar angle, so the
    deltas collapse geometrically; a table whose tail refuses to shrink
    is the designed failure signal for a bad integrand.
    """
    if len(node_counts) < 1:
        raise RangeError("need at least one node count")
    rows = []
    prev = None
    for n in node_counts:
        n = int(n)
        if n < 2:
            raise RangeError(f"node counts must be at least 2, got {n}")
        x, w = np.polynomial.legendre.leggauss(n)
        mus = 0.5 * math.pi * (x + 1.0)
        vals = np.array([f(float(m)) for m in mus], dtype=float)
        if not np.all(np.isfinite(vals)):
            raise NumericalError("integrand returned a non-finite value")
        total = 0.5 * math.pi * float(np.dot(w, vals))
        delta = math.nan if prev is None else abs(total - prev)
        rows.append(QuadratureRow(nodes=n, value=total, delta=delta))
        prev = total
    return ConvergenceTable(rows=tuple(rows))
