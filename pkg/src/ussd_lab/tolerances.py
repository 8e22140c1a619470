"""Central tolerance settings.

All numeric guards in the package read from a single Tolerances record so
that tests and the selftest runner can reason about one set of numbers.
The defaults reflect what double precision actually delivers for 2- and
3-qubit linear algebra; none of them are tuned per call site.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # state and operator validation
    state_norm: float = 1e-12       # |  ||psi||^2 - 1 |
    hermitian: float = 1e-12        # max |rho - rho^dag|
    trace_one: float = 1e-12        # |tr rho - 1|
    psd_floor: float = 1e-12        # eigenvalues may dip this far below 0
    unitary: float = 1e-12          # max |U^dag U - 1|

    # unitary completion
    gram: float = 1e-10             # input vs output Gram matrix mismatch
    completion_drop: float = 1e-8   # residual below which a seed vector is skipped
    mapping: float = 1e-10          # | U in_k - out_k |

    # protocol-level checks
    overlap: float = 1e-12          # embedding overlap reproduction
    separability: float = 1e-10     # concurrence at the separable point
    decomposition: float = 1e-10    # two-term failure-state decomposition residual
    ledger: float = 1e-9            # closed forms vs numeric tangle accounting
    monogamy: float = 1e-9          # spread of the three tangle sums
    tangle_consistency: float = 1e-9  # polynomial invariant vs residual route
    phase: float = 1e-10            # geometric phase checks
    quadrature: float = 1e-8        # fixed-order quadrature truncation
    rank_cut: float = 1e-13         # relative eigenvalue cutoff in factorizations


DEFAULT = Tolerances()
