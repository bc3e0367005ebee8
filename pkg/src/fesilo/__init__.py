"""Flip-and-exchange symmetric qubit states under invertible local operations.

The FES subspace of n qubits has dimension ``n//2 + 1``. This package builds
that basis, moves states along ILO curves inside it, computes the stochastic
success probability of each move and reports which eigenstates bound a
state's SLOCC class. A dense 2^n state-vector engine backs every subspace
result for cross-checking.
"""

__version__ = "0.1.0"

from .errors import DimensionMismatchError, DomainError, FesError, InvalidStateError, NotFesError
from .statevec import StateVector, apply_exchange, apply_local, fidelity, inner, is_fes
from .fes_basis import BasisIndex, FesVector, degeneracy, dicke, embed, expand, fes_dimension, psi_pq
from .ilo import (
    CurveSample,
    FPolicy,
    IloParams,
    antidiagonal_equivalent,
    curve_trace,
    evolve,
    lambda_pq,
    m_of_t,
    success_probability,
)
from .classify import (
    ClassReport,
    FourQubitG,
    ProductFit,
    StabilitySample,
    build_g,
    canonical_four,
    classify,
    closest_symmetric_product,
    ghz3_probability_closed_form,
    named_state,
    odd_even_map,
    stability_sweep,
)
