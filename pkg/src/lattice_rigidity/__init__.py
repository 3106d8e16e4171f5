"""Rigid lattices over p-adic orders, computed at finite precision.

Arithmetic happens in W_N(F_q), realised as the Galois ring GR(p^N, m).
"""

__version__ = "0.1.0"

from .census import CensusReport, SublatticeBasis, canonical_basis, census_rigid, enumerate_sublattices
from .errors import (
    CapExceeded,
    ContextMismatch,
    LatticeError,
    NotStable,
    NotSubgroup,
    NotUnit,
    PrecisionExhausted,
    SeparabilityUnverified,
    StabilizationFailure,
    ValidationError,
)
from .genval import PolynomialO, WittPoint, generic_valuation, naive_valuation, variety_membership, witness_lift
from .groups import (
    double_cosets,
    enveloping_order,
    group_order,
    hochschild1_vanishes,
    make_group,
    permutation_lattice,
    subgroups,
)
from .linalg import RMatrix, det_valuation, howell_form, kernel, smith_invariants
from .orders import (
    Lattice,
    Order,
    ext1_invariants,
    hom_basis,
    is_isomorphic,
    is_rigid,
    make_lattice,
    make_order,
)
from .witt import (
    ArithmeticContext,
    RingElement,
    WittDigits,
    from_witt_digits,
    ghost_oracle,
    make_context,
    teichmuller,
    to_witt_digits,
)
