"""Entropy of principal algebraic actions of amenable residually finite groups.

The entropy of the action on ``X_f`` is computed as a limit of normalized
log-determinants over finite quotients and cross-checked with Chebyshev
trace expansions, exact periodic point counts and, on ``Z^d``, the
Mahler measure.
"""
__version__ = "0.1.0"

from .groups import (CapacityError, ChainTooShort, DirectProduct, FiniteCyclicProduct,
                     FiniteQuotient, FreeAbelian, GroupError, Heisenberg3, QuotientChain,
                     parse_group, verify_chain_separation, word_ball, word_length,
                     word_lengths)
from .group_ring import FLOAT, INTEGER, RATIONAL, RingElement, basis, unit
from .quotient_transfer import QuotientOperator, fibre_integrate, operator_matrix
from .inversion import (INVERTIBLE, NONINVERTIBLE, UNKNOWN, InvertibilityCertificate,
                        certify_invertible, decay_profile, detect_noninvertible, l1_inverse)
from .entropy_core import (EntropyReport, entropy_at_level, entropy_bounds, entropy_converge,
                           fixed_points_exact, separated_lower_bound)
from .poly_trace import (chebyshev_log, entropy_cheb, spectral_interval,
                         trace_stabilization)
from .mahler import TorusPolynomial, mahler_quadrature, wiener_invertibility
from .dynamics import (enumerate_fixed_points, homoclinic_point, lift_point,
                       specification_glue, xi_map)

__all__ = [
    "CapacityError", "ChainTooShort", "DirectProduct", "FiniteCyclicProduct", "FiniteQuotient",
    "FreeAbelian", "GroupError", "Heisenberg3", "QuotientChain", "parse_group",
    "verify_chain_separation", "word_ball", "word_length", "word_lengths",
    "FLOAT", "INTEGER", "RATIONAL", "RingElement", "basis", "unit",
    "QuotientOperator", "fibre_integrate", "operator_matrix",
    "INVERTIBLE", "NONINVERTIBLE", "UNKNOWN", "InvertibilityCertificate", "certify_invertible",
    "decay_profile", "detect_noninvertible", "l1_inverse",
    "EntropyReport", "entropy_at_level", "entropy_bounds", "entropy_converge",
    "fixed_points_exact", "separated_lower_bound",
    "chebyshev_log", "entropy_cheb", "spectral_interval", "trace_stabilization",
    "TorusPolynomial", "mahler_quadrature", "wiener_invertibility",
    "enumerate_fixed_points", "homoclinic_point", "lift_point", "specification_glue", "xi_map",
]
