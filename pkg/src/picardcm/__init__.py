"""Picard curves with complex multiplication.

From a sextic cyclic CM field K = K0(zeta_3) this package constructs the
principally polarized abelian threefolds with CM by the maximal order,
evaluates Riemann theta constants at high precision, recovers the Picard
curve parameters (lambda, mu) with exact root-of-unity factors, recognizes
the absolute invariants as algebraic numbers, and sanity-checks the output
curves by point counts over small prime fields.
"""

from .cmfield import (CMField, CMFieldSpec, CMType, FieldElement,
                      apply_sigma, conjugate, embeddings, is_totally_positive,
                      parse_field, trace_Q)

__version__ = "0.1.0"

__all__ = [
    "CMField", "CMFieldSpec", "CMType", "FieldElement",
    "apply_sigma", "conjugate", "embeddings", "is_totally_positive",
    "parse_field", "trace_Q", "__version__",
]
