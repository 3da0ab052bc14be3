"""Numeric tolerances used throughout the package.

Models with exact rational weights bypass these entirely: identities on
Fractions are checked with equality.
"""

from __future__ import annotations

import math

# Probability comparisons (identities, preorder slack on exact backends).
COMPARISON_EPS = 1e-9

# Total-mass normalization of weight vectors.
MASS_EPS = 1e-9

# Matrix invariants of the quantum backend.
HERMITIAN_EPS = 1e-9
PSD_EPS = 1e-9

# Denominator threshold below which a quantum outcome counts as null.
NULL_OUTCOME_EPS = 1e-12


def stat_tolerance(segments: int) -> float:
    """Preorder slack for discretized band models with the given segment count."""
    return 2.0 / math.sqrt(segments)
