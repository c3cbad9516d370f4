"""Centralized tolerances and resource bounds.

Every numeric threshold the package checks against lives here so the CLI
can override them in one place.
"""

import os

# characters
POLE_TOL = 1e-12             # |1 - a(z-1)| below this is treated as a pole
NONNEG_TOL = 1e-12           # table values may dip this far below zero
BETA_SUM_TOL = 1e-12         # slack on beta+_1 + beta-_1 <= 1
OMEGA_Q_MAX_INDEX = 60       # positivity of Phi(q^{-2i}) is sampled for i <= this
MULT_TOL = 1e-8              # Prop.-3.8 style residual slack above the tail bound

# kms
KMS_TOL = 1e-12
OCHA_TOL = 1e-12
BRANCHING_MAX_DIM = 2000     # total joint dimension of a branching model

# ccr
PSD_TOL = 1e-10
FD_STEP = 1e-4               # central finite differences for Weyl generating functions
FD_DPS = 40                  # working precision (decimal digits) of those differences
WICK_REL_TOL = 1e-6
SIGMA_TRACIAL_TOL = 1e-12

# fluctsim
DENSE_MAX_DIM = 2 ** 12      # dense eigendecomposition / density-matrix path
VECTOR_MAX_DIM = 2 ** 16     # sparse state-vector path (pure site densities)
VECTOR_DENSE_CUTOFF = 2 ** 9  # below this the state-vector path exponentiates densely
PRODUCT_CHECK_TOL = 1e-12


def max_threads() -> int | None:
    """BLAS thread cap from ``QCHAR_THREADS``; None (no cap) when unset or invalid."""
    raw = os.environ.get("QCHAR_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return None
    return max(1, n)
