"""Numeric tolerances shared by every module."""

EPS_NORM = 1e-10  # structural checks: unitarity, hermiticity, normalization
EPS_EQ = 1e-9  # probability comparisons
EPS_RECON = 1e-8  # eigen reconstruction, unitary completion
SUPPORT_TOL = 1e-10  # weight below which a spatial string counts as empty
MAXIMALITY_TOL = 1e-7  # gate for I = 1/2
FORM_TOL = 1e-7  # residuals of canonical-form conditions
DEFAULT_CAP = 4096  # largest total dimension we agree to build densely
