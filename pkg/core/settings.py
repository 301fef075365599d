"""
FermiBalance – Numerical settings
==================================
Named tolerances and limits shared by the library. Every public operation
that compares numbers takes its tolerance as a keyword argument defaulting
to one of these.
"""

# Largest lattice we are willing to materialise (2^16 basis vectors)
MAX_LATTICE_SIZE = 16

# Generic comparisons and balance verdicts
DEFAULT_TOLERANCE = 1e-10

# Anticommutation self-test
CAR_TOLERANCE = 1e-12

# Probability tables: sum-to-one check and normalisation window
PROBABILITY_TOLERANCE = 1e-12

# Residual above which an operator is declared outside A(I)
EXPANSION_RESIDUAL = 1e-8

# Largest accepted ratio of extreme singular values of the B_phi Gram matrix
GRAM_CONDITION_LIMIT = 1e12

# Ratio above which the Gram matrix is reported as near-singular
GRAM_WARN_CONDITION = 1e8

# Dual map checks: B_phi adjoint identity and alpha^phi^phi = alpha
ADJOINT_TOLERANCE = 1e-9
INVOLUTION_TOLERANCE = 1e-8
