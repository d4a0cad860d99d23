"""Numerical tolerances shared by every module.

Tests and runtime checks read from here so there is a single place to
tighten or relax a threshold.
"""

#: Entrywise absolute deviation allowed between a matrix and its adjoint.
HERMITIAN_TOL = 1e-12

#: How far below zero an eigenvalue may sit and still count as PSD.
PSD_TOL = 1e-9

#: Relative reconstruction error allowed for eigendecompositions.
RECONSTRUCTION_TOL = 1e-10

#: Deviation allowed for probability sums, POVM completeness and 0 <= V <= I.
GAME_TOL = 1e-9

#: Probability vectors must sum to one within this.
DISTRIBUTION_TOL = 1e-12

#: Projector test ||R^2 - R|| used by the two-question repetition formula.
PROJECTIVE_TOL = 1e-9

#: Eigenvalues below this are treated as zero by the pseudo-inverse root.
NULLSPACE_TOL = 1e-8

#: Default cap on total moment/referee dimension for repeated games.
DEFAULT_SIZE_CAP = 4096

#: Default cap on the number of deterministic strategies enumerated.
DEFAULT_ENUMERATION_CAP = 10**7
