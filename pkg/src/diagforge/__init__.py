"""Constructive finite shadows of approximate Carpenter and Schur-Horn results."""

from .carpenter import (DiagonalSpec, JointPartitionSpec, ProjectionFamily, TracialPartition,
                        approx_rationals_step, approx_rationals_table, carpenter_block,
                        carpenter_discrete, carpenter_tracial, carpenter_uhf)
from .errors import (DegenerateHull, DiagforgeError, DimensionMismatch, Infeasible,
                     InfeasibleInput, InvalidInput, ModelTooCoarse, NecessityViolated,
                     NotNormal, ToleranceUnreachable)
from .lp import FarkasCertificate, solve_feasibility
from .numkit import (barycentric, conditional_expectation_diag, dft_unitary,
                     diagonalize_normal, flatten_constant_diagonal, hull_membership,
                     verify_projection_family)
from .obstructions import arveson_search, contrast_demo, square_infeasibility_certificate
from .schurhorn import (DiscreteSpectrum, TracialSpectrum, check_necessity,
                        feasibility_partition, synth_diagonal_discrete, synth_diagonal_tracial,
                        three_point_shortcut)

__version__ = "0.1.0"
