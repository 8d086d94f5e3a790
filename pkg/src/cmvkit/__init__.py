"""cmvkit: numerical spectral theory of CMV operators."""

from .core import (ALPHA_LIMIT, Arc, CMVError, DomainError, Explicit, GaugeTransform, Gauged,
                   Geometric, NumericalError, OutOfRangeError, Periodic, VerblunskySequence,
                   apply_gauge, arc_from_endpoints, full_circle, gauge_reduction,
                   sequence_from_json)
from .cmv import (CMVMatrix, SpectralMeasure, build_full_section, build_half_lattice,
                  build_theta, eigendecompose, eigenvalues, unitarity_residual)
from .szego import solution, szego_coefficients, szego_recurse, transfer_matrix
from .herglotz import (CaratheodoryFunction, SchurFunction, detect_atoms, herglotz_eval,
                       reconstruct_measure, xi_profile)
from .weyl import M_functions, M_matrix, m_minus, m_plus, resolvent_entry, schur_pair
from .trace import L_coeffs, exp_taylor, log_taylor, moments, trace_coefficients
from .floquet import band_arcs, discriminant, monodromy, period2_discriminant
from .borg import borg_forward, borg_inverse, borg_result, check_reflectionless

__version__ = "0.1.0"
