"""Fast nonuniform Alikhanov scheme with SOE history and compact fourth-order
differences for the time-fractional Black-Scholes equation."""

from .analysis import (
    ConvergenceRow,
    IncompatibleGridError,
    convergence_study,
    l2_error_final,
    l2_error_max,
    random_m1_mesh,
    self_reference_error,
    verify_kernel_properties,
)
from .caputo import (
    EpsilonAdmissibilityError,
    FastHistory,
    KernelRow,
    assemble_direct_kernel_row,
    assemble_fast_kernel_row,
    complementary_kernels,
    history_coeffs,
    history_step,
    local_coeff_a0,
)
from .mesh import SpatialMesh, TemporalMesh, check_m1, check_m2, graded_mesh, mesh_from_points
from .problem import (
    BlackScholesSpec,
    ConstantCoeffSpec,
    HomogenizedSpec,
    example1,
    example2,
    example2_black_scholes,
    homogenize,
    to_constant_coeff,
)
from .soe import SOEApproximation, SOECertificationError, build_soe, eval_soe, soe_max_error
from .spatial import AdmissibilityError, CompactOperator, TriDiag, build_operator, matrix_property_checks
from .stepper import MeshRatioError, NonFiniteSolutionError, SolutionGrid, solve, thomas_solve

__version__ = "0.1.0"
