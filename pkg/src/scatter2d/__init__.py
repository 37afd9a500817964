"""2D exterior Helmholtz scattering with multipole bases.

Solves sound-soft scattering by smooth obstacles via collocation or
regularized least squares on Fourier-Hankel (multipole) expansions, and
quantifies the sampling stability of any (basis, boundary-density) pair
through the K(m) functional.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    ScatterError,
    SolverError,
)
from .geometry import (
    BoothOval,
    BoundaryDensity,
    Circle,
    Ellipse,
    Square,
    boundary_point,
    density_inverse_cdf,
    density_weight,
    ellipse_map,
    make_density,
    point_inside,
    sample_points,
    sc_square_map,
    solve_ellipse_modulus,
)
from .solver import (
    FieldGrid,
    MultipoleFamily,
    PlaneWave,
    ScatterSolution,
    analytic_circle_solution,
    assemble_matrix,
    boundary_error,
    evaluate_field,
    scattered_field_at_points,
    solve_collocation,
    solve_least_squares,
)
from .specfun import (
    CylinderEval,
    bessel_j,
    bessel_y,
    carlson_rf,
    cylinder_eval,
    elliptic_K,
    hankel1,
    hankel1_derivative,
    wronskian_jy,
)
from .stability import (
    BudgetResult,
    KEstimate,
    estimate_K,
    kappa,
    practical_budget,
    sample_budget,
)

__all__ = [
    "__version__",
    "BoothOval",
    "BoundaryDensity",
    "BudgetResult",
    "Circle",
    "ConfigurationError",
    "ConvergenceError",
    "CylinderEval",
    "DomainError",
    "Ellipse",
    "FieldGrid",
    "KEstimate",
    "MultipoleFamily",
    "PlaneWave",
    "ScatterError",
    "ScatterSolution",
    "SolverError",
    "Square",
    "analytic_circle_solution",
    "assemble_matrix",
    "bessel_j",
    "bessel_y",
    "boundary_error",
    "boundary_point",
    "carlson_rf",
    "cylinder_eval",
    "density_inverse_cdf",
    "density_weight",
    "ellipse_map",
    "elliptic_K",
    "estimate_K",
    "evaluate_field",
    "hankel1",
    "hankel1_derivative",
    "kappa",
    "make_density",
    "point_inside",
    "practical_budget",
    "sample_budget",
    "sample_points",
    "sc_square_map",
    "scattered_field_at_points",
    "solve_collocation",
    "solve_ellipse_modulus",
    "solve_least_squares",
    "wronskian_jy",
]
