from .lp import backend_name, solve_transport, solve_transport_python
from .objectives import (
    fgw_objective,
    gw_gradient,
    gw_loss,
    gw_loss_fast,
    wasserstein_cost_matrix,
)
from .solver import (
    Coupling,
    InterpolationReport,
    SolveReport,
    SolverError,
    SolverParams,
    interpolation_check,
    solve_gw,
    solve_pfgw,
    solve_wasserstein,
)

__all__ = [
    "backend_name",
    "solve_transport",
    "solve_transport_python",
    "fgw_objective",
    "gw_gradient",
    "gw_loss",
    "gw_loss_fast",
    "wasserstein_cost_matrix",
    "Coupling",
    "InterpolationReport",
    "SolveReport",
    "SolverError",
    "SolverParams",
    "interpolation_check",
    "solve_gw",
    "solve_pfgw",
    "solve_wasserstein",
]
