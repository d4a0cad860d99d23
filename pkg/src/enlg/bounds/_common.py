"""Helpers shared by the bound computations."""

from __future__ import annotations

from ..errors import SolverError
from ..sdpsolver import SdpSolution, Status


def require_optimal(sol: SdpSolution, what: str) -> SdpSolution:
    """Return ``sol`` if it is optimal, otherwise raise :class:`SolverError`."""
    if sol.status is not Status.OPTIMAL:
        raise SolverError(
            f"{what}: solver stopped with status {sol.status.value} after {sol.iterations} "
            f"iterations (gap {sol.gap:.2e}, primal residual {sol.primal_residual:.2e})",
            solution=sol,
        )
    return sol


def require_usable(sol: SdpSolution, what: str, tol: float) -> SdpSolution:
    """Accept optimal solutions and stalled ones whose residuals and gap are below ``tol``.

    Meant for inner solves whose output is only used as a feasible point and
    is re-validated afterwards.
    """
    if sol.status is Status.OPTIMAL:
        return sol
    rel_gap = sol.gap / max(1.0, abs(sol.primal_value))
    if sol.status is not Status.INFEASIBLE and max(rel_gap, sol.primal_residual, sol.dual_residual) <= tol:
        return sol
    return require_optimal(sol, what)
