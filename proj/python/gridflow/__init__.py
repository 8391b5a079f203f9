"""Sparse Newton power flow for transmission and three-phase distribution cases.

    import gridflow
    case = gridflow.Case.load("data/ieee30.json")
    sol = gridflow.solve(case, solver="krylov")
    print(sol.converged, abs(sol.voltages[1]))
"""

from ._core import (
    Case,
    CaseError,
    Error,
    NetworkError,
    Solution,
    SolverError,
    bench,
    replicate,
    solve,
)

__all__ = [
    "Case",
    "CaseError",
    "Error",
    "NetworkError",
    "Solution",
    "SolverError",
    "bench",
    "replicate",
    "solve",
]
