"""Trust-region subproblem solvers with a matched-accuracy benchmark harness."""

from ._core import benchmark, read_matrix_market, solve, solve_sparse

__all__ = ["benchmark", "read_matrix_market", "solve", "solve_sparse"]
__version__ = "0.1.0"
