#pragma once

#include "trs/sparse_core.hpp"

namespace trs {

// Dense brute-force reference solvers for desk-scale problems. Everything
// here trades speed for unconditional robustness; these routines certify the
// iterative solvers and are never on a production path.

enum class KktCase { Interior, Boundary, HardCase };

struct DenseKktSolution {
  Vector s_opt;
  double lambda_opt = 0.0;
  KktCase case_tag = KktCase::Interior;
  double alpha_n = 0.0;  // leftmost eigenvalue of the pencil (A, B)
  double eta = 0.0;      // boundary padding coefficient (hard case only)
  Vector u_n;            // leftmost eigenvector, unit B-norm (hard case only)
};

// Full KKT-certified minimizer of gᵀs + ½ sᵀAs over ‖s‖_B ≤ Δ: reduce to a
// standard symmetric eigenproblem via the spectral square root of B, then
// either accept the unconstrained stationary point (interior), solve the
// boundary equation Σ γᵢ²/(αᵢ+λ)² = Δ² by bisection to 1e-13 relative width
// on (max(0, −α_n), ∞), or detect the degenerate branch (gradient projection
// on the leftmost eigenspace below 1e-12·‖g‖ with the boundary unreachable)
// and pad the pseudo-inverse solution along the leftmost eigenvector.
// Intended for n up to a couple hundred.
DenseKktSolution oracle_solve_trs(const TrsProblem& p);

struct OracleEigpair {
  double mu1 = 0.0;  // rightmost eigenvalue (real part if a complex pair wins)
  Vector y;          // eigenvector, unit B̃-norm, largest component positive
};

// Rightmost eigenpair of the 2n×2n block pencil (M, B̃) by a dense reduction
// B̃^{-1/2} M B̃^{-1/2} and a general dense eigensolve. Total: interior-type
// instances still produce a value, it just certifies nothing.
OracleEigpair oracle_rightmost_eigpair(const TrsProblem& p);

struct BSqrtPair {
  Matrix sqrt;
  Matrix inv_sqrt;
};

// Dense spectral square root of B and its inverse.
BSqrtPair oracle_b_sqrt(const BOperator& b);

}  // namespace trs
