#pragma once

#include "trs/dense_small.hpp"
#include "trs/sparse_core.hpp"

#include <variant>
#include <vector>

namespace trs {

enum class SolveStatus { Interior, Boundary, HardCaseDetected, MaxIterations, MaxRestarts };

struct TrsSolution {
  Vector s;
  double lambda = 0.0;
  double res_bnorm = 0.0;  // ‖(A+λB)s + g‖ in the B⁻¹ norm, recomputed directly
  double rel_res = 0.0;    // res_bnorm / ‖g‖_{B⁻¹}
  long mv_count = 0;       // A-applications consumed by the algorithm (CG + Lanczos)
  long iterations = 0;
  SolveStatus status = SolveStatus::Interior;
};

// Emitted by the interior phase when the constraint must be active: either a
// direction of non-positive curvature appeared or an iterate crossed the
// radius. Carries the A-applications spent before the signal.
struct BoundarySignal {
  long mv_count = 0;
};

// Plain CG on As = −g with the B-norm of the iterate monitored each step.
// Returns a solution (status Interior, or MaxIterations if CG stalls inside
// the ball) or a BoundarySignal. Convergence is absolute: ‖As+g‖ ≤ tol·‖M‖₁,
// which keeps the interior exit calibrated to the boundary-phase criterion.
std::variant<TrsSolution, BoundarySignal> interior_check(const TrsProblem& p, double tol,
                                                         long max_iter);

// B-orthonormal Lanczos recurrence for B⁻¹A started at B⁻¹g/β₀. After each
// completed step() the coefficients form T_k with
//   A P_k = B P_k T_k + β_{k+1} B p_{k+1} e_{k+1}ᵀ,  P_kᵀ B P_k = I.
// step() returns false on happy breakdown (β_{k+1} ≤ ε_mach·n·‖A‖₁); the
// tridiagonal still gains its final diagonal entry in that case.
class LanczosState {
 public:
  LanczosState(const TrsProblem& p, bool reorthogonalize);

  bool step();

  SymTridiag t() const;  // T_k after k+1 completed steps
  double beta0() const { return beta0_; }
  double beta_next() const { return beta_next_; }
  // Candidate p_{k+1} after a successful step (the newest basis vector).
  const Vector& next_vector() const { return basis_.back(); }
  const std::vector<Vector>& basis() const { return basis_; }
  Index steps() const { return static_cast<Index>(diag_.size()); }
  bool broke_down() const { return breakdown_; }
  long mv_count() const { return mv_count_; }

 private:
  const Vector& b_image(size_t i) const;  // B·p_i for the reorthogonalization pass

  const TrsProblem* p_;
  bool reorth_;
  bool breakdown_ = false;
  double beta0_ = 0.0;
  double beta_next_ = 0.0;
  double breakdown_floor_ = 0.0;
  long mv_count_ = 0;
  std::vector<double> diag_;
  std::vector<double> off_;
  std::vector<Vector> basis_;
  std::vector<Vector> bbasis_;  // only populated when reorthogonalizing with B ≠ I
  Vector bp_curr_;
  Vector bp_prev_;
};

struct ReducedSolution {
  Vector h;
  double lambda = 0.0;
  bool boundary = false;  // ‖h‖ = Δ (within 1e-12·Δ) or λ > 0
};

// Projected problem min β₀e₁ᵀh + ½hᵀTh over ‖h‖ ≤ Δ. Interior branch when T
// is positive definite with ‖T⁻¹β₀e₁‖ ≤ Δ; otherwise a safeguarded Newton
// iteration on 1/‖h(λ)‖ − 1/Δ over (max(0, −θ_min(T)), ∞), each trial shift
// factored by tridiag_ldlt. Stops at |‖h‖ − Δ| ≤ 1e-12·Δ. A non-negative
// warm_lambda seeds the iteration (clamped into the bracket). Throws
// std::runtime_error with diagnostics if the bracket collapses unconverged,
// which an unreduced Lanczos tridiagonal cannot trigger.
ReducedSolution solve_reduced_trs(const SymTridiag& t, double beta0, double delta,
                                  double warm_lambda = -1.0);

// Residual norm identity for the assembled iterate:
// ‖(A+λ^{(k)}B)P_kh^{(k)} + g‖_{B⁻¹} = β_{k+1}·|last component of h^{(k)}|.
double gltr_residual_estimate(const LanczosState& state, const ReducedSolution& r);

// P_k h^{(k)} from the stored basis.
Vector assemble_iterate(const LanczosState& state, const ReducedSolution& r);

struct GltrDiagnostics {
  std::vector<double> estimates;  // residual estimate after each Lanczos step
  std::vector<double> lambdas;    // reduced multiplier after each Lanczos step
  long cg_mv_count = 0;
  bool breakdown = false;
};

// Full solver: interior CG phase, then Lanczos + reduced solves until the
// residual estimate drops below tol1_rel·‖M‖₁. The returned res_bnorm is
// recomputed from the assembled iterate, never the estimate. Note: when the
// gradient carries no weight on the leftmost eigenspace, every subspace this
// method builds misses that eigenspace, so it converges to a stationary
// point with a small residual that need not be the global optimum; detecting
// that situation is what the eigenvalue-based solver is for.
TrsSolution gltr_solve(const TrsProblem& p, double tol1_rel, long max_iter, bool reorth,
                       GltrDiagnostics* diagnostics = nullptr);

}  // namespace trs
