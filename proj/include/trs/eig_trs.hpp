#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "trs/dense_small.hpp"
#include "trs/gltr.hpp"
#include "trs/sparse_core.hpp"

namespace trs {

// Eigenvalue-based TRS solver: the boundary solution is read off the
// rightmost eigenpair of the 2n-dim pencil (M, blkdiag(B, B)) with
//   M = [ -A   g gᵀ/Δ² ]
//       [  B     -A    ].
// On boundary instances the rightmost eigenvalue equals the KKT multiplier
// and the leading block of its eigenvector is parallel to the solution.
// A vanishing leading block is the hard-case signature; unlike the Krylov
// tridiagonalization route, this solver detects it.

struct StoppingConfig {
  double tol = 1e-12;        // accept when estimate ≤ tol·‖M‖₁
  double tau = 1.4901161193847656e-8;  // √ε: hard-case threshold on ‖y₁‖_B
  Index m = 30;              // largest subspace dimension per cycle
  long max_restarts = 600;
  // true: keep a small buffer of near-rightmost values (shift count m−4);
  // false: shift away everything but the wanted value (count m−1).
  bool buffered_shifts = true;
  std::uint64_t seed = 0;    // seeds the starting vector
  long cg_max_iter = 0;      // interior pre-check cap; 0 means dim(p)+1
};

// Expanding B̃-orthonormal Arnoldi factorization M V_k = B̃ V_k H_k + B̃ r e_kᵀ,
// B̃ = blkdiag(B, B). The residual r is unnormalized: h_{k+1,k} = ‖r‖_B̃ and
// the next basis vector is r/h_{k+1,k}.
class ArnoldiState {
 public:
  // v1 is B̃-normalized internally; throws std::invalid_argument if zero.
  ArnoldiState(PairOperator& op, const Vector& v1);

  // Appends the pending vector as v_{k+1}, applies B̃⁻¹M, orthogonalizes
  // (modified Gram-Schmidt plus one full reorthogonalization pass) and
  // records column k+1 of H. Returns false on breakdown:
  // ‖r‖_B̃ ≤ ε·2n·‖M‖₁, meaning an invariant subspace was found.
  bool step();

  // Replaces the pending vector after breakdown: v is orthogonalized
  // against the current basis and B̃-normalized. Returns false if nothing
  // significant is left (basis already spans the space along v).
  bool inject(const Vector& v);

  Index k_cur() const { return static_cast<Index>(basis_.size()); }
  Index pair_dim() const { return op_->pair_dim(); }
  const std::vector<Vector>& basis() const { return basis_; }
  const std::vector<Vector>& b_basis() const { return bbasis_; }
  const Vector& residual() const { return r_; }
  double h_next() const { return h_next_; }
  bool broke_down() const { return breakdown_; }
  PairOperator& op() const { return *op_; }

  Matrix h() const;      // square k×k Hessenberg block
  Matrix h_ext() const;  // (k+1)×k with the extension entry h_{k+1,k}

  // Contracts the factorization in place; used by implicit_restart.
  void truncate(const Matrix& h_rot, const Matrix& q, Index k_new);

 private:
  void promote_pending();

  PairOperator* op_;
  std::vector<Vector> basis_;   // v₁..v_k, B̃-orthonormal
  std::vector<Vector> bbasis_;  // B̃v₁..B̃v_k
  Matrix hmat_;                 // k×k, column j filled through row j+1
  Vector r_;                    // unnormalized residual
  Vector br_;                   // B̃ r
  Vector pending_, bpending_;   // candidate v_{k+1} (unit) and B̃ image
  double h_next_ = 0.0;         // ‖r‖_B̃
  bool breakdown_ = false;
  double breakdown_floor_ = 0.0;
};

struct RitzPair {
  Complex mu;
  ComplexVector z;           // unit 2-norm
  double residual_estimate;  // h_{k+1,k}·|e_kᵀz| = ‖(M−μB̃)Vz‖_{B̃⁻¹}
};

struct RefinedPair {
  Complex mu;                // the targeted Ritz value
  ComplexVector z_tilde;     // unit minimizer of ‖(H̃−μĨ)z‖ over the sphere
  double residual_estimate;  // σ_min(H̃−μĨ), never above the Ritz estimate
};

// Eigenvalues of the square Hessenberg block, sorted by descending real
// part with conjugate pairs adjacent, each with its residual estimate.
std::vector<RitzPair> extract_ritz(const ArnoldiState& state);

// Refined extraction for one target value: the unit vector minimizing the
// projected residual, found from the smallest singular triplet of H̃ − μĨ
// where H̃ is the (k+1)×k extended Hessenberg and Ĩ = [I; 0].
RefinedPair extract_refined(const ArnoldiState& state, Complex mu);

// The shift_count leftmost-by-real-part values of `pairs`, never splitting
// a conjugate pair: if the boundary would split one, the pair stays whole
// on the kept side and one fewer shift is returned.
std::vector<Complex> select_shifts_exact(const std::vector<RitzPair>& pairs,
                                         Index wanted, Index shift_count);

// Refined shift candidates: with Û an orthonormal basis of the complement
// of span{z̃} (columns Re z̃, Im z̃ for complex μ), returns the eigenvalues
// of ÛᵀHÛ, descending, conjugate pairs adjacent. Falls back to the exact
// Ritz shifts (reported via *fell_back) if the wanted columns are
// numerically rank deficient.
std::vector<Complex> select_shifts_refined(const ArnoldiState& state,
                                           const RefinedPair& refined,
                                           bool* fell_back = nullptr);

// Contracts a k+p step factorization to k = k_cur − |shifts| steps by an
// implicitly shifted QR sweep: V_k = V Q(:,1:k), H_k = (QᵀHQ)(1:k,1:k),
// r_k = (QᵀHQ)(k+1,k)·V Q(:,k+1) + Q(k+p,k)·r. Complex shifts must appear
// in adjacent conjugate pairs. The result is a valid factorization whose
// first basis vector is the old one filtered by ∏(B̃⁻¹M − σ_j I).
void implicit_restart(ArnoldiState& state, const std::vector<Complex>& shifts);

// Boundary solution from a unit-B̃-norm eigenvector y = (y₁; y₂):
//   ŝ = −sign(gᵀy₂)·Δ·y₁/‖y₁‖_B,  so ‖ŝ‖_B = Δ exactly.
// Returns nullopt (hard case) when ‖y₁‖_B ≤ tau. sign(0) is taken as +1.
std::optional<Vector> recover_solution(const Vector& y, const TrsProblem& p,
                                       double tau);

// Maps an eigenresidual tolerance to the TRS residual scale via
//   ‖(A+λ̂B)ŝ+g‖_{B⁻¹} ≤ (Δ/‖y₁‖_B)·‖(M−λ̂B̃)y‖_{B̃⁻¹}:
// an eigenresidual of tol implies a TRS residual of Δ·tol/y1_bnorm, which
// is the returned value (used to hand a matched-accuracy target to other
// solvers). Throws std::invalid_argument if y1_bnorm is not positive.
double translate_tolerance(double tol, double delta, double y1_bnorm);

enum class EigVariant { IRA, IRRA };

struct EigReport {
  double mu = 0.0;            // accepted rightmost eigenvalue
  Vector y;                   // accepted eigenvector, unit B̃-norm
  double y1_bnorm = 0.0;      // ‖y₁‖_B
  double translated_tol1 = 0.0;  // Δ·tol/y1_bnorm (0 in the hard case)
  double eig_res_bnorm = 0.0;    // ‖(M−μB̃)y‖_{B̃⁻¹}, recomputed directly
  long restarts = 0;
  long refined_fallbacks = 0;    // rank-deficient refined-shift cycles
};

// Full solver: interior check by conjugate gradients first, then restarted
// Arnoldi on the pencil (IRA: exact shifts from Ritz values; IRRA: refined
// vector and shifts). A cycle accepts only a real rightmost value whose
// residual estimate is below tol·‖M‖₁. Statuses: Interior, Boundary,
// HardCaseDetected (‖y₁‖_B ≤ tau), MaxRestarts, MaxIterations (interior
// CG stalled). mv_count counts A-applications (2 per pencil apply).
TrsSolution eig_trs_solve(const TrsProblem& p, const StoppingConfig& cfg,
                          EigVariant variant, EigReport* report = nullptr);

}  // namespace trs
