#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

namespace trs {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Triplet {
  Index row = 0;
  Index col = 0;
  double value = 0.0;
};

// Sparse symmetric matrix stored as CSR over the full symmetric pattern, so a
// row traversal also enumerates the matching column. Construction sums
// duplicate coordinates, rejects asymmetric input, and caches the per-column
// absolute sums (hence the 1-norm). Immutable after construction.
class SparseSymMatrix {
 public:
  SparseSymMatrix() = default;
  // Builds from coordinate entries covering the full pattern (both triangles).
  SparseSymMatrix(Index n, std::vector<Triplet> entries);
  // Convenience for tests and the oracle: exact entries of a dense symmetric
  // matrix (validated, not symmetrized).
  static SparseSymMatrix from_dense(const Matrix& a, double drop_tol = 0.0);

  Index rows() const { return n_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }
  double one_norm() const { return one_norm_; }
  // Absolute column sum ‖A(:,j)‖₁, cached at construction.
  double col_abs_sum(Index j) const { return col_abs_sums_[static_cast<size_t>(j)]; }

  void apply(const Vector& v, Vector& out) const;
  Vector apply(const Vector& v) const;
  Matrix to_dense() const;

  const std::vector<Index>& row_ptr() const { return row_ptr_; }
  const std::vector<Index>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

 private:
  Index n_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<double> values_;
  std::vector<double> col_abs_sums_;
  double one_norm_ = 0.0;
};

// Symmetric positive definite metric operator B. Three kinds share one
// interface: exact identity, symmetric tridiagonal (O(n) LDLT solve), and
// general sparse SPD (sparse LDLT factored once at construction). Definiteness
// is checked at construction: every factor pivot must be strictly positive.
// Immutable after construction; copies share the factorization.
class BOperator {
 public:
  enum class Kind { Identity, SymTridiagonal, GeneralSpd };

  BOperator() = default;
  static BOperator identity(Index n);
  static BOperator sym_tridiagonal(Vector diag, Vector offdiag);
  static BOperator general_spd(SparseSymMatrix b);

  Kind kind() const { return kind_; }
  Index rows() const { return n_; }
  bool is_identity() const { return kind_ == Kind::Identity; }

  Vector apply(const Vector& v) const;
  // Solves B·w = v using the stored factorization.
  Vector solve(const Vector& v) const;
  // ‖v‖_B = sqrt(vᵀBv); round-off negatives inside the root clamp to 0.
  double norm(const Vector& v) const;
  // ‖v‖_{B⁻¹} = sqrt(vᵀB⁻¹v).
  double inv_norm(const Vector& v) const;

  double col_abs_sum(Index j) const;
  double one_norm() const;
  Matrix to_dense() const;

 private:
  struct SpdFactor;

  Kind kind_ = Kind::Identity;
  Index n_ = 0;
  // SymTridiagonal data: matrix entries plus LDLT pivots/multipliers.
  Vector td_diag_, td_off_, td_d_, td_l_;
  // GeneralSpd data.
  SparseSymMatrix gen_;
  std::shared_ptr<const SpdFactor> factor_;
};

// One trust-region subproblem instance: min gᵀs + ½ sᵀAs over ‖s‖_B ≤ Δ.
struct TrsProblem {
  SparseSymMatrix a;
  BOperator b;
  Vector g;
  double delta = 0.0;

  TrsProblem(SparseSymMatrix a_in, BOperator b_in, Vector g_in, double delta_in);
  Index dim() const { return a.rows(); }
};

// Exact 1-norm of the block operator
//   M = [ -A   g gᵀ/Δ² ]
//       [  B     -A    ]
// computed column-wise without forming the rank-one block.
double pair_one_norm(const TrsProblem& p);

// Structured operator pair (M, B̃) with B̃ = blkdiag(B, B). Applications never
// form g gᵀ/Δ² densely. Each M application costs exactly two A-applications,
// tracked in mv_count; a PairOperator instance is confined to one solve at a
// time (the counter is the only mutable state).
class PairOperator {
 public:
  explicit PairOperator(const TrsProblem& p);

  Index pair_dim() const { return 2 * p_->dim(); }
  const TrsProblem& problem() const { return *p_; }

  // M·v for v = (v₁; v₂): returns (−A v₁ + g (gᵀv₂)/Δ² ; B v₁ − A v₂).
  Vector apply_m(const Vector& v);
  // B̃⁻¹(M·v), the Krylov operator of the eigenvalue formulation.
  Vector apply_btilde_inv_m(const Vector& v);
  // Both at once (bw = M·v, w = B̃⁻¹bw) for one counted application.
  void apply_m_with_solve(const Vector& v, Vector& w, Vector& bw);

  Vector apply_btilde(const Vector& v) const;
  Vector solve_btilde(const Vector& v) const;
  double btilde_norm(const Vector& v) const;
  double btilde_inv_norm(const Vector& v) const;

  long mv_count() const { return mv_count_; }
  void reset_mv_count() { mv_count_ = 0; }
  double one_norm() const { return one_norm_; }

 private:
  const TrsProblem* p_;
  long mv_count_ = 0;
  double one_norm_ = 0.0;
};

// Matrix Market coordinate file, entries already expanded for symmetric
// storage (the mirror of every off-diagonal entry is appended).
struct MatrixMarketFile {
  Index rows = 0;
  Index cols = 0;
  bool symmetric = false;
  std::vector<Triplet> entries;
};

// Reads `%%MatrixMarket matrix coordinate real {general|symmetric}`.
// Throws std::runtime_error with file/line context on malformed input.
MatrixMarketFile read_matrix_market(const std::string& path);

// Deterministic standard-normal vector: Box–Muller over mt19937_64 with
// explicitly constructed uniforms, bit-reproducible across platforms (library
// normal distributions are implementation-defined). Used for benchmark
// right-hand sides and Arnoldi starting vectors.
Vector seeded_gaussian(Index n, unsigned long long seed);

}  // namespace trs
