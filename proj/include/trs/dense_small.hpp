#pragma once

#include "trs/sparse_core.hpp"

#include <complex>
#include <variant>
#include <vector>

namespace trs {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;

// Symmetric tridiagonal matrix: diagonal δ₀..δ_k, off-diagonal β₁..β_k.
struct SymTridiag {
  Vector diag;
  Vector offdiag;  // size = diag.size() - 1

  Index dim() const { return diag.size(); }
  double one_norm() const;
  Matrix to_dense() const;
};

// LDLᵀ data of T + shift·I: pivots d and unit-lower-bidiagonal multipliers l.
struct TridiagFactor {
  Vector d;
  Vector l;
};

// Raised (as a value, not an exception) when T + shift·I is not positive
// definite; position is the 1-based ordinal of the first non-positive pivot.
struct IndefiniteSignal {
  Index position;
};

std::variant<TridiagFactor, IndefiniteSignal> tridiag_ldlt(const SymTridiag& t, double shift);

// Solves (T + shift·I) x = rhs given the factorization of that shift.
Vector tridiag_solve(const TridiagFactor& f, Vector rhs);

// Leftmost eigenvalue by Sturm-sequence bisection inside the Gershgorin
// bracket; absolute accuracy 1e-12·(1 + ‖T‖₁).
double tridiag_leftmost_eig(const SymTridiag& t);

struct EigPair {
  Complex value;
  ComplexVector vector;  // unit 2-norm, first significant component real-positive
};

// All eigenpairs of a square upper Hessenberg matrix via Francis double-shift
// QR with accumulated transforms and quasi-triangular back-substitution.
// Ordering: descending real part; conjugate pairs exactly conjugate and
// adjacent with the positive imaginary member first (a strict "descending
// imaginary" tie-break would let a real eigenvalue of equal real part land
// between the two members). Entries below the first subdiagonal must be zero.
// Throws std::runtime_error if the QR iteration exceeds 30·k sweeps.
std::vector<EigPair> hessenberg_eig(const Matrix& h);

// Eigenvalues only, for general square input (reduced to Hessenberg form
// internally); same ordering.
std::vector<Complex> dense_eigenvalues(Matrix a);

// Householder similarity reduction to upper Hessenberg form (no transform
// accumulation; used for eigenvalue-only paths).
Matrix hessenberg_reduce(Matrix a);

// Implicitly shifted QR sweeps on a Hessenberg matrix: one single-shift step
// per real shift, one Francis double-shift bulge chase per conjugate pair.
// All arithmetic real. h stays Hessenberg (sub-subdiagonal dust cleared);
// q_accum (same dimension, orthogonal) accumulates every similarity applied.
// Throws std::invalid_argument for an unpaired complex shift.
void shifted_qr_sweep(Matrix& h, Matrix& q_accum, const std::vector<Complex>& shifts);

struct SingularTriplet {
  double sigma = 0.0;
  ComplexVector right;
  bool real = true;
};

// Smallest singular value and right singular vector of H̃ − μĨ, where h_ext
// is (k+1)×k and Ĩ is the identity with one zero row appended. Computed by
// one-sided Jacobi orthogonalization (real path for real μ; a real 2×
// doubling of the complex matrix otherwise).
SingularTriplet smallest_singular_triplet(const Matrix& h_ext, Complex mu);

}  // namespace trs
