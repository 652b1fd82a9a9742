#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trs/eig_trs.hpp"
#include "trs/gltr.hpp"
#include "trs/sparse_core.hpp"

namespace trs {

// Benchmark harness: assembles instances from Matrix Market files, runs the
// Krylov solver and both eigenvalue-based solvers at matched accuracy, and
// emits comparison tables keyed on matrix-vector product counts.

enum class BenchSolver { Gltr, TrsIra, TrsIrra };

std::string solver_label(BenchSolver s);
std::string status_label(SolveStatus s);

struct BenchRecord {
  std::string matrix_name;  // input label plus the radius, e.g. "lhr11[d=1]"
  BenchSolver solver = BenchSolver::Gltr;
  long mvs = 0;        // A-applications, the CG prefix included for every solver
  double res = 0.0;    // ‖(A+λ̂B)ŝ+g‖_{B⁻¹}/‖g‖_{B⁻¹}, recomputed from the iterate
  SolveStatus status = SolveStatus::Interior;
  long iterations = 0;        // Lanczos steps for GLTR, restart cycles otherwise
  double wall_seconds = 0.0;  // informational only, never emitted or asserted
  double ratio = 0.0;         // MV improvement of IRRA over IRA, IRRA row only
  bool has_ratio = false;
};

struct BenchConfig {
  std::string b_spec = "identity";  // identity | tridiag:a,b,c | <mm file>
  std::vector<double> deltas = {1.0, 100.0};
  double tol = 1e-12;
  Index m = 30;  // eigensolver subspace dimension
  long max_restarts = 600;
  std::uint64_t seed = 0;
  Index max_dim = 5000;  // size cap; the CLI additionally enforces a hard limit
  bool run_gltr = true;
  bool run_ira = true;
  bool run_irra = true;
};

// A = G + Gᵀ assembled from coordinate entries. Symmetric storage arrives
// with mirror entries already expanded, so the same sum consistently yields
// twice the symmetric part.
SparseSymMatrix symmetrized_sum(const MatrixMarketFile& f);

// identity | tridiag:a,b,c (constant sub/main/super bands, symmetric) | path
// to an SPD coordinate file whose dimension must match n.
BOperator parse_b_spec(const std::string& spec, Index n);

// Full assembly: A from the file, metric from the spec, seeded standard
// normal gradient of unit Euclidean length. Rejects matrices above max_dim.
TrsProblem build_problem(const std::string& path, const std::string& b_spec, double delta,
                         std::uint64_t seed, Index max_dim = 5000);

// Relative MV saving of the refined variant, (mv_ira − mv_irra) / mv_ira.
double mv_improvement(long mv_ira, long mv_irra);

struct ComparisonResult {
  std::vector<BenchRecord> records;  // emitted order: GLTR, TRS_IRA, TRS_IRRA
  double ratio = 0.0;                // present when both eigensolvers ran
  bool has_ratio = false;
  double tol1_rel = 0.0;   // Krylov-solver tolerance actually used
  bool tol1_fallback = false;  // no usable leading block: fell back to tol
};

// Runs the enabled solvers on one instance at matched accuracy: the
// eigensolvers at tol, then GLTR at tol₁ = (Δ/‖ŷ₁‖_B)·tol with ŷ₁ taken from
// the IRA run as the single reference (falls back to tol when IRA is
// disabled, stopped early, or detected the degenerate case). Residuals are
// always recomputed from the returned iterate, never taken from estimates.
ComparisonResult run_comparison(const TrsProblem& p, const std::string& name,
                                const BenchConfig& cfg);

// CSV with header `matrix,solver,mvs,res,status,iters,ratio`; doubles carry
// full precision so parse_csv reproduces the emitted records exactly.
std::string emit_csv(const std::vector<BenchRecord>& records);
std::vector<BenchRecord> parse_csv(const std::string& text);

// Human-readable mirror of the CSV: one table, rows grouped per matrix with
// the name printed once per group, ratio shown as a percentage.
std::string emit_markdown(const std::vector<BenchRecord>& records);

}  // namespace trs
