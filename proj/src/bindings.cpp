#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trs/bench.hpp"

namespace py = pybind11;
using namespace trs;

namespace {

using IndexArray = py::array_t<long long, py::array::c_style | py::array::forcecast>;
using ValueArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

BOperator metric_from(const std::optional<Matrix>& b, Index n) {
  if (!b) return BOperator::identity(n);
  if (b->rows() != n || b->cols() != n)
    throw std::invalid_argument("metric dimension does not match the problem");
  return BOperator::general_spd(SparseSymMatrix::from_dense(*b));
}

py::dict run_method(const TrsProblem& p, const std::string& method, double tol,
                    int subspace, int max_restarts, std::uint64_t seed, bool reorth) {
  py::dict out;
  if (method == "gltr") {
    const TrsSolution sol = gltr_solve(p, tol, 0, reorth);
    out["s"] = sol.s;
    out["lambda"] = sol.lambda;
    out["status"] = status_label(sol.status);
    out["res"] = sol.rel_res;
    out["mvs"] = sol.mv_count;
    out["iterations"] = sol.iterations;
    return out;
  }
  EigVariant variant;
  if (method == "ira")
    variant = EigVariant::IRA;
  else if (method == "irra")
    variant = EigVariant::IRRA;
  else
    throw std::invalid_argument("unknown method '" + method +
                                "' (expected 'gltr', 'ira' or 'irra')");
  StoppingConfig cfg;
  cfg.tol = tol;
  cfg.m = subspace;
  cfg.max_restarts = max_restarts;
  cfg.seed = seed;
  EigReport rep;
  const TrsSolution sol = eig_trs_solve(p, cfg, variant, &rep);
  out["s"] = sol.s;
  out["lambda"] = sol.lambda;
  out["status"] = status_label(sol.status);
  out["res"] = sol.rel_res;
  out["mvs"] = sol.mv_count;
  out["iterations"] = sol.iterations;
  out["restarts"] = rep.restarts;
  out["mu"] = rep.mu;
  out["translated_tol"] = rep.translated_tol1;
  return out;
}

std::vector<Triplet> coo_triplets(const IndexArray& rows, const IndexArray& cols,
                                  const ValueArray& values) {
  const auto r = rows.unchecked<1>();
  const auto c = cols.unchecked<1>();
  const auto v = values.unchecked<1>();
  if (r.shape(0) != c.shape(0) || r.shape(0) != v.shape(0))
    throw std::invalid_argument("rows, cols and values must have equal length");
  std::vector<Triplet> out;
  out.reserve(static_cast<size_t>(r.shape(0)));
  for (py::ssize_t i = 0; i < r.shape(0); ++i)
    out.push_back({static_cast<Index>(r(i)), static_cast<Index>(c(i)), v(i)});
  return out;
}

std::string file_stem(const std::string& path) {
  const size_t slash = path.find_last_of('/');
  const std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  const size_t dot = base.find_last_of('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Trust-region subproblem solvers: a Krylov solver for the quadratic "
            "model and two restarted eigenvalue-based solvers, plus a benchmark "
            "harness comparing them at matched accuracy.";

  m.def(
      "solve",
      [](const Matrix& a, const Vector& g, double delta, const std::optional<Matrix>& b,
         const std::string& method, double tol, int subspace, int max_restarts,
         std::uint64_t seed, bool reorth) {
        const TrsProblem p{SparseSymMatrix::from_dense(a), metric_from(b, a.rows()), g, delta};
        return run_method(p, method, tol, subspace, max_restarts, seed, reorth);
      },
      py::arg("a"), py::arg("g"), py::arg("delta"), py::arg("b") = py::none(),
      py::arg("method") = "gltr", py::arg("tol") = 1e-12, py::arg("subspace") = 30,
      py::arg("max_restarts") = 600, py::arg("seed") = 0, py::arg("reorth") = true,
      "Minimize g's + s'As/2 over ||s||_B <= delta for a dense symmetric a.\n"
      "b is the SPD norm-defining matrix (identity when omitted). method is\n"
      "'gltr', 'ira' or 'irra'; tol is relative to the problem scale. Returns\n"
      "a dict with the step s, the multiplier lambda, the convergence status,\n"
      "the relative residual and the matrix-vector/iteration counters.");

  m.def(
      "solve_sparse",
      [](Index n, const IndexArray& rows, const IndexArray& cols, const ValueArray& values,
         const Vector& g, double delta, const std::optional<Matrix>& b,
         const std::string& method, double tol, int subspace, int max_restarts,
         std::uint64_t seed, bool reorth) {
        const TrsProblem p{SparseSymMatrix(n, coo_triplets(rows, cols, values)),
                           metric_from(b, n), g, delta};
        return run_method(p, method, tol, subspace, max_restarts, seed, reorth);
      },
      py::arg("n"), py::arg("rows"), py::arg("cols"), py::arg("values"), py::arg("g"),
      py::arg("delta"), py::arg("b") = py::none(), py::arg("method") = "gltr",
      py::arg("tol") = 1e-12, py::arg("subspace") = 30, py::arg("max_restarts") = 600,
      py::arg("seed") = 0, py::arg("reorth") = true,
      "Like solve(), with a given in zero-based symmetric coordinate form.\n"
      "Duplicate entries are summed; the assembled matrix must be symmetric.");

  m.def(
      "read_matrix_market",
      [](const std::string& path) {
        const MatrixMarketFile f = read_matrix_market(path);
        const py::ssize_t k = static_cast<py::ssize_t>(f.entries.size());
        py::array_t<long long> rows(k), cols(k);
        py::array_t<double> values(k);
        auto r = rows.mutable_unchecked<1>();
        auto c = cols.mutable_unchecked<1>();
        auto v = values.mutable_unchecked<1>();
        for (py::ssize_t i = 0; i < k; ++i) {
          const Triplet& t = f.entries[static_cast<size_t>(i)];
          r(i) = t.row;
          c(i) = t.col;
          v(i) = t.value;
        }
        py::dict out;
        out["shape"] = py::make_tuple(f.rows, f.cols);
        out["symmetric"] = f.symmetric;
        out["rows"] = rows;
        out["cols"] = cols;
        out["values"] = values;
        return out;
      },
      py::arg("path"),
      "Read a coordinate-format real matrix file. Symmetric storage is\n"
      "returned with the mirrored entries already expanded.");

  m.def(
      "benchmark",
      [](const std::string& matrix, const std::string& b, const std::vector<double>& deltas,
         double tol, int subspace, int max_restarts, std::uint64_t seed, Index max_dim,
         const std::string& solver) {
        BenchConfig cfg;
        cfg.b_spec = b;
        cfg.tol = tol;
        cfg.m = subspace;
        cfg.max_restarts = max_restarts;
        cfg.seed = seed;
        if (solver != "all" && solver != "gltr" && solver != "ira" && solver != "irra")
          throw std::invalid_argument("unknown solver filter '" + solver + "'");
        cfg.run_gltr = solver == "all" || solver == "gltr";
        cfg.run_ira = solver == "all" || solver == "ira";
        cfg.run_irra = solver == "all" || solver == "irra";
        py::list out;
        for (double delta : deltas) {
          const TrsProblem p = build_problem(matrix, cfg.b_spec, delta, cfg.seed, max_dim);
          char tag[32];
          std::snprintf(tag, sizeof tag, "%g", delta);
          const ComparisonResult cmp =
              run_comparison(p, file_stem(matrix) + "[d=" + tag + "]", cfg);
          for (const BenchRecord& r : cmp.records) {
            py::dict row;
            row["matrix"] = r.matrix_name;
            row["solver"] = solver_label(r.solver);
            row["mvs"] = r.mvs;
            row["res"] = r.res;
            row["status"] = status_label(r.status);
            row["iters"] = r.iterations;
            row["ratio"] = r.has_ratio ? py::object(py::float_(r.ratio)) : py::none();
            out.append(row);
          }
        }
        return out;
      },
      py::arg("matrix"), py::arg("b") = "identity",
      py::arg("deltas") = std::vector<double>{1.0, 100.0}, py::arg("tol") = 1e-12,
      py::arg("subspace") = 30, py::arg("max_restarts") = 600, py::arg("seed") = 0,
      py::arg("max_dim") = 5000, py::arg("solver") = "all",
      "Run the three-solver comparison on a coordinate-format matrix file.\n"
      "The file's symmetric part (doubled) is the model Hessian and the\n"
      "gradient is a seeded unit random vector. Returns one dict per solver\n"
      "row; the restarted-with-refined-shifts row carries the matrix-vector\n"
      "improvement ratio over the exact-shift run.");
}
