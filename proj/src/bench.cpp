#include "trs/bench.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace trs {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

SolveStatus status_from_label(const std::string& s) {
  if (s == "Interior") return SolveStatus::Interior;
  if (s == "Boundary") return SolveStatus::Boundary;
  if (s == "HardCaseDetected") return SolveStatus::HardCaseDetected;
  if (s == "MaxIterations") return SolveStatus::MaxIterations;
  if (s == "MaxRestarts") return SolveStatus::MaxRestarts;
  throw std::runtime_error("unknown status label: " + s);
}

BenchSolver solver_from_label(const std::string& s) {
  if (s == "GLTR") return BenchSolver::Gltr;
  if (s == "TRS_IRA") return BenchSolver::TrsIra;
  if (s == "TRS_IRRA") return BenchSolver::TrsIrra;
  throw std::runtime_error("unknown solver label: " + s);
}

}  // namespace

std::string solver_label(BenchSolver s) {
  switch (s) {
    case BenchSolver::Gltr: return "GLTR";
    case BenchSolver::TrsIra: return "TRS_IRA";
    case BenchSolver::TrsIrra: return "TRS_IRRA";
  }
  return "?";
}

std::string status_label(SolveStatus s) {
  switch (s) {
    case SolveStatus::Interior: return "Interior";
    case SolveStatus::Boundary: return "Boundary";
    case SolveStatus::HardCaseDetected: return "HardCaseDetected";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::MaxRestarts: return "MaxRestarts";
  }
  return "?";
}

SparseSymMatrix symmetrized_sum(const MatrixMarketFile& f) {
  if (f.rows != f.cols)
    throw std::runtime_error("symmetrized_sum: matrix must be square");
  std::vector<Triplet> entries;
  entries.reserve(2 * f.entries.size());
  for (const Triplet& t : f.entries) {
    entries.push_back(t);
    entries.push_back(Triplet{t.col, t.row, t.value});
  }
  return SparseSymMatrix(f.rows, std::move(entries));
}

BOperator parse_b_spec(const std::string& spec, Index n) {
  if (spec == "identity") return BOperator::identity(n);
  const std::string prefix = "tridiag:";
  if (spec.rfind(prefix, 0) == 0) {
    const auto parts = split(spec.substr(prefix.size()), ',');
    if (parts.size() != 3)
      throw std::runtime_error("metric spec needs three band values: " + spec);
    double a, b, c;
    try {
      a = std::stod(parts[0]);
      b = std::stod(parts[1]);
      c = std::stod(parts[2]);
    } catch (const std::exception&) {
      throw std::runtime_error("unparseable metric band in: " + spec);
    }
    if (a != c) throw std::runtime_error("metric tridiagonal must be symmetric: " + spec);
    return BOperator::sym_tridiagonal(Vector::Constant(n, b),
                                      Vector::Constant(std::max<Index>(n - 1, 0), a));
  }
  const MatrixMarketFile f = read_matrix_market(spec);
  if (f.rows != f.cols) throw std::runtime_error("metric matrix must be square: " + spec);
  if (f.rows != n)
    throw std::runtime_error("metric dimension " + std::to_string(f.rows) +
                             " does not match the matrix dimension " + std::to_string(n));
  return BOperator::general_spd(SparseSymMatrix(n, f.entries));
}

TrsProblem build_problem(const std::string& path, const std::string& b_spec, double delta,
                         std::uint64_t seed, Index max_dim) {
  if (delta <= 0.0) throw std::invalid_argument("build_problem: delta must be positive");
  const MatrixMarketFile f = read_matrix_market(path);
  if (f.rows != f.cols) throw std::runtime_error("matrix must be square: " + path);
  if (f.rows > max_dim)
    throw std::runtime_error("matrix " + path + " has dimension " + std::to_string(f.rows) +
                             ", above the size cap " + std::to_string(max_dim) +
                             "; raise --max-dim if this is intentional");
  SparseSymMatrix a = symmetrized_sum(f);
  BOperator b = parse_b_spec(b_spec, f.rows);
  Vector g = seeded_gaussian(f.rows, seed);
  const double gn = g.norm();
  if (gn <= 0.0) throw std::runtime_error("degenerate gradient sample");
  g /= gn;
  return TrsProblem{std::move(a), std::move(b), std::move(g), delta};
}

double mv_improvement(long mv_ira, long mv_irra) {
  if (mv_ira <= 0) throw std::invalid_argument("mv_improvement: reference count must be positive");
  return static_cast<double>(mv_ira - mv_irra) / static_cast<double>(mv_ira);
}

ComparisonResult run_comparison(const TrsProblem& p, const std::string& name,
                                const BenchConfig& cfg) {
  StoppingConfig scfg;
  scfg.tol = cfg.tol;
  scfg.m = cfg.m;
  scfg.max_restarts = cfg.max_restarts;
  scfg.seed = cfg.seed;

  auto stamp = [&](BenchSolver which, const TrsSolution& sol, long iters, double wall) {
    BenchRecord r;
    r.matrix_name = name;
    r.solver = which;
    r.mvs = sol.mv_count;
    r.res = sol.rel_res;
    r.status = sol.status;
    r.iterations = iters;
    r.wall_seconds = wall;
    return r;
  };

  ComparisonResult out;
  out.tol1_rel = cfg.tol;
  out.tol1_fallback = true;
  BenchRecord ira_row, irra_row;
  bool have_ira = false, have_irra = false;

  if (cfg.run_ira) {
    EigReport rep;
    const double t0 = now_seconds();
    const TrsSolution sol = eig_trs_solve(p, scfg, EigVariant::IRA, &rep);
    ira_row = stamp(BenchSolver::TrsIra, sol, rep.restarts, now_seconds() - t0);
    have_ira = true;
    if (sol.status == SolveStatus::Boundary && rep.translated_tol1 > 0.0) {
      out.tol1_rel = rep.translated_tol1;
      out.tol1_fallback = false;
    }
  }
  if (cfg.run_irra) {
    EigReport rep;
    const double t0 = now_seconds();
    const TrsSolution sol = eig_trs_solve(p, scfg, EigVariant::IRRA, &rep);
    irra_row = stamp(BenchSolver::TrsIrra, sol, rep.restarts, now_seconds() - t0);
    have_irra = true;
  }
  if (have_ira && have_irra) {
    out.ratio = mv_improvement(ira_row.mvs, irra_row.mvs);
    out.has_ratio = true;
    irra_row.ratio = out.ratio;
    irra_row.has_ratio = true;
  }
  if (cfg.run_gltr) {
    const double t0 = now_seconds();
    const TrsSolution sol = gltr_solve(p, out.tol1_rel, 0, true);
    out.records.push_back(stamp(BenchSolver::Gltr, sol, sol.iterations, now_seconds() - t0));
  }
  if (have_ira) out.records.push_back(std::move(ira_row));
  if (have_irra) out.records.push_back(std::move(irra_row));
  return out;
}

std::string emit_csv(const std::vector<BenchRecord>& records) {
  std::string out = "matrix,solver,mvs,res,status,iters,ratio\n";
  for (const BenchRecord& r : records) {
    out += r.matrix_name;
    out += ',';
    out += solver_label(r.solver);
    out += ',';
    out += std::to_string(r.mvs);
    out += ',';
    out += fmt_double(r.res);
    out += ',';
    out += status_label(r.status);
    out += ',';
    out += std::to_string(r.iterations);
    out += ',';
    if (r.has_ratio) out += fmt_double(r.ratio);
    out += '\n';
  }
  return out;
}

std::vector<BenchRecord> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "matrix,solver,mvs,res,status,iters,ratio")
    throw std::runtime_error("unrecognized benchmark CSV header");
  std::vector<BenchRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) throw std::runtime_error("malformed benchmark CSV row: " + line);
    BenchRecord r;
    r.matrix_name = f[0];
    r.solver = solver_from_label(f[1]);
    r.mvs = std::stol(f[2]);
    r.res = std::stod(f[3]);
    r.status = status_from_label(f[4]);
    r.iterations = std::stol(f[5]);
    if (!f[6].empty()) {
      r.ratio = std::stod(f[6]);
      r.has_ratio = true;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string emit_markdown(const std::vector<BenchRecord>& records) {
  std::string out = "| matrix | solver | mvs | res | status | iters | ratio |\n";
  out += "| --- | --- | --- | --- | --- | --- | --- |\n";
  std::string last_name;
  for (const BenchRecord& r : records) {
    char buf[40];
    out += "| ";
    out += (r.matrix_name == last_name) ? "" : r.matrix_name;
    last_name = r.matrix_name;
    out += " | ";
    out += solver_label(r.solver);
    out += " | ";
    out += std::to_string(r.mvs);
    out += " | ";
    std::snprintf(buf, sizeof buf, "%.3e", r.res);
    out += buf;
    out += " | ";
    out += status_label(r.status);
    out += " | ";
    out += std::to_string(r.iterations);
    out += " | ";
    if (r.has_ratio) {
      std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * r.ratio);
      out += buf;
    }
    out += " |\n";
  }
  return out;
}

}  // namespace trs
