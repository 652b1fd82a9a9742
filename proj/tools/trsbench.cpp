#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "trs/bench.hpp"

namespace {

constexpr trs::Index kHardDimCap = 20000;

std::string delta_tag(double d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", d);
  return buf;
}

std::vector<double> parse_deltas(const std::string& list) {
  std::vector<double> out;
  std::string cur;
  std::istringstream in(list);
  while (std::getline(in, cur, ',')) {
    if (cur.empty()) continue;
    size_t used = 0;
    const double v = std::stod(cur, &used);
    if (used != cur.size() || v <= 0.0)
      throw std::runtime_error("radii must be positive numbers: " + list);
    out.push_back(v);
  }
  if (out.empty()) throw std::runtime_error("at least one radius is required");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Trust-region subproblem benchmark: Krylov and eigenvalue-based solvers "
      "at matched accuracy on Matrix Market instances"};

  std::vector<std::string> matrices;
  std::string b_spec = "identity";
  std::string delta_list = "1,100";
  double tol = 1e-12;
  long dim = 30;
  long max_restarts = 600;
  std::string solver = "all";
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::string out_path;
  long max_dim = 5000;

  app.add_option("--matrix", matrices, "Matrix Market coordinate file(s), A = G + G^T")
      ->required();
  app.add_option("--b", b_spec, "Metric: identity | tridiag:a,b,c | <mm file> (default identity)");
  app.add_option("--delta", delta_list, "Comma-separated trust-region radii (default 1,100)");
  app.add_option("--tol", tol, "Eigensolver stopping tolerance (default 1e-12)")
      ->check(CLI::PositiveNumber);
  app.add_option("--dim", dim, "Eigensolver subspace dimension (default 30)");
  app.add_option("--max-restarts", max_restarts, "Eigensolver restart budget (default 600)");
  app.add_option("--solver", solver, "all | gltr | ira | irra (default all)")
      ->check(CLI::IsMember({"all", "gltr", "ira", "irra"}));
  app.add_option("--seed", seed, "Gradient sampling seed (default 0)");
  app.add_option("--format", format, "csv | md (default csv)")
      ->check(CLI::IsMember({"csv", "md"}));
  app.add_option("--out", out_path, "Output file (stdout when omitted)");
  app.add_option("--max-dim", max_dim, "Matrix size cap (default 5000, hard limit 20000)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (max_dim <= 0 || max_dim > kHardDimCap) max_dim = kHardDimCap;
    trs::BenchConfig cfg;
    cfg.b_spec = b_spec;
    cfg.deltas = parse_deltas(delta_list);
    cfg.tol = tol;
    cfg.m = dim;
    cfg.max_restarts = max_restarts;
    cfg.seed = seed;
    cfg.max_dim = max_dim;
    cfg.run_gltr = solver == "all" || solver == "gltr";
    cfg.run_ira = solver == "all" || solver == "ira";
    cfg.run_irra = solver == "all" || solver == "irra";

    std::vector<trs::BenchRecord> records;
    bool any_unconverged = false;
    for (const std::string& path : matrices) {
      const std::string stem = std::filesystem::path(path).stem().string();
      for (double delta : cfg.deltas) {
        const trs::TrsProblem p = trs::build_problem(path, cfg.b_spec, delta, cfg.seed, cfg.max_dim);
        const std::string name = stem + "[d=" + delta_tag(delta) + "]";
        const trs::ComparisonResult cmp = trs::run_comparison(p, name, cfg);
        if (cmp.tol1_fallback && cfg.run_gltr && (cfg.run_ira || cfg.run_irra))
          std::cerr << "note: " << name
                    << ": no usable leading block from the reference run; "
                       "Krylov tolerance fell back to tol\n";
        for (const trs::BenchRecord& r : cmp.records) {
          any_unconverged |= r.status == trs::SolveStatus::MaxIterations ||
                             r.status == trs::SolveStatus::MaxRestarts;
          records.push_back(r);
        }
      }
    }

    const std::string text = format == "csv" ? trs::emit_csv(records) : trs::emit_markdown(records);
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(out_path);
      if (!out) throw std::runtime_error("cannot open output file: " + out_path);
      out << text;
    }
    return any_unconverged ? 2 : 0;
  } catch (const std::exception& e) {
    std::cerr << "trsbench: " << e.what() << "\n";
    return 1;
  }
}
