#include "trs/sparse_core.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace trs {

namespace {

// Fixed sequential accumulation (ascending index) for run-to-run determinism.
double abs_sum(const Vector& v) {
  double s = 0.0;
  for (Index i = 0; i < v.size(); ++i) s += std::abs(v[i]);
  return s;
}

}  // namespace

SparseSymMatrix::SparseSymMatrix(Index n, std::vector<Triplet> entries) : n_(n) {
  if (n < 0) throw std::invalid_argument("SparseSymMatrix: negative dimension");
  for (const Triplet& t : entries) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
      throw std::invalid_argument("SparseSymMatrix: entry index out of range");
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  row_ptr_.assign(static_cast<size_t>(n) + 1, 0);
  col_idx_.clear();
  values_.clear();
  col_idx_.reserve(entries.size());
  values_.reserve(entries.size());
  size_t i = 0;
  while (i < entries.size()) {
    Index r = entries[i].row;
    Index c = entries[i].col;
    double v = entries[i].value;
    size_t j = i + 1;
    while (j < entries.size() && entries[j].row == r && entries[j].col == c) {
      v += entries[j].value;  // duplicates combine by summation
      ++j;
    }
    col_idx_.push_back(c);
    values_.push_back(v);
    row_ptr_[static_cast<size_t>(r) + 1] += 1;
    i = j;
  }
  for (Index r = 0; r < n; ++r)
    row_ptr_[static_cast<size_t>(r) + 1] += row_ptr_[static_cast<size_t>(r)];

  // Symmetry: every stored (i,j,v) must have (j,i) stored with the same value.
  auto find_entry = [this](Index r, Index c) -> const double* {
    const Index lo = row_ptr_[static_cast<size_t>(r)];
    const Index hi = row_ptr_[static_cast<size_t>(r) + 1];
    auto first = col_idx_.begin() + lo;
    auto last = col_idx_.begin() + hi;
    auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return nullptr;
    return &values_[static_cast<size_t>(it - col_idx_.begin())];
  };
  for (Index r = 0; r < n; ++r) {
    for (Index k = row_ptr_[static_cast<size_t>(r)]; k < row_ptr_[static_cast<size_t>(r) + 1]; ++k) {
      const Index c = col_idx_[static_cast<size_t>(k)];
      if (c <= r) continue;
      const double* mirror = find_entry(c, r);
      if (mirror == nullptr || *mirror != values_[static_cast<size_t>(k)])
        throw std::invalid_argument("SparseSymMatrix: input is not symmetric");
    }
  }

  // Column absolute sums in ascending row order; by symmetry the column sum
  // equals the row-order accumulation over stored entries.
  col_abs_sums_.assign(static_cast<size_t>(n), 0.0);
  for (Index r = 0; r < n; ++r) {
    for (Index k = row_ptr_[static_cast<size_t>(r)]; k < row_ptr_[static_cast<size_t>(r) + 1]; ++k) {
      col_abs_sums_[static_cast<size_t>(col_idx_[static_cast<size_t>(k)])] +=
          std::abs(values_[static_cast<size_t>(k)]);
    }
  }
  one_norm_ = 0.0;
  for (double c : col_abs_sums_) one_norm_ = std::max(one_norm_, c);
}

SparseSymMatrix SparseSymMatrix::from_dense(const Matrix& a, double drop_tol) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("SparseSymMatrix::from_dense: matrix not square");
  std::vector<Triplet> entries;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) != a(j, i))
        throw std::invalid_argument("SparseSymMatrix::from_dense: matrix not symmetric");
      if (std::abs(a(i, j)) > drop_tol) entries.push_back({i, j, a(i, j)});
    }
  }
  return SparseSymMatrix(a.rows(), std::move(entries));
}

void SparseSymMatrix::apply(const Vector& v, Vector& out) const {
  if (v.size() != n_) throw std::invalid_argument("SparseSymMatrix::apply: dimension mismatch");
  out.resize(n_);
  for (Index r = 0; r < n_; ++r) {
    double acc = 0.0;
    for (Index k = row_ptr_[static_cast<size_t>(r)]; k < row_ptr_[static_cast<size_t>(r) + 1]; ++k)
      acc += values_[static_cast<size_t>(k)] * v[col_idx_[static_cast<size_t>(k)]];
    out[r] = acc;
  }
}

Vector SparseSymMatrix::apply(const Vector& v) const {
  Vector out;
  apply(v, out);
  return out;
}

Matrix SparseSymMatrix::to_dense() const {
  Matrix a = Matrix::Zero(n_, n_);
  for (Index r = 0; r < n_; ++r)
    for (Index k = row_ptr_[static_cast<size_t>(r)]; k < row_ptr_[static_cast<size_t>(r) + 1]; ++k)
      a(r, col_idx_[static_cast<size_t>(k)]) += values_[static_cast<size_t>(k)];
  return a;
}

struct BOperator::SpdFactor {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

BOperator BOperator::identity(Index n) {
  if (n <= 0) throw std::invalid_argument("BOperator::identity: dimension must be positive");
  BOperator b;
  b.kind_ = Kind::Identity;
  b.n_ = n;
  return b;
}

BOperator BOperator::sym_tridiagonal(Vector diag, Vector offdiag) {
  const Index n = diag.size();
  if (n <= 0 || offdiag.size() != n - 1)
    throw std::invalid_argument("BOperator::sym_tridiagonal: inconsistent lengths");
  BOperator b;
  b.kind_ = Kind::SymTridiagonal;
  b.n_ = n;
  b.td_diag_ = std::move(diag);
  b.td_off_ = std::move(offdiag);
  // LDLT pivots: d₀ = b₀₀, lᵢ = offᵢ/dᵢ₋₁, dᵢ = bᵢᵢ − offᵢ·lᵢ. All pivots must
  // be strictly positive for SPD.
  b.td_d_.resize(n);
  b.td_l_.resize(n - 1);
  b.td_d_[0] = b.td_diag_[0];
  if (b.td_d_[0] <= 0.0)
    throw std::invalid_argument("BOperator::sym_tridiagonal: not positive definite");
  for (Index i = 1; i < n; ++i) {
    b.td_l_[i - 1] = b.td_off_[i - 1] / b.td_d_[i - 1];
    b.td_d_[i] = b.td_diag_[i] - b.td_off_[i - 1] * b.td_l_[i - 1];
    if (b.td_d_[i] <= 0.0)
      throw std::invalid_argument("BOperator::sym_tridiagonal: not positive definite");
  }
  return b;
}

BOperator BOperator::general_spd(SparseSymMatrix m) {
  if (m.rows() <= 0) throw std::invalid_argument("BOperator::general_spd: empty matrix");
  BOperator b;
  b.kind_ = Kind::GeneralSpd;
  b.n_ = m.rows();
  b.gen_ = std::move(m);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(b.gen_.nnz()));
  const auto& rp = b.gen_.row_ptr();
  const auto& ci = b.gen_.col_idx();
  const auto& vs = b.gen_.values();
  for (Index r = 0; r < b.n_; ++r)
    for (Index k = rp[static_cast<size_t>(r)]; k < rp[static_cast<size_t>(r) + 1]; ++k)
      trips.emplace_back(static_cast<int>(r), static_cast<int>(ci[static_cast<size_t>(k)]),
                         vs[static_cast<size_t>(k)]);
  Eigen::SparseMatrix<double> sm(b.n_, b.n_);
  sm.setFromTriplets(trips.begin(), trips.end());

  auto factor = std::make_shared<SpdFactor>();
  factor->ldlt.compute(sm);
  if (factor->ldlt.info() != Eigen::Success)
    throw std::invalid_argument("BOperator::general_spd: factorization failed");
  const Vector d = factor->ldlt.vectorD();
  for (Index i = 0; i < d.size(); ++i)
    if (d[i] <= 0.0)
      throw std::invalid_argument("BOperator::general_spd: not positive definite");
  b.factor_ = std::move(factor);
  return b;
}

Vector BOperator::apply(const Vector& v) const {
  if (v.size() != n_) throw std::invalid_argument("BOperator::apply: dimension mismatch");
  switch (kind_) {
    case Kind::Identity:
      return v;
    case Kind::SymTridiagonal: {
      Vector out(n_);
      for (Index i = 0; i < n_; ++i) {
        double acc = td_diag_[i] * v[i];
        if (i > 0) acc += td_off_[i - 1] * v[i - 1];
        if (i + 1 < n_) acc += td_off_[i] * v[i + 1];
        out[i] = acc;
      }
      return out;
    }
    case Kind::GeneralSpd:
      return gen_.apply(v);
  }
  throw std::logic_error("BOperator::apply: invalid kind");
}

Vector BOperator::solve(const Vector& v) const {
  if (v.size() != n_) throw std::invalid_argument("BOperator::solve: dimension mismatch");
  switch (kind_) {
    case Kind::Identity:
      return v;
    case Kind::SymTridiagonal: {
      Vector w = v;
      for (Index i = 1; i < n_; ++i) w[i] -= td_l_[i - 1] * w[i - 1];  // L z = v
      for (Index i = 0; i < n_; ++i) w[i] /= td_d_[i];                 // D y = z
      for (Index i = n_ - 2; i >= 0; --i) w[i] -= td_l_[i] * w[i + 1]; // Lᵀ w = y
      return w;
    }
    case Kind::GeneralSpd:
      return factor_->ldlt.solve(v);
  }
  throw std::logic_error("BOperator::solve: invalid kind");
}

double BOperator::norm(const Vector& v) const {
  if (kind_ == Kind::Identity) return v.norm();
  const double q = v.dot(apply(v));
  return std::sqrt(std::max(0.0, q));
}

double BOperator::inv_norm(const Vector& v) const {
  if (kind_ == Kind::Identity) return v.norm();
  const double q = v.dot(solve(v));
  return std::sqrt(std::max(0.0, q));
}

double BOperator::col_abs_sum(Index j) const {
  switch (kind_) {
    case Kind::Identity:
      return 1.0;
    case Kind::SymTridiagonal: {
      double s = 0.0;
      if (j > 0) s += std::abs(td_off_[j - 1]);
      s += std::abs(td_diag_[j]);
      if (j + 1 < n_) s += std::abs(td_off_[j]);
      return s;
    }
    case Kind::GeneralSpd:
      return gen_.col_abs_sum(j);
  }
  throw std::logic_error("BOperator::col_abs_sum: invalid kind");
}

double BOperator::one_norm() const {
  double m = 0.0;
  for (Index j = 0; j < n_; ++j) m = std::max(m, col_abs_sum(j));
  return m;
}

Matrix BOperator::to_dense() const {
  switch (kind_) {
    case Kind::Identity:
      return Matrix::Identity(n_, n_);
    case Kind::SymTridiagonal: {
      Matrix b = Matrix::Zero(n_, n_);
      for (Index i = 0; i < n_; ++i) {
        b(i, i) = td_diag_[i];
        if (i + 1 < n_) {
          b(i, i + 1) = td_off_[i];
          b(i + 1, i) = td_off_[i];
        }
      }
      return b;
    }
    case Kind::GeneralSpd:
      return gen_.to_dense();
  }
  throw std::logic_error("BOperator::to_dense: invalid kind");
}

TrsProblem::TrsProblem(SparseSymMatrix a_in, BOperator b_in, Vector g_in, double delta_in)
    : a(std::move(a_in)), b(std::move(b_in)), g(std::move(g_in)), delta(delta_in) {
  if (a.rows() != b.rows() || a.rows() != g.size())
    throw std::invalid_argument("TrsProblem: dimension mismatch");
  if (!(delta > 0.0)) throw std::invalid_argument("TrsProblem: delta must be positive");
  if (g.norm() == 0.0) throw std::invalid_argument("TrsProblem: g must be nonzero");
}

double pair_one_norm(const TrsProblem& p) {
  const Index n = p.dim();
  const double gsum = abs_sum(p.g);
  const double inv_d2 = 1.0 / (p.delta * p.delta);
  double m = 0.0;
  for (Index j = 0; j < n; ++j)
    m = std::max(m, p.a.col_abs_sum(j) + p.b.col_abs_sum(j));
  for (Index j = 0; j < n; ++j)
    m = std::max(m, std::abs(p.g[j]) * gsum * inv_d2 + p.a.col_abs_sum(j));
  return m;
}

PairOperator::PairOperator(const TrsProblem& p) : p_(&p), one_norm_(pair_one_norm(p)) {}

Vector PairOperator::apply_m(const Vector& v) {
  const Index n = p_->dim();
  if (v.size() != 2 * n) throw std::invalid_argument("PairOperator::apply_m: dimension mismatch");
  const Vector v1 = v.head(n);
  const Vector v2 = v.tail(n);
  const Vector av1 = p_->a.apply(v1);
  const Vector av2 = p_->a.apply(v2);
  mv_count_ += 2;
  const double coeff = p_->g.dot(v2) / (p_->delta * p_->delta);
  Vector out(2 * n);
  out.head(n) = -av1 + coeff * p_->g;
  out.tail(n) = p_->b.apply(v1) - av2;
  return out;
}

Vector PairOperator::apply_btilde_inv_m(const Vector& v) {
  Vector w, bw;
  apply_m_with_solve(v, w, bw);
  return w;
}

void PairOperator::apply_m_with_solve(const Vector& v, Vector& w, Vector& bw) {
  bw = apply_m(v);
  w = solve_btilde(bw);
}

Vector PairOperator::apply_btilde(const Vector& v) const {
  const Index n = p_->dim();
  if (v.size() != 2 * n)
    throw std::invalid_argument("PairOperator::apply_btilde: dimension mismatch");
  if (p_->b.is_identity()) return v;
  Vector out(2 * n);
  out.head(n) = p_->b.apply(v.head(n));
  out.tail(n) = p_->b.apply(v.tail(n));
  return out;
}

Vector PairOperator::solve_btilde(const Vector& v) const {
  const Index n = p_->dim();
  if (v.size() != 2 * n)
    throw std::invalid_argument("PairOperator::solve_btilde: dimension mismatch");
  if (p_->b.is_identity()) return v;
  Vector out(2 * n);
  out.head(n) = p_->b.solve(v.head(n));
  out.tail(n) = p_->b.solve(v.tail(n));
  return out;
}

double PairOperator::btilde_norm(const Vector& v) const {
  if (p_->b.is_identity()) return v.norm();
  const double q = v.dot(apply_btilde(v));
  return std::sqrt(std::max(0.0, q));
}

double PairOperator::btilde_inv_norm(const Vector& v) const {
  if (p_->b.is_identity()) return v.norm();
  const double q = v.dot(solve_btilde(v));
  return std::sqrt(std::max(0.0, q));
}

namespace {

std::string to_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

[[noreturn]] void mm_fail(const std::string& path, long line_no, const std::string& what) {
  std::ostringstream os;
  os << path << ":" << line_no << ": " << what;
  throw std::runtime_error(os.str());
}

}  // namespace

Vector seeded_gaussian(Index n, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() {
    // 53-bit mantissa uniform in [0, 1).
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  Vector v(n);
  constexpr double two_pi = 6.283185307179586476925286766559;
  for (Index i = 0; i < n; i += 2) {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    v[i] = r * std::cos(two_pi * u2);
    if (i + 1 < n) v[i + 1] = r * std::sin(two_pi * u2);
  }
  return v;
}

MatrixMarketFile read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open Matrix Market file: " + path);

  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) mm_fail(path, 1, "empty file");
  ++line_no;

  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (to_lower(tag) != "%%matrixmarket") mm_fail(path, line_no, "missing %%MatrixMarket banner");
  if (to_lower(object) != "matrix") mm_fail(path, line_no, "unsupported object '" + object + "'");
  if (to_lower(format) != "coordinate")
    mm_fail(path, line_no, "unsupported format '" + format + "' (coordinate only)");
  if (to_lower(field) != "real")
    mm_fail(path, line_no, "unsupported field '" + field + "' (real only)");
  const std::string sym = to_lower(symmetry);
  if (sym != "general" && sym != "symmetric")
    mm_fail(path, line_no, "unsupported symmetry '" + symmetry + "' (general|symmetric)");

  MatrixMarketFile f;
  f.symmetric = (sym == "symmetric");

  long declared_nnz = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream sizes(line);
    if (!(sizes >> f.rows >> f.cols >> declared_nnz) || f.rows <= 0 || f.cols <= 0 ||
        declared_nnz < 0)
      mm_fail(path, line_no, "malformed size line");
    break;
  }
  if (declared_nnz < 0) mm_fail(path, line_no, "missing size line");
  if (f.symmetric && f.rows != f.cols) mm_fail(path, line_no, "symmetric matrix must be square");

  f.entries.reserve(static_cast<size_t>(f.symmetric ? 2 * declared_nnz : declared_nnz));
  long seen = 0;
  while (seen < declared_nnz) {
    if (!std::getline(in, line)) mm_fail(path, line_no, "unexpected end of file: missing entries");
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream entry(line);
    long i = 0, j = 0;
    double v = 0.0;
    if (!(entry >> i >> j >> v)) mm_fail(path, line_no, "malformed entry line");
    if (i < 1 || i > f.rows || j < 1 || j > f.cols)
      mm_fail(path, line_no, "entry index out of range");
    f.entries.push_back({static_cast<Index>(i - 1), static_cast<Index>(j - 1), v});
    if (f.symmetric && i != j)
      f.entries.push_back({static_cast<Index>(j - 1), static_cast<Index>(i - 1), v});
    ++seen;
  }
  return f;
}

}  // namespace trs
