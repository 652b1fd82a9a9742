#pragma once

#include "trs/sparse_core.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace trs_test {

using trs::BOperator;
using trs::Index;
using trs::Matrix;
using trs::SparseSymMatrix;
using trs::TrsProblem;
using trs::Vector;

// Dense assembly of the block operator M = [[-A, g gᵀ/Δ²], [B, -A]].
inline Matrix dense_pair_m(const TrsProblem& p) {
  const Index n = p.dim();
  const Matrix a = p.a.to_dense();
  Matrix m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = -a;
  m.topRightCorner(n, n) = (p.g * p.g.transpose()) / (p.delta * p.delta);
  m.bottomLeftCorner(n, n) = p.b.to_dense();
  m.bottomRightCorner(n, n) = -a;
  return m;
}

inline Matrix dense_btilde(const TrsProblem& p) {
  const Index n = p.dim();
  Matrix bt = Matrix::Zero(2 * n, 2 * n);
  bt.topLeftCorner(n, n) = p.b.to_dense();
  bt.bottomRightCorner(n, n) = p.b.to_dense();
  return bt;
}

inline BOperator tridiag131(Index n) {
  if (n == 1) return BOperator::sym_tridiagonal(Vector::Constant(1, 3.0), Vector());
  return BOperator::sym_tridiagonal(Vector::Constant(n, 3.0), Vector::Constant(n - 1, 1.0));
}

inline Matrix random_dense_sym(Index n, std::uint64_t seed, double diag_shift = 0.0) {
  const Vector vals = trs::seeded_gaussian(n * n, seed);
  Matrix r(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) r(i, j) = vals[i * n + j];
  Matrix a = 0.5 * (r + r.transpose());
  a.diagonal().array() += diag_shift;
  return a;
}

// Sparse random symmetric matrix: tridiagonal backbone plus `extra` mirrored
// off-band entries, with an optional diagonal shift to steer definiteness.
inline SparseSymMatrix random_sparse_sym(Index n, Index extra, std::uint64_t seed,
                                         double diag_shift = 0.0) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto gauss = [&]() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  };
  std::vector<trs::Triplet> t;
  for (Index i = 0; i < n; ++i) t.push_back({i, i, gauss() + diag_shift});
  for (Index i = 0; i + 1 < n; ++i) {
    const double v = gauss();
    t.push_back({i, i + 1, v});
    t.push_back({i + 1, i, v});
  }
  std::set<std::pair<Index, Index>> used;  // one extra per unordered position
  for (Index k = 0; k < extra; ++k) {
    const Index i = static_cast<Index>(rng() % static_cast<std::uint64_t>(n));
    const Index j = static_cast<Index>(rng() % static_cast<std::uint64_t>(n));
    const double v = gauss();
    if (i == j) continue;
    if (!used.insert({std::min(i, j), std::max(i, j)}).second) continue;
    t.push_back({i, j, v});
    t.push_back({j, i, v});
  }
  return SparseSymMatrix(n, std::move(t));
}

// Seeded TRS instance used across suites: mixed definite/indefinite A,
// B ∈ {identity, tridiag(1,3,1)}, unit-normal g.
inline TrsProblem random_instance(std::uint64_t seed, Index n, bool definite, bool tridiag_b,
                                  double delta) {
  const double shift = definite ? 2.0 * std::sqrt(static_cast<double>(n)) + 1.0 : 0.0;
  SparseSymMatrix a = random_sparse_sym(n, n / 2, seed, shift);
  BOperator b = tridiag_b ? tridiag131(n) : BOperator::identity(n);
  Vector g = trs::seeded_gaussian(n, seed ^ 0x9e3779b97f4a7c15ull);
  g /= g.norm();
  return TrsProblem(std::move(a), std::move(b), std::move(g), delta);
}

}  // namespace trs_test
