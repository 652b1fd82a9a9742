#include "trs/dense_small.hpp"

#include <doctest.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "helpers.hpp"

using namespace trs;
using namespace trs_test;

namespace {

SymTridiag make_tridiag(std::initializer_list<double> diag, std::initializer_list<double> off) {
  SymTridiag t;
  t.diag = Vector(static_cast<Index>(diag.size()));
  Index i = 0;
  for (double v : diag) t.diag[i++] = v;
  t.offdiag = Vector(static_cast<Index>(off.size()));
  i = 0;
  for (double v : off) t.offdiag[i++] = v;
  return t;
}

Matrix random_hessenberg(Index n, std::uint64_t seed) {
  const Vector raw = trs::seeded_gaussian(n * n, seed);
  Matrix h = Matrix::Zero(n, n);
  Index k = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i <= std::min(j + 1, n - 1); ++i) h(i, j) = raw[k++];
  return h;
}

// Greedy closest-point matching between two eigenvalue multisets.
void require_same_multiset(std::vector<Complex> a, std::vector<Complex> b, double tol) {
  REQUIRE(a.size() == b.size());
  for (const Complex& x : a) {
    size_t best = 0;
    double bestdist = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < b.size(); ++j) {
      const double d = std::abs(x - b[j]);
      if (d < bestdist) {
        bestdist = d;
        best = j;
      }
    }
    REQUIRE(bestdist <= tol);
    b.erase(b.begin() + static_cast<std::ptrdiff_t>(best));
  }
}

std::vector<Complex> eigen_oracle_values(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m);
  std::vector<Complex> out;
  for (Index i = 0; i < m.rows(); ++i) out.push_back(es.eigenvalues()[i]);
  return out;
}

}  // namespace

TEST_SUITE("dense-small") {

TEST_CASE("ldlt factors a shifted tridiagonal and reproduces the pivots") {
  const SymTridiag t = make_tridiag({0.0, 0.0}, {1.0});
  const auto res = tridiag_ldlt(t, 2.0);
  REQUIRE(std::holds_alternative<TridiagFactor>(res));
  const auto& f = std::get<TridiagFactor>(res);
  CHECK(f.d[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(f.d[1] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(f.l[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("ldlt reports the first non-positive pivot one-based") {
  const SymTridiag t = make_tridiag({2.0, 2.0}, {1.0});
  const auto res = tridiag_ldlt(t, -1.0);
  REQUIRE(std::holds_alternative<IndefiniteSignal>(res));
  CHECK(std::get<IndefiniteSignal>(res).position == 2);

  const SymTridiag neg = make_tridiag({-1.0}, {});
  const auto res1 = tridiag_ldlt(neg, 0.0);
  REQUIRE(std::holds_alternative<IndefiniteSignal>(res1));
  CHECK(std::get<IndefiniteSignal>(res1).position == 1);
}

TEST_CASE("ldlt solve matches a dense factorization") {
  for (Index n : {1, 2, 5, 9}) {
    SymTridiag t;
    t.diag = trs::seeded_gaussian(n, 100 + static_cast<std::uint64_t>(n));
    t.offdiag = n > 1 ? Vector(trs::seeded_gaussian(n - 1, 200 + static_cast<std::uint64_t>(n)))
                      : Vector(0);
    const double shift = 4.0 + t.to_dense().cwiseAbs().rowwise().sum().maxCoeff();
    const auto res = tridiag_ldlt(t, shift);
    REQUIRE(std::holds_alternative<TridiagFactor>(res));
    const Vector rhs = trs::seeded_gaussian(n, 300 + static_cast<std::uint64_t>(n));
    const Vector x = tridiag_solve(std::get<TridiagFactor>(res), rhs);
    const Matrix dense = t.to_dense() + shift * Matrix::Identity(n, n);
    const Vector ref = dense.ldlt().solve(rhs);
    CHECK((x - ref).norm() <= 1e-12 * (1.0 + ref.norm()));
  }
}

TEST_CASE("leftmost eigenvalue bisection matches a dense symmetric solver") {
  for (Index n : {1, 2, 3, 7, 12, 25}) {
    SymTridiag t;
    t.diag = trs::seeded_gaussian(n, 400 + static_cast<std::uint64_t>(n));
    t.offdiag = n > 1 ? Vector(trs::seeded_gaussian(n - 1, 500 + static_cast<std::uint64_t>(n)))
                      : Vector(0);
    const double left = tridiag_leftmost_eig(t);
    Eigen::SelfAdjointEigenSolver<Matrix> es(t.to_dense());
    CHECK(std::abs(left - es.eigenvalues()[0]) <= 1e-11 * (1.0 + t.one_norm()));
  }
}

TEST_CASE("hessenberg eigenpairs of a symmetric 2x2") {
  Matrix h(2, 2);
  h << 1, 1, 1, 1;
  const auto pairs = hessenberg_eig(h);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].value.real() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(pairs[0].value.imag() == 0.0);
  CHECK(pairs[1].value.real() == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(pairs[0].vector[0] - Complex(inv_sqrt2, 0)) <= 1e-14);
  CHECK(std::abs(pairs[0].vector[1] - Complex(inv_sqrt2, 0)) <= 1e-14);
}

TEST_CASE("hessenberg eigenpairs of a rotation generator are a conjugate pair") {
  Matrix h(2, 2);
  h << 0, -1, 1, 0;
  const auto pairs = hessenberg_eig(h);
  REQUIRE(pairs.size() == 2);
  CHECK(std::abs(pairs[0].value - Complex(0, 1)) <= 1e-14);
  CHECK(std::abs(pairs[1].value - Complex(0, -1)) <= 1e-14);
  CHECK(pairs[1].value == std::conj(pairs[0].value));
  CHECK((pairs[1].vector - pairs[0].vector.conjugate()).norm() == 0.0);
  for (const auto& p : pairs) {
    const ComplexVector res = h.cast<Complex>() * p.vector - p.value * p.vector;
    CHECK(res.norm() <= 1e-14);
    CHECK(p.vector.norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("hessenberg eigenpairs: residuals, ordering, conjugacy on random input") {
  for (Index n : {3, 6, 7, 11}) {
    const Matrix h = random_hessenberg(n, 600 + static_cast<std::uint64_t>(n));
    const double scale = h.cwiseAbs().colwise().sum().maxCoeff();
    const auto pairs = hessenberg_eig(h);
    REQUIRE(pairs.size() == static_cast<size_t>(n));

    std::vector<Complex> values;
    for (const auto& p : pairs) {
      values.push_back(p.value);
      const ComplexVector res = h.cast<Complex>() * p.vector - p.value * p.vector;
      CHECK(res.norm() <= 1e-10 * scale);
      CHECK(p.vector.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
    // Descending real part, conjugate pairs adjacent and exactly conjugate.
    for (size_t i = 0; i + 1 < values.size(); ++i)
      CHECK(values[i].real() >= values[i + 1].real() - 1e-14 * scale);
    for (size_t i = 0; i < values.size(); ++i) {
      if (values[i].imag() > 0.0) {
        REQUIRE(i + 1 < values.size());
        CHECK(values[i + 1] == std::conj(values[i]));
        CHECK((pairs[i + 1].vector - pairs[i].vector.conjugate()).norm() == 0.0);
        ++i;
      }
    }
    require_same_multiset(values, eigen_oracle_values(h), 1e-8 * (1.0 + scale));
  }
}

TEST_CASE("dense eigenvalues agree with the symmetric solver after reduction") {
  const Matrix a = random_dense_sym(8, 700, 0.0);
  const auto vals = dense_eigenvalues(a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  REQUIRE(vals.size() == 8);
  for (size_t i = 0; i < vals.size(); ++i) {
    CHECK(vals[i].imag() == 0.0);
    // Ours descend; Eigen's ascend.
    CHECK(vals[i].real() ==
          doctest::Approx(es.eigenvalues()[7 - static_cast<Index>(i)]).epsilon(1e-10));
  }
}

TEST_CASE("hessenberg reduction is an orthogonal similarity") {
  const Matrix a = random_hessenberg(6, 800).transpose() + random_hessenberg(6, 801);
  const Matrix h = hessenberg_reduce(a);
  for (Index j = 0; j + 2 < 6; ++j)
    for (Index i = j + 2; i < 6; ++i) CHECK(h(i, j) == 0.0);
  require_same_multiset(eigen_oracle_values(a), eigen_oracle_values(h),
                        1e-9 * (1.0 + a.cwiseAbs().colwise().sum().maxCoeff()));
}

TEST_CASE("eigensolver rejects input with entries below the subdiagonal") {
  Matrix bad = Matrix::Zero(3, 3);
  bad(2, 0) = 1.0;
  CHECK_THROWS_AS(hessenberg_eig(bad), std::invalid_argument);
}

TEST_CASE("qr sweep with no shifts leaves the matrix untouched") {
  Matrix h = random_hessenberg(5, 900);
  const Matrix h0 = h;
  Matrix q = Matrix::Identity(5, 5);
  shifted_qr_sweep(h, q, {});
  CHECK((h - h0).norm() == 0.0);
  CHECK((q - Matrix::Identity(5, 5)).norm() == 0.0);
}

TEST_CASE("qr sweep preserves eigenvalues and accumulates the similarity") {
  for (Index n : {2, 5, 8}) {
    const Matrix h0 = random_hessenberg(n, 1000 + static_cast<std::uint64_t>(n));
    const double scale = h0.cwiseAbs().colwise().sum().maxCoeff();
    const auto vals = dense_eigenvalues(h0);

    // Shift with the two leftmost eigenvalues (keeping conjugate pairing).
    std::vector<Complex> shifts;
    if (vals.back().imag() != 0.0) {
      shifts = {vals[vals.size() - 2], vals.back()};
    } else {
      shifts = {vals.back()};
      if (n > 2) {
        if (vals[vals.size() - 2].imag() != 0.0)
          shifts.insert(shifts.begin(), {vals[vals.size() - 3], vals[vals.size() - 2]});
        else
          shifts.insert(shifts.begin(), vals[vals.size() - 2]);
      }
    }

    Matrix h = h0;
    Matrix q = Matrix::Identity(n, n);
    shifted_qr_sweep(h, q, shifts);

    for (Index j = 0; j + 2 < n; ++j)
      for (Index i = j + 2; i < n; ++i) CHECK(h(i, j) == 0.0);
    CHECK((q.transpose() * q - Matrix::Identity(n, n)).norm() <= 1e-13 * n);
    CHECK((q.transpose() * h0 * q - h).norm() <= 1e-12 * (1.0 + scale));
    require_same_multiset(vals, dense_eigenvalues(h), 1e-10 * (1.0 + scale));
  }
}

TEST_CASE("qr sweep rejects an unpaired complex shift") {
  Matrix h = random_hessenberg(4, 1100);
  Matrix q = Matrix::Identity(4, 4);
  std::vector<Complex> shifts = {Complex(1.0, 2.0), Complex(1.0, 2.0)};
  CHECK_THROWS_AS(shifted_qr_sweep(h, q, shifts), std::invalid_argument);
  std::vector<Complex> lone = {Complex(0.0, 1.0)};
  CHECK_THROWS_AS(shifted_qr_sweep(h, q, lone), std::invalid_argument);
}

TEST_CASE("smallest singular triplet of a 2x1 extension") {
  Matrix h(2, 1);
  h << 1, 1;
  const auto t = smallest_singular_triplet(h, Complex(1.0, 0.0));
  CHECK(t.real);
  CHECK(t.sigma == doctest::Approx(1.0).epsilon(1e-14));
  REQUIRE(t.right.size() == 1);
  CHECK(std::abs(t.right[0] - Complex(1.0, 0.0)) <= 1e-14);
}

TEST_CASE("smallest singular triplet matches full svd for a real shift") {
  for (Index k : {1, 3, 6, 10}) {
    Matrix h = random_hessenberg(k + 1, 1200 + static_cast<std::uint64_t>(k))
                   .leftCols(k);
    const double mu = 0.37;
    const auto t = smallest_singular_triplet(h, Complex(mu, 0.0));

    Matrix c = h;
    for (Index j = 0; j < k; ++j) c(j, j) -= mu;
    Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeThinV);
    const double ref = svd.singularValues()[k - 1];
    CHECK(t.sigma == doctest::Approx(ref).epsilon(1e-12).scale(1.0 + c.norm()));
    CHECK((c * t.right.real()).norm() == doctest::Approx(t.sigma).epsilon(1e-10).scale(1.0));
    CHECK(t.right.imag().norm() == 0.0);
    CHECK(t.right.norm() == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("smallest singular triplet handles a complex shift") {
  for (Index k : {2, 5, 9}) {
    Matrix h = random_hessenberg(k + 1, 1300 + static_cast<std::uint64_t>(k))
                   .leftCols(k);
    const Complex mu(0.2, 0.9);
    const auto t = smallest_singular_triplet(h, mu);
    CHECK_FALSE(t.real);

    Eigen::MatrixXcd c = h.cast<Complex>();
    for (Index j = 0; j < k; ++j) c(j, j) -= mu;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(c, Eigen::ComputeThinV);
    const double ref = svd.singularValues()[k - 1];
    CHECK(t.sigma == doctest::Approx(ref).epsilon(1e-11).scale(1.0 + h.norm()));
    CHECK((c * t.right).norm() == doctest::Approx(t.sigma).epsilon(1e-9).scale(1.0));
    CHECK(t.right.norm() == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("qr iteration reports failure instead of spinning") {
  // A 1x1 always converges; just confirm the zero matrix short-circuits.
  const auto pairs = hessenberg_eig(Matrix::Zero(3, 3));
  REQUIRE(pairs.size() == 3);
  for (const auto& p : pairs) CHECK(p.value == Complex(0.0, 0.0));
}

}  // TEST_SUITE
