#include "trs/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace trs {

namespace {

// Deterministic orientation: flip so the largest-magnitude entry is positive.
void orient(Vector& v) {
  Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0.0) v = -v;
}

}  // namespace

BSqrtPair oracle_b_sqrt(const BOperator& b) {
  const Index n = b.rows();
  if (b.is_identity()) return {Matrix::Identity(n, n), Matrix::Identity(n, n)};
  Eigen::SelfAdjointEigenSolver<Matrix> es(b.to_dense());
  if (es.eigenvalues()[0] <= 0.0)
    throw std::invalid_argument("oracle_b_sqrt: operator is not positive definite");
  const Vector root = es.eigenvalues().cwiseSqrt();
  BSqrtPair out;
  out.sqrt = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
  out.inv_sqrt =
      es.eigenvectors() * root.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  return out;
}

DenseKktSolution oracle_solve_trs(const TrsProblem& p) {
  const Index n = p.dim();
  const BSqrtPair bs = oracle_b_sqrt(p.b);
  const Matrix ahat_raw = bs.inv_sqrt * p.a.to_dense() * bs.inv_sqrt;
  const Matrix ahat = 0.5 * (ahat_raw + ahat_raw.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(ahat);
  const Vector alpha = es.eigenvalues();  // ascending: alpha[0] is the leftmost
  const Matrix q = es.eigenvectors();
  const Vector ghat = bs.inv_sqrt * p.g;
  const Vector gamma = q.transpose() * ghat;
  const double delta2 = p.delta * p.delta;

  DenseKktSolution out;
  out.alpha_n = alpha[0];
  out.eta = 0.0;
  out.u_n = Vector::Zero(n);

  // Squared B-norm of the stationary point of the shifted model,
  // ‖(Â + λI)⁻¹ĝ‖² = Σ γᵢ²/(αᵢ+λ)², evaluated only where no pole is hit.
  auto norm2_at = [&](double lam) {
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double d = alpha[i] + lam;
      if (d == 0.0) {
        if (gamma[i] != 0.0) return std::numeric_limits<double>::infinity();
        continue;
      }
      const double t = gamma[i] / d;
      acc += t * t;
    }
    return acc;
  };

  auto solution_at = [&](double lam) {
    Vector x(n);
    for (Index i = 0; i < n; ++i) {
      const double d = alpha[i] + lam;
      x[i] = (d == 0.0) ? 0.0 : -gamma[i] / d;
    }
    return Vector(bs.inv_sqrt * (q * x));
  };

  if (alpha[0] > 0.0 && norm2_at(0.0) <= delta2) {
    out.lambda_opt = 0.0;
    out.case_tag = KktCase::Interior;
    out.s_opt = solution_at(0.0);
    return out;
  }

  // Gradient content on the leftmost eigenspace vs the rest at λ = −α_n.
  const double cluster_tol = 1e-10 * (1.0 + std::abs(alpha[0]));
  double proj2 = 0.0;
  double pseudo2 = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (alpha[i] - alpha[0] <= cluster_tol) {
      proj2 += gamma[i] * gamma[i];
    } else {
      const double t = gamma[i] / (alpha[i] - alpha[0]);
      pseudo2 += t * t;
    }
  }
  const bool degenerate = std::sqrt(proj2) <= 1e-12 * ghat.norm();

  if (alpha[0] <= 0.0 && degenerate && pseudo2 < delta2) {
    out.case_tag = KktCase::HardCase;
    out.lambda_opt = -alpha[0];
    out.eta = std::sqrt(delta2 - pseudo2);
    Vector un = q.col(0);
    orient(un);
    out.u_n = bs.inv_sqrt * un;  // unit B-norm since un has unit 2-norm
    Vector x(n);
    for (Index i = 0; i < n; ++i)
      x[i] = (alpha[i] - alpha[0] <= cluster_tol) ? 0.0 : -gamma[i] / (alpha[i] - alpha[0]);
    out.s_opt = bs.inv_sqrt * (q * x) + out.eta * out.u_n;
    return out;
  }

  // Easy boundary case: the multiplier is the unique root of
  // norm2_at(λ) = Δ² to the right of max(0, −α_n).
  double lo = std::max(0.0, -alpha[0]);
  double hi = lo + ghat.norm() / p.delta + 1e-3;
  for (int guard = 0; guard < 200 && norm2_at(hi) > delta2; ++guard) hi = lo + 2.0 * (hi - lo);
  for (int it = 0; it < 300 && (hi - lo) > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (norm2_at(mid) > delta2)
      lo = mid;
    else
      hi = mid;
  }
  out.lambda_opt = 0.5 * (lo + hi);
  out.case_tag = KktCase::Boundary;
  out.s_opt = solution_at(out.lambda_opt);
  return out;
}

OracleEigpair oracle_rightmost_eigpair(const TrsProblem& p) {
  const Index n = p.dim();
  const Matrix a = p.a.to_dense();
  const Matrix b = p.b.to_dense();
  Matrix m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = -a;
  m.topRightCorner(n, n) = (p.g * p.g.transpose()) / (p.delta * p.delta);
  m.bottomLeftCorner(n, n) = b;
  m.bottomRightCorner(n, n) = -a;

  const BSqrtPair bs = oracle_b_sqrt(p.b);
  Matrix w = Matrix::Zero(2 * n, 2 * n);
  w.topLeftCorner(n, n) = bs.inv_sqrt;
  w.bottomRightCorner(n, n) = bs.inv_sqrt;
  const Matrix k = w * m * w;

  Eigen::EigenSolver<Matrix> es(k);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("oracle_rightmost_eigpair: dense eigensolve failed");

  Index best = 0;
  for (Index i = 1; i < 2 * n; ++i) {
    const auto& ev = es.eigenvalues();
    if (ev[i].real() > ev[best].real() ||
        (ev[i].real() == ev[best].real() &&
         std::abs(ev[i].imag()) < std::abs(ev[best].imag())))
      best = i;
  }

  // Rotate the eigenvector's phase to make it as real as possible, then keep
  // the real part. For the instances this oracle certifies, the rightmost
  // eigenvalue is real and the imaginary content is pure rounding noise.
  Eigen::VectorXcd vc = es.eigenvectors().col(best);
  Index imax = 0;
  vc.cwiseAbs().maxCoeff(&imax);
  vc *= std::conj(vc[imax]) / std::abs(vc[imax]);
  Vector v = vc.real();
  v /= v.norm();  // unit 2-norm in the transformed space = unit B̃-norm below
  orient(v);

  OracleEigpair out;
  out.mu1 = es.eigenvalues()[best].real();
  out.y = w * v;
  return out;
}

}  // namespace trs
