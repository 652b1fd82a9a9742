#include "trs/gltr.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace trs {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void finalize_residual(const TrsProblem& p, TrsSolution& sol) {
  const Vector r = p.a.apply(sol.s) + sol.lambda * p.b.apply(sol.s) + p.g;
  sol.res_bnorm = p.b.inv_norm(r);
  const double gnorm = p.b.inv_norm(p.g);
  sol.rel_res = (gnorm > 0.0) ? sol.res_bnorm / gnorm : sol.res_bnorm;
}

}  // namespace

std::variant<TrsSolution, BoundarySignal> interior_check(const TrsProblem& p, double tol,
                                                         long max_iter) {
  if (tol <= 0.0) throw std::invalid_argument("interior_check: tol must be positive");
  const Index n = p.dim();
  const double abs_tol = tol * pair_one_norm(p);

  Vector s = Vector::Zero(n);
  Vector r = -p.g;  // residual of As = −g at s
  Vector d = r;
  double rr = r.squaredNorm();
  long mvs = 0;

  for (long it = 0; it < max_iter; ++it) {
    if (std::sqrt(rr) <= abs_tol) {
      TrsSolution sol;
      sol.s = std::move(s);
      sol.lambda = 0.0;
      sol.status = SolveStatus::Interior;
      sol.mv_count = mvs;
      sol.iterations = it;
      finalize_residual(p, sol);
      return sol;
    }
    const Vector ad = p.a.apply(d);
    ++mvs;
    const double curvature = d.dot(ad);
    if (curvature <= 0.0) return BoundarySignal{mvs};
    const double alpha = rr / curvature;
    const Vector s_next = s + alpha * d;
    if (p.b.norm(s_next) >= p.delta) return BoundarySignal{mvs};
    s = s_next;
    r -= alpha * ad;
    const double rr_next = r.squaredNorm();
    d = r + (rr_next / rr) * d;
    rr = rr_next;
  }

  TrsSolution sol;
  sol.s = std::move(s);
  sol.lambda = 0.0;
  sol.status = SolveStatus::MaxIterations;
  sol.mv_count = mvs;
  sol.iterations = max_iter;
  finalize_residual(p, sol);
  return sol;
}

LanczosState::LanczosState(const TrsProblem& p, bool reorthogonalize)
    : p_(&p), reorth_(reorthogonalize) {
  const Index n = p.dim();
  const Vector binv_g = p.b.solve(p.g);
  beta0_ = std::sqrt(std::max(0.0, binv_g.dot(p.g)));
  if (beta0_ <= 0.0) throw std::invalid_argument("lanczos: gradient must be nonzero");
  basis_.push_back(binv_g / beta0_);
  bp_curr_ = p.g / beta0_;
  bp_prev_ = Vector::Zero(n);
  if (reorth_ && !p.b.is_identity()) bbasis_.push_back(bp_curr_);
  breakdown_floor_ = kEps * static_cast<double>(n) * p.a.one_norm();
}

const Vector& LanczosState::b_image(size_t i) const {
  return bbasis_.empty() ? basis_[i] : bbasis_[i];
}

bool LanczosState::step() {
  if (breakdown_) return false;
  const size_t k = diag_.size();
  if (k > 0) off_.push_back(beta_next_);  // β_k couples p_{k-1} and p_k inside T_k

  const Vector& pk = basis_.back();
  const Vector w = p_->a.apply(pk);
  ++mv_count_;
  const double delta_k = pk.dot(w);
  diag_.push_back(delta_k);

  Vector r = w - delta_k * bp_curr_;
  if (k > 0) r -= beta_next_ * bp_prev_;
  Vector z = p_->b.solve(r);
  if (reorth_) {
    // One full modified Gram-Schmidt pass in the B-inner product; z and its
    // B-image r are updated in tandem so no extra solves are needed.
    for (size_t i = 0; i < basis_.size(); ++i) {
      const double c = basis_[i].dot(r);
      z -= c * basis_[i];
      r -= c * b_image(i);
    }
  }
  beta_next_ = std::sqrt(std::max(0.0, r.dot(z)));
  if (beta_next_ <= breakdown_floor_) {
    breakdown_ = true;
    return false;
  }
  basis_.push_back(z / beta_next_);
  bp_prev_ = std::move(bp_curr_);
  bp_curr_ = r / beta_next_;
  if (reorth_ && !bbasis_.empty()) bbasis_.push_back(bp_curr_);
  return true;
}

SymTridiag LanczosState::t() const {
  SymTridiag t;
  t.diag = Eigen::Map<const Vector>(diag_.data(), static_cast<Index>(diag_.size()));
  t.offdiag = Eigen::Map<const Vector>(off_.data(), static_cast<Index>(off_.size()));
  return t;
}

ReducedSolution solve_reduced_trs(const SymTridiag& t, double beta0, double delta,
                                  double warm_lambda) {
  if (beta0 <= 0.0 || delta <= 0.0)
    throw std::invalid_argument("solve_reduced_trs: beta0 and delta must be positive");
  const Index k = t.dim();
  Vector rhs = Vector::Zero(k);
  rhs[0] = -beta0;

  auto accept = [&](Vector h, double lambda) {
    ReducedSolution out;
    out.lambda = lambda;
    out.boundary = lambda > 0.0 || std::abs(h.norm() - delta) <= 1e-12 * delta;
    out.h = std::move(h);
    return out;
  };

  if (const auto f0 = tridiag_ldlt(t, 0.0); std::holds_alternative<TridiagFactor>(f0)) {
    Vector h = tridiag_solve(std::get<TridiagFactor>(f0), rhs);
    if (h.norm() <= delta) return accept(std::move(h), 0.0);
  }

  const double theta_min = tridiag_leftmost_eig(t);
  double lo = std::max(0.0, -theta_min);
  double hi = lo + beta0 / delta;  // ‖h(hi)‖ ≤ β₀/(θ_min+hi) ≤ Δ
  double lam = (warm_lambda > lo && warm_lambda < hi) ? warm_lambda : lo + 0.5 * (hi - lo);

  Vector h;
  double nh = 0.0;
  for (int it = 0; it < 200; ++it) {
    const auto fac = tridiag_ldlt(t, lam);
    if (std::holds_alternative<IndefiniteSignal>(fac)) {
      // θ_min estimate was slightly optimistic; move the floor up.
      lo = lam;
      lam = 0.5 * (lam + hi);
      continue;
    }
    const auto& f = std::get<TridiagFactor>(fac);
    h = tridiag_solve(f, rhs);
    nh = h.norm();
    if (std::abs(nh - delta) <= 1e-12 * delta) return accept(std::move(h), lam);
    if (nh > delta)
      lo = lam;
    else
      hi = lam;

    if (hi - lo <= 4.0 * kEps * std::max(1.0, hi)) break;

    // Newton step on 1/‖h(λ)‖ − 1/Δ, safeguarded by bisection.
    const Vector u = tridiag_solve(f, h);
    const double w2 = h.dot(u);  // hᵀ(T+λI)⁻¹h > 0
    double next = lam + (nh * nh / w2) * (nh - delta) / delta;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    lam = next;
  }

  if (h.size() == k && std::abs(nh - delta) <= 1e-9 * delta) return accept(std::move(h), lam);
  std::ostringstream msg;
  msg << "solve_reduced_trs: bracket collapsed unconverged (k=" << k << ", lambda=" << lam
      << ", bracket=[" << lo << "," << hi << "], |h|=" << nh << ", delta=" << delta << ")";
  throw std::runtime_error(msg.str());
}

double gltr_residual_estimate(const LanczosState& state, const ReducedSolution& r) {
  return state.beta_next() * std::abs(r.h[r.h.size() - 1]);
}

Vector assemble_iterate(const LanczosState& state, const ReducedSolution& r) {
  const auto& basis = state.basis();
  const Index k = r.h.size();
  if (static_cast<size_t>(k) > basis.size())
    throw std::invalid_argument("assemble_iterate: basis shorter than coefficient vector");
  Vector s = Vector::Zero(basis[0].size());
  for (Index i = 0; i < k; ++i) s += r.h[i] * basis[static_cast<size_t>(i)];
  return s;
}

TrsSolution gltr_solve(const TrsProblem& p, double tol1_rel, long max_iter, bool reorth,
                       GltrDiagnostics* diagnostics) {
  if (tol1_rel <= 0.0) throw std::invalid_argument("gltr_solve: tol1_rel must be positive");
  if (max_iter <= 0) max_iter = p.dim() + 1;
  const double norm_m = pair_one_norm(p);

  auto phase1 = interior_check(p, tol1_rel, max_iter);
  if (auto* sol = std::get_if<TrsSolution>(&phase1)) {
    if (diagnostics) diagnostics->cg_mv_count = sol->mv_count;
    return std::move(*sol);
  }
  const long cg_mvs = std::get<BoundarySignal>(phase1).mv_count;
  if (diagnostics) diagnostics->cg_mv_count = cg_mvs;

  LanczosState state(p, reorth);
  TrsSolution out;
  out.status = SolveStatus::MaxIterations;
  ReducedSolution red;
  double warm = -1.0;
  for (long k = 0; k < max_iter; ++k) {
    const bool advanced = state.step();
    red = solve_reduced_trs(state.t(), state.beta0(), p.delta, warm);
    warm = red.lambda;
    const double est = gltr_residual_estimate(state, red);
    if (diagnostics) {
      diagnostics->estimates.push_back(est);
      diagnostics->lambdas.push_back(red.lambda);
    }
    out.iterations = k + 1;
    if (!advanced) {
      if (diagnostics) diagnostics->breakdown = true;
      // The recurrence closed an invariant subspace; the reduced solution is
      // exact there. Whether it is the global optimum depends on spectrum the
      // gradient never touched, which this method cannot observe.
      out.status = red.boundary ? SolveStatus::Boundary : SolveStatus::Interior;
      break;
    }
    if (est <= tol1_rel * norm_m) {
      out.status = red.boundary ? SolveStatus::Boundary : SolveStatus::Interior;
      break;
    }
  }

  out.s = assemble_iterate(state, red);
  out.lambda = red.lambda;
  out.mv_count = cg_mvs + state.mv_count();
  finalize_residual(p, out);
  return out;
}

}  // namespace trs
