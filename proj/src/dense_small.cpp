#include "trs/dense_small.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace trs {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Complex division in real arithmetic (Smith's algorithm).
void cdiv(double xr, double xi, double yr, double yi, double& outr, double& outi) {
  if (std::abs(yr) > std::abs(yi)) {
    const double r = yi / yr;
    const double d = yr + r * yi;
    outr = (xr + r * xi) / d;
    outi = (xi - r * xr) / d;
  } else {
    const double r = yr / yi;
    const double d = yi + r * yr;
    outr = (r * xr + xi) / d;
    outi = (r * xi - xr) / d;
  }
}

}  // namespace

double SymTridiag::one_norm() const {
  const Index n = dim();
  double m = 0.0;
  for (Index i = 0; i < n; ++i) {
    double c = std::abs(diag[i]);
    if (i > 0) c += std::abs(offdiag[i - 1]);
    if (i + 1 < n) c += std::abs(offdiag[i]);
    m = std::max(m, c);
  }
  return m;
}

Matrix SymTridiag::to_dense() const {
  const Index n = dim();
  Matrix t = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    t(i, i) = diag[i];
    if (i + 1 < n) {
      t(i, i + 1) = offdiag[i];
      t(i + 1, i) = offdiag[i];
    }
  }
  return t;
}

std::variant<TridiagFactor, IndefiniteSignal> tridiag_ldlt(const SymTridiag& t, double shift) {
  const Index n = t.dim();
  if (n == 0 || t.offdiag.size() != n - 1)
    throw std::invalid_argument("tridiag_ldlt: inconsistent tridiagonal");
  TridiagFactor f;
  f.d.resize(n);
  f.l.resize(n - 1);
  f.d[0] = t.diag[0] + shift;
  if (f.d[0] <= 0.0) return IndefiniteSignal{1};
  for (Index i = 1; i < n; ++i) {
    f.l[i - 1] = t.offdiag[i - 1] / f.d[i - 1];
    f.d[i] = (t.diag[i] + shift) - t.offdiag[i - 1] * f.l[i - 1];
    if (f.d[i] <= 0.0) return IndefiniteSignal{i + 1};
  }
  return f;
}

Vector tridiag_solve(const TridiagFactor& f, Vector rhs) {
  const Index n = f.d.size();
  if (rhs.size() != n) throw std::invalid_argument("tridiag_solve: dimension mismatch");
  for (Index i = 1; i < n; ++i) rhs[i] -= f.l[i - 1] * rhs[i - 1];
  for (Index i = 0; i < n; ++i) rhs[i] /= f.d[i];
  for (Index i = n - 2; i >= 0; --i) rhs[i] -= f.l[i] * rhs[i + 1];
  return rhs;
}

namespace {

// Number of eigenvalues of T strictly below x (negative-pivot count of the
// shifted LDLᵀ recurrence, with the customary zero-pivot perturbation).
Index sturm_count(const SymTridiag& t, double x, double pivmin) {
  Index count = 0;
  double d = t.diag[0] - x;
  if (d < 0.0) ++count;
  for (Index i = 1; i < t.dim(); ++i) {
    if (std::abs(d) < pivmin) d = (d < 0.0) ? -pivmin : pivmin;
    d = (t.diag[i] - x) - t.offdiag[i - 1] * (t.offdiag[i - 1] / d);
    if (d < 0.0) ++count;
  }
  return count;
}

}  // namespace

double tridiag_leftmost_eig(const SymTridiag& t) {
  const Index n = t.dim();
  if (n == 0) throw std::invalid_argument("tridiag_leftmost_eig: empty matrix");
  if (n == 1) return t.diag[0];

  double lo = t.diag[0], hi = t.diag[0];
  for (Index i = 0; i < n; ++i) {
    double radius = 0.0;
    if (i > 0) radius += std::abs(t.offdiag[i - 1]);
    if (i + 1 < n) radius += std::abs(t.offdiag[i]);
    lo = std::min(lo, t.diag[i] - radius);
    hi = std::max(hi, t.diag[i] + radius);
  }
  const double scale = t.one_norm();
  const double tol = 1e-13 * (1.0 + scale);
  const double pivmin = std::numeric_limits<double>::min() / kEps;
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sturm_count(t, mid, pivmin) >= 1)
      hi = mid;  // some eigenvalue lies below mid
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// Francis QR iteration on an upper Hessenberg matrix (EISPACK hqr2 lineage:
// Martin/Wilkinson Algol procedure and its Fortran/JAMA descendants).
// On return H is quasi-triangular, d/e hold eigenvalue real/imag parts
// (complex pairs stored at adjacent indices with e[i] > 0 first), and *v, when
// present, accumulates all transforms applied.
void francis_qr(Matrix& h, Matrix* v, Vector& d, Vector& e) {
  const int nn = static_cast<int>(h.rows());
  d = Vector::Zero(nn);
  e = Vector::Zero(nn);

  double norm = 0.0;
  for (int i = 0; i < nn; ++i)
    for (int j = std::max(i - 1, 0); j < nn; ++j) norm += std::abs(h(i, j));
  if (norm == 0.0) return;  // zero matrix: eigenvalues all zero, v stays as passed

  int n = nn - 1;
  double exshift = 0.0;
  double p = 0, q = 0, r = 0, s = 0, z = 0, w, x, y;
  int iter = 0;
  long total = 0;
  const long cap = 30L * nn;

  while (n >= 0) {
    // Deflation scan for a negligible subdiagonal entry.
    int l = n;
    while (l > 0) {
      s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
      if (s == 0.0) s = norm;
      if (std::abs(h(l, l - 1)) < kEps * s) break;
      --l;
    }

    if (l == n) {
      // One real root.
      h(n, n) += exshift;
      d[n] = h(n, n);
      e[n] = 0.0;
      --n;
      iter = 0;
    } else if (l == n - 1) {
      // A 2x2 block: two real roots or a conjugate pair.
      w = h(n, n - 1) * h(n - 1, n);
      p = (h(n - 1, n - 1) - h(n, n)) / 2.0;
      q = p * p + w;
      z = std::sqrt(std::abs(q));
      h(n, n) += exshift;
      h(n - 1, n - 1) += exshift;
      x = h(n, n);
      if (q >= 0) {
        z = (p >= 0) ? p + z : p - z;
        d[n - 1] = x + z;
        d[n] = d[n - 1];
        if (z != 0.0) d[n] = x - w / z;
        e[n - 1] = 0.0;
        e[n] = 0.0;
        // Rotate the block to upper triangular form.
        x = h(n, n - 1);
        s = std::abs(x) + std::abs(z);
        p = x / s;
        q = z / s;
        r = std::sqrt(p * p + q * q);
        p /= r;
        q /= r;
        for (int j = n - 1; j < nn; ++j) {
          z = h(n - 1, j);
          h(n - 1, j) = q * z + p * h(n, j);
          h(n, j) = q * h(n, j) - p * z;
        }
        for (int i = 0; i <= n; ++i) {
          z = h(i, n - 1);
          h(i, n - 1) = q * z + p * h(i, n);
          h(i, n) = q * h(i, n) - p * z;
        }
        if (v != nullptr) {
          for (int i = 0; i < nn; ++i) {
            z = (*v)(i, n - 1);
            (*v)(i, n - 1) = q * z + p * (*v)(i, n);
            (*v)(i, n) = q * (*v)(i, n) - p * z;
          }
        }
      } else {
        d[n - 1] = x + p;
        d[n] = x + p;
        e[n - 1] = z;
        e[n] = -z;
      }
      n -= 2;
      iter = 0;
    } else {
      // Form the double shift.
      x = h(n, n);
      y = 0.0;
      w = 0.0;
      if (l < n) {
        y = h(n - 1, n - 1);
        w = h(n, n - 1) * h(n - 1, n);
      }
      if (iter == 10) {
        // Exceptional shift (Wilkinson's ad hoc choice).
        exshift += x;
        for (int i = 0; i <= n; ++i) h(i, i) -= x;
        s = std::abs(h(n, n - 1)) + std::abs(h(n - 1, n - 2));
        x = y = 0.75 * s;
        w = -0.4375 * s * s;
      }
      if (iter == 30) {
        s = (y - x) / 2.0;
        s = s * s + w;
        if (s > 0) {
          s = std::sqrt(s);
          if (y < x) s = -s;
          s = x - w / ((y - x) / 2.0 + s);
          for (int i = 0; i <= n; ++i) h(i, i) -= s;
          exshift += s;
          x = y = w = 0.964;
        }
      }
      ++iter;
      if (++total > cap)
        throw std::runtime_error("hessenberg_eig: QR iteration did not converge");

      // Find two consecutive small subdiagonals.
      int m = n - 2;
      while (m >= l) {
        z = h(m, m);
        r = x - z;
        s = y - z;
        p = (r * s - w) / h(m + 1, m) + h(m, m + 1);
        q = h(m + 1, m + 1) - z - r - s;
        r = h(m + 2, m + 1);
        s = std::abs(p) + std::abs(q) + std::abs(r);
        p /= s;
        q /= s;
        r /= s;
        if (m == l) break;
        if (std::abs(h(m, m - 1)) * (std::abs(q) + std::abs(r)) <
            kEps * (std::abs(p) * (std::abs(h(m - 1, m - 1)) + std::abs(z) +
                                   std::abs(h(m + 1, m + 1)))))
          break;
        --m;
      }
      for (int i = m + 2; i <= n; ++i) {
        h(i, i - 2) = 0.0;
        if (i > m + 2) h(i, i - 3) = 0.0;
      }

      // Double QR step on rows l..n, columns m..n.
      for (int k = m; k <= n - 1; ++k) {
        const bool notlast = (k != n - 1);
        if (k != m) {
          p = h(k, k - 1);
          q = h(k + 1, k - 1);
          r = notlast ? h(k + 2, k - 1) : 0.0;
          x = std::abs(p) + std::abs(q) + std::abs(r);
          if (x != 0.0) {
            p /= x;
            q /= x;
            r /= x;
          }
        }
        if (x == 0.0) break;
        s = std::sqrt(p * p + q * q + r * r);
        if (p < 0) s = -s;
        if (s != 0.0) {
          if (k != m)
            h(k, k - 1) = -s * x;
          else if (l != m)
            h(k, k - 1) = -h(k, k - 1);
          p += s;
          x = p / s;
          y = q / s;
          z = r / s;
          q /= p;
          r /= p;

          for (int j = k; j < nn; ++j) {
            p = h(k, j) + q * h(k + 1, j);
            if (notlast) {
              p += r * h(k + 2, j);
              h(k + 2, j) -= p * z;
            }
            h(k, j) -= p * x;
            h(k + 1, j) -= p * y;
          }
          for (int i = 0; i <= std::min(n, k + 3); ++i) {
            p = x * h(i, k) + y * h(i, k + 1);
            if (notlast) {
              p += z * h(i, k + 2);
              h(i, k + 2) -= p * r;
            }
            h(i, k) -= p;
            h(i, k + 1) -= p * q;
          }
          if (v != nullptr) {
            for (int i = 0; i < nn; ++i) {
              p = x * (*v)(i, k) + y * (*v)(i, k + 1);
              if (notlast) {
                p += z * (*v)(i, k + 2);
                (*v)(i, k + 2) -= p * r;
              }
              (*v)(i, k) -= p;
              (*v)(i, k + 1) -= p * q;
            }
          }
        }
      }
    }
  }
}

// Back-substitution on the quasi-triangular output of francis_qr, writing the
// eigenvectors of the original Hessenberg matrix into the columns of v.
void quasi_triangular_vectors(Matrix& h, Matrix& v, const Vector& d, const Vector& e) {
  const int nn = static_cast<int>(h.rows());
  double norm = 0.0;
  for (int i = 0; i < nn; ++i)
    for (int j = std::max(i - 1, 0); j < nn; ++j) norm += std::abs(h(i, j));
  if (norm == 0.0) return;

  double p, q, r = 0, s = 0, z = 0, t, w, x, y;
  for (int n = nn - 1; n >= 0; --n) {
    p = d[n];
    q = e[n];
    if (q == 0.0) {
      // Real eigenvector.
      int l = n;
      h(n, n) = 1.0;
      for (int i = n - 1; i >= 0; --i) {
        w = h(i, i) - p;
        r = 0.0;
        for (int j = l; j <= n; ++j) r += h(i, j) * h(j, n);
        if (e[i] < 0.0) {
          z = w;
          s = r;
        } else {
          l = i;
          if (e[i] == 0.0) {
            h(i, n) = (w != 0.0) ? (-r / w) : (-r / (kEps * norm));
          } else {
            // Solve the 2x2 block row pair.
            x = h(i, i + 1);
            y = h(i + 1, i);
            q = (d[i] - p) * (d[i] - p) + e[i] * e[i];
            t = (x * s - z * r) / q;
            h(i, n) = t;
            h(i + 1, n) =
                (std::abs(x) > std::abs(z)) ? (-r - w * t) / x : (-s - y * t) / z;
          }
          t = std::abs(h(i, n));
          if ((kEps * t) * t > 1)
            for (int j = i; j <= n; ++j) h(j, n) /= t;
        }
      }
    } else if (q < 0.0) {
      // Complex pair: columns n-1 (real part) and n (imaginary part).
      int l = n - 1;
      if (std::abs(h(n, n - 1)) > std::abs(h(n - 1, n))) {
        h(n - 1, n - 1) = q / h(n, n - 1);
        h(n - 1, n) = -(h(n, n) - p) / h(n, n - 1);
      } else {
        cdiv(0.0, -h(n - 1, n), h(n - 1, n - 1) - p, q, h(n - 1, n - 1), h(n - 1, n));
      }
      h(n, n - 1) = 0.0;
      h(n, n) = 1.0;
      for (int i = n - 2; i >= 0; --i) {
        double ra = 0.0, sa = 0.0, vr, vi;
        for (int j = l; j <= n; ++j) {
          ra += h(i, j) * h(j, n - 1);
          sa += h(i, j) * h(j, n);
        }
        w = h(i, i) - p;
        if (e[i] < 0.0) {
          z = w;
          r = ra;
          s = sa;
        } else {
          l = i;
          if (e[i] == 0.0) {
            cdiv(-ra, -sa, w, q, h(i, n - 1), h(i, n));
          } else {
            x = h(i, i + 1);
            y = h(i + 1, i);
            vr = (d[i] - p) * (d[i] - p) + e[i] * e[i] - q * q;
            vi = (d[i] - p) * 2.0 * q;
            if (vr == 0.0 && vi == 0.0)
              vr = kEps * norm *
                   (std::abs(w) + std::abs(q) + std::abs(x) + std::abs(y) + std::abs(z));
            cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi, h(i, n - 1),
                 h(i, n));
            if (std::abs(x) > (std::abs(z) + std::abs(q))) {
              h(i + 1, n - 1) = (-ra - w * h(i, n - 1) + q * h(i, n)) / x;
              h(i + 1, n) = (-sa - w * h(i, n) - q * h(i, n - 1)) / x;
            } else {
              cdiv(-r - y * h(i, n - 1), -s - y * h(i, n), z, q, h(i + 1, n - 1),
                   h(i + 1, n));
            }
          }
          t = std::max(std::abs(h(i, n - 1)), std::abs(h(i, n)));
          if ((kEps * t) * t > 1)
            for (int j = i; j <= n; ++j) {
              h(j, n - 1) /= t;
              h(j, n) /= t;
            }
        }
      }
    }
  }

  // Back-transform: columns of v become eigenvector data of the input matrix.
  for (int j = nn - 1; j >= 0; --j) {
    for (int i = 0; i < nn; ++i) {
      z = 0.0;
      for (int k = 0; k <= j; ++k) z += v(i, k) * h(k, j);
      v(i, j) = z;
    }
  }
}

void check_hessenberg(const Matrix& h) {
  if (h.rows() != h.cols() || h.rows() == 0)
    throw std::invalid_argument("hessenberg input must be square and non-empty");
  for (Index j = 0; j + 2 < h.rows(); ++j)
    for (Index i = j + 2; i < h.rows(); ++i)
      if (h(i, j) != 0.0)
        throw std::invalid_argument("hessenberg input has nonzero below the subdiagonal");
}

// Unit 2-norm plus deterministic phase: first component with significant
// modulus is made real and positive.
void normalize_phase(ComplexVector& v) {
  const double nrm = v.norm();
  if (nrm == 0.0) return;
  v /= nrm;
  double maxabs = 0.0;
  for (Index i = 0; i < v.size(); ++i) maxabs = std::max(maxabs, std::abs(v[i]));
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-12 * maxabs) {
      const Complex phase = std::conj(v[i]) / std::abs(v[i]);
      v *= phase;
      v[i] = Complex(v[i].real(), 0.0);  // exact zero imaginary on the anchor
      return;
    }
  }
}

bool eig_order(const EigPair& a, const EigPair& b) {
  if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
  const double ia = std::abs(a.value.imag());
  const double ib = std::abs(b.value.imag());
  if (ia != ib) return ia > ib;  // keeps conjugate pairs adjacent
  return a.value.imag() > b.value.imag();
}

}  // namespace

std::vector<EigPair> hessenberg_eig(const Matrix& h_in) {
  check_hessenberg(h_in);
  const Index n = h_in.rows();
  Matrix h = h_in;
  Matrix v = Matrix::Identity(n, n);
  Vector d, e;
  francis_qr(h, &v, d, e);
  quasi_triangular_vectors(h, v, d, e);

  std::vector<EigPair> pairs;
  pairs.reserve(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    if (e[i] == 0.0) {
      EigPair p;
      p.value = Complex(d[i], 0.0);
      p.vector = v.col(i).cast<Complex>();
      normalize_phase(p.vector);
      pairs.push_back(std::move(p));
    } else if (e[i] > 0.0) {
      EigPair plus;
      plus.value = Complex(d[i], e[i]);
      plus.vector = ComplexVector(n);
      for (Index r = 0; r < n; ++r) plus.vector[r] = Complex(v(r, i), v(r, i + 1));
      normalize_phase(plus.vector);
      EigPair minus;
      minus.value = std::conj(plus.value);
      minus.vector = plus.vector.conjugate();
      pairs.push_back(std::move(plus));
      pairs.push_back(std::move(minus));
      ++i;  // skip the conjugate slot
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), eig_order);
  return pairs;
}

Matrix hessenberg_reduce(Matrix a) {
  const Index n = a.rows();
  if (n != a.cols()) throw std::invalid_argument("hessenberg_reduce: matrix not square");
  for (Index k = 0; k + 2 < n; ++k) {
    Vector x = a.block(k + 1, k, n - k - 1, 1);
    const double xnorm = x.norm();
    if (xnorm == 0.0) continue;
    Vector u = x;
    u[0] += (x[0] >= 0 ? xnorm : -xnorm);
    const double unorm = u.norm();
    if (unorm == 0.0) continue;
    u /= unorm;
    // Similarity with P = I - 2uuᵀ acting on the trailing block.
    a.block(k + 1, k, n - k - 1, n - k) -=
        2.0 * u * (u.transpose() * a.block(k + 1, k, n - k - 1, n - k));
    a.block(0, k + 1, n, n - k - 1) -=
        2.0 * (a.block(0, k + 1, n, n - k - 1) * u) * u.transpose();
    for (Index i = k + 2; i < n; ++i) a(i, k) = 0.0;
  }
  return a;
}

std::vector<Complex> dense_eigenvalues(Matrix a) {
  Matrix h = hessenberg_reduce(std::move(a));
  Vector d, e;
  francis_qr(h, nullptr, d, e);
  std::vector<Complex> vals;
  vals.reserve(static_cast<size_t>(d.size()));
  for (Index i = 0; i < d.size(); ++i) vals.emplace_back(d[i], e[i]);
  std::stable_sort(vals.begin(), vals.end(), [](const Complex& x, const Complex& y) {
    if (x.real() != y.real()) return x.real() > y.real();
    const double ix = std::abs(x.imag());
    const double iy = std::abs(y.imag());
    if (ix != iy) return ix > iy;
    return x.imag() > y.imag();
  });
  return vals;
}

namespace {

// One implicit single-shift QR step: chases the 2x1 bulge of H - σI with
// Givens rotations, accumulating them into q.
void single_shift_step(Matrix& h, Matrix& q, double sigma) {
  const Index n = h.rows();
  if (n < 2) return;
  double p = h(0, 0) - sigma;
  double w = h(1, 0);
  for (Index k = 0; k + 1 < n; ++k) {
    if (k > 0) {
      p = h(k, k - 1);
      w = h(k + 1, k - 1);
    }
    const double r = std::hypot(p, w);
    if (r == 0.0) continue;
    const double c = p / r;
    const double s = w / r;
    // Rows k, k+1 (left rotation).
    for (Index j = (k == 0 ? 0 : k - 1); j < n; ++j) {
      const double t1 = h(k, j);
      const double t2 = h(k + 1, j);
      h(k, j) = c * t1 + s * t2;
      h(k + 1, j) = -s * t1 + c * t2;
    }
    // Columns k, k+1 (right rotation), affecting rows up to the bulge.
    const Index imax = std::min(n - 1, k + 2);
    for (Index i = 0; i <= imax; ++i) {
      const double t1 = h(i, k);
      const double t2 = h(i, k + 1);
      h(i, k) = c * t1 + s * t2;
      h(i, k + 1) = -s * t1 + c * t2;
    }
    for (Index i = 0; i < q.rows(); ++i) {
      const double t1 = q(i, k);
      const double t2 = q(i, k + 1);
      q(i, k) = c * t1 + s * t2;
      q(i, k + 1) = -s * t1 + c * t2;
    }
  }
}

// One Francis double-shift bulge chase for the conjugate pair with sum s_sum
// and product s_prod, accumulating the transforms into q.
void double_shift_step(Matrix& h, Matrix& q, double s_sum, double s_prod) {
  const Index nn = h.rows();
  if (nn < 2) return;
  const Index n = nn - 1;
  double p = h(0, 0) * h(0, 0) + h(0, 1) * h(1, 0) - s_sum * h(0, 0) + s_prod;
  double qq = h(1, 0) * (h(0, 0) + h(1, 1) - s_sum);
  double r = (nn >= 3) ? h(1, 0) * h(2, 1) : 0.0;
  double x = std::abs(p) + std::abs(qq) + std::abs(r);
  if (x == 0.0) return;
  p /= x;
  qq /= x;
  r /= x;

  for (Index k = 0; k <= n - 1; ++k) {
    const bool notlast = (k != n - 1);
    if (k != 0) {
      p = h(k, k - 1);
      qq = h(k + 1, k - 1);
      r = notlast ? h(k + 2, k - 1) : 0.0;
      x = std::abs(p) + std::abs(qq) + std::abs(r);
      if (x != 0.0) {
        p /= x;
        qq /= x;
        r /= x;
      }
    }
    if (x == 0.0) break;
    double s = std::sqrt(p * p + qq * qq + r * r);
    if (p < 0) s = -s;
    if (s == 0.0) continue;
    if (k != 0) h(k, k - 1) = -s * x;
    p += s;
    x = p / s;
    const double y = qq / s;
    const double z = r / s;
    qq /= p;
    r /= p;

    for (Index j = k; j < nn; ++j) {
      double t = h(k, j) + qq * h(k + 1, j);
      if (notlast) {
        t += r * h(k + 2, j);
        h(k + 2, j) -= t * z;
      }
      h(k, j) -= t * x;
      h(k + 1, j) -= t * y;
    }
    const Index imax = std::min(n, k + 3);
    for (Index i = 0; i <= imax; ++i) {
      double t = x * h(i, k) + y * h(i, k + 1);
      if (notlast) {
        t += z * h(i, k + 2);
        h(i, k + 2) -= t * r;
      }
      h(i, k) -= t;
      h(i, k + 1) -= t * qq;
    }
    for (Index i = 0; i < q.rows(); ++i) {
      double t = x * q(i, k) + y * q(i, k + 1);
      if (notlast) {
        t += z * q(i, k + 2);
        q(i, k + 2) -= t * r;
      }
      q(i, k) -= t;
      q(i, k + 1) -= t * qq;
    }
  }
}

void clear_subsubdiagonal(Matrix& h) {
  for (Index j = 0; j + 2 < h.rows(); ++j)
    for (Index i = j + 2; i < h.rows(); ++i) h(i, j) = 0.0;
}

}  // namespace

void shifted_qr_sweep(Matrix& h, Matrix& q_accum, const std::vector<Complex>& shifts) {
  check_hessenberg(h);
  if (q_accum.rows() != h.rows() || q_accum.cols() != h.cols())
    throw std::invalid_argument("shifted_qr_sweep: accumulator dimension mismatch");

  size_t i = 0;
  while (i < shifts.size()) {
    const Complex sigma = shifts[i];
    if (sigma.imag() == 0.0) {
      single_shift_step(h, q_accum, sigma.real());
      clear_subsubdiagonal(h);
      ++i;
    } else {
      if (i + 1 >= shifts.size() || shifts[i + 1] != std::conj(sigma))
        throw std::invalid_argument("shifted_qr_sweep: complex shift without its conjugate");
      const double s_sum = 2.0 * sigma.real();
      const double s_prod = std::norm(sigma);
      double_shift_step(h, q_accum, s_sum, s_prod);
      clear_subsubdiagonal(h);
      i += 2;
    }
  }
}

namespace {

// One-sided Jacobi: rotates columns of a (m×n, m ≥ n) until mutually
// orthogonal; v accumulates the rotations, column norms are singular values.
void jacobi_orthogonalize(Matrix& a, Matrix& v) {
  const Index n = a.cols();
  v = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double alpha = a.col(p).squaredNorm();
        const double beta = a.col(q).squaredNorm();
        const double gamma = a.col(p).dot(a.col(q));
        if (std::abs(gamma) <= kEps * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Index r = 0; r < a.rows(); ++r) {
          const double t1 = a(r, p);
          const double t2 = a(r, q);
          a(r, p) = c * t1 - s * t2;
          a(r, q) = s * t1 + c * t2;
        }
        for (Index r = 0; r < n; ++r) {
          const double t1 = v(r, p);
          const double t2 = v(r, q);
          v(r, p) = c * t1 - s * t2;
          v(r, q) = s * t1 + c * t2;
        }
      }
    }
    if (!rotated) return;
  }
}

}  // namespace

SingularTriplet smallest_singular_triplet(const Matrix& h_ext, Complex mu) {
  const Index rows = h_ext.rows();
  const Index k = h_ext.cols();
  if (rows != k + 1) throw std::invalid_argument("smallest_singular_triplet: expected (k+1)×k input");

  SingularTriplet out;
  if (mu.imag() == 0.0) {
    Matrix c = h_ext;
    for (Index j = 0; j < k; ++j) c(j, j) -= mu.real();
    Matrix v;
    jacobi_orthogonalize(c, v);
    Index jmin = 0;
    double smin = c.col(0).norm();
    for (Index j = 1; j < k; ++j) {
      const double sj = c.col(j).norm();
      if (sj < smin) {
        smin = sj;
        jmin = j;
      }
    }
    out.sigma = smin;
    out.real = true;
    out.right = v.col(jmin).cast<Complex>();
    normalize_phase(out.right);
    return out;
  }

  // Complex shift: real 2× doubling [[Re C, -Im C], [Im C, Re C]]. Every
  // singular value of C appears twice; any unit vector (a; b) in the smallest
  // pair maps to the complex right singular vector a + i·b up to phase.
  Matrix cr = h_ext;
  for (Index j = 0; j < k; ++j) cr(j, j) -= mu.real();
  Matrix ci = Matrix::Zero(rows, k);
  for (Index j = 0; j < k; ++j) ci(j, j) = -mu.imag();
  Matrix d(2 * rows, 2 * k);
  d.topLeftCorner(rows, k) = cr;
  d.topRightCorner(rows, k) = -ci;
  d.bottomLeftCorner(rows, k) = ci;
  d.bottomRightCorner(rows, k) = cr;
  Matrix v;
  jacobi_orthogonalize(d, v);
  Index jmin = 0;
  double smin = d.col(0).norm();
  for (Index j = 1; j < 2 * k; ++j) {
    const double sj = d.col(j).norm();
    if (sj < smin) {
      smin = sj;
      jmin = j;
    }
  }
  out.sigma = smin;
  out.real = false;
  out.right = ComplexVector(k);
  for (Index r = 0; r < k; ++r) out.right[r] = Complex(v(r, jmin), v(k + r, jmin));
  const double nrm = out.right.norm();
  if (nrm > 0.0) out.right /= nrm;
  normalize_phase(out.right);
  return out;
}

}  // namespace trs
