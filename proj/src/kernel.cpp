#include "hq/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hq/error.hpp"

namespace hq {

namespace {

void require_positive(std::span<const double> lambda, const char* what) {
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] > 0.0)) {
      throw AdmissibilityError(std::string(what) + ": eigenvalue " + std::to_string(lambda[i]) +
                                   " is not positive",
                               i);
    }
  }
}

// sigma_m of lambda with the entries listed in `skip` removed.
double sigma_without(std::span<const double> lambda, int m, std::size_t skip_a,
                     std::size_t skip_b = std::numeric_limits<std::size_t>::max()) {
  if (m < 0) return 0.0;
  std::vector<double> e(static_cast<std::size_t>(m) + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (i == skip_a || i == skip_b) continue;
    for (int j = m; j >= 1; --j) e[j] += lambda[i] * e[j - 1];
  }
  return e[m];
}

// Unit eigenvector for the larger eigenvalue of a symmetric 2x2 matrix and its rotation.
void symmetric_eigen(const Sym2& m, double& l1, double& l2, Vec2& y1, Vec2& y2) {
  const double mean = 0.5 * (m.xx + m.yy);
  const double half_diff = 0.5 * (m.xx - m.yy);
  const double r = std::hypot(half_diff, m.xy);
  const double det = m.det();
  if (mean > 0.0) {
    l1 = mean + r;
    l2 = det / l1;
  } else if (mean < 0.0) {
    l2 = mean - r;
    l1 = det / l2;
  } else {
    l1 = r;
    l2 = -r;
  }
  const double theta = 0.5 * std::atan2(m.xy, half_diff);
  y1 = {std::cos(theta), std::sin(theta)};
  y2 = {-std::sin(theta), std::cos(theta)};
}

Vec2 sign_normalized(Vec2 v) {
  const double scale = std::max(std::abs(v[0]), std::abs(v[1]));
  const double lead = std::abs(v[0]) > 1e-14 * scale ? v[0] : v[1];
  if (lead < 0.0) v = {-v[0], -v[1]};
  return v;
}

}  // namespace

double sigma(std::span<const double> lambda, int k) {
  if (k < 0 || k > static_cast<int>(lambda.size())) {
    throw ArgumentError("sigma: order " + std::to_string(k) + " out of range");
  }
  return sigma_without(lambda, k, std::numeric_limits<std::size_t>::max());
}

double sigma_quotient(std::span<const double> lambda, int k, int l) {
  const int n = static_cast<int>(lambda.size());
  if (!(0 <= l && l < k && k <= n)) {
    throw ArgumentError("sigma_quotient: need 0 <= l < k <= n, got k=" + std::to_string(k) +
                        " l=" + std::to_string(l) + " n=" + std::to_string(n));
  }
  require_positive(lambda, "sigma_quotient");
  return sigma(lambda, k) / sigma(lambda, l);
}

EigenPair2D eigen_decompose(const Sym2& g, const Sym2& gtilde) {
  // g = L L^T; the pencil reduces to the symmetric matrix L^{-1} gtilde L^{-T}.
  const double l11 = std::sqrt(g.xx);
  const double l21 = g.xy / l11;
  const double l22 = std::sqrt(g.yy - l21 * l21);
  // L^{-1} = [[1/l11, 0], [-l21/(l11 l22), 1/l22]]
  const double i11 = 1.0 / l11;
  const double i21 = -l21 / (l11 * l22);
  const double i22 = 1.0 / l22;
  // M = L^{-1} gtilde L^{-T}
  const double a = i11 * gtilde.xx;
  const double b = i11 * gtilde.xy;
  const double c = i21 * gtilde.xx + i22 * gtilde.xy;
  const double d = i21 * gtilde.xy + i22 * gtilde.yy;
  const Sym2 m{a * i11, 0.5 * ((a * i21 + b * i22) + c * i11), c * i21 + d * i22};

  EigenPair2D out;
  Vec2 y1, y2;
  symmetric_eigen(m, out.lambda1, out.lambda2, y1, y2);
  // e = L^{-T} y
  auto back = [&](const Vec2& y) -> Vec2 { return {i11 * y[0] + i21 * y[1], i22 * y[1]}; };
  out.e1 = sign_normalized(back(y1));
  out.e2 = sign_normalized(back(y2));
  return out;
}

// ---------------------------------------------------------------------------

double KernelDerivatives::second(std::size_t i, std::size_t j) const {
  const double k2 = kappa[i] * kappa[i] * kappa[j] * kappa[j];
  double v = 2.0 * F * F * F * k2;
  if (i == j) v -= 2.0 * F * F * kappa[i] * kappa[i] * kappa[i];
  return v;
}

double KernelDerivatives::divided_difference(std::size_t i, std::size_t j) const {
  return -F * F * (lambda[i] + lambda[j]) * kappa[i] * kappa[i] * kappa[j] * kappa[j];
}

double KernelDerivatives::trace() const {
  double s = 0.0;
  for (double v : Fi) s += v;
  return s;
}

KernelDerivatives derivatives(std::span<const double> lambda) {
  require_positive(lambda, "derivatives");
  KernelDerivatives d;
  d.lambda.assign(lambda.begin(), lambda.end());
  d.kappa.resize(lambda.size());
  double s = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    d.kappa[i] = 1.0 / lambda[i];
    s += d.kappa[i];
  }
  d.F = 1.0 / s;
  d.Fi.resize(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) d.Fi[i] = d.F * d.F * d.kappa[i] * d.kappa[i];
  return d;
}

KernelDerivatives derivatives(const EigenPair2D& pair) {
  const double lambda[2] = {pair.lambda1, pair.lambda2};
  return derivatives(lambda);
}

IdentitySides concavity_identity(std::span<const double> lambda, std::span<const double> xi) {
  if (xi.size() != lambda.size()) throw DimensionError("concavity_identity: xi and lambda differ in length");
  const KernelDerivatives d = derivatives(lambda);
  const std::size_t n = d.n();
  IdentitySides out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.lhs -= d.second(i, j) * xi[i] * xi[j];
  }
  double weighted = 0.0;
  double linear = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weighted += d.Fi[i] * xi[i] * xi[i] * d.kappa[i];
    linear += d.Fi[i] * xi[i];
  }
  out.rhs = 2.0 * weighted - 2.0 * linear * linear / d.F;
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> quotient_gradient(std::span<const double> lambda, int k) {
  const int n = static_cast<int>(lambda.size());
  if (!(1 <= k && k <= n - 1)) throw ArgumentError("quotient_gradient: need 1 <= k <= n-1");
  require_positive(lambda, "quotient_gradient");
  const double sn = sigma(lambda, n);
  const double sk = sigma(lambda, k);
  std::vector<double> grad(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double dn = sigma_without(lambda, n - 1, i);
    const double dk = sigma_without(lambda, k - 1, i);
    grad[i] = (dn * sk - sn * dk) / (sk * sk);
  }
  return grad;
}

SymMatrix quotient_hessian_fd(std::span<const double> lambda, int k) {
  const int n = static_cast<int>(lambda.size());
  SymMatrix h(n);
  std::vector<double> shifted(lambda.begin(), lambda.end());
  std::vector<std::vector<double>> columns(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double step = 1e-5 * lambda[j];
    shifted[j] = lambda[j] + step;
    const auto plus = quotient_gradient(shifted, k);
    shifted[j] = lambda[j] - step;
    const auto minus = quotient_gradient(shifted, k);
    shifted[j] = lambda[j];
    auto& col = columns[j];
    col.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) col[i] = (plus[i] - minus[i]) / (2.0 * step);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) h.set(i, j, 0.5 * (columns[j][i] + columns[i][j]));
  }
  return h;
}

KConcavityTerms k_concavity_terms(std::span<const double> lambda, const SymMatrix& xi, int k) {
  const int n = static_cast<int>(lambda.size());
  if (xi.n != n) throw DimensionError("k_concavity: xi must be n x n");
  if (!(1 <= k && k <= n - 1)) throw ArgumentError("k_concavity: need 1 <= k <= n-1");
  require_positive(lambda, "k_concavity");
  for (int i = 1; i < n; ++i) {
    if (lambda[i] > lambda[i - 1]) throw ArgumentError("k_concavity: eigenvalues must be decreasing");
  }

  const double F = sigma(lambda, n) / sigma(lambda, k);
  const std::vector<double> f = quotient_gradient(lambda, k);
  const SymMatrix fij = quotient_hessian_fd(lambda, k);
  const bool closed_form = (k == n - 1);

  auto off_diagonal = [&](int i, int j) {
    if (closed_form) {
      const double li = lambda[i], lj = lambda[j];
      return -F * F * (li + lj) / (li * li * lj * lj);
    }
    if (std::abs(lambda[i] - lambda[j]) < 1e-8 * lambda[0]) return fij(i, i) - fij(i, j);
    return (f[i] - f[j]) / (lambda[i] - lambda[j]);
  };

  KConcavityTerms t;
  double second = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        for (int m = 0; m < n; ++m) second += fij(i, m) * xi(i, i) * xi(m, m);
      } else {
        second += off_diagonal(i, j) * xi(i, j) * xi(i, j);
      }
    }
  }
  t.lhs = -second;

  t.lead = f[0] * xi(0, 0) * xi(0, 0) / lambda[0];
  double linear = f[0] * xi(0, 0);
  for (int i = 1; i < n; ++i) {
    t.rest += 0.5 * f[i] * xi(i, i) * xi(i, i) / lambda[i];
    t.mixed += f[i] * xi(i, 0) * xi(i, 0) / lambda[0];
    linear += f[i] * xi(i, i);
    for (int j = 1; j < n; ++j) {
      if (i != j) t.rest += f[i] * xi(i, j) * xi(i, j) / lambda[j];
    }
  }
  t.rest -= linear * linear / F;
  return t;
}

double k_concavity_gap(std::span<const double> lambda, const SymMatrix& xi, int k, double eps0,
                       double delta0) {
  return k_concavity_terms(lambda, xi, k).gap(eps0, delta0);
}

double admissibility_margin(const Sym2Field& g, const Sym2Field& gtilde) {
  require_same_grid(g.grid(), gtilde.grid(), "admissibility_margin");
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.size(); ++k) {
    margin = std::min(margin, eigen_decompose(g[k], gtilde[k]).lambda2);
  }
  return margin;
}

}  // namespace hq
