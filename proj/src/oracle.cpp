#include "hq/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include "hq/error.hpp"

namespace hq::oracle {

namespace {

double quotient(std::span<const double> lambda) {
  double s = 0.0;
  for (double l : lambda) s += 1.0 / l;
  return 1.0 / s;
}

}  // namespace

FdDerivatives fd_derivative_oracle(std::span<const double> lambda) {
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] > 0.0)) throw AdmissibilityError("fd_derivative_oracle: nonpositive eigenvalue", i);
  }
  const int n = static_cast<int>(lambda.size());
  FdDerivatives out{std::vector<double>(lambda.size()), SymMatrix(n)};
  std::vector<double> x(lambda.begin(), lambda.end());
  const double f0 = quotient(x);

  for (int i = 0; i < n; ++i) {
    const double h = 1e-5 * lambda[i];
    x[i] = lambda[i] + h;
    const double fp = quotient(x);
    x[i] = lambda[i] - h;
    const double fm = quotient(x);
    x[i] = lambda[i];
    out.first[i] = (fp - fm) / (2.0 * h);
  }

  for (int i = 0; i < n; ++i) {
    const double hi = 1e-4 * lambda[i];
    x[i] = lambda[i] + hi;
    const double fp = quotient(x);
    x[i] = lambda[i] - hi;
    const double fm = quotient(x);
    x[i] = lambda[i];
    out.second.set(i, i, (fp - 2.0 * f0 + fm) / (hi * hi));
    for (int j = i + 1; j < n; ++j) {
      const double hj = 1e-4 * lambda[j];
      double corner[4];
      int c = 0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          x[i] = lambda[i] + si * hi;
          x[j] = lambda[j] + sj * hj;
          corner[c++] = quotient(x);
        }
      }
      x[i] = lambda[i];
      x[j] = lambda[j];
      out.second.set(i, j, (corner[0] - corner[1] - corner[2] + corner[3]) / (4.0 * hi * hj));
    }
  }
  return out;
}

double conformal_psi(double amplitude, double x, double y) { return amplitude * std::cos(x) * std::cos(y); }

Vec2 conformal_psi_gradient(double amplitude, double x, double y) {
  return {-amplitude * std::sin(x) * std::cos(y), -amplitude * std::cos(x) * std::sin(y)};
}

double conformal_psi_laplacian(double amplitude, double x, double y) {
  return -2.0 * amplitude * std::cos(x) * std::cos(y);
}

double conformal_gauss_curvature(double amplitude, double x, double y) {
  return -std::exp(-2.0 * conformal_psi(amplitude, x, y)) * conformal_psi_laplacian(amplitude, x, y);
}

Sym2Field conformal_metric(const Grid& grid, double amplitude) {
  return Sym2Field::sample(grid, [amplitude](double x, double y) {
    const double s = std::exp(2.0 * conformal_psi(amplitude, x, y));
    return Sym2{s, 0.0, s};
  });
}

ManufacturedProblem make_manufactured(const Grid& grid, const ManufacturedParams& params) {
  const double a = params.a, b = params.b, c = params.c, eps = params.metric_amplitude;
  const int ky = params.family == Family::isotropic ? 1 : 2;

  const ScalarField raw = ScalarField::sample(
      grid, [&](double x, double y) { return a * std::cos(x) + b * std::cos(ky * y) + c * std::cos(x) * std::cos(y); });
  const Sym2Field g = conformal_metric(grid, eps);
  const Sym2Field chi = g;

  // Covariant Hessian with the conformal Christoffels
  // Gamma^k_ij = delta^k_i psi_j + delta^k_j psi_i - delta_ij psi_k.
  const Sym2Field hess = Sym2Field::sample(grid, [&](double x, double y) {
    const double sx = std::sin(x), cx = std::cos(x), sy = std::sin(y), cy = std::cos(y);
    const double ux = -a * sx - c * sx * cy;
    const double uy = -b * ky * std::sin(ky * y) - c * cx * sy;
    const double uxx = -a * cx - c * cx * cy;
    const double uxy = c * sx * sy;
    const double uyy = -b * ky * ky * std::cos(ky * y) - c * cx * cy;
    const Vec2 p = conformal_psi_gradient(eps, x, y);
    return Sym2{uxx - p[0] * ux + p[1] * uy, uxy - p[1] * ux - p[0] * uy, uyy + p[0] * ux - p[1] * uy};
  });

  double margin = std::numeric_limits<double>::infinity();
  std::vector<double> logf(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const EigenPair2D e = eigen_decompose(g[k], chi[k] + hess[k]);
    margin = std::min(margin, e.lambda2);
    if (e.lambda2 > 0.0) logf[k] = std::log(e.lambda1 * e.lambda2 / (e.lambda1 + e.lambda2));
  }
  if (!(margin >= 0.1)) {
    throw ArgumentError("make_manufactured: admissibility margin " + std::to_string(margin) +
                        " below 0.1 for a=" + std::to_string(a) + " b=" + std::to_string(b));
  }

  double vol = 0.0;
  for (double w : volume_weights(g)) vol += w;
  const ScalarField u_star = raw + (-integrate(raw, g) / vol);

  return ManufacturedProblem{params, u_star, g, chi, ScalarField(grid, std::move(logf)), hess, margin};
}

// ---------------------------------------------------------------------------

std::vector<SweepRow> identity_sweep(std::uint64_t seed, int samples) {
  if (samples < 1) throw ArgumentError("identity_sweep: samples must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> eig(0.05, 20.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<SweepRow> rows;

  for (int n = 2; n <= 5; ++n) {
    SweepRow ident{"concavity_identity", n, 0, samples, 0.0, 0.0, 1e-10};
    SweepRow first{"first_derivative_fd", n, 0, samples, 0.0, 0.0, 1e-6};
    SweepRow second{"second_derivative_fd", n, 0, samples, 0.0, 0.0, 1e-4};
    SweepRow bounds{"trace_and_ordering", n, 0, samples, 0.0, 0.0, 1e-12};
    std::vector<double> lambda(n), xi(n);
    for (int s = 0; s < samples; ++s) {
      for (int i = 0; i < n; ++i) lambda[i] = eig(rng);
      for (int i = 0; i < n; ++i) xi[i] = unit(rng);

      const IdentitySides sides = concavity_identity(lambda, xi);
      const double diff = std::abs(sides.lhs - sides.rhs);
      ident.max_abs = std::max(ident.max_abs, diff);
      ident.max_rel = std::max(ident.max_rel, diff / (1.0 + std::abs(sides.lhs)));

      const KernelDerivatives d = derivatives(lambda);
      const FdDerivatives fd = fd_derivative_oracle(lambda);
      for (int i = 0; i < n; ++i) {
        const double e = std::abs(d.Fi[i] - fd.first[i]);
        first.max_abs = std::max(first.max_abs, e);
        first.max_rel = std::max(first.max_rel, e / std::abs(d.Fi[i]));
        for (int j = 0; j < n; ++j) {
          const double closed = d.second(i, j);
          const double e2 = std::abs(closed - fd.second(i, j));
          second.max_abs = std::max(second.max_abs, e2);
          second.max_rel = std::max(second.max_rel, e2 * lambda[i] * lambda[j] / d.F);
        }
      }

      std::vector<double> sorted = lambda;
      std::sort(sorted.begin(), sorted.end(), std::greater<>());
      const KernelDerivatives ds = derivatives(sorted);
      const double tr = ds.trace();
      double violation = std::max({0.0, 1.0 / n - tr, tr - 1.0});
      for (int i = 1; i < n; ++i) violation = std::max(violation, ds.Fi[i - 1] - ds.Fi[i]);
      bounds.max_abs = std::max(bounds.max_abs, violation);
    }
    bounds.max_rel = bounds.max_abs;
    for (SweepRow* r : {&ident, &first, &second, &bounds}) {
      r->pass = r->max_rel <= r->tolerance;
      rows.push_back(*r);
    }
  }

  const int k_samples = std::max(1, samples / 10);
  for (int n = 2; n <= 4; ++n) {
    for (int k = 1; k <= n - 1; ++k) {
      SweepRow row{"k_concavity", n, k, k_samples, 0.0, 0.0, 1e-8};
      row.empirical_eps0 = std::numeric_limits<double>::infinity();
      std::vector<double> lambda(n);
      for (int s = 0; s < k_samples; ++s) {
        for (int i = 0; i < n; ++i) lambda[i] = eig(rng);
        std::sort(lambda.begin(), lambda.end(), std::greater<>());
        SymMatrix xi(n);
        for (int i = 0; i < n; ++i) {
          for (int j = i; j < n; ++j) xi.set(i, j, unit(rng));
        }
        const KConcavityTerms t = k_concavity_terms(lambda, xi, k);
        const double gap = t.gap(0.0, 0.0);
        row.max_abs = std::max(row.max_abs, -gap);
        if (t.lead > 0.0) row.empirical_eps0 = std::min(row.empirical_eps0, gap / t.lead);
      }
      row.max_rel = row.max_abs;
      row.pass = row.max_abs <= row.tolerance;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "check,n,k,samples,max_abs_lhs_minus_rhs,max_rel,tolerance,pass,empirical_eps0\n";
  char buf[512];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%.17g,%.17g,%.17g,%d,%.17g\n", r.check.c_str(), r.n, r.k, r.samples,
                  r.max_abs, r.max_rel, r.tolerance, r.pass ? 1 : 0, r.empirical_eps0);
    out << buf;
  }
}

}  // namespace hq::oracle
