// Seeded randomized properties that hold for every input in their domain.
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "hq/geometry.hpp"
#include "hq/kernel.hpp"
#include "hq/monitor.hpp"
#include "hq/oracle.hpp"
#include "hq/solver.hpp"
#include "hq/trig.hpp"

using namespace hq;

namespace {

std::vector<double> random_lambda(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> d(0.05, 20.0);
  std::vector<double> l(n);
  for (double& x : l) x = d(rng);
  return l;
}

Sym2 random_spd(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const double a = d(rng), b = d(rng), c = d(rng);
  // L L^T + 0.1 I with L lower triangular.
  return Sym2{a * a + 0.1, a * b, b * b + c * c + 0.1};
}

ScalarField random_trig(std::mt19937_64& rng, const Grid& g, double scale) {
  std::uniform_real_distribution<double> amp(-scale, scale);
  std::uniform_int_distribution<int> freq(0, 3), fn(0, 1);
  std::vector<TrigTerm> terms;
  for (int t = 0; t < 3; ++t) {
    terms.push_back({amp(rng), fn(rng) ? TrigTerm::Fn::sin : TrigTerm::Fn::cos, freq(rng),
                     fn(rng) ? TrigTerm::Fn::sin : TrigTerm::Fn::cos, freq(rng)});
  }
  return TrigSeries(terms).sample(g);
}

}  // namespace

TEST(KernelProperty, QuotientTimesReciprocalSumIsOne) {
  std::mt19937_64 rng(101);
  for (int s = 0; s < 2000; ++s) {
    const int n = 2 + s % 4;
    const auto l = random_lambda(rng, n);
    std::vector<double> inv(n);
    for (int i = 0; i < n; ++i) inv[i] = 1.0 / l[i];
    EXPECT_NEAR(sigma_quotient(l, n, n - 1) * sigma(inv, 1), 1.0, 1e-12);
  }
}

TEST(KernelProperty, DegreeOneHomogeneity) {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int s = 0; s < 1000; ++s) {
    const int n = 2 + s % 4;
    auto l = random_lambda(rng, n);
    const double F = derivatives(l).F, t = scale(rng);
    for (double& x : l) x *= t;
    EXPECT_NEAR(derivatives(l).F, t * F, 1e-13 * t * F);
  }
}

TEST(KernelProperty, OrderedDerivativeBounds) {
  std::mt19937_64 rng(103);
  for (int s = 0; s < 2000; ++s) {
    const int n = 2 + s % 4;
    auto l = random_lambda(rng, n);
    std::sort(l.begin(), l.end(), std::greater<>());
    const KernelDerivatives d = derivatives(l);
    EXPECT_GT(d.F, 0.0);
    for (int i = 0; i + 1 < n; ++i) EXPECT_LE(d.Fi[i], d.Fi[i + 1] + 1e-12);
    EXPECT_GE(d.trace(), 1.0 / n - 1e-12);
    EXPECT_LE(d.trace(), 1.0 + 1e-12);
    EXPECT_GE(d.Fi[n - 1], d.trace() / n - 1e-12);
    EXPECT_LE(d.Fi[0], d.trace() / n + 1e-12);
  }
}

TEST(KernelProperty, EigenDecomposeReconstructs) {
  std::mt19937_64 rng(104);
  for (int s = 0; s < 2000; ++s) {
    const Sym2 g = random_spd(rng), gt = random_spd(rng);
    const EigenPair2D e = eigen_decompose(g, gt);
    EXPECT_GE(e.lambda1, e.lambda2);
    const Vec2 ge1 = g.apply(e.e1), ge2 = g.apply(e.e2);
    const Sym2 rec = e.lambda1 * outer(ge1) + e.lambda2 * outer(ge2);
    const double scale = std::abs(gt.xx) + std::abs(gt.xy) + std::abs(gt.yy);
    EXPECT_NEAR(rec.xx, gt.xx, 1e-10 * scale);
    EXPECT_NEAR(rec.xy, gt.xy, 1e-10 * scale);
    EXPECT_NEAR(rec.yy, gt.yy, 1e-10 * scale);
    EXPECT_NEAR(g.quad(e.e1), 1.0, 1e-10);
    EXPECT_NEAR(g.quad(e.e2), 1.0, 1e-10);
    EXPECT_NEAR(g.bilinear(e.e1, e.e2), 0.0, 1e-10);
  }
}

TEST(KernelProperty, ConcavityIdentityIsExact) {
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int s = 0; s < 2000; ++s) {
    const int n = 2 + s % 4;
    const auto l = random_lambda(rng, n);
    std::vector<double> xi(n);
    for (double& x : xi) x = unit(rng);
    const IdentitySides sides = concavity_identity(l, xi);
    EXPECT_LE(std::abs(sides.lhs - sides.rhs), 1e-10 * (1 + std::abs(sides.lhs)));
  }
}

TEST(GeometryProperty, IntegrateIsLinear) {
  std::mt19937_64 rng(106);
  const Grid grid(16);
  const Sym2Field g = oracle::conformal_metric(grid, 0.2);
  for (int s = 0; s < 20; ++s) {
    const ScalarField a = random_trig(rng, grid, 1.0), b = random_trig(rng, grid, 1.0);
    EXPECT_NEAR(integrate(2.5 * a + b, g), 2.5 * integrate(a, g) + integrate(b, g), 1e-12);
  }
  double root_det = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) root_det += std::sqrt(g[k].det());
  EXPECT_EQ(integrate(ScalarField(grid, 1.0), g), grid.spacing() * grid.spacing() * root_det);
}

TEST(GeometryProperty, ConstantMetricHasZeroConnection) {
  std::mt19937_64 rng(107);
  const Grid grid(8);
  for (int s = 0; s < 10; ++s) {
    const ConnectionField c = connection_from_metric(Sym2Field(grid, random_spd(rng)));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      for (double v : c.symbols(k)) EXPECT_EQ(v, 0.0);
      EXPECT_EQ(c.r1212(k), 0.0);
    }
  }
}

TEST(GeometryProperty, FlatCovariantHessianIsPlainDifferences) {
  std::mt19937_64 rng(108);
  const Grid grid(16);
  const Sym2Field g(grid, Sym2::identity());
  const ConnectionField c = connection_from_metric(g);
  for (int s = 0; s < 10; ++s) {
    const ScalarField u = random_trig(rng, grid, 1.0);
    const Sym2Field h = covariant_hessian(u, g, c);
    for (int i = 0; i < grid.n(); ++i) {
      for (int j = 0; j < grid.n(); ++j) {
        const Sym2& v = h(i, j);
        EXPECT_EQ(v.xx, stencil::d2(grid, u.values(), i, j, 0));
        EXPECT_EQ(v.xy, stencil::dxy(grid, u.values(), i, j));
        EXPECT_EQ(v.yy, stencil::d2(grid, u.values(), i, j, 1));
      }
    }
  }
}

TEST(GeometryProperty, ChristoffelSymbolsAreSymmetric) {
  const Grid grid(16);
  const ConnectionField c = connection_from_metric(oracle::conformal_metric(grid, 0.3));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (int a = 0; a < 2; ++a) EXPECT_EQ(c.gamma(k, a, 0, 1), c.gamma(k, a, 1, 0));
  }
}

TEST(GridProperty, FieldFileRoundTrip) {
  std::mt19937_64 rng(109);
  const Grid grid(16, 3.5);
  const ScalarField u = random_trig(rng, grid, 10.0);
  std::stringstream s;
  write_field(s, u);
  const ScalarField v = read_field(s);
  ASSERT_EQ(v.grid(), grid);
  for (std::size_t k = 0; k < u.size(); ++k) EXPECT_EQ(v[k], u[k]);
}

TEST(SolverProperty, TraceInvariantsOnRandomData) {
  std::mt19937_64 rng(110);
  const Grid grid(16);
  const Sym2Field id(grid, Sym2::identity());
  for (int s = 0; s < 4; ++s) {
    const ProblemSpec p = make_problem(id, id, random_trig(rng, grid, 0.3));
    const ContinuationResult r = continuation_solve(p);
    ASSERT_TRUE(r.success) << r.failure;
    double last = -1.0;
    for (const TraceRow& row : r.trace) {
      EXPECT_GT(row.t, last);
      last = row.t;
      EXPECT_LE(row.residual_sup, p.tol.newton_residual_sup);
      EXPECT_GT(row.adm_margin, p.tol.admissibility_floor);
    }
    EXPECT_EQ(r.trace.back().t, 1.0);

    // A priori estimates on every converged output.
    const GeometryConstants consts = geometry_constants(p.chi, p.g);
    EXPECT_TRUE(check_c0(r.u, p, consts).pass);
    EXPECT_TRUE(check_c1(r.u, p, consts).pass);
    EXPECT_TRUE(integral_bound_check(r.u, p).pass);

    const TestQuantities tq = test_quantities(r.u, p, {});
    for (std::size_t k = 0; k < tq.W.size(); ++k) EXPECT_GE(tq.Qtilde[k], tq.W[k]);
  }
}
