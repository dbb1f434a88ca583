#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "hq/error.hpp"
#include "hq/oracle.hpp"

using namespace hq;
using std::numbers::pi;

TEST(FdOracle, MatchesHandDerivativesInTwoDimensions) {
  // F(a, b) = ab / (a + b): dF/da = b^2/(a+b)^2, d2F/da2 = -2 b^2/(a+b)^3, d2F/dadb = 2ab/(a+b)^3.
  const double a = 2.0, b = 0.5, s = a + b;
  const std::vector<double> lam{a, b};
  const oracle::FdDerivatives d = oracle::fd_derivative_oracle(lam);
  EXPECT_NEAR(d.first[0], b * b / (s * s), 1e-8);
  EXPECT_NEAR(d.first[1], a * a / (s * s), 1e-8);
  EXPECT_NEAR(d.second(0, 0), -2 * b * b / (s * s * s), 1e-5);
  EXPECT_NEAR(d.second(1, 1), -2 * a * a / (s * s * s), 1e-5);
  EXPECT_NEAR(d.second(0, 1), 2 * a * b / (s * s * s), 1e-5);
}

TEST(FdOracle, RejectsNonpositive) {
  const std::vector<double> lam{1.0, 0.0};
  EXPECT_THROW(oracle::fd_derivative_oracle(lam), AdmissibilityError);
}

TEST(Conformal, GaussCurvatureClosedForm) {
  // psi = e cos x cos y has Laplacian -2 psi.
  const double e = 0.2;
  for (double x : {0.0, 0.7, 2.9}) {
    for (double y : {0.3, 1.9}) {
      const double psi = e * std::cos(x) * std::cos(y);
      EXPECT_NEAR(oracle::conformal_psi(e, x, y), psi, 1e-15);
      EXPECT_NEAR(oracle::conformal_psi_laplacian(e, x, y), -2 * psi, 1e-14);
      EXPECT_NEAR(oracle::conformal_gauss_curvature(e, x, y), 2 * psi * std::exp(-2 * psi), 1e-14);
      const Vec2 gr = oracle::conformal_psi_gradient(e, x, y);
      EXPECT_NEAR(gr[0], -e * std::sin(x) * std::cos(y), 1e-15);
      EXPECT_NEAR(gr[1], -e * std::cos(x) * std::sin(y), 1e-15);
    }
  }
}

TEST(Manufactured, FlatDataAndNormalization) {
  const Grid g(32);
  const oracle::ManufacturedProblem mp = oracle::make_manufactured(g, {oracle::Family::isotropic, 0.2, 0.1});
  EXPECT_NEAR(integrate(mp.u_star, mp.g), 0.0, 1e-12);
  EXPECT_NEAR(mp.margin, 0.8, 1e-3);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double l1 = 1 - 0.2 * std::cos(g.x(g.row(k))), l2 = 1 - 0.1 * std::cos(g.y(g.col(k)));
    EXPECT_NEAR(mp.psi[k], std::log(l1 * l2 / (l1 + l2)), 1e-13);
  }
}

TEST(Manufactured, RejectsSmallMargin) {
  EXPECT_THROW(oracle::make_manufactured(Grid(16), {oracle::Family::isotropic, 0.95, 0.0}), ArgumentError);
}

TEST(Manufactured, DiscreteResidualIsSecondOrder) {
  for (const oracle::ManufacturedParams params :
       {oracle::ManufacturedParams{}, oracle::ManufacturedParams{oracle::Family::anisotropic, 0.75, 0.15, 0.1},
        oracle::ManufacturedParams{oracle::Family::isotropic, 0.1, 0.1, 0.05, 0.1}}) {
    double r[2];
    int m = 0;
    for (int n : {32, 64}) {
      const oracle::ManufacturedProblem mp = oracle::make_manufactured(Grid(n), params);
      r[m++] = residual(mp.u_star, 1.0, mp.problem()).sup_norm();
    }
    EXPECT_GT(r[0] / r[1], 3.5);
    EXPECT_LT(r[0] / r[1], 4.5);
  }
}

TEST(Manufactured, AnalyticHessianMatchesDiscrete) {
  const oracle::ManufacturedProblem mp =
      oracle::make_manufactured(Grid(128), {oracle::Family::anisotropic, 0.5, 0.1, 0.1, 0.1});
  const ProblemSpec p = mp.problem();
  const Sym2Field h = covariant_hessian(mp.u_star, p.g, p.conn);
  double err = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const Sym2 d = h[k] - mp.hessian_star[k];
    err = std::max({err, std::abs(d.xx), std::abs(d.xy), std::abs(d.yy)});
  }
  EXPECT_LT(err, 2e-3);
}

TEST(IdentitySweep, AllRowsPassAndAreReproducible) {
  const auto rows = oracle::identity_sweep(7, 2000);
  // 4 checks x 4 dimensions, plus k-concavity for (n,k) in {(2,1),(3,1),(3,2),(4,1),(4,2),(4,3)}.
  ASSERT_EQ(rows.size(), 22u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.pass) << r.check << " n=" << r.n << " k=" << r.k << " rel=" << r.max_rel;
    if (r.check == "k_concavity") {
      EXPECT_GT(r.empirical_eps0, 0.0);
      EXPECT_EQ(r.samples, 200);
    } else {
      EXPECT_TRUE(std::isnan(r.empirical_eps0));
      EXPECT_EQ(r.samples, 2000);
    }
  }
  std::ostringstream a, b;
  oracle::write_sweep_csv(a, rows);
  oracle::write_sweep_csv(b, oracle::identity_sweep(7, 2000));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')),
            "check,n,k,samples,max_abs_lhs_minus_rhs,max_rel,tolerance,pass,empirical_eps0");
}

TEST(IdentitySweep, RejectsNoSamples) { EXPECT_THROW(oracle::identity_sweep(1, 0), ArgumentError); }
