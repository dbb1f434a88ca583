#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "hq/error.hpp"
#include "hq/kernel.hpp"

using namespace hq;

TEST(SigmaQuotient, Examples) {
  EXPECT_DOUBLE_EQ(sigma_quotient(std::vector<double>{1, 1}, 2, 1), 0.5);
  EXPECT_NEAR(sigma_quotient(std::vector<double>{2, 1}, 2, 1), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(1.0 / (0.5 + 1.0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(sigma_quotient(std::vector<double>{3, 2, 1}, 3, 2), 6.0 / 11.0, 1e-15);
  EXPECT_DOUBLE_EQ(sigma(std::vector<double>{3, 2, 1}, 0), 1.0);
  EXPECT_DOUBLE_EQ(sigma(std::vector<double>{3, 2, 1}, 2), 11.0);
}

TEST(SigmaQuotient, Errors) {
  EXPECT_THROW(sigma_quotient(std::vector<double>{1, 1}, 1, 1), ArgumentError);
  EXPECT_THROW(sigma_quotient(std::vector<double>{1, 1}, 3, 1), ArgumentError);
  EXPECT_THROW(sigma_quotient(std::vector<double>{1, -1}, 2, 1), AdmissibilityError);
}

TEST(EigenDecompose, Diagonal) {
  const EigenPair2D e = eigen_decompose(Sym2::identity(), Sym2{2, 0, 1});
  EXPECT_DOUBLE_EQ(e.lambda1, 2.0);
  EXPECT_DOUBLE_EQ(e.lambda2, 1.0);
  EXPECT_DOUBLE_EQ(e.e1[0], 1.0);
  EXPECT_DOUBLE_EQ(e.e1[1], 0.0);
}

TEST(EigenDecompose, OffDiagonal) {
  const EigenPair2D e = eigen_decompose(Sym2::identity(), Sym2{1, 0.5, 1});
  EXPECT_NEAR(e.lambda1, 1.5, 1e-15);
  EXPECT_NEAR(e.lambda2, 0.5, 1e-15);
  EXPECT_NEAR(e.e1[0], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(e.e1[1], 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(EigenDecompose, PencilScaling) {
  const EigenPair2D e = eigen_decompose(Sym2{2, 0, 2}, Sym2{2, 0, 2});
  EXPECT_DOUBLE_EQ(e.lambda1, 1.0);
  EXPECT_DOUBLE_EQ(e.lambda2, 1.0);
  EXPECT_NEAR(Sym2({2, 0, 2}).quad(e.e1), 1.0, 1e-15);
}

TEST(EigenDecompose, SignConvention) {
  const EigenPair2D e = eigen_decompose(Sym2::identity(), Sym2{1, -0.5, 1});
  EXPECT_GT(e.e1[0], 0.0);
  const EigenPair2D f = eigen_decompose(Sym2::identity(), Sym2{1, 0, 2});
  EXPECT_NEAR(f.e1[0], 0.0, 1e-15);
  EXPECT_GT(f.e1[1], 0.0);
}

TEST(Derivatives, Examples) {
  const KernelDerivatives d = derivatives(std::vector<double>{2, 1});
  EXPECT_NEAR(d.F, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(d.Fi[0], 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(d.Fi[1], 4.0 / 9.0, 1e-15);
  EXPECT_NEAR(d.trace(), 5.0 / 9.0, 1e-15);
  EXPECT_NEAR(d.second(0, 0), -2.0 / 27.0, 1e-15);
  EXPECT_NEAR(d.second(1, 1), -8.0 / 27.0, 1e-15);
  EXPECT_NEAR(d.second(0, 1), 4.0 / 27.0, 1e-15);

  const KernelDerivatives s = derivatives(std::vector<double>{1, 1});
  EXPECT_DOUBLE_EQ(s.F, 0.5);
  EXPECT_DOUBLE_EQ(s.Fi[0], 0.25);
  EXPECT_DOUBLE_EQ(s.Fi[1], 0.25);
}

TEST(Derivatives, DividedDifferenceClosedForm) {
  const std::vector<double> lambda{3.0, 1.5, 0.7};
  const KernelDerivatives d = derivatives(lambda);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i == j) continue;
      EXPECT_NEAR(d.divided_difference(i, j), (d.Fi[i] - d.Fi[j]) / (lambda[i] - lambda[j]), 1e-14);
    }
  }
  // At equal eigenvalues the rational form is the limit F^{ii,ii} - F^{ii,jj}.
  const KernelDerivatives e = derivatives(std::vector<double>{1.0, 1.0});
  EXPECT_NEAR(e.divided_difference(0, 1), e.second(0, 0) - e.second(0, 1), 1e-15);
  EXPECT_NEAR(e.divided_difference(0, 1), -0.5, 1e-15);
}

TEST(Derivatives, RejectsNonPositive) {
  EXPECT_THROW(derivatives(std::vector<double>{1.0, 0.0}), AdmissibilityError);
}

TEST(ConcavityIdentity, HandExamples) {
  const IdentitySides a = concavity_identity(std::vector<double>{2, 1}, std::vector<double>{1, 0});
  EXPECT_NEAR(a.lhs, 2.0 / 27.0, 1e-15);
  EXPECT_NEAR(a.rhs, 2.0 / 27.0, 1e-15);
  const IdentitySides b = concavity_identity(std::vector<double>{2, 1}, std::vector<double>{1, 1});
  EXPECT_NEAR(b.lhs, 2.0 / 27.0, 1e-15);
  EXPECT_NEAR(b.rhs, 2.0 / 27.0, 1e-15);
  const IdentitySides z = concavity_identity(std::vector<double>{5, 2, 1}, std::vector<double>{0, 0, 0});
  EXPECT_EQ(z.lhs, 0.0);
  EXPECT_EQ(z.rhs, 0.0);
}

TEST(KConcavity, ZeroDirectionGivesZeroGap) {
  SymMatrix xi(3);
  EXPECT_EQ(k_concavity_gap(std::vector<double>{4, 2, 1}, xi, 1, 0.0, 0.0), 0.0);
}

TEST(KConcavity, DiagonalTwoByTwoMatchesIdentityPath) {
  // n = 2, k = 1: F = sigma_2 / sigma_1, so the diagonal part of the
  // left side is the concavity identity's left side.
  const std::vector<double> lambda{2.0, 1.0};
  SymMatrix xi(2);
  xi.set(0, 0, 0.7);
  xi.set(1, 1, -0.4);
  const KConcavityTerms t = k_concavity_terms(lambda, xi, 1);
  const IdentitySides s = concavity_identity(lambda, std::vector<double>{0.7, -0.4});
  EXPECT_NEAR(t.lhs, s.lhs, 1e-8);
  const KernelDerivatives d = derivatives(lambda);
  const double lead = d.Fi[0] * 0.49 / 2.0;
  const double rest = 0.5 * d.Fi[1] * 0.16 - std::pow(d.Fi[0] * 0.7 - d.Fi[1] * 0.4, 2) / d.F;
  EXPECT_NEAR(t.lead, lead, 1e-14);
  EXPECT_NEAR(t.rest, rest, 1e-14);
  EXPECT_NEAR(t.gap(0.0, 0.0), s.lhs - lead - rest, 1e-8);
}

TEST(KConcavity, GapDecreasesInEpsilonAndDelta) {
  const std::vector<double> lambda{5.0, 2.0, 0.5};
  SymMatrix xi(3);
  xi.set(0, 0, 0.3);
  xi.set(0, 1, 0.8);
  xi.set(1, 2, -0.5);
  xi.set(2, 2, 0.2);
  const double g0 = k_concavity_gap(lambda, xi, 1, 0.0, 0.0);
  EXPECT_GE(g0, -1e-10);
  EXPECT_LE(k_concavity_gap(lambda, xi, 1, 0.5, 0.0), g0);
  EXPECT_LE(k_concavity_gap(lambda, xi, 1, 0.0, 0.5), g0);
}

TEST(KConcavity, Errors) {
  SymMatrix xi(2);
  EXPECT_THROW(k_concavity_gap(std::vector<double>{1, 2}, xi, 1, 0, 0), ArgumentError);
  EXPECT_THROW(k_concavity_gap(std::vector<double>{2, 1}, xi, 2, 0, 0), ArgumentError);
  EXPECT_THROW(k_concavity_gap(std::vector<double>{2, 1}, SymMatrix(3), 1, 0, 0), DimensionError);
}

TEST(QuotientGradient, MatchesFiniteDifference) {
  const std::vector<double> lambda{4.0, 2.5, 1.0, 0.3};
  for (int k = 1; k <= 3; ++k) {
    const std::vector<double> f = quotient_gradient(lambda, k);
    for (int i = 0; i < 4; ++i) {
      std::vector<double> p = lambda, m = lambda;
      const double h = 1e-6 * lambda[i];
      p[i] += h;
      m[i] -= h;
      const double fd = (sigma_quotient(p, 4, k) - sigma_quotient(m, 4, k)) / (2 * h);
      EXPECT_NEAR(f[i], fd, 1e-7 * std::abs(fd) + 1e-10);
    }
  }
}

TEST(AdmissibilityMargin, Examples) {
  const Grid g(16);
  const Sym2Field id(g, Sym2::identity());
  EXPECT_DOUBLE_EQ(admissibility_margin(id, id), 1.0);
  std::vector<Sym2> v(g.size(), Sym2::identity());
  v[40] = Sym2{1.0, 0.0, -0.1};
  EXPECT_LE(admissibility_margin(id, Sym2Field(g, v)), -0.1);
  const Sym2Field gt = Sym2Field::sample(g, [](double x, double) { return Sym2{1.0 - 0.1 * std::cos(x), 0.0, 1.0}; });
  EXPECT_NEAR(admissibility_margin(id, gt), 0.9, 1e-10);
}
