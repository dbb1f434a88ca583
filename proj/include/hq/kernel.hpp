#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hq/grid.hpp"
#include "hq/sym2.hpp"

// Eigenvalue-space algebra of the positive Hessian quotient sigma_n / sigma_{n-1}.

namespace hq {

/// Ordered eigenpairs of the pencil (gtilde, g): gtilde e = lambda g e.
///
/// lambda1 >= lambda2, e1/e2 are g-orthonormal and each has its first
/// nonzero component positive.
struct EigenPair2D {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Vec2 e1{1.0, 0.0};
  Vec2 e2{0.0, 1.0};

  double gap() const { return lambda1 - lambda2; }
};

/// Elementary symmetric polynomial sigma_k, with sigma_0 = 1.
double sigma(std::span<const double> lambda, int k);

/// sigma_k(lambda) / sigma_l(lambda) for 0 <= l < k <= n on the positive cone.
double sigma_quotient(std::span<const double> lambda, int k, int l);

/// Closed-form solution of det(gtilde - lambda g) = 0 for SPD g.
EigenPair2D eigen_decompose(const Sym2& g, const Sym2& gtilde);

/// F = sigma_n / sigma_{n-1} = 1 / sigma_1(1/lambda) and its derivatives.
class KernelDerivatives {
 public:
  double F = 0.0;
  std::vector<double> Fi;      ///< F^{ii} = F^2 / lambda_i^2
  std::vector<double> lambda;
  std::vector<double> kappa;   ///< 1 / lambda_i

  std::size_t n() const { return lambda.size(); }

  /// F^{ii,jj} = 2 F^3 / (lambda_i^2 lambda_j^2) - 2 delta_ij F^2 / lambda_i^3.
  double second(std::size_t i, std::size_t j) const;

  /// (F^{ii} - F^{jj}) / (lambda_i - lambda_j) = -F^2 (lambda_i + lambda_j) / (lambda_i^2 lambda_j^2),
  /// valid through lambda_i = lambda_j.
  double divided_difference(std::size_t i, std::size_t j) const;

  double trace() const;  ///< sum_i F^{ii}
};

/// Throws AdmissibilityError on a nonpositive eigenvalue.
KernelDerivatives derivatives(std::span<const double> lambda);

/// Convenience overload for a single 2-D eigenpair.
KernelDerivatives derivatives(const EigenPair2D& pair);

struct IdentitySides {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Both sides of the fine concavity identity for sigma_n / sigma_{n-1}:
///   lhs = -F^{ii,jj} xi_i xi_j
///   rhs = 2 F^{ii} xi_i^2 / lambda_i - 2 (F^{ii} xi_i)^2 / F
IdentitySides concavity_identity(std::span<const double> lambda, std::span<const double> xi);

/// Dense symmetric n x n matrix, row-major.
struct SymMatrix {
  int n = 0;
  std::vector<double> a;

  explicit SymMatrix(int size = 0) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
  void set(int i, int j, double v) {
    a[static_cast<std::size_t>(i) * n + j] = v;
    a[static_cast<std::size_t>(j) * n + i] = v;
  }
};

/// Pieces of the sigma_n / sigma_k concavity inequality at a diagonal point.
///
/// lhs is -F^{ab,cd} xi_ab xi_cd. The lower bound is
///   (1 + eps0) lead + (1 + delta0) mixed + rest
/// where lead = F^{11} xi_11^2 / lambda_1, mixed = sum_{i>=2} F^{ii} xi_i1^2 / lambda_1
/// and rest collects the remaining terms (including the negative square).
struct KConcavityTerms {
  double lhs = 0.0;
  double lead = 0.0;
  double mixed = 0.0;
  double rest = 0.0;

  double gap(double eps0, double delta0) const {
    return lhs - ((1.0 + eps0) * lead + (1.0 + delta0) * mixed + rest);
  }
};

/// First derivatives of sigma_n / sigma_k, closed form.
std::vector<double> quotient_gradient(std::span<const double> lambda, int k);

/// Second derivatives of sigma_n / sigma_k by central differences of the
/// closed-form gradient, relative step 1e-5.
SymMatrix quotient_hessian_fd(std::span<const double> lambda, int k);

/// lambda must be decreasing and positive, 1 <= k <= n - 1, xi symmetric.
KConcavityTerms k_concavity_terms(std::span<const double> lambda, const SymMatrix& xi, int k);

/// gap(eps0, delta0) of the sigma_n / sigma_k concavity inequality.
double k_concavity_gap(std::span<const double> lambda, const SymMatrix& xi, int k, double eps0,
                       double delta0);

/// min over nodes of lambda_2(g^{-1} gtilde); positive iff gtilde is admissible.
double admissibility_margin(const Sym2Field& g, const Sym2Field& gtilde);

}  // namespace hq
