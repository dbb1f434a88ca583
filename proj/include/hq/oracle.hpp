#pragma once

#include <cstdint>
#include <limits>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hq/kernel.hpp"
#include "hq/solver.hpp"

// Independent reference computations used to check closed forms and the solver.

namespace hq::oracle {

struct FdDerivatives {
  std::vector<double> first;  ///< dF / dlambda_i
  SymMatrix second;           ///< d^2 F / dlambda_i dlambda_j
};

/// Central differences of F = 1 / sigma_1(1/lambda): relative step 1e-5 for
/// first derivatives, 1e-4 for second derivatives.
FdDerivatives fd_derivative_oracle(std::span<const double> lambda);

/// Both families add c cos x cos y, which rotates the eigenframe of the Hessian.
enum class Family {
  isotropic,    ///< u* = a cos x + b cos y
  anisotropic,  ///< u* = a cos x + b cos 2y
};

struct ManufacturedParams {
  Family family = Family::isotropic;
  double a = 0.1;
  double b = 0.1;
  double c = 0.0;
  /// Conformal metric g = exp(2 psi) delta with psi = metric_amplitude cos x cos y; 0 is flat.
  double metric_amplitude = 0.0;
};

/// Exact continuum solution u* (normalized to zero integral) and the data
/// making it solve log F(chi + Hess u*) = int u* + Psi at t = 1, with chi = g.
struct ManufacturedProblem {
  ManufacturedParams params;
  ScalarField u_star;
  Sym2Field g;
  Sym2Field chi;
  ScalarField psi;
  Sym2Field hessian_star;  ///< analytic covariant Hessian of u*
  double margin = 0.0;     ///< min lambda_2(g^{-1}(chi + Hess u*))

  ProblemSpec problem() const { return make_problem(g, chi, psi); }
};

/// Throws ArgumentError when the admissibility margin would fall below 0.1.
ManufacturedProblem make_manufactured(const Grid& grid, const ManufacturedParams& params);

/// Conformal factor psi and its gradient for the metric family above.
double conformal_psi(double amplitude, double x, double y);
Vec2 conformal_psi_gradient(double amplitude, double x, double y);
double conformal_psi_laplacian(double amplitude, double x, double y);

/// Gauss curvature of exp(2 psi) delta: -exp(-2 psi) Laplacian(psi).
double conformal_gauss_curvature(double amplitude, double x, double y);

Sym2Field conformal_metric(const Grid& grid, double amplitude);

/// One line of the randomized identity sweep.
struct SweepRow {
  std::string check;
  int n = 0;
  int k = 0;  ///< denominator order for the sigma_n / sigma_k rows, 0 otherwise
  int samples = 0;
  double max_abs = 0.0;  ///< max |lhs - rhs| (or max violation for inequalities)
  double max_rel = 0.0;  ///< the scaled quantity compared against tolerance
  double tolerance = 0.0;
  bool pass = false;
  double empirical_eps0 = std::numeric_limits<double>::quiet_NaN();  ///< k-concavity rows: largest eps0 valid for every draw
};

/// Seeded sweep over random eigenvalue vectors: concavity identity and
/// derivative oracles for n = 2..5 (samples draws each), trace and ordering
/// bounds, and the sigma_n / sigma_k inequality for n = 2..4 (samples / 10 draws).
std::vector<SweepRow> identity_sweep(std::uint64_t seed, int samples);

/// Header "check,n,k,samples,max_abs_lhs_minus_rhs,max_rel,tolerance,pass,empirical_eps0".
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace hq::oracle
