#pragma once

#include <Eigen/SparseCore>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hq/geometry.hpp"
#include "hq/grid.hpp"
#include "hq/kernel.hpp"
#include "hq/report.hpp"

// Continuity-method solver for log F(chi + Hess u) = int u vol_g + t Psi.

namespace hq {

enum class RhsMode { integral_form, fixed_rhs_up_to_constant };

enum class Preconditioner { jacobi, ilut };

struct Tolerances {
  double newton_residual_sup = 1e-10;
  double linear_rel = 1e-10;
  double admissibility_floor = 1e-8;

  /// Throws ConfigError naming the "tolerances.*" key at fault.
  void validate() const;
};

struct HomotopySchedule {
  double dt_init = 0.1;
  double dt_min = 1e-4;
  double dt_max = 0.5;
  int max_newton = 30;

  void validate() const;
};

struct KrylovOptions {
  int restart = 50;
  int max_iterations = 10000;
  Preconditioner preconditioner = Preconditioner::ilut;

  void validate() const;
};

/// Equation data. Build with make_problem so the connection and quadrature
/// weights are consistent with g.
struct ProblemSpec {
  Sym2Field g;
  Sym2Field chi;
  ScalarField psi;
  ConnectionField conn;
  std::vector<double> weights;  ///< h^2 sqrt(det g)
  double volume = 0.0;
  RhsMode rhs_mode = RhsMode::integral_form;
  std::optional<ScalarField> f;
  Tolerances tol;
  HomotopySchedule homotopy;
  KrylovOptions krylov;

  const Grid& grid() const { return g.grid(); }
  /// Throws DimensionError, GeometryError or ConfigError on violated invariants.
  void validate() const;
};

ProblemSpec make_problem(const Sym2Field& g, const Sym2Field& chi, const ScalarField& psi);

/// chi + Hess u.
Sym2Field perturbed_metric(const ScalarField& u, const ProblemSpec& spec);

/// min over nodes of lambda_2(g^{-1}(chi + Hess u)).
double admissibility_margin(const ScalarField& u, const ProblemSpec& spec);

/// Replaces chi by chi + Hess v and psi by psi + int v so that chi becomes positive definite.
/// A solution w of the reduced problem gives u = v + w for the original one.
std::pair<Sym2Field, ScalarField> reduce_to_positive_chi(const Sym2Field& chi, const ScalarField& v,
                                                         const ScalarField& psi, const Sym2Field& g);

/// F(lambda(g^{-1} chi)) per node.
ScalarField background_quotient(const ProblemSpec& spec);

/// G(u) = log F(chi + Hess u) - int u vol_g - t Psi. Throws AdmissibilityError
/// if the margin is not above spec.tol.admissibility_floor.
ScalarField residual(const ScalarField& u, double t, const ProblemSpec& spec);

struct KrylovResult {
  ScalarField solution;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Linearization of the residual map at u:
///   du -> (1/F) a^{rs} (Hess du)_rs - int du vol_g,
/// with a = sum_i F^{ii} e_i e_i^T in the g-orthonormal eigenframe.
class LinearizedOperator {
 public:
  LinearizedOperator(const ScalarField& u, const ProblemSpec& spec);

  const Grid& grid() const { return grid_; }
  /// Contravariant principal coefficient (1/F) a^{rs} at a node.
  const Sym2& principal(std::size_t node) const { return principal_[node]; }

  ScalarField apply(const ScalarField& du) const;

  /// Sparse local part (principal and first-order terms, no integral term).
  Eigen::SparseMatrix<double, Eigen::RowMajor> local_matrix() const;

  /// Solves L du = rhs through the bordered system
  ///   [A  -1] [du]   [rhs]
  ///   [w^T -1] [s ] = [ 0 ]
  /// with preconditioned restarted GMRES.
  KrylovResult solve(const ScalarField& rhs, double rel_tol, const KrylovOptions& options) const;

 private:
  Grid grid_;
  std::vector<Sym2> principal_;
  std::vector<Vec2> drift_;
  std::vector<double> weights_;
};

LinearizedOperator linearize(const ScalarField& u, const ProblemSpec& spec);

struct NewtonResult {
  ScalarField u;
  int iterations = 0;
  double residual_sup = 0.0;
  bool converged = false;
  std::vector<double> margins;  ///< admissibility margin of every accepted iterate
  std::string failure;
};

/// Damped Newton at fixed t with sup-norm backtracking.
NewtonResult newton_solve_at_t(const ScalarField& u0, double t, const ProblemSpec& spec);

struct TraceRow {
  double t = 0.0;
  int newton_iters = 0;
  double residual_sup = 0.0;
  double adm_margin = 0.0;
  double lambda1_max = 0.0;
  double osc_u = 0.0;
  double grad_sup = 0.0;
  double integral_u = 0.0;
};

using ContinuationTrace = std::vector<TraceRow>;

struct ContinuationResult {
  ScalarField u;
  ContinuationTrace trace;
  bool success = false;
  double last_good_t = 0.0;
  std::string failure;
};

/// Constant c with log F(chi) = c * Vol when F(chi) is constant; otherwise the
/// best constant start c = mean(log F(chi)) / Vol.
double constant_start(const ProblemSpec& spec);

/// Runs t from 0 to 1. start_perturbation, when given, is added to the t = 0 guess.
ContinuationResult continuation_solve(const ProblemSpec& spec,
                                      const std::optional<ScalarField>& start_perturbation = std::nullopt);

struct FixedRhsResult {
  ScalarField u;
  double c = 0.0;  ///< F(u) = c f
  ContinuationResult run;
};

/// Solves F(u) = c f by setting Psi = log f.
FixedRhsResult solve_up_to_constant(const ScalarField& f, const ProblemSpec& spec);

/// log min F0 - max Psi <= int u <= log max F0 - min Psi, F0 = F(chi).
EstimateReport integral_bound_check(const ScalarField& u, const ProblemSpec& spec, double t = 1.0);

/// Monitor values recorded in the trace.
TraceRow trace_row(const ScalarField& u, double t, int iters, double residual_sup, const ProblemSpec& spec);

/// CSV with header "t,newton_iters,residual_sup,adm_margin,lambda1_max,osc_u,grad_sup,integral_u".
void write_trace_csv(std::ostream& out, const ContinuationTrace& trace);

}  // namespace hq
