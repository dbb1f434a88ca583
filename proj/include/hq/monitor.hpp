#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "hq/geometry.hpp"
#include "hq/grid.hpp"
#include "hq/report.hpp"
#include "hq/solver.hpp"

// Numerical checks of the a priori estimates and of the eigenvector-field
// calculus behind the second-order estimate.

namespace hq {

struct MonitorConfig {
  double phi_slope = 1.0;            ///< A in phi(s) = A s
  double gap_floor = 0.1;            ///< minimum (lambda_1 - lambda_2) / lambda_1 for V-field work
  double large_lambda_factor = 2.0;  ///< structural test nodes: lambda_1 >= factor * median(lambda_1) ...
  double dominance_ratio = 3.0;      ///< ... or lambda_1 >= ratio * lambda_2; also the extremal gate
  double derivative_bound_constant = 10.0;  ///< C in the four derivative bounds at the extremum
  double commutation_constant = 2.0;        ///< K in the commutation bound K h^2

  void validate() const;
};

/// osc(u) <= c_upper diam^2 / 2. Throws AdmissibilityError if chi + Hess u is not positive definite.
EstimateReport check_c0(const ScalarField& u, const ProblemSpec& spec, const GeometryConstants& consts);

/// max |du|_g^2 <= (c_upper diam)^2. Same hypothesis as check_c0.
EstimateReport check_c1(const ScalarField& u, const ProblemSpec& spec, const GeometryConstants& consts);

/// Third covariant derivatives: max |u_ijk - u_kij + R^l_kji u_l| against K h^2.
/// Derivatives are iterated centered first differences so that on a flat
/// metric the two sides use the same (commuting) stencils.
EstimateReport check_commutation(const ScalarField& u, const Sym2Field& g, const ConnectionField& conn,
                                 double stencil_constant = MonitorConfig{}.commutation_constant);

struct TestQuantities {
  ScalarField W;       ///< log lambda_1
  ScalarField Qtilde;  ///< log lambda_1 + A (u_V)^2 / 2 on gapped nodes, W elsewhere
  std::size_t argmax = 0;
  std::size_t masked = 0;
};

TestQuantities test_quantities(const ScalarField& u, const ProblemSpec& spec, const MonitorConfig& cfg);

struct EigvecFieldReport {
  std::vector<Vec2> V;      ///< unit lambda_1 eigenvector per node (zero where masked)
  std::vector<bool> tested;
  std::size_t masked = 0;
  double first_error = 0.0;       ///< V^2_i: formula vs difference, relative to max |V^2_i|
  double tangential_first = 0.0;  ///< max |V^1_i| from differences (should vanish)
  double second_error = 0.0;      ///< V^2_ii and V^1_ii: formula vs difference, relative
  double norm_defect = 0.0;       ///< max |g(V, V) - 1|
  double first_scale = 0.0;
  double second_scale = 0.0;
  /// Per-node absolute formula-vs-difference errors (0 on untested nodes).
  std::vector<double> node_first_error;
  std::vector<double> node_second_error;
};

/// Flat metric only; throws UnsupportedConfiguration otherwise.
EigvecFieldReport eigvec_field_checks(const ScalarField& u, const ProblemSpec& spec, const MonitorConfig& cfg);

struct StructuralReport {
  bool applicable = false;
  double empirical_C = 0.0;
  std::size_t tested = 0;
  std::size_t location = 0;
  /// F^{11} (g~_{11,1})^2 / lambda_1^2 - L_F(log lambda_1) on tested nodes, 0 elsewhere.
  std::vector<double> deficit;
  std::vector<bool> tested_mask;
};

/// Flat metric only.
StructuralReport structural_report(const ScalarField& u, const ProblemSpec& spec, const MonitorConfig& cfg);

struct ExtremalReport {
  bool vacuous = false;
  /// Some neighbour is ungapped, so Qtilde jumps there and the node is not a smooth maximum.
  bool at_mask_boundary = false;
  std::size_t node = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::array<double, 2> residual{};        ///< Q_i at the node from the frame formulas
  std::array<double, 2> merged{};          ///< g~_{11,1}, g~_{11,2} from the merged linear system
  std::array<double, 2> differenced{};     ///< the same quantities by direct differences
  std::array<double, 2> merged_error{};    ///< |merged - differenced|
  std::array<double, 4> scaled{};          ///< |g~_11,1|/(A l1^2), |g~_11,2|/(A l1), |g~_22,1|/A, |g~_22,2|
  std::array<EstimateReport, 4> bounds{};
};

/// node must be a local maximum of Qtilde; throws ArgumentError otherwise.
ExtremalReport extremal_system_residual(const ScalarField& u, std::size_t node, const ProblemSpec& spec,
                                        const MonitorConfig& cfg);

}  // namespace hq
