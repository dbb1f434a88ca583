#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "hq/monitor.hpp"
#include "hq/oracle.hpp"
#include "hq/solver.hpp"

// Sectioned key/value run configuration.
//
//   [run]          command, seed, samples, output_dir
//   [grid]         n, length
//   [metric]       family = flat | conformal, amplitude
//   [chi]          alpha, beta, v0          (chi = alpha g + beta Hess v0)
//   [psi]          terms | file             (right-hand side Psi)
//   [rhs]          log_f | file             (solve-fixed-rhs: f = exp(log_f))
//   [manufactured] family = isotropic | anisotropic, a, b, c
//   [tolerances]   newton_residual_sup, linear_rel, admissibility_floor
//   [homotopy]     dt_init, dt_min, dt_max, max_newton
//   [krylov]       restart, max_iterations, preconditioner = ilut | jacobi
//   [monitor]      phi_slope, gap_floor, large_lambda_factor, dominance_ratio,
//                  derivative_bound_constant, commutation_constant
//   [output]       trace, solution, monitor, identities
//
// Trig series use the TrigSeries text form. Unknown sections or keys are rejected.

namespace hq {

enum class Command { solve, solve_fixed_rhs, verify_estimates, check_identities, monitor };

std::string to_string(Command c);

struct RunConfig {
  Command command = Command::solve;
  std::uint64_t seed = 7;
  int samples = 10000;
  std::string output_dir = ".";

  int n = 64;
  double length = 0.0;  ///< 0 means 2 pi

  bool conformal = false;
  double metric_amplitude = 0.1;

  double chi_alpha = 1.0;
  double chi_beta = 0.0;
  std::string chi_v0;

  std::string psi_terms;
  std::string psi_file;
  std::string log_f_terms;
  std::string f_file;

  std::optional<oracle::ManufacturedParams> manufactured;

  Tolerances tol;
  HomotopySchedule homotopy;
  KrylovOptions krylov;
  MonitorConfig monitor;

  std::string trace_file = "trace.csv";
  std::string solution_file = "solution.txt";
  std::string monitor_file = "monitor.csv";
  std::string identities_file = "identities.csv";

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Throws ConfigError on syntax errors, unknown keys and invalid values.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

}  // namespace hq
