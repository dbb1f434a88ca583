#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hq/cli.hpp"
#include "hq/config.hpp"
#include "hq/error.hpp"

using namespace hq;
namespace fs = std::filesystem;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string config_error_key(const std::string& text) {
  try {
    parse(text).validate();
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(HQ_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_text(const std::string& text, const fs::path& dir, bool timestamp = false) {
  cli::Options opt;
  opt.output_dir = dir.string();
  opt.timestamp = timestamp;
  std::ostringstream out, err;
  int code;
  try {
    code = cli::run(parse(text), opt, out, err);
  } catch (const ConfigError& e) {
    return {cli::config_error, "", e.what()};
  }
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Config, DefaultsWhenEmpty) {
  const RunConfig c = parse("");
  EXPECT_EQ(c.command, Command::solve);
  EXPECT_EQ(c.n, 64);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_FALSE(c.manufactured.has_value());
  EXPECT_EQ(c.krylov.preconditioner, Preconditioner::ilut);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ParsesEverySection) {
  const RunConfig c = parse(
      "[run]\ncommand = monitor\nseed = 11\nsamples = 500\noutput_dir = out\n"
      "[grid]\nn = 32\nlength = 6.0\n"
      "[metric]\nfamily = conformal\namplitude = 0.05\n"
      "[chi]\nalpha = 2\nbeta = 0.5\nv0 = 0.1 cos 1 cos 0\n"
      "[psi]\nterms = 0.3 sin 1 sin 1\n"
      "[tolerances]\nnewton_residual_sup = 1e-9\nlinear_rel = 1e-11\nadmissibility_floor = 1e-7\n"
      "[homotopy]\ndt_init = 0.2\ndt_min = 1e-3\ndt_max = 0.4\nmax_newton = 12\n"
      "[krylov]\nrestart = 30\nmax_iterations = 500\npreconditioner = jacobi\n"
      "[monitor]\nphi_slope = 0.5\ngap_floor = 0.2\nlarge_lambda_factor = 1.5\ndominance_ratio = 4\n"
      "derivative_bound_constant = 3\ncommutation_constant = 5\n"
      "[output]\ntrace = t.csv\nsolution = u.txt\nmonitor = m.csv\nidentities = i.csv\n");
  EXPECT_EQ(c.command, Command::monitor);
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(c.samples, 500);
  EXPECT_EQ(c.output_dir, "out");
  EXPECT_EQ(c.n, 32);
  EXPECT_EQ(c.length, 6.0);
  EXPECT_TRUE(c.conformal);
  EXPECT_EQ(c.metric_amplitude, 0.05);
  EXPECT_EQ(c.chi_alpha, 2.0);
  EXPECT_EQ(c.chi_beta, 0.5);
  EXPECT_EQ(c.chi_v0, "0.1 cos 1 cos 0");
  EXPECT_EQ(c.psi_terms, "0.3 sin 1 sin 1");
  EXPECT_EQ(c.tol.newton_residual_sup, 1e-9);
  EXPECT_EQ(c.tol.linear_rel, 1e-11);
  EXPECT_EQ(c.tol.admissibility_floor, 1e-7);
  EXPECT_EQ(c.homotopy.dt_init, 0.2);
  EXPECT_EQ(c.homotopy.dt_min, 1e-3);
  EXPECT_EQ(c.homotopy.dt_max, 0.4);
  EXPECT_EQ(c.homotopy.max_newton, 12);
  EXPECT_EQ(c.krylov.restart, 30);
  EXPECT_EQ(c.krylov.max_iterations, 500);
  EXPECT_EQ(c.krylov.preconditioner, Preconditioner::jacobi);
  EXPECT_EQ(c.monitor.phi_slope, 0.5);
  EXPECT_EQ(c.monitor.gap_floor, 0.2);
  EXPECT_EQ(c.monitor.large_lambda_factor, 1.5);
  EXPECT_EQ(c.monitor.dominance_ratio, 4.0);
  EXPECT_EQ(c.monitor.derivative_bound_constant, 3.0);
  EXPECT_EQ(c.monitor.commutation_constant, 5.0);
  EXPECT_EQ(c.trace_file, "t.csv");
  EXPECT_EQ(c.solution_file, "u.txt");
  EXPECT_EQ(c.monitor_file, "m.csv");
  EXPECT_EQ(c.identities_file, "i.csv");
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ManufacturedSection) {
  const RunConfig c = parse("[manufactured]\nfamily = anisotropic\na = 0.5\nc = 0.1\n");
  ASSERT_TRUE(c.manufactured.has_value());
  EXPECT_EQ(c.manufactured->family, oracle::Family::anisotropic);
  EXPECT_EQ(c.manufactured->a, 0.5);
  EXPECT_EQ(c.manufactured->b, 0.1);
  EXPECT_EQ(c.manufactured->c, 0.1);
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_EQ(config_error_key("[grid]\nsize = 4\n"), "grid.size");
  EXPECT_EQ(config_error_key("[grid]\nn = abc\n"), "grid.n");
  EXPECT_EQ(config_error_key("[grid]\nn = 33\n"), "grid.n");
  EXPECT_EQ(config_error_key("[grid]\nn = 6\n"), "grid.n");
  EXPECT_EQ(config_error_key("[run]\ncommand = fly\n"), "run.command");
  EXPECT_EQ(config_error_key("[run]\nsamples = 0\n"), "run.samples");
  EXPECT_EQ(config_error_key("[metric]\nfamily = sphere\n"), "metric.family");
  EXPECT_EQ(config_error_key("[chi]\nbeta = 1\n"), "chi.v0");
  EXPECT_EQ(config_error_key("[chi]\nalpha = 0\n"), "chi.alpha");
  EXPECT_EQ(config_error_key("[psi]\nterms = 1 tan 1 cos 1\n"), "psi.terms");
  EXPECT_EQ(config_error_key("[psi]\nterms = 1 cos 1 cos 1\nfile = p.txt\n"), "psi.file");
  EXPECT_EQ(config_error_key("[manufactured]\na = 0.1\n[psi]\nterms = 1 cos 1 cos 0\n"), "psi.terms");
  EXPECT_EQ(config_error_key("[homotopy]\ndt_min = 0.5\n"), "homotopy.dt_min");
  EXPECT_EQ(config_error_key("[homotopy]\nmax_newton = 0\n"), "homotopy.max_newton");
  EXPECT_EQ(config_error_key("[krylov]\npreconditioner = amg\n"), "krylov.preconditioner");
  EXPECT_EQ(config_error_key("[krylov]\nrestart = 0\n"), "krylov.restart");
  EXPECT_EQ(config_error_key("[tolerances]\nlinear_rel = -1\n"), "tolerances.linear_rel");
  EXPECT_EQ(config_error_key("[monitor]\ngap_floor = 2\n"), "monitor.gap_floor");
  EXPECT_EQ(config_error_key("[grid\nn = 8\n"), "config");
}

TEST(Config, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/hq.ini"), ConfigError);
  cli::Options opt;
  opt.config_path = "/nonexistent/hq.ini";
  std::ostringstream out, err;
  EXPECT_EQ(cli::run(opt, out, err), cli::config_error);
  EXPECT_NE(err.str().find("config error"), std::string::npos);
}

TEST(Cli, CheckIdentitiesWritesCsv) {
  const fs::path dir = fresh_dir("cli_identities");
  const Outcome r = run_text("[run]\ncommand = check-identities\nsamples = 200\n", dir, true);
  EXPECT_EQ(r.code, cli::ok) << r.err;
  const std::string csv = slurp(dir / "identities.csv");
  EXPECT_EQ(csv.rfind("# generated ", 0), 0u);
  EXPECT_NE(csv.find("\ncheck,n,k,samples,"), std::string::npos);
  EXPECT_NE(r.out.find("PASS concavity_identity n=5"), std::string::npos);
}

TEST(Cli, SolveManufacturedReportsError) {
  const fs::path dir = fresh_dir("cli_solve");
  const Outcome r = run_text("[grid]\nn = 16\n[manufactured]\nfamily = isotropic\n", dir);
  ASSERT_EQ(r.code, cli::ok) << r.err;
  EXPECT_NE(r.out.find("sup_error="), std::string::npos);
  EXPECT_NE(r.out.find("PASS integral_bound"), std::string::npos);
  const ScalarField u = read_field_file((dir / "solution.txt").string());
  EXPECT_EQ(u.grid().n(), 16);
  EXPECT_EQ(slurp(dir / "trace.csv").rfind("t,newton_iters,", 0), 0u);
}

TEST(Cli, VerifyEstimatesPassesOnSmoothData) {
  const fs::path dir = fresh_dir("cli_verify");
  const Outcome r =
      run_text("[run]\ncommand = verify-estimates\n[grid]\nn = 32\n[psi]\nterms = 0.5 sin 1 cos 2\n", dir);
  EXPECT_EQ(r.code, cli::ok) << r.out << r.err;
  std::istringstream csv(slurp(dir / "monitor.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 5);
}

TEST(Cli, ShiftedChiSolves) {
  const fs::path dir = fresh_dir("cli_shift");
  const Outcome r =
      run_text("[grid]\nn = 16\n[chi]\nbeta = 1\nv0 = 0.2 cos 1 cos 1\n[psi]\nterms = 0.2 cos 0 sin 1\n", dir);
  EXPECT_EQ(r.code, cli::ok) << r.err;
}

TEST(Cli, FixedRhs) {
  const fs::path dir = fresh_dir("cli_fixed");
  const Outcome r = run_text("[run]\ncommand = solve-fixed-rhs\n[grid]\nn = 16\n[rhs]\nlog_f = 0.2 cos 1 cos 0\n", dir);
  EXPECT_EQ(r.code, cli::ok) << r.err;
  EXPECT_NE(r.out.find("c="), std::string::npos);
}

TEST(Cli, MonitorAssertsDerivativeBounds) {
  const std::string base = "[run]\ncommand = monitor\n[grid]\nn = 64\n"
                           "[manufactured]\nfamily = anisotropic\na = 0.75\nb = 0.15\nc = 0.1\n";
  const Outcome good = run_text(base, fresh_dir("cli_monitor"));
  EXPECT_EQ(good.code, cli::ok) << good.out << good.err;
  EXPECT_NE(good.out.find("INFO structural_C"), std::string::npos);
  const Outcome tight = run_text(base + "[monitor]\nderivative_bound_constant = 1e-6\n", fresh_dir("cli_monitor_tight"));
  EXPECT_EQ(tight.code, cli::check_failed) << tight.out;
}

TEST(Cli, MonitorOnConformalSkipsFlatChecks) {
  const Outcome r = run_text("[run]\ncommand = monitor\n[grid]\nn = 16\n[metric]\nfamily = conformal\n"
                             "[psi]\nterms = 0.1 cos 1 cos 0\n",
                             fresh_dir("cli_monitor_conf"));
  EXPECT_EQ(r.code, cli::ok) << r.err;
  EXPECT_NE(r.out.find("need the flat metric"), std::string::npos);
}

TEST(Cli, NonconvergenceExitCode) {
  const Outcome r = run_text("[grid]\nn = 16\n[psi]\nterms = 4 cos 1 cos 0\n"
                             "[homotopy]\ndt_init = 1\ndt_min = 1\ndt_max = 1\nmax_newton = 1\n",
                             fresh_dir("cli_fail"));
  EXPECT_EQ(r.code, cli::nonconvergence);
  EXPECT_NE(r.err.find("did not converge"), std::string::npos);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  const std::string cfg = "[grid]\nn = 16\n[psi]\nterms = 0.3 sin 1 sin 1\n";
  const fs::path a = fresh_dir("cli_repeat_a"), b = fresh_dir("cli_repeat_b");
  ASSERT_EQ(run_text(cfg, a).code, cli::ok);
  ASSERT_EQ(run_text(cfg, b).code, cli::ok);
  for (const char* f : {"trace.csv", "solution.txt"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}
