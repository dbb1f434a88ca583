#include "hq/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "hq/error.hpp"
#include "hq/geometry.hpp"
#include "hq/monitor.hpp"
#include "hq/oracle.hpp"
#include "hq/parallel.hpp"
#include "hq/trig.hpp"

namespace hq::cli {

namespace {

namespace fs = std::filesystem;

struct Setup {
  ProblemSpec spec;
  std::optional<ScalarField> shift;    ///< v with u = v + w when chi was reduced
  std::optional<ScalarField> u_star;   ///< manufactured exact solution
};

ScalarField load_scalar(const Grid& grid, const std::string& key, const std::string& terms, const std::string& file) {
  if (!file.empty()) {
    ScalarField f = [&] {
      try {
        return read_field_file(file);
      } catch (const Error& e) {
        throw ConfigError(key, e.what());
      }
    }();
    if (f.grid().n() != grid.n() || f.grid().length() != grid.length()) {
      throw ConfigError(key, "field file grid does not match [grid]");
    }
    return f;
  }
  return TrigSeries::parse(terms).sample(grid);
}

Setup build(const RunConfig& cfg) {
  const Grid grid(cfg.n, cfg.length > 0.0 ? cfg.length : 2.0 * std::numbers::pi);
  const double amplitude = cfg.conformal ? cfg.metric_amplitude : 0.0;
  std::optional<ScalarField> shift, u_star;
  ProblemSpec spec = [&] {
    if (cfg.manufactured) {
      oracle::ManufacturedParams p = *cfg.manufactured;
      p.metric_amplitude = amplitude;
      oracle::ManufacturedProblem mp = [&] {
        try {
          return oracle::make_manufactured(grid, p);
        } catch (const ArgumentError& e) {
          throw ConfigError("manufactured.a", e.what());
        }
      }();
      u_star = mp.u_star;
      return mp.problem();
    }
    const Sym2Field g = cfg.conformal ? oracle::conformal_metric(grid, amplitude) : Sym2Field(grid, Sym2::identity());
    Sym2Field chi = cfg.chi_alpha * g;
    ScalarField psi = load_scalar(grid, "psi.terms", cfg.psi_terms, cfg.psi_file);
    if (cfg.chi_beta != 0.0) {
      // chi = alpha g + beta Hess v0 is reduced to alpha g with the shift v = -beta v0.
      const ScalarField v0 = TrigSeries::parse(cfg.chi_v0).sample(grid);
      const Sym2Field full = chi + cfg.chi_beta * covariant_hessian(v0, g, connection_from_metric(g));
      const ScalarField v = -cfg.chi_beta * v0;
      auto [reduced_chi, reduced_psi] = reduce_to_positive_chi(full, v, psi, g);
      chi = std::move(reduced_chi);
      psi = std::move(reduced_psi);
      shift = v;
    }
    return make_problem(g, chi, psi);
  }();
  spec.tol = cfg.tol;
  spec.homotopy = cfg.homotopy;
  spec.krylov = cfg.krylov;
  return Setup{std::move(spec), std::move(shift), std::move(u_star)};
}

std::string timestamp_line() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << "# generated " << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << '\n';
  return os.str();
}

class Outputs {
 public:
  Outputs(fs::path dir, bool timestamp) : dir_(std::move(dir)), timestamp_(timestamp) {
    fs::create_directories(dir_);
  }

  std::ofstream csv(const std::string& name) const {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (dir_ / name).string());
    if (timestamp_) f << timestamp_line();
    return f;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  fs::path dir_;
  bool timestamp_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

struct Solved {
  ScalarField u;
  ContinuationResult run;
};

std::optional<Solved> solve_and_write(const RunConfig& cfg, const Setup& s, const Outputs& out_files,
                                      std::ostream& out, std::ostream& err) {
  ContinuationResult run = continuation_solve(s.spec);
  {
    auto f = out_files.csv(cfg.trace_file);
    write_trace_csv(f, run.trace);
  }
  if (!run.success) {
    err << "solver did not converge: " << run.failure << " (last t = " << run.last_good_t << ")\n";
    return std::nullopt;
  }
  ScalarField u = s.shift ? *s.shift + run.u : run.u;
  write_field_file(out_files.path(cfg.solution_file), u);
  out << "solved: steps=" << run.trace.size() << " integral_u=" << fmt(run.trace.back().integral_u)
      << " lambda1_max=" << fmt(run.trace.back().lambda1_max) << '\n';
  if (s.u_star) out << "sup_error=" << fmt((u - *s.u_star).sup_norm()) << '\n';
  return Solved{std::move(u), std::move(run)};
}

bool emit(const std::vector<EstimateReport>& reports, const std::vector<bool>& asserted, const Outputs& files,
          const RunConfig& cfg, std::ostream& out) {
  auto f = files.csv(cfg.monitor_file);
  write_report_header(f);
  bool all = true;
  for (std::size_t r = 0; r < reports.size(); ++r) {
    write_report_row(f, reports[r]);
    out << summary_line(reports[r]) << '\n';
    if (asserted[r] && !reports[r].pass) all = false;
  }
  return all;
}

EstimateReport diagnostic(const std::string& name, double value, std::size_t node = 0, const Grid* grid = nullptr) {
  return make_report(name, std::numeric_limits<double>::infinity(), value, grid ? grid->row(node) : -1,
                     grid ? grid->col(node) : -1);
}

int cmd_identities(const RunConfig& cfg, const Outputs& files, std::ostream& out) {
  const auto rows = oracle::identity_sweep(cfg.seed, cfg.samples);
  {
    auto f = files.csv(cfg.identities_file);
    oracle::write_sweep_csv(f, rows);
  }
  bool all = true;
  for (const auto& r : rows) {
    out << (r.pass ? "PASS " : "FAIL ") << r.check << " n=" << r.n;
    if (r.k > 0) out << " k=" << r.k;
    out << ": max=" << fmt(r.max_rel) << " tol=" << fmt(r.tolerance);
    if (r.k > 0) out << " eps0_empirical=" << fmt(r.empirical_eps0);
    out << '\n';
    all = all && r.pass;
  }
  return all ? ok : check_failed;
}

int cmd_fixed_rhs(const RunConfig& cfg, const Setup& s, const Outputs& files, std::ostream& out, std::ostream& err) {
  if (cfg.manufactured) throw ConfigError("manufactured.family", "not used by solve-fixed-rhs");
  if (s.shift) throw ConfigError("chi.beta", "solve-fixed-rhs needs chi = alpha g");
  const Grid& grid = s.spec.grid();
  const ScalarField log_f = load_scalar(grid, "rhs.log_f", cfg.log_f_terms, cfg.f_file);
  std::vector<double> fv(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) fv[k] = cfg.f_file.empty() ? std::exp(log_f[k]) : log_f[k];
  const FixedRhsResult r = solve_up_to_constant(ScalarField(grid, std::move(fv)), s.spec);
  {
    auto f = files.csv(cfg.trace_file);
    write_trace_csv(f, r.run.trace);
  }
  if (!r.run.success) {
    err << "solver did not converge: " << r.run.failure << '\n';
    return nonconvergence;
  }
  write_field_file(files.path(cfg.solution_file), r.u);
  out << "solved: F(u) = c f with c=" << fmt(r.c) << '\n';
  return ok;
}

int cmd_verify(const RunConfig& cfg, const Solved& sol, const Setup& s, const Outputs& files, std::ostream& out) {
  // The estimates concern the original (unreduced) problem data.
  const ProblemSpec& spec = s.spec;
  const ScalarField& w = sol.run.u;
  const GeometryConstants consts = geometry_constants(spec.chi, spec.g);
  std::vector<EstimateReport> reports{check_c0(w, spec, consts), check_c1(w, spec, consts),
                                      integral_bound_check(w, spec),
                                      check_commutation(w, spec.g, spec.conn, cfg.monitor.commutation_constant)};
  return emit(reports, {true, true, true, false}, files, cfg, out) ? ok : check_failed;
}

int cmd_monitor(const RunConfig& cfg, const Solved& sol, const Setup& s, const Outputs& files, std::ostream& out) {
  const ProblemSpec& spec = s.spec;
  const ScalarField& w = sol.run.u;
  const Grid& grid = spec.grid();
  const MonitorConfig& mc = cfg.monitor;
  std::vector<EstimateReport> reports;
  std::vector<bool> asserted;
  auto add = [&](EstimateReport r, bool a) {
    reports.push_back(std::move(r));
    asserted.push_back(a);
  };

  const TestQuantities tq = test_quantities(w, spec, mc);
  add(diagnostic("w_max", tq.W.max()), false);
  add(diagnostic("qtilde_max", tq.Qtilde[tq.argmax], tq.argmax, &grid), false);
  add(diagnostic("ungapped_nodes", static_cast<double>(tq.masked)), false);

  if (s.shift) {
    out << "note: chi was reduced; monitor diagnostics refer to the reduced problem\n";
  }
  bool flat = true;
  for (std::size_t k = 0; k < grid.size() && flat; ++k) {
    flat = spec.g[k].xx == 1.0 && spec.g[k].xy == 0.0 && spec.g[k].yy == 1.0;
  }
  if (!flat) {
    out << "note: eigenvector-field, structural and extremal checks need the flat metric; skipped\n";
  } else {
    const EigvecFieldReport ev = eigvec_field_checks(w, spec, mc);
    add(diagnostic("eigvec_first_error", ev.first_error), false);
    add(diagnostic("eigvec_second_error", ev.second_error), false);
    add(diagnostic("eigvec_tangential_first", ev.tangential_first), false);
    add(diagnostic("eigvec_norm_defect", ev.norm_defect), false);

    const StructuralReport st = structural_report(w, spec, mc);
    if (st.applicable) {
      add(diagnostic("structural_C", st.empirical_C, st.location, &grid), false);
    } else {
      out << "note: no node passes the structural-test gate\n";
    }

    const ExtremalReport ex = extremal_system_residual(w, tq.argmax, spec, mc);
    add(diagnostic("extremal_residual_1", std::abs(ex.residual[0]), ex.node, &grid), false);
    add(diagnostic("extremal_residual_2", std::abs(ex.residual[1]), ex.node, &grid), false);
    add(diagnostic("extremal_merged_error_1", ex.merged_error[0], ex.node, &grid), false);
    add(diagnostic("extremal_merged_error_2", ex.merged_error[1], ex.node, &grid), false);
    const bool assert_bounds = !ex.vacuous && !ex.at_mask_boundary;
    for (const EstimateReport& b : ex.bounds) add(b, assert_bounds);
    if (ex.vacuous) out << "note: lambda1 < dominance_ratio * lambda2 at the maximum; derivative bounds not asserted\n";
    if (ex.at_mask_boundary) out << "note: the maximum touches an ungapped node; derivative bounds not asserted\n";
  }
  return emit(reports, asserted, files, cfg, out) ? ok : check_failed;
}

}  // namespace

int run(const RunConfig& config, const Options& options, std::ostream& out, std::ostream& err) {
  try {
    if (options.threads < 0) throw ConfigError("--threads", "must be nonnegative");
    if (options.threads > 0) set_thread_count(options.threads);
    RunConfig cfg = config;
    if (options.output_dir) cfg.output_dir = *options.output_dir;
    cfg.validate();
    const Outputs files(cfg.output_dir, options.timestamp);
    out << "command: " << to_string(cfg.command) << '\n';

    if (cfg.command == Command::check_identities) return cmd_identities(cfg, files, out);

    const Setup s = build(cfg);
    s.spec.validate();
    if (cfg.command == Command::solve_fixed_rhs) return cmd_fixed_rhs(cfg, s, files, out, err);

    const auto sol = solve_and_write(cfg, s, files, out, err);
    if (!sol) return nonconvergence;
    switch (cfg.command) {
      case Command::verify_estimates:
        return cmd_verify(cfg, *sol, s, files, out);
      case Command::monitor:
        return cmd_monitor(cfg, *sol, s, files, out);
      default: {
        const EstimateReport integral = integral_bound_check(sol->run.u, s.spec);
        out << summary_line(integral) << '\n';
        return integral.pass ? ok : check_failed;
      }
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const AdmissibilityError& e) {
    err << "error: " << e.what() << '\n';
    return nonconvergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return config_error;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return config_error;
  }
}

int run(const Options& options, std::ostream& out, std::ostream& err) {
  try {
    return run(load_config(options.config_path), options, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  }
}

}  // namespace hq::cli
