#include "hq/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>

#include "hq/error.hpp"
#include "hq/trig.hpp"

namespace hq {

namespace {

namespace pt = boost::property_tree;

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError(key, "expected a number, got '" + text + "'");
  return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
  Int v = 0;
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError(key, "expected an integer, got '" + text + "'");
  return v;
}

Command parse_command(const std::string& key, const std::string& text) {
  static const std::map<std::string, Command> names{{"solve", Command::solve},
                                                    {"solve-fixed-rhs", Command::solve_fixed_rhs},
                                                    {"verify-estimates", Command::verify_estimates},
                                                    {"check-identities", Command::check_identities},
                                                    {"monitor", Command::monitor}};
  auto it = names.find(text);
  if (it == names.end()) throw ConfigError(key, "unknown command '" + text + "'");
  return it->second;
}

void check_trig(const std::string& key, const std::string& text) {
  try {
    TrigSeries::parse(text);
  } catch (const ArgumentError& e) {
    throw ConfigError(key, e.what());
  }
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

std::map<std::string, Setter> setters() {
  auto num = [](double RunConfig::*field) {
    return [field](RunConfig& c, const std::string& k, const std::string& v) { c.*field = parse_double(k, v); };
  };
  auto text = [](std::string RunConfig::*field) {
    return [field](RunConfig& c, const std::string&, const std::string& v) { c.*field = v; };
  };
  auto manufactured = [](RunConfig& c) -> oracle::ManufacturedParams& {
    if (!c.manufactured) c.manufactured.emplace();
    return *c.manufactured;
  };
  std::map<std::string, Setter> s;
  s["run.command"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.command = parse_command(k, v); };
  s["run.seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
    c.seed = parse_int<std::uint64_t>(k, v);
  };
  s["run.samples"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.samples = parse_int<int>(k, v); };
  s["run.output_dir"] = text(&RunConfig::output_dir);
  s["grid.n"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.n = parse_int<int>(k, v); };
  s["grid.length"] = num(&RunConfig::length);
  s["metric.family"] = [](RunConfig& c, const std::string& k, const std::string& v) {
    if (v == "flat") {
      c.conformal = false;
    } else if (v == "conformal") {
      c.conformal = true;
    } else {
      throw ConfigError(k, "expected flat or conformal, got '" + v + "'");
    }
  };
  s["metric.amplitude"] = num(&RunConfig::metric_amplitude);
  s["chi.alpha"] = num(&RunConfig::chi_alpha);
  s["chi.beta"] = num(&RunConfig::chi_beta);
  s["chi.v0"] = [](RunConfig& c, const std::string& k, const std::string& v) {
    check_trig(k, v);
    c.chi_v0 = v;
  };
  s["psi.terms"] = [](RunConfig& c, const std::string& k, const std::string& v) {
    check_trig(k, v);
    c.psi_terms = v;
  };
  s["psi.file"] = text(&RunConfig::psi_file);
  s["rhs.log_f"] = [](RunConfig& c, const std::string& k, const std::string& v) {
    check_trig(k, v);
    c.log_f_terms = v;
  };
  s["rhs.file"] = text(&RunConfig::f_file);
  s["manufactured.family"] = [manufactured](RunConfig& c, const std::string& k, const std::string& v) {
    if (v == "isotropic") {
      manufactured(c).family = oracle::Family::isotropic;
    } else if (v == "anisotropic") {
      manufactured(c).family = oracle::Family::anisotropic;
    } else {
      throw ConfigError(k, "expected isotropic or anisotropic, got '" + v + "'");
    }
  };
  s["manufactured.a"] = [manufactured](RunConfig& c, const std::string& k, const std::string& v) {
    manufactured(c).a = parse_double(k, v);
  };
  s["manufactured.b"] = [manufactured](RunConfig& c, const std::string& k, const std::string& v) {
    manufactured(c).b = parse_double(k, v);
  };
  s["manufactured.c"] = [manufactured](RunConfig& c, const std::string& k, const std::string& v) {
    manufactured(c).c = parse_double(k, v);
  };
  s["tolerances.newton_residual_sup"] = [](RunConfig& c, const std::string& k, const std::string& v) {
    c.tol.newton_residual_sup = parse_double(k, v);
  };
  s["tolerances.linear_rel"] = [](RunConfig& c, const std::string& k, const std::string& v) {
    c.tol.linear_rel = parse_double(k, v);
  };
  s["tolerances.admissibility_floor"] = [](RunConfig& c, const std::string& k, const std::string& v) {
    c.tol.admissibility_floor = parse_double(k, v);
  };
  s["homotopy.dt_init"] = [](RunConfig& c, const std::string& k, const std::string& v) {
    c.homotopy.dt_init = parse_double(k, v);
  };
  s["homotopy.dt_min"] = [](RunConfig& c, const std::string& k, const std::string& v) {
    c.homotopy.dt_min = parse_double(k, v);
  };
  s["homotopy.dt_max"] = [](RunConfig& c, const std::string& k, const std::string& v) {
    c.homotopy.dt_max = parse_double(k, v);
  };
  s["homotopy.max_newton"] = [](RunConfig& c, const std::string& k, const std::string& v) {
    c.homotopy.max_newton = parse_int<int>(k, v);
  };
  s["krylov.restart"] = [](RunConfig& c, const std::string& k, const std::string& v) {
    c.krylov.restart = parse_int<int>(k, v);
  };
  s["krylov.max_iterations"] = [](RunConfig& c, const std::string& k, const std::string& v) {
    c.krylov.max_iterations = parse_int<int>(k, v);
  };
  s["krylov.preconditioner"] = [](RunConfig& c, const std::string& k, const std::string& v) {
    if (v == "ilut") {
      c.krylov.preconditioner = Preconditioner::ilut;
    } else if (v == "jacobi") {
      c.krylov.preconditioner = Preconditioner::jacobi;
    } else {
      throw ConfigError(k, "expected ilut or jacobi, got '" + v + "'");
    }
  };
  auto mon = [](double MonitorConfig::*field) {
    return [field](RunConfig& c, const std::string& k, const std::string& v) { c.monitor.*field = parse_double(k, v); };
  };
  s["monitor.phi_slope"] = mon(&MonitorConfig::phi_slope);
  s["monitor.gap_floor"] = mon(&MonitorConfig::gap_floor);
  s["monitor.large_lambda_factor"] = mon(&MonitorConfig::large_lambda_factor);
  s["monitor.dominance_ratio"] = mon(&MonitorConfig::dominance_ratio);
  s["monitor.derivative_bound_constant"] = mon(&MonitorConfig::derivative_bound_constant);
  s["monitor.commutation_constant"] = mon(&MonitorConfig::commutation_constant);
  s["output.trace"] = text(&RunConfig::trace_file);
  s["output.solution"] = text(&RunConfig::solution_file);
  s["output.monitor"] = text(&RunConfig::monitor_file);
  s["output.identities"] = text(&RunConfig::identities_file);
  return s;
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::solve:
      return "solve";
    case Command::solve_fixed_rhs:
      return "solve-fixed-rhs";
    case Command::verify_estimates:
      return "verify-estimates";
    case Command::check_identities:
      return "check-identities";
    case Command::monitor:
      return "monitor";
  }
  return "?";
}

void RunConfig::validate() const {
  if (n < 8 || n % 2 != 0) throw ConfigError("grid.n", "must be an even integer >= 8");
  if (length < 0.0) throw ConfigError("grid.length", "must be positive");
  if (samples < 1) throw ConfigError("run.samples", "must be positive");
  if (!psi_terms.empty() && !psi_file.empty()) throw ConfigError("psi.file", "give either psi.terms or psi.file");
  if (!log_f_terms.empty() && !f_file.empty()) throw ConfigError("rhs.file", "give either rhs.log_f or rhs.file");
  if (manufactured && (!psi_terms.empty() || !psi_file.empty())) {
    throw ConfigError("psi.terms", "the manufactured problem defines its own right-hand side");
  }
  if (chi_beta != 0.0 && chi_v0.empty()) throw ConfigError("chi.v0", "required when chi.beta is nonzero");
  if (!(chi_alpha > 0.0)) throw ConfigError("chi.alpha", "must be positive");
  tol.validate();
  homotopy.validate();
  krylov.validate();
  try {
    monitor.validate();
  } catch (const ArgumentError& e) {
    const std::string what = e.what();
    throw ConfigError(what.substr(0, what.find(' ')), what);
  }
}

RunConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", "line " + std::to_string(e.line()) + ": " + e.message());
  }
  static const auto table = setters();
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside of a section");
    for (const auto& [name, node] : body) {
      const std::string key = section + "." + name;
      auto it = table.find(key);
      if (it == table.end()) throw ConfigError(key, "unknown key");
      it->second(cfg, key, node.get_value<std::string>());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  return parse_config(in);
}

}  // namespace hq
