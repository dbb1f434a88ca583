#include "hq/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <unsupported/Eigen/IterativeSolvers>

#include "hq/error.hpp"
#include "hq/parallel.hpp"

namespace hq {

namespace {

double quotient_2d(double l1, double l2) { return l1 * l2 / (l1 + l2); }

// Residual and admissibility margin in one pass; throws when not admissible.
ScalarField residual_impl(const ScalarField& u, double t, const ProblemSpec& spec, double* margin_out) {
  const Sym2Field gt = perturbed_metric(u, spec);
  const double integral = integrate(u, spec.g);
  const std::size_t size = u.size();
  std::vector<double> out(size);
  std::vector<double> lam2(size);
  parallel_for(size, [&](std::size_t k) {
    const EigenPair2D e = eigen_decompose(spec.g[k], gt[k]);
    lam2[k] = e.lambda2;
    if (e.lambda2 > 0.0) out[k] = std::log(quotient_2d(e.lambda1, e.lambda2)) - integral - t * spec.psi[k];
  });
  double margin = std::numeric_limits<double>::infinity();
  std::size_t worst = 0;
  for (std::size_t k = 0; k < size; ++k) {
    if (lam2[k] < margin) {
      margin = lam2[k];
      worst = k;
    }
  }
  if (margin_out) *margin_out = margin;
  if (!(margin > spec.tol.admissibility_floor)) {
    throw AdmissibilityError("residual: chi + Hess u not admissible, lambda_2 = " + std::to_string(margin), worst);
  }
  return ScalarField(u.grid(), std::move(out));
}

}  // namespace

void Tolerances::validate() const {
  if (!(newton_residual_sup > 0.0)) throw ConfigError("tolerances.newton_residual_sup", "must be positive");
  if (!(linear_rel > 0.0)) throw ConfigError("tolerances.linear_rel", "must be positive");
  if (!(admissibility_floor > 0.0)) throw ConfigError("tolerances.admissibility_floor", "must be positive");
}

void HomotopySchedule::validate() const {
  if (!(dt_min > 0.0)) throw ConfigError("homotopy.dt_min", "must be positive");
  if (dt_min > dt_init) throw ConfigError("homotopy.dt_min", "must not exceed homotopy.dt_init");
  if (!(dt_init <= 1.0)) throw ConfigError("homotopy.dt_init", "must not exceed 1");
  if (!(dt_max >= dt_init)) throw ConfigError("homotopy.dt_max", "must be at least homotopy.dt_init");
  if (max_newton < 1) throw ConfigError("homotopy.max_newton", "must be at least 1");
}

void KrylovOptions::validate() const {
  if (restart < 1) throw ConfigError("krylov.restart", "must be at least 1");
  if (max_iterations < 1) throw ConfigError("krylov.max_iterations", "must be at least 1");
}

void ProblemSpec::validate() const {
  require_same_grid(g.grid(), chi.grid(), "problem");
  require_same_grid(g.grid(), psi.grid(), "problem");
  require_metric(g);
  tol.validate();
  homotopy.validate();
  krylov.validate();
  if (rhs_mode == RhsMode::fixed_rhs_up_to_constant) {
    if (!f) throw ArgumentError("fixed right-hand side mode needs f");
    require_same_grid(g.grid(), f->grid(), "problem");
    for (std::size_t k = 0; k < f->size(); ++k) {
      if (!((*f)[k] > 0.0)) throw NodeError("f must be positive", k);
    }
  }
}

ProblemSpec make_problem(const Sym2Field& g, const Sym2Field& chi, const ScalarField& psi) {
  require_same_grid(g.grid(), chi.grid(), "make_problem");
  require_same_grid(g.grid(), psi.grid(), "make_problem");
  ConnectionField conn = connection_from_metric(g);
  std::vector<double> w = volume_weights(g);
  double vol = 0.0;
  for (double x : w) vol += x;
  return ProblemSpec{g, chi, psi, std::move(conn), std::move(w), vol};
}

Sym2Field perturbed_metric(const ScalarField& u, const ProblemSpec& spec) {
  return spec.chi + covariant_hessian(u, spec.g, spec.conn);
}

double admissibility_margin(const ScalarField& u, const ProblemSpec& spec) {
  return admissibility_margin(spec.g, perturbed_metric(u, spec));
}

std::pair<Sym2Field, ScalarField> reduce_to_positive_chi(const Sym2Field& chi, const ScalarField& v,
                                                         const ScalarField& psi, const Sym2Field& g) {
  require_same_grid(chi.grid(), v.grid(), "reduce_to_positive_chi");
  require_same_grid(chi.grid(), psi.grid(), "reduce_to_positive_chi");
  require_same_grid(chi.grid(), g.grid(), "reduce_to_positive_chi");
  const ConnectionField conn = connection_from_metric(g);
  Sym2Field chi_new = chi + covariant_hessian(v, g, conn);
  for (std::size_t k = 0; k < chi_new.size(); ++k) {
    const EigenPair2D e = eigen_decompose(g[k], chi_new[k]);
    if (!(e.lambda2 > 0.0)) {
      throw AdmissibilityError("reduce_to_positive_chi: v is not admissible for chi", k);
    }
  }
  return {std::move(chi_new), psi + integrate(v, g)};
}

ScalarField background_quotient(const ProblemSpec& spec) {
  std::vector<double> f0(spec.g.size());
  for (std::size_t k = 0; k < f0.size(); ++k) {
    const EigenPair2D e = eigen_decompose(spec.g[k], spec.chi[k]);
    if (!(e.lambda2 > 0.0)) throw AdmissibilityError("chi is not positive definite", k);
    f0[k] = quotient_2d(e.lambda1, e.lambda2);
  }
  return ScalarField(spec.grid(), std::move(f0));
}

ScalarField residual(const ScalarField& u, double t, const ProblemSpec& spec) {
  require_same_grid(u.grid(), spec.grid(), "residual");
  return residual_impl(u, t, spec, nullptr);
}

// ---------------------------------------------------------------------------

LinearizedOperator::LinearizedOperator(const ScalarField& u, const ProblemSpec& spec)
    : grid_(u.grid()), principal_(u.size()), drift_(u.size()), weights_(spec.weights) {
  require_same_grid(u.grid(), spec.grid(), "linearize");
  const Sym2Field gt = perturbed_metric(u, spec);
  for (std::size_t k = 0; k < u.size(); ++k) {
    const EigenPair2D e = eigen_decompose(spec.g[k], gt[k]);
    if (!(e.lambda2 > 0.0)) throw AdmissibilityError("linearize: u is not admissible", k);
    const KernelDerivatives d = derivatives(e);
    Sym2 a;
    if (e.gap() < 1e-8 * e.lambda1) {
      const double mean = 0.5 * (e.lambda1 + e.lambda2);
      a = (d.F * d.F / (mean * mean)) * spec.g[k].inverse();
    } else {
      a = d.Fi[0] * outer(e.e1) + d.Fi[1] * outer(e.e2);
    }
    a = (1.0 / d.F) * a;
    principal_[k] = a;
    // first-order part: -a^{rs} Gamma^m_rs d_m
    for (int m = 0; m < 2; ++m) {
      drift_[k][m] = -(a.xx * spec.conn.gamma(k, m, 0, 0) + 2.0 * a.xy * spec.conn.gamma(k, m, 0, 1) +
                       a.yy * spec.conn.gamma(k, m, 1, 1));
    }
  }
}

ScalarField LinearizedOperator::apply(const ScalarField& du) const {
  require_same_grid(du.grid(), grid_, "LinearizedOperator::apply");
  double integral = 0.0;
  for (std::size_t k = 0; k < du.size(); ++k) integral += weights_[k] * du[k];
  const auto v = du.values();
  std::vector<double> out(du.size());
  parallel_for(du.size(), [&](std::size_t k) {
    const int i = grid_.row(k), j = grid_.col(k);
    const Sym2& a = principal_[k];
    out[k] = a.xx * stencil::d2(grid_, v, i, j, 0) + 2.0 * a.xy * stencil::dxy(grid_, v, i, j) +
             a.yy * stencil::d2(grid_, v, i, j, 1) + drift_[k][0] * stencil::d1(grid_, v, i, j, 0) +
             drift_[k][1] * stencil::d1(grid_, v, i, j, 1) - integral;
  });
  return ScalarField(grid_, std::move(out));
}

Eigen::SparseMatrix<double, Eigen::RowMajor> LinearizedOperator::local_matrix() const {
  const std::size_t size = grid_.size();
  const double h = grid_.spacing();
  const double h2 = h * h;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(size * 9);
  for (std::size_t k = 0; k < size; ++k) {
    const int i = grid_.row(k), j = grid_.col(k);
    const Sym2& a = principal_[k];
    const Vec2& b = drift_[k];
    const auto row = static_cast<int>(k);
    auto add = [&](int di, int dj, double v) {
      trip.emplace_back(row, static_cast<int>(grid_.index(i + di, j + dj)), v);
    };
    add(0, 0, -2.0 * a.xx / h2 - 2.0 * a.yy / h2);
    add(1, 0, a.xx / h2 + b[0] / (2.0 * h));
    add(-1, 0, a.xx / h2 - b[0] / (2.0 * h));
    add(0, 1, a.yy / h2 + b[1] / (2.0 * h));
    add(0, -1, a.yy / h2 - b[1] / (2.0 * h));
    const double c = 2.0 * a.xy / (4.0 * h2);
    add(1, 1, c);
    add(1, -1, -c);
    add(-1, 1, -c);
    add(-1, -1, c);
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> m(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

namespace {

// Eigen's GMRES is left-preconditioned, so its stopping test sees the
// preconditioned residual, which for these stencil matrices is smaller than
// the true residual by roughly the operator norm (~1/h^2). The solve is
// therefore wrapped in iterative refinement on the true residual, reusing one
// factorization of the preconditioner.
template <class Precond>
double refine(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b, Eigen::VectorXd& x, double rel_tol,
              const KrylovOptions& options, int passes, int& iterations) {
  Eigen::GMRES<Eigen::SparseMatrix<double>, Precond> gmres;
  gmres.set_restart(options.restart);
  gmres.setMaxIterations(options.max_iterations);
  gmres.setTolerance(rel_tol);
  if constexpr (std::is_same_v<Precond, Eigen::IncompleteLUT<double>>) {
    gmres.preconditioner().setDroptol(1e-4);
    gmres.preconditioner().setFillfactor(10);
  }
  gmres.compute(A);
  const double bnorm = b.norm();
  double rel = (A * x - b).norm() / bnorm;
  for (int pass = 0; pass < passes && rel > rel_tol; ++pass) {
    const Eigen::VectorXd r = b - A * x;
    const Eigen::VectorXd d = gmres.solve(r);
    iterations += static_cast<int>(gmres.iterations());
    if (!d.allFinite()) break;
    const Eigen::VectorXd trial = x + d;
    const double trial_rel = (A * trial - b).norm() / bnorm;
    if (!(trial_rel < rel)) break;  // no progress: the preconditioner is not useful
    x = trial;
    rel = trial_rel;
  }
  return rel;
}

}  // namespace

KrylovResult LinearizedOperator::solve(const ScalarField& rhs, double rel_tol, const KrylovOptions& options) const {
  require_same_grid(rhs.grid(), grid_, "LinearizedOperator::solve");
  const auto n = static_cast<Eigen::Index>(grid_.size());
  const auto local = local_matrix();

  // Bordered system; the border row is scaled by 1/h^2 to match the stencil rows.
  const double scale = 1.0 / (grid_.spacing() * grid_.spacing());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(local.nonZeros()) + 2 * grid_.size() + 1);
  for (Eigen::Index r = 0; r < local.outerSize(); ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(local, r); it; ++it) {
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
    trip.emplace_back(static_cast<int>(r), static_cast<int>(n), -1.0);
  }
  double wsum = 0.0;
  for (double w : weights_) wsum += w;
  const double wscale = scale * static_cast<double>(n) / wsum;
  for (Eigen::Index c = 0; c < n; ++c) {
    trip.emplace_back(static_cast<int>(n), static_cast<int>(c), wscale * weights_[static_cast<std::size_t>(c)]);
  }
  trip.emplace_back(static_cast<int>(n), static_cast<int>(n), -wscale);
  Eigen::SparseMatrix<double> A(n + 1, n + 1);
  A.setFromTriplets(trip.begin(), trip.end());

  Eigen::VectorXd b(n + 1);
  for (Eigen::Index k = 0; k < n; ++k) b[k] = rhs[static_cast<std::size_t>(k)];
  b[n] = 0.0;
  if (b.norm() == 0.0) {
    return KrylovResult{ScalarField(grid_, 0.0), 0, 0.0, true};
  }
  int iterations = 0;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n + 1);
  double rel = 1.0;
  if (options.preconditioner == Preconditioner::ilut) {
    rel = refine<Eigen::IncompleteLUT<double>>(A, b, x, rel_tol, options, 6, iterations);
  }
  if (rel > rel_tol) rel = refine<Eigen::DiagonalPreconditioner<double>>(A, b, x, rel_tol, options, 6, iterations);
  std::vector<double> sol(x.data(), x.data() + n);
  return KrylovResult{ScalarField(grid_, std::move(sol)), iterations, rel, rel <= rel_tol};
}

LinearizedOperator linearize(const ScalarField& u, const ProblemSpec& spec) { return LinearizedOperator(u, spec); }

// ---------------------------------------------------------------------------

namespace {
constexpr double kInexactNewtonLimit = 1e-6;
}  // namespace

NewtonResult newton_solve_at_t(const ScalarField& u0, double t, const ProblemSpec& spec) {
  require_same_grid(u0.grid(), spec.grid(), "newton_solve_at_t");
  NewtonResult out{u0};
  double margin = 0.0;
  ScalarField G = residual_impl(u0, t, spec, &margin);
  out.margins.push_back(margin);
  double rsup = G.sup_norm();
  out.residual_sup = rsup;

  for (int iter = 0; iter < spec.homotopy.max_newton; ++iter) {
    if (rsup <= spec.tol.newton_residual_sup) {
      out.converged = true;
      return out;
    }
    const LinearizedOperator L(out.u, spec);
    const KrylovResult step = L.solve(-1.0 * G, spec.tol.linear_rel, spec.krylov);
    // Inexact Newton: a direction short of linear_rel is still usable, since
    // acceptance is decided on the nonlinear residual below.
    if (!step.converged && !(step.relative_residual <= kInexactNewtonLimit)) {
      std::ostringstream msg;
      msg << "linear solver did not converge (relative residual " << step.relative_residual << ")";
      out.failure = msg.str();
      return out;
    }
    bool accepted = false;
    double s = 1.0;
    for (int halving = 0; halving <= 20; ++halving, s *= 0.5) {
      const ScalarField trial = out.u + s * step.solution;
      double trial_margin = 0.0;
      ScalarField trial_G(trial.grid());
      try {
        trial_G = residual_impl(trial, t, spec, &trial_margin);
      } catch (const AdmissibilityError&) {
        continue;
      }
      const double trial_sup = trial_G.sup_norm();
      if (trial_sup < rsup) {
        out.u = trial;
        G = std::move(trial_G);
        rsup = trial_sup;
        out.margins.push_back(trial_margin);
        accepted = true;
        break;
      }
    }
    out.iterations = iter + 1;
    out.residual_sup = rsup;
    if (!accepted) {
      out.failure = "line search exhausted";
      return out;
    }
  }
  out.converged = rsup <= spec.tol.newton_residual_sup;
  if (!out.converged) out.failure = "max_newton exceeded";
  return out;
}

// ---------------------------------------------------------------------------

TraceRow trace_row(const ScalarField& u, double t, int iters, double residual_sup, const ProblemSpec& spec) {
  TraceRow row;
  row.t = t;
  row.newton_iters = iters;
  row.residual_sup = residual_sup;
  const Sym2Field gt = perturbed_metric(u, spec);
  double margin = std::numeric_limits<double>::infinity();
  double l1max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < u.size(); ++k) {
    const EigenPair2D e = eigen_decompose(spec.g[k], gt[k]);
    margin = std::min(margin, e.lambda2);
    l1max = std::max(l1max, e.lambda1);
  }
  row.adm_margin = margin;
  row.lambda1_max = l1max;
  row.osc_u = u.max() - u.min();
  row.grad_sup = std::sqrt(gradient_norm_sq(u, spec.g).max());
  row.integral_u = integrate(u, spec.g);
  return row;
}

double constant_start(const ProblemSpec& spec) {
  const ScalarField f0 = background_quotient(spec);
  std::vector<double> logs(f0.size());
  for (std::size_t k = 0; k < f0.size(); ++k) logs[k] = std::log(f0[k]);
  const ScalarField log_f0(spec.grid(), std::move(logs));
  const double lo = log_f0.min(), hi = log_f0.max();
  if (hi - lo <= 1e-14 * (1.0 + std::abs(hi))) return log_f0[0] / spec.volume;
  return integrate(log_f0, spec.g) / (spec.volume * spec.volume);
}

ContinuationResult continuation_solve(const ProblemSpec& spec, const std::optional<ScalarField>& start_perturbation) {
  spec.validate();
  background_quotient(spec);  // chi must be positive definite

  ContinuationResult out{ScalarField(spec.grid(), constant_start(spec))};
  ScalarField u = out.u;
  if (start_perturbation) u = u + *start_perturbation;

  NewtonResult start = newton_solve_at_t(u, 0.0, spec);
  if (!start.converged) {
    out.failure = "t = 0 corrector failed: " + start.failure;
    return out;
  }
  u = start.u;
  out.trace.push_back(trace_row(u, 0.0, start.iterations, start.residual_sup, spec));

  const HomotopySchedule& hs = spec.homotopy;
  double t = 0.0;
  double dt = hs.dt_init;
  std::optional<ScalarField> previous;
  double previous_dt = 0.0;
  while (t < 1.0) {
    const double t_next = std::min(1.0, t + dt);
    const double step = t_next - t;
    ScalarField guess = u;
    if (previous) {
      ScalarField secant = u + (step / previous_dt) * (u - *previous);
      if (admissibility_margin(secant, spec) > spec.tol.admissibility_floor) guess = std::move(secant);
    }
    NewtonResult r = newton_solve_at_t(guess, t_next, spec);
    if (r.converged) {
      previous = u;
      previous_dt = step;
      u = std::move(r.u);
      t = t_next;
      out.trace.push_back(trace_row(u, t, r.iterations, r.residual_sup, spec));
      out.last_good_t = t;
      dt = std::min(2.0 * dt, hs.dt_max);
    } else {
      dt *= 0.5;
      if (dt < hs.dt_min) {
        out.u = u;
        out.failure = "homotopy step underflow at t = " + std::to_string(t) + " (" + r.failure + ")";
        return out;
      }
    }
  }
  out.u = std::move(u);
  out.success = true;
  return out;
}

FixedRhsResult solve_up_to_constant(const ScalarField& f, const ProblemSpec& spec) {
  require_same_grid(f.grid(), spec.grid(), "solve_up_to_constant");
  std::vector<double> logf(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!(f[k] > 0.0)) throw NodeError("solve_up_to_constant: f must be positive", k);
    logf[k] = std::log(f[k]);
  }
  ProblemSpec fixed = spec;
  fixed.psi = ScalarField(f.grid(), std::move(logf));
  fixed.rhs_mode = RhsMode::fixed_rhs_up_to_constant;
  fixed.f = f;
  FixedRhsResult out{ScalarField(f.grid()), 0.0, continuation_solve(fixed)};
  out.u = out.run.u;
  out.c = std::exp(integrate(out.u, spec.g));
  return out;
}

EstimateReport integral_bound_check(const ScalarField& u, const ProblemSpec& spec, double t) {
  const ScalarField f0 = background_quotient(spec);
  const ScalarField tpsi = t * spec.psi;
  const double lower = std::log(f0.min()) - tpsi.max();
  const double upper = std::log(f0.max()) - tpsi.min();
  return make_interval_report("integral_bound", lower, upper, integrate(u, spec.g));
}

void write_trace_csv(std::ostream& out, const ContinuationTrace& trace) {
  out << "t,newton_iters,residual_sup,adm_margin,lambda1_max,osc_u,grad_sup,integral_u\n";
  out << std::setprecision(17);
  for (const TraceRow& r : trace) {
    out << r.t << ',' << r.newton_iters << ',' << r.residual_sup << ',' << r.adm_margin << ',' << r.lambda1_max << ','
        << r.osc_u << ',' << r.grad_sup << ',' << r.integral_u << '\n';
  }
}

}  // namespace hq
