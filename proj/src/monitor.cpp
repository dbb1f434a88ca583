#include "hq/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hq/error.hpp"
#include "hq/kernel.hpp"
#include "hq/parallel.hpp"

namespace hq {

namespace {

// Component buffers of a tensor field, for stencil access.
struct Components {
  std::vector<double> xx, xy, yy;

  explicit Components(const Sym2Field& t) : xx(t.size()), xy(t.size()), yy(t.size()) {
    for (std::size_t k = 0; k < t.size(); ++k) {
      xx[k] = t[k].xx;
      xy[k] = t[k].xy;
      yy[k] = t[k].yy;
    }
  }
};

struct TensorDerivatives {
  std::array<Sym2, 2> first;
  Sym2 dxx, dxy, dyy;

  Sym2 along(const Vec2& v) const { return v[0] * first[0] + v[1] * first[1]; }
  Sym2 along2(const Vec2& v) const {
    return (v[0] * v[0]) * dxx + (2.0 * v[0] * v[1]) * dxy + (v[1] * v[1]) * dyy;
  }
};

TensorDerivatives tensor_derivatives(const Grid& grid, const Components& c, std::size_t k) {
  const int i = grid.row(k), j = grid.col(k);
  TensorDerivatives d;
  for (int a = 0; a < 2; ++a) {
    d.first[a] = {stencil::d1(grid, c.xx, i, j, a), stencil::d1(grid, c.xy, i, j, a),
                  stencil::d1(grid, c.yy, i, j, a)};
  }
  d.dxx = {stencil::d2(grid, c.xx, i, j, 0), stencil::d2(grid, c.xy, i, j, 0), stencil::d2(grid, c.yy, i, j, 0)};
  d.dyy = {stencil::d2(grid, c.xx, i, j, 1), stencil::d2(grid, c.xy, i, j, 1), stencil::d2(grid, c.yy, i, j, 1)};
  d.dxy = {stencil::dxy(grid, c.xx, i, j), stencil::dxy(grid, c.xy, i, j), stencil::dxy(grid, c.yy, i, j)};
  return d;
}

void require_flat(const ProblemSpec& spec, const char* what) {
  for (std::size_t k = 0; k < spec.g.size(); ++k) {
    const Sym2& g = spec.g[k];
    if (g.xx != 1.0 || g.xy != 0.0 || g.yy != 1.0) {
      throw UnsupportedConfiguration(std::string(what) + ": only the flat metric g = delta is supported");
    }
  }
}

void require_admissible(const Sym2Field& g, const Sym2Field& gt, const char* what) {
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!(eigen_decompose(g[k], gt[k]).lambda2 > 0.0)) {
      throw AdmissibilityError(std::string(what) + ": chi + Hess u is not positive definite", k);
    }
  }
}

std::vector<EigenPair2D> eigenpairs(const Sym2Field& g, const Sym2Field& gt) {
  std::vector<EigenPair2D> e(g.size());
  parallel_for(g.size(), [&](std::size_t k) { e[k] = eigen_decompose(g[k], gt[k]); });
  return e;
}

bool gapped(const EigenPair2D& e, double floor) { return e.gap() >= floor * std::abs(e.lambda1); }

// Node and its eight neighbours all gapped.
std::vector<bool> gapped_mask(const Grid& grid, const std::vector<EigenPair2D>& e, double floor) {
  std::vector<bool> ok(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const int i = grid.row(k), j = grid.col(k);
    bool all = true;
    for (int di = -1; di <= 1 && all; ++di) {
      for (int dj = -1; dj <= 1 && all; ++dj) all = gapped(e[grid.index(i + di, j + dj)], floor);
    }
    ok[k] = all;
  }
  return ok;
}

std::size_t argmax_of(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[best]) best = k;
  }
  return best;
}

}  // namespace

void MonitorConfig::validate() const {
  if (!(phi_slope >= 0.0)) throw ArgumentError("monitor.phi_slope must be nonnegative");
  if (!(gap_floor > 0.0 && gap_floor < 1.0)) throw ArgumentError("monitor.gap_floor must lie in (0, 1)");
  if (!(large_lambda_factor > 0.0)) throw ArgumentError("monitor.large_lambda_factor must be positive");
  if (!(dominance_ratio > 1.0)) throw ArgumentError("monitor.dominance_ratio must exceed 1");
  if (!(derivative_bound_constant > 0.0)) throw ArgumentError("monitor.derivative_bound_constant must be positive");
  if (!(commutation_constant > 0.0)) throw ArgumentError("monitor.commutation_constant must be positive");
}

// ---------------------------------------------------------------------------

EstimateReport check_c0(const ScalarField& u, const ProblemSpec& spec, const GeometryConstants& consts) {
  require_admissible(spec.g, perturbed_metric(u, spec), "check_c0");
  const std::size_t hi = argmax_of(u.values());
  const double bound = consts.c_upper * consts.diameter * consts.diameter / 2.0;
  return make_report("c0_oscillation", bound, u.max() - u.min(), u.grid().row(hi), u.grid().col(hi));
}

EstimateReport check_c1(const ScalarField& u, const ProblemSpec& spec, const GeometryConstants& consts) {
  require_admissible(spec.g, perturbed_metric(u, spec), "check_c1");
  const ScalarField grad2 = gradient_norm_sq(u, spec.g);
  const std::size_t at = argmax_of(grad2.values());
  const double bound = std::pow(consts.c_upper * consts.diameter, 2);
  return make_report("c1_gradient_sq", bound, grad2[at], u.grid().row(at), u.grid().col(at));
}

EstimateReport check_commutation(const ScalarField& u, const Sym2Field& g, const ConnectionField& conn,
                                 double stencil_constant) {
  require_same_grid(u.grid(), g.grid(), "check_commutation");
  require_same_grid(u.grid(), conn.grid(), "check_commutation");
  const Grid& grid = u.grid();
  const std::size_t size = grid.size();

  // du, then Hess u = D(du) - Gamma du, all with centered first differences.
  const std::vector<Vec2> du = gradient(u);
  std::vector<double> dx(size), dy(size);
  for (std::size_t k = 0; k < size; ++k) {
    dx[k] = du[k][0];
    dy[k] = du[k][1];
  }
  std::vector<Sym2> hess(size);
  parallel_for(size, [&](std::size_t k) {
    const int i = grid.row(k), j = grid.col(k);
    const double xx = stencil::d1(grid, dx, i, j, 0);
    const double xy = 0.5 * (stencil::d1(grid, dx, i, j, 1) + stencil::d1(grid, dy, i, j, 0));
    const double yy = stencil::d1(grid, dy, i, j, 1);
    auto G = [&](int m, int a, int b) { return conn.gamma(k, m, a, b); };
    hess[k] = {xx - G(0, 0, 0) * du[k][0] - G(1, 0, 0) * du[k][1],
               xy - G(0, 0, 1) * du[k][0] - G(1, 0, 1) * du[k][1],
               yy - G(0, 1, 1) * du[k][0] - G(1, 1, 1) * du[k][1]};
  });
  const Components hc(Sym2Field(grid, hess));

  std::vector<double> mismatch(size);
  parallel_for(size, [&](std::size_t k) {
    const int i = grid.row(k), j = grid.col(k);
    std::array<Sym2, 2> dh;
    for (int a = 0; a < 2; ++a) {
      dh[a] = {stencil::d1(grid, hc.xx, i, j, a), stencil::d1(grid, hc.xy, i, j, a), stencil::d1(grid, hc.yy, i, j, a)};
    }
    auto G = [&](int m, int a, int b) { return conn.gamma(k, m, a, b); };
    // T_{abc} = (nabla_c Hess u)_{ab}
    auto T = [&](int a, int b, int c) {
      double v = dh[c](a, b);
      for (int m = 0; m < 2; ++m) v -= G(m, c, a) * hess[k](m, b) + G(m, c, b) * hess[k](a, m);
      return v;
    };
    double worst = 0.0;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        for (int c = 0; c < 2; ++c) {
          double curv = 0.0;
          for (int l = 0; l < 2; ++l) curv += conn.riemann_up(k, g[k], l, c, b, a) * du[k][l];
          worst = std::max(worst, std::abs(T(a, b, c) - T(c, a, b) + curv));
        }
      }
    }
    mismatch[k] = worst;
  });
  const std::size_t at = argmax_of(mismatch);
  const double h = grid.spacing();
  return make_report("commutation", stencil_constant * h * h, mismatch[at], grid.row(at), grid.col(at));
}

// ---------------------------------------------------------------------------

TestQuantities test_quantities(const ScalarField& u, const ProblemSpec& spec, const MonitorConfig& cfg) {
  cfg.validate();
  const Sym2Field gt = perturbed_metric(u, spec);
  require_admissible(spec.g, gt, "test_quantities");
  const auto e = eigenpairs(spec.g, gt);
  const auto du = gradient(u);
  std::vector<double> W(u.size()), Q(u.size());
  std::size_t masked = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    W[k] = std::log(e[k].lambda1);
    if (gapped(e[k], cfg.gap_floor)) {
      const double uv = dot(du[k], e[k].e1);
      Q[k] = W[k] + cfg.phi_slope * 0.5 * uv * uv;
    } else {
      Q[k] = W[k];
      ++masked;
    }
  }
  const std::size_t at = argmax_of(Q);
  return TestQuantities{ScalarField(u.grid(), std::move(W)), ScalarField(u.grid(), std::move(Q)), at, masked};
}

// ---------------------------------------------------------------------------

EigvecFieldReport eigvec_field_checks(const ScalarField& u, const ProblemSpec& spec, const MonitorConfig& cfg) {
  cfg.validate();
  require_flat(spec, "eigvec_field_checks");
  const Grid& grid = u.grid();
  const Sym2Field gt = perturbed_metric(u, spec);
  require_admissible(spec.g, gt, "eigvec_field_checks");
  const auto e = eigenpairs(spec.g, gt);
  const Components gc(gt);

  EigvecFieldReport r;
  r.tested = gapped_mask(grid, e, cfg.gap_floor);
  r.V.assign(grid.size(), Vec2{0.0, 0.0});
  r.node_first_error.assign(grid.size(), 0.0);
  r.node_second_error.assign(grid.size(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (gapped(e[k], cfg.gap_floor)) {
      r.V[k] = e[k].e1;
      r.norm_defect = std::max(r.norm_defect, std::abs(spec.g[k].quad(r.V[k]) - 1.0));
    }
    if (!r.tested[k]) ++r.masked;
  }

  double first_diff = 0.0, second_diff = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!r.tested[k]) continue;
    const int i = grid.row(k), j = grid.col(k);
    const EigenPair2D& p = e[k];
    const Vec2 frame[2] = {p.e1, p.e2};
    const double gap = p.gap();
    const TensorDerivatives dg = tensor_derivatives(grid, gc, k);

    // Sign-aligned V on the 3x3 patch.
    auto V = [&](int di, int dj) {
      Vec2 v = e[grid.index(i + di, j + dj)].e1;
      if (dot(v, p.e1) < 0.0) v = {-v[0], -v[1]};
      return v;
    };
    const double h = grid.spacing();
    Vec2 dV[2], dVxx, dVyy, dVxy;
    for (int c = 0; c < 2; ++c) {
      dV[0][c] = (V(1, 0)[c] - V(-1, 0)[c]) / (2.0 * h);
      dV[1][c] = (V(0, 1)[c] - V(0, -1)[c]) / (2.0 * h);
      dVxx[c] = (V(1, 0)[c] - 2.0 * V(0, 0)[c] + V(-1, 0)[c]) / (h * h);
      dVyy[c] = (V(0, 1)[c] - 2.0 * V(0, 0)[c] + V(0, -1)[c]) / (h * h);
      dVxy[c] = (V(1, 1)[c] - V(1, -1)[c] - V(-1, 1)[c] + V(-1, -1)[c]) / (4.0 * h * h);
    }

    for (int a = 0; a < 2; ++a) {
      const Vec2& dir = frame[a];
      const Sym2 d1g = dg.along(dir);
      const Sym2 d2g = dg.along2(dir);
      const double g11_i = d1g.bilinear(p.e1, p.e1);
      const double g12_i = d1g.bilinear(p.e1, p.e2);
      const double g22_i = d1g.bilinear(p.e2, p.e2);
      const double g12_ii = d2g.bilinear(p.e1, p.e2);

      const double v2_formula = g12_i / gap;
      const double v2_ii_formula = (2.0 * v2_formula * g22_i + g12_ii - 2.0 * g11_i * v2_formula) / gap;
      const double v1_ii_formula = -v2_formula * v2_formula;

      const Vec2 dir_dV = {dir[0] * dV[0][0] + dir[1] * dV[1][0], dir[0] * dV[0][1] + dir[1] * dV[1][1]};
      Vec2 dir2_dV;
      for (int c = 0; c < 2; ++c) {
        dir2_dV[c] = dir[0] * dir[0] * dVxx[c] + 2.0 * dir[0] * dir[1] * dVxy[c] + dir[1] * dir[1] * dVyy[c];
      }
      const double v2_fd = dot(p.e2, dir_dV);
      const double v1_fd = dot(p.e1, dir_dV);
      const double v2_ii_fd = dot(p.e2, dir2_dV);
      const double v1_ii_fd = dot(p.e1, dir2_dV);

      r.node_first_error[k] = std::max(r.node_first_error[k], std::abs(v2_formula - v2_fd));
      r.node_second_error[k] =
          std::max({r.node_second_error[k], std::abs(v2_ii_formula - v2_ii_fd), std::abs(v1_ii_formula - v1_ii_fd)});
      first_diff = std::max(first_diff, std::abs(v2_formula - v2_fd));
      r.tangential_first = std::max(r.tangential_first, std::abs(v1_fd));
      r.first_scale = std::max(r.first_scale, std::abs(v2_fd));
      second_diff = std::max({second_diff, std::abs(v2_ii_formula - v2_ii_fd), std::abs(v1_ii_formula - v1_ii_fd)});
      r.second_scale = std::max({r.second_scale, std::abs(v2_ii_fd), std::abs(v1_ii_fd)});
    }
  }
  r.first_error = r.first_scale > 0.0 ? first_diff / r.first_scale : first_diff;
  r.second_error = r.second_scale > 0.0 ? second_diff / r.second_scale : second_diff;
  return r;
}

// ---------------------------------------------------------------------------

StructuralReport structural_report(const ScalarField& u, const ProblemSpec& spec, const MonitorConfig& cfg) {
  cfg.validate();
  require_flat(spec, "structural_report");
  const Grid& grid = u.grid();
  const Sym2Field gt = perturbed_metric(u, spec);
  require_admissible(spec.g, gt, "structural_report");
  const auto e = eigenpairs(spec.g, gt);
  const Components gc(gt);

  std::vector<double> l1(grid.size()), logl1(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    l1[k] = e[k].lambda1;
    logl1[k] = std::log(e[k].lambda1);
  }
  std::vector<double> sorted = l1;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];

  const std::vector<bool> gap_ok = gapped_mask(grid, e, cfg.gap_floor);
  StructuralReport r;
  r.deficit.assign(grid.size(), 0.0);
  r.tested_mask.assign(grid.size(), false);
  r.empirical_C = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const EigenPair2D& p = e[k];
    const bool large = p.lambda1 >= cfg.large_lambda_factor * median || p.lambda1 >= cfg.dominance_ratio * p.lambda2;
    if (!gap_ok[k] || !large) continue;
    const int i = grid.row(k), j = grid.col(k);
    const KernelDerivatives d = derivatives(p);
    const Sym2 hessW{stencil::d2(grid, logl1, i, j, 0), stencil::dxy(grid, logl1, i, j),
                     stencil::d2(grid, logl1, i, j, 1)};
    const double LF = d.Fi[0] * hessW.quad(p.e1) + d.Fi[1] * hessW.quad(p.e2);
    const double g11_1 = tensor_derivatives(grid, gc, k).along(p.e1).bilinear(p.e1, p.e1);
    const double R = d.Fi[0] * g11_1 * g11_1 / (p.lambda1 * p.lambda1);
    r.deficit[k] = R - LF;
    r.tested_mask[k] = true;
    ++r.tested;
    if (r.deficit[k] > r.empirical_C) {
      r.empirical_C = r.deficit[k];
      r.location = k;
    }
  }
  r.applicable = r.tested > 0;
  if (!r.applicable) r.empirical_C = std::numeric_limits<double>::quiet_NaN();
  return r;
}

// ---------------------------------------------------------------------------

ExtremalReport extremal_system_residual(const ScalarField& u, std::size_t node, const ProblemSpec& spec,
                                        const MonitorConfig& cfg) {
  cfg.validate();
  require_flat(spec, "extremal_system_residual");
  const Grid& grid = u.grid();
  if (node >= grid.size()) throw ArgumentError("extremal_system_residual: node index out of range");
  const TestQuantities tq = test_quantities(u, spec, cfg);
  const int i = grid.row(node), j = grid.col(node);
  for (int di = -1; di <= 1; ++di) {
    for (int dj = -1; dj <= 1; ++dj) {
      if (tq.Qtilde(i + di, j + dj) > tq.Qtilde[node]) {
        throw ArgumentError("extremal_system_residual: node " + std::to_string(node) + " is not a local maximum of Q");
      }
    }
  }

  const Sym2Field gt = perturbed_metric(u, spec);
  const EigenPair2D p = eigen_decompose(spec.g[node], gt[node]);
  ExtremalReport r;
  for (int di = -1; di <= 1; ++di) {
    for (int dj = -1; dj <= 1; ++dj) {
      const std::size_t nb = grid.index(i + di, j + dj);
      if (!gapped(eigen_decompose(spec.g[nb], gt[nb]), cfg.gap_floor)) r.at_mask_boundary = true;
    }
  }
  r.node = node;
  r.lambda1 = p.lambda1;
  r.lambda2 = p.lambda2;
  r.vacuous = p.lambda1 < cfg.dominance_ratio * p.lambda2;

  const double A = cfg.phi_slope;
  const double l1 = p.lambda1, l2 = p.lambda2, gap = p.gap();
  const Vec2 du = gradient(u)[node];
  const double u1 = dot(du, p.e1), u2 = dot(du, p.e2);

  const TensorDerivatives dg = tensor_derivatives(grid, Components(gt), node);
  const TensorDerivatives dchi = tensor_derivatives(grid, Components(spec.chi), node);
  const Sym2 g_1 = dg.along(p.e1), g_2 = dg.along(p.e2);
  const double g11_1 = g_1.bilinear(p.e1, p.e1), g11_2 = g_2.bilinear(p.e1, p.e1);
  const double g12_1 = g_1.bilinear(p.e1, p.e2), g12_2 = g_2.bilinear(p.e1, p.e2);
  const double g22_1 = g_1.bilinear(p.e2, p.e2), g22_2 = g_2.bilinear(p.e2, p.e2);
  const double chi11 = spec.chi[node].bilinear(p.e1, p.e1);
  const double chi12 = spec.chi[node].bilinear(p.e1, p.e2);
  // g~_{12,1} = g~_{11,2} + c1 and g~_{12,2} = g~_{22,1} + c2, with c from chi on the flat torus.
  const Sym2 c_1 = dchi.along(p.e1), c_2 = dchi.along(p.e2);
  const double c1 = c_1.bilinear(p.e1, p.e2) - c_2.bilinear(p.e1, p.e1);
  const double c2 = c_2.bilinear(p.e1, p.e2) - c_1.bilinear(p.e2, p.e2);

  const double V2_1 = g12_1 / gap, V2_2 = g12_2 / gap;
  r.residual[0] = g11_1 / l1 + A * u1 * (V2_1 * u2 + l1 - chi11);
  r.residual[1] = g11_2 / l1 + A * u1 * (V2_2 * u2 - chi12);

  // Right-hand side f = exp(int u + Psi) and its derivatives along the frame.
  const double f = std::exp(integrate(u, spec.g) + spec.psi[node]);
  const double psi_x = stencil::d1(grid, spec.psi.values(), i, j, 0);
  const double psi_y = stencil::d1(grid, spec.psi.values(), i, j, 1);
  const double f1 = f * (p.e1[0] * psi_x + p.e1[1] * psi_y);

  // Merged linear system for X = g~_{11,1}, Y = g~_{11,2}.
  const double beta = A * u1 * u2 / gap;
  const double r2 = l2 * l2;
  const double m11 = 1.0 / l1, m12 = beta;
  const double m21 = -beta * r2 / (l1 * l1), m22 = 1.0 / l1;
  const double b1 = -A * u1 * (c1 * u2 / gap + l1 - chi11);
  const double b2 = -beta * (f1 * r2 / (f * f) + c2) + A * u1 * chi12;
  const double det = m11 * m22 - m12 * m21;
  r.merged = {(b1 * m22 - m12 * b2) / det, (m11 * b2 - m21 * b1) / det};
  r.differenced = {g11_1, g11_2};
  r.merged_error = {std::abs(r.merged[0] - g11_1), std::abs(r.merged[1] - g11_2)};

  // Derivative bounds at the extremum, |.| < C * scale.
  const double Aeff = A > 0.0 ? A : std::numeric_limits<double>::quiet_NaN();
  r.scaled = {std::abs(g11_1) / (Aeff * l1 * l1), std::abs(g11_2) / (Aeff * l1), std::abs(g22_1) / Aeff,
              std::abs(g22_2)};
  const char* names[4] = {"extremal_g11_1", "extremal_g11_2", "extremal_g22_1", "extremal_g22_2"};
  for (int b = 0; b < 4; ++b) {
    r.bounds[b] = make_report(names[b], cfg.derivative_bound_constant, r.scaled[b], i, j);
    if (std::isnan(r.scaled[b])) r.bounds[b].pass = true;
  }
  return r;
}

}  // namespace hq
