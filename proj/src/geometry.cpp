#include "hq/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include "hq/error.hpp"
#include "hq/kernel.hpp"
#include "hq/parallel.hpp"

namespace hq {

namespace stencil {

double d1(const Grid& grid, std::span<const double> u, int i, int j, int axis) {
  const double h = grid.spacing();
  if (axis == 0) return (u[grid.index(i + 1, j)] - u[grid.index(i - 1, j)]) / (2.0 * h);
  return (u[grid.index(i, j + 1)] - u[grid.index(i, j - 1)]) / (2.0 * h);
}

double d2(const Grid& grid, std::span<const double> u, int i, int j, int axis) {
  const double h = grid.spacing();
  const double c = u[grid.index(i, j)];
  if (axis == 0) return (u[grid.index(i + 1, j)] - 2.0 * c + u[grid.index(i - 1, j)]) / (h * h);
  return (u[grid.index(i, j + 1)] - 2.0 * c + u[grid.index(i, j - 1)]) / (h * h);
}

double dxy(const Grid& grid, std::span<const double> u, int i, int j) {
  const double h = grid.spacing();
  return (u[grid.index(i + 1, j + 1)] - u[grid.index(i + 1, j - 1)] - u[grid.index(i - 1, j + 1)] +
          u[grid.index(i - 1, j - 1)]) /
         (4.0 * h * h);
}

}  // namespace stencil

std::vector<Vec2> gradient(const ScalarField& u) {
  const Grid& grid = u.grid();
  std::vector<Vec2> du(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) {
    const int i = grid.row(k), j = grid.col(k);
    du[k] = {stencil::d1(grid, u.values(), i, j, 0), stencil::d1(grid, u.values(), i, j, 1)};
  });
  return du;
}

ScalarField gradient_norm_sq(const ScalarField& u, const Sym2Field& g) {
  require_same_grid(u.grid(), g.grid(), "gradient_norm_sq");
  const auto du = gradient(u);
  std::vector<double> out(du.size());
  for (std::size_t k = 0; k < du.size(); ++k) out[k] = g[k].inverse().quad(du[k]);
  return ScalarField(u.grid(), std::move(out));
}

ConnectionField connection_from_metric(const Sym2Field& g) {
  require_metric(g);
  const Grid& grid = g.grid();
  const std::size_t size = grid.size();

  // dg[a] holds d_a g as a symmetric tensor.
  std::vector<double> comp[3];
  for (auto& c : comp) c.resize(size);
  for (std::size_t k = 0; k < size; ++k) {
    comp[0][k] = g[k].xx;
    comp[1][k] = g[k].xy;
    comp[2][k] = g[k].yy;
  }
  std::vector<std::array<Sym2, 2>> dg(size);
  parallel_for(size, [&](std::size_t k) {
    const int i = grid.row(k), j = grid.col(k);
    for (int a = 0; a < 2; ++a) {
      dg[k][a] = {stencil::d1(grid, comp[0], i, j, a), stencil::d1(grid, comp[1], i, j, a),
                  stencil::d1(grid, comp[2], i, j, a)};
    }
  });

  std::vector<ConnectionField::Symbols> gamma(size);
  parallel_for(size, [&](std::size_t k) {
    const Sym2 ginv = g[k].inverse();
    const auto& d = dg[k];
    const int pairs[3][2] = {{0, 0}, {0, 1}, {1, 1}};
    for (int up = 0; up < 2; ++up) {
      for (int p = 0; p < 3; ++p) {
        const int i = pairs[p][0], j = pairs[p][1];
        double s = 0.0;
        for (int l = 0; l < 2; ++l) s += ginv(up, l) * (d[i](j, l) + d[j](i, l) - d[l](i, j));
        gamma[k][3 * up + p] = 0.5 * s;
      }
    }
  });

  // Curvature from the Christoffels: R^l_{122} = d_1 G^l_22 - d_2 G^l_12 + G^l_1m G^m_22 - G^l_2m G^m_12.
  std::vector<double> sym[6];
  for (int s = 0; s < 6; ++s) {
    sym[s].resize(size);
    for (std::size_t k = 0; k < size; ++k) sym[s][k] = gamma[k][s];
  }
  auto G = [&](std::size_t k, int up, int i, int j) {
    const int p = (i == 0 && j == 0) ? 0 : (i == 1 && j == 1) ? 2 : 1;
    return gamma[k][3 * up + p];
  };
  std::vector<double> r1212(size), gauss(size);
  parallel_for(size, [&](std::size_t k) {
    const int i = grid.row(k), j = grid.col(k);
    double r[2];
    for (int l = 0; l < 2; ++l) {
      double v = stencil::d1(grid, sym[3 * l + 2], i, j, 0) - stencil::d1(grid, sym[3 * l + 1], i, j, 1);
      for (int m = 0; m < 2; ++m) v += G(k, l, 0, m) * G(k, m, 1, 1) - G(k, l, 1, m) * G(k, m, 0, 1);
      r[l] = v;
    }
    r1212[k] = g[k].xx * r[0] + g[k].xy * r[1];
    gauss[k] = r1212[k] / g[k].det();
  });
  return ConnectionField(grid, std::move(gamma), std::move(r1212), std::move(gauss));
}

Sym2Field covariant_hessian(const ScalarField& u, const Sym2Field& g, const ConnectionField& conn) {
  require_same_grid(u.grid(), g.grid(), "covariant_hessian");
  require_same_grid(u.grid(), conn.grid(), "covariant_hessian");
  require_metric(g);
  const Grid& grid = u.grid();
  const auto v = u.values();
  std::vector<Sym2> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) {
    const int i = grid.row(k), j = grid.col(k);
    const double ux = stencil::d1(grid, v, i, j, 0);
    const double uy = stencil::d1(grid, v, i, j, 1);
    const auto& s = conn.symbols(k);
    out[k] = {stencil::d2(grid, v, i, j, 0) - s[0] * ux - s[3] * uy,
              stencil::dxy(grid, v, i, j) - s[1] * ux - s[4] * uy,
              stencil::d2(grid, v, i, j, 1) - s[2] * ux - s[5] * uy};
  });
  return Sym2Field(grid, std::move(out));
}

std::vector<double> volume_weights(const Sym2Field& g) {
  const double h = g.grid().spacing();
  std::vector<double> w(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) w[k] = h * h * std::sqrt(g[k].det());
  return w;
}

double integrate(const ScalarField& w, const Sym2Field& g) {
  require_same_grid(w.grid(), g.grid(), "integrate");
  const double h = g.grid().spacing();
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) s += w[k] * std::sqrt(g[k].det());
  return h * h * s;
}

double graph_diameter(const Sym2Field& g) {
  require_metric(g);
  const Grid& grid = g.grid();
  const int n = grid.n();
  const double h = grid.spacing();
  constexpr int offsets[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

  auto edge = [&](std::size_t p, std::size_t q, int di, int dj) {
    const Sym2 avg = 0.5 * (g[p] + g[q]);
    return std::sqrt(avg.quad({di * h, dj * h}));
  };

  double diameter = 0.0;
  std::vector<double> dist(grid.size());
  using Item = std::pair<double, std::size_t>;
  for (int s = 0; s < 4; ++s) {
    for (int t = 0; t < 4; ++t) {
      std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
      const std::size_t src = grid.index(s * n / 4, t * n / 4);
      std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
      dist[src] = 0.0;
      queue.push({0.0, src});
      while (!queue.empty()) {
        const auto [d, p] = queue.top();
        queue.pop();
        if (d > dist[p]) continue;
        const int i = grid.row(p), j = grid.col(p);
        for (const auto& o : offsets) {
          const std::size_t q = grid.index(i + o[0], j + o[1]);
          const double nd = d + edge(p, q, o[0], o[1]);
          if (nd < dist[q]) {
            dist[q] = nd;
            queue.push({nd, q});
          }
        }
      }
      diameter = std::max(diameter, *std::max_element(dist.begin(), dist.end()));
    }
  }
  return diameter;
}

GeometryConstants geometry_constants(const Sym2Field& chi, const Sym2Field& g) {
  require_same_grid(chi.grid(), g.grid(), "geometry_constants");
  require_metric(g);
  GeometryConstants c;
  double upper = -std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const EigenPair2D e = eigen_decompose(g[k], chi[k]);
    upper = std::max(upper, e.lambda1);
    lower = std::max(lower, -e.lambda2);
  }
  c.c_upper = std::max(upper, 0.0);
  c.c_lower = std::max(lower, 0.0);
  c.diameter = graph_diameter(g);
  return c;
}

}  // namespace hq
