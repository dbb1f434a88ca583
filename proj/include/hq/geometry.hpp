#pragma once

#include <vector>

#include "hq/grid.hpp"
#include "hq/sym2.hpp"

namespace hq {

/// Second-order centered periodic difference stencils on flat buffers.
namespace stencil {

/// d/dx (axis 0) or d/dy (axis 1), (u[+1] - u[-1]) / 2h.
double d1(const Grid& grid, std::span<const double> u, int i, int j, int axis);
/// d^2/dx^2 or d^2/dy^2, three-point.
double d2(const Grid& grid, std::span<const double> u, int i, int j, int axis);
/// d^2/dxdy, four-point cross (equals d1 along x composed with d1 along y).
double dxy(const Grid& grid, std::span<const double> u, int i, int j);

}  // namespace stencil

/// Centered-difference gradient (covariant components du_i).
std::vector<Vec2> gradient(const ScalarField& u);

/// |du|_g^2 = g^{ij} u_i u_j per node.
ScalarField gradient_norm_sq(const ScalarField& u, const Sym2Field& g);

/// Levi-Civita connection and Gauss curvature of g by centered differences.
ConnectionField connection_from_metric(const Sym2Field& g);

/// (Hess u)_ij = d_i d_j u - Gamma^k_ij d_k u.
Sym2Field covariant_hessian(const ScalarField& u, const Sym2Field& g, const ConnectionField& conn);

/// h^2 sum_nodes w sqrt(det g), summed in flat-index order.
double integrate(const ScalarField& w, const Sym2Field& g);

/// Per-node quadrature weights h^2 sqrt(det g).
std::vector<double> volume_weights(const Sym2Field& g);

/// Bounds -c_lower g <= chi <= c_upper g and the g-diameter of the torus.
struct GeometryConstants {
  /// Multiplicative distortion allowance for 8-neighbour graph distances.
  static constexpr double graph_correction = 1.09;

  double c_upper = 0.0;
  double c_lower = 0.0;
  double diameter = 0.0;  ///< graph (Dijkstra) estimate

  double corrected_diameter() const { return graph_correction * diameter; }
};

GeometryConstants geometry_constants(const Sym2Field& chi, const Sym2Field& g);

/// Largest graph distance from the sampled source nodes over the 8-neighbour
/// periodic lattice, with edge lengths measured in the endpoint-averaged metric.
double graph_diameter(const Sym2Field& g);

}  // namespace hq
