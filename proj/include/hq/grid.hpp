#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "hq/sym2.hpp"

namespace hq {

/// Uniform periodic grid on the square torus [0, L)^2.
///
/// Node (i, j) sits at (i*h, j*h) and is stored at flat index i*n + j, so the
/// first index runs along x and is the slow (row) index. Indices wrap modulo n.
class Grid {
 public:
  explicit Grid(int n_per_axis, double period_length = 2.0 * std::numbers::pi);

  int n() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  double spacing() const noexcept { return length_ / n_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_; }

  int wrap(int i) const noexcept { return ((i % n_) + n_) % n_; }
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(wrap(i)) * n_ + wrap(j);
  }
  int row(std::size_t k) const noexcept { return static_cast<int>(k / n_); }
  int col(std::size_t k) const noexcept { return static_cast<int>(k % n_); }
  double x(int i) const noexcept { return i * spacing(); }
  double y(int j) const noexcept { return j * spacing(); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int n_;
  double length_;
};

/// Throws DimensionError unless the grids agree.
void require_same_grid(const Grid& a, const Grid& b, const char* what);

/// One real per node.
class ScalarField {
 public:
  explicit ScalarField(const Grid& grid, double value = 0.0);
  ScalarField(const Grid& grid, std::vector<double> values);

  static ScalarField sample(const Grid& grid, const std::function<double(double, double)>& fn);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  std::span<const double> values() const noexcept { return values_; }

  double max() const;
  double min() const;
  double sup_norm() const;

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(double s, const ScalarField& a);
  ScalarField operator+(double c) const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Symmetric (2,0) tensor per node; only three components are stored.
class Sym2Field {
 public:
  explicit Sym2Field(const Grid& grid, const Sym2& value = {});
  Sym2Field(const Grid& grid, std::vector<Sym2> values);

  static Sym2Field sample(const Grid& grid, const std::function<Sym2(double, double)>& fn);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  const Sym2& operator[](std::size_t k) const { return values_[k]; }
  const Sym2& operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  std::span<const Sym2> values() const noexcept { return values_; }

  /// Single component as a scalar field (r, s in {0, 1}).
  ScalarField component(int r, int s) const;

  friend Sym2Field operator+(const Sym2Field& a, const Sym2Field& b);
  friend Sym2Field operator*(double s, const Sym2Field& a);

 private:
  Grid grid_;
  std::vector<Sym2> values_;
};

/// Throws GeometryError at the first node where g is not positive definite.
void require_metric(const Sym2Field& g);

/// Christoffel symbols and curvature of a metric on the grid.
///
/// Christoffels are stored per node as
/// {G^1_11, G^1_12, G^1_22, G^2_11, G^2_12, G^2_22} (0-based upper index k).
/// The single independent curvature component is R_1212 = K * det g with K
/// the Gauss curvature, so R(X,Y)Z = K (g(Y,Z) X - g(X,Z) Y).
class ConnectionField {
 public:
  using Symbols = std::array<double, 6>;

  ConnectionField(const Grid& grid, std::vector<Symbols> gamma, std::vector<double> r1212,
                  std::vector<double> gauss);

  const Grid& grid() const noexcept { return grid_; }
  double gamma(std::size_t node, int k, int i, int j) const {
    const int pair = (i == 0 && j == 0) ? 0 : (i == 1 && j == 1) ? 2 : 1;
    return gamma_[node][3 * k + pair];
  }
  const Symbols& symbols(std::size_t node) const { return gamma_[node]; }
  double r1212(std::size_t node) const { return r1212_[node]; }
  double gauss_curvature(std::size_t node) const { return gauss_[node]; }
  /// R^l_{abc} in the convention R(d_a, d_b) d_c = R^l_{abc} d_l.
  double riemann_up(std::size_t node, const Sym2& g, int l, int a, int b, int c) const;

 private:
  Grid grid_;
  std::vector<Symbols> gamma_;
  std::vector<double> r1212_;
  std::vector<double> gauss_;
};

/// Plain-text field format: a header line "N L" followed by N^2 reals in
/// flat-index order, one per line.
void write_field(std::ostream& out, const ScalarField& field);
ScalarField read_field(std::istream& in);
void write_field_file(const std::string& path, const ScalarField& field);
ScalarField read_field_file(const std::string& path);

}  // namespace hq
