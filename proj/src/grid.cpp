#include "hq/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "hq/error.hpp"

namespace hq {

Grid::Grid(int n_per_axis, double period_length) : n_(n_per_axis), length_(period_length) {
  if (n_ < 8 || n_ % 2 != 0) {
    throw ArgumentError("grid: n_per_axis must be even and >= 8, got " + std::to_string(n_));
  }
  if (!(length_ > 0.0) || !std::isfinite(length_)) {
    throw ArgumentError("grid: period length must be positive");
  }
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) {
    throw DimensionError(std::string(what) + ": fields live on different grids");
  }
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(const Grid& grid, double value) : grid_(grid), values_(grid.size(), value) {}

ScalarField::ScalarField(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw DimensionError("scalar field: expected " + std::to_string(grid_.size()) + " values, got " +
                         std::to_string(values_.size()));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) throw NodeError("scalar field: non-finite value", k);
  }
}

ScalarField ScalarField::sample(const Grid& grid, const std::function<double(double, double)>& fn) {
  std::vector<double> v(grid.size());
  for (int i = 0; i < grid.n(); ++i) {
    for (int j = 0; j < grid.n(); ++j) v[grid.index(i, j)] = fn(grid.x(i), grid.y(j));
  }
  return ScalarField(grid, std::move(v));
}

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid_, b.grid_, "field sum");
  std::vector<double> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a.values_[k] + b.values_[k];
  return ScalarField(a.grid_, std::move(v));
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid_, b.grid_, "field difference");
  std::vector<double> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a.values_[k] - b.values_[k];
  return ScalarField(a.grid_, std::move(v));
}

ScalarField operator*(double s, const ScalarField& a) {
  std::vector<double> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = s * a.values_[k];
  return ScalarField(a.grid_, std::move(v));
}

ScalarField ScalarField::operator+(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x += c;
  return ScalarField(grid_, std::move(v));
}

// ---------------------------------------------------------------------------

Sym2Field::Sym2Field(const Grid& grid, const Sym2& value) : grid_(grid), values_(grid.size(), value) {}

Sym2Field::Sym2Field(const Grid& grid, std::vector<Sym2> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw DimensionError("tensor field: expected " + std::to_string(grid_.size()) + " values, got " +
                         std::to_string(values_.size()));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const Sym2& s = values_[k];
    if (!std::isfinite(s.xx) || !std::isfinite(s.xy) || !std::isfinite(s.yy)) {
      throw NodeError("tensor field: non-finite entry", k);
    }
  }
}

Sym2Field Sym2Field::sample(const Grid& grid, const std::function<Sym2(double, double)>& fn) {
  std::vector<Sym2> v(grid.size());
  for (int i = 0; i < grid.n(); ++i) {
    for (int j = 0; j < grid.n(); ++j) v[grid.index(i, j)] = fn(grid.x(i), grid.y(j));
  }
  return Sym2Field(grid, std::move(v));
}

ScalarField Sym2Field::component(int r, int s) const {
  std::vector<double> v(values_.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = values_[k](r, s);
  return ScalarField(grid_, std::move(v));
}

Sym2Field operator+(const Sym2Field& a, const Sym2Field& b) {
  require_same_grid(a.grid_, b.grid_, "tensor sum");
  std::vector<Sym2> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a.values_[k] + b.values_[k];
  return Sym2Field(a.grid_, std::move(v));
}

Sym2Field operator*(double s, const Sym2Field& a) {
  std::vector<Sym2> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = s * a.values_[k];
  return Sym2Field(a.grid_, std::move(v));
}

void require_metric(const Sym2Field& g) {
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g[k].positive_definite()) throw GeometryError("metric is not positive definite", k);
  }
}

// ---------------------------------------------------------------------------

ConnectionField::ConnectionField(const Grid& grid, std::vector<Symbols> gamma, std::vector<double> r1212,
                                 std::vector<double> gauss)
    : grid_(grid), gamma_(std::move(gamma)), r1212_(std::move(r1212)), gauss_(std::move(gauss)) {
  if (gamma_.size() != grid_.size() || r1212_.size() != grid_.size() || gauss_.size() != grid_.size()) {
    throw DimensionError("connection field: buffer length does not match grid");
  }
}

double ConnectionField::riemann_up(std::size_t node, const Sym2& g, int l, int a, int b, int c) const {
  const double K = gauss_[node];
  const double dla = (l == a) ? 1.0 : 0.0;
  const double dlb = (l == b) ? 1.0 : 0.0;
  return K * (dla * g(b, c) - dlb * g(a, c));
}

// ---------------------------------------------------------------------------

void write_field(std::ostream& out, const ScalarField& field) {
  const Grid& grid = field.grid();
  out << grid.n() << ' ' << std::setprecision(17) << grid.length() << '\n';
  for (double v : field.values()) out << std::setprecision(17) << v << '\n';
}

ScalarField read_field(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw DimensionError("field file: missing header");
  std::istringstream hs(header);
  int n = 0;
  double length = 0.0;
  if (!(hs >> n >> length)) throw DimensionError("field file: malformed header '" + header + "'");
  Grid grid(n, length);
  std::vector<double> values;
  values.reserve(grid.size());
  std::string line;
  while (values.size() < grid.size() && std::getline(in, line)) {
    if (line.empty()) continue;
    double v = 0.0;
    const char* first = line.data();
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc()) throw DimensionError("field file: bad value '" + line + "'");
    values.push_back(v);
  }
  return ScalarField(grid, std::move(values));
}

void write_field_file(const std::string& path, const ScalarField& field) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_field(out, field);
}

ScalarField read_field_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_field(in);
}

}  // namespace hq
