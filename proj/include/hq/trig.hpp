#pragma once

#include <string>
#include <vector>

#include "hq/grid.hpp"

namespace hq {

/// amplitude * fx(kx * x) * fy(ky * y) with fx, fy in {cos, sin}.
struct TrigTerm {
  enum class Fn { cos, sin };
  double amplitude = 0.0;
  Fn fx = Fn::cos;
  int kx = 0;
  Fn fy = Fn::cos;
  int ky = 0;

  double operator()(double x, double y) const;
};

/// Sum of trig terms. Text form: terms separated by ';', each
/// "<amplitude> <cos|sin> <kx> <cos|sin> <ky>", e.g. "0.3 sin 1 sin 1; 0.1 cos 2 cos 0".
/// An empty string is the zero function.
class TrigSeries {
 public:
  TrigSeries() = default;
  explicit TrigSeries(std::vector<TrigTerm> terms) : terms_(std::move(terms)) {}

  static TrigSeries parse(const std::string& text);

  const std::vector<TrigTerm>& terms() const { return terms_; }
  double operator()(double x, double y) const;
  ScalarField sample(const Grid& grid) const;

 private:
  std::vector<TrigTerm> terms_;
};

}  // namespace hq
