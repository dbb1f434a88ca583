#include "hq/trig.hpp"

#include <cmath>
#include <sstream>

#include "hq/error.hpp"

namespace hq {

namespace {

double eval(TrigTerm::Fn fn, double arg) { return fn == TrigTerm::Fn::cos ? std::cos(arg) : std::sin(arg); }

TrigTerm::Fn parse_fn(const std::string& word, const std::string& term) {
  if (word == "cos") return TrigTerm::Fn::cos;
  if (word == "sin") return TrigTerm::Fn::sin;
  throw ArgumentError("trig term '" + term + "': expected cos or sin, got '" + word + "'");
}

}  // namespace

double TrigTerm::operator()(double x, double y) const { return amplitude * eval(fx, kx * x) * eval(fy, ky * y); }

TrigSeries TrigSeries::parse(const std::string& text) {
  std::vector<TrigTerm> terms;
  std::stringstream all(text);
  std::string piece;
  while (std::getline(all, piece, ';')) {
    std::istringstream in(piece);
    std::string fx, fy, extra;
    TrigTerm term;
    if (!(in >> term.amplitude)) {
      if (piece.find_first_not_of(" \t") == std::string::npos) continue;
      throw ArgumentError("trig term '" + piece + "': missing amplitude");
    }
    if (!(in >> fx >> term.kx >> fy >> term.ky)) {
      throw ArgumentError("trig term '" + piece + "': expected '<amp> <cos|sin> <kx> <cos|sin> <ky>'");
    }
    if (in >> extra) throw ArgumentError("trig term '" + piece + "': trailing '" + extra + "'");
    term.fx = parse_fn(fx, piece);
    term.fy = parse_fn(fy, piece);
    terms.push_back(term);
  }
  return TrigSeries(std::move(terms));
}

double TrigSeries::operator()(double x, double y) const {
  double s = 0.0;
  for (const TrigTerm& t : terms_) s += t(x, y);
  return s;
}

ScalarField TrigSeries::sample(const Grid& grid) const {
  return ScalarField::sample(grid, [this](double x, double y) { return (*this)(x, y); });
}

}  // namespace hq
