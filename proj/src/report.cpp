#include "hq/report.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace hq {

EstimateReport make_report(std::string name, double bound, double observed, int node_i, int node_j) {
  EstimateReport r;
  r.name = std::move(name);
  r.bound = bound;
  r.observed = observed;
  r.margin = bound - observed;
  r.pass = EstimateReport::passes(r.margin, bound);
  r.node_i = node_i;
  r.node_j = node_j;
  return r;
}

EstimateReport make_interval_report(std::string name, double lower, double upper, double observed) {
  EstimateReport r;
  r.name = std::move(name);
  r.bound = upper;
  r.lower = lower;
  r.observed = observed;
  r.margin = std::min(upper - observed, observed - lower);
  r.pass = EstimateReport::passes(r.margin, std::max(std::abs(upper), std::abs(lower)));
  return r;
}

void write_report_header(std::ostream& out) { out << "name,bound,observed,margin,pass,node_i,node_j\n"; }

void write_report_row(std::ostream& out, const EstimateReport& r) {
  out << r.name << ',' << std::setprecision(17) << r.bound << ',' << r.observed << ',' << r.margin << ','
      << (r.pass ? 1 : 0) << ',' << r.node_i << ',' << r.node_j << '\n';
}

std::string summary_line(const EstimateReport& r) {
  std::ostringstream s;
  s << std::setprecision(6);
  if (std::isinf(r.bound)) {
    s << "INFO " << r.name << ": observed=" << r.observed;
    if (r.node_i >= 0) s << " at (" << r.node_i << ',' << r.node_j << ')';
    return s.str();
  }
  s << (r.pass ? "PASS " : "FAIL ") << r.name << ": observed=" << r.observed;
  if (!std::isnan(r.lower)) s << " lower=" << r.lower;
  s << " bound=" << r.bound << " margin=" << r.margin;
  if (r.node_i >= 0) s << " at (" << r.node_i << ',' << r.node_j << ')';
  return s.str();
}

}  // namespace hq
