#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace hq {

/// Outcome of one a priori estimate: observed value against its bound.
struct EstimateReport {
  std::string name;
  double bound = 0.0;
  double observed = 0.0;
  double margin = 0.0;  ///< bound - observed (two-sided: distance to the nearer bound)
  bool pass = false;
  int node_i = -1;
  int node_j = -1;
  double lower = std::numeric_limits<double>::quiet_NaN();  ///< set for two-sided bounds

  /// pass <=> margin >= -1e-9 (1 + |bound|).
  static bool passes(double margin, double bound) { return margin >= -1e-9 * (1.0 + std::abs(bound)); }
};

EstimateReport make_report(std::string name, double bound, double observed, int node_i = -1,
                           int node_j = -1);

/// Two-sided: lower <= observed <= upper.
EstimateReport make_interval_report(std::string name, double lower, double upper, double observed);

/// Header "name,bound,observed,margin,pass,node_i,node_j".
void write_report_header(std::ostream& out);
void write_report_row(std::ostream& out, const EstimateReport& r);

/// One-line human summary; rows with an infinite bound are informational.
std::string summary_line(const EstimateReport& r);

}  // namespace hq
