#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace vcsim {

/// The parts of a summary JSON the comparison report needs.
struct SummaryDigest {
  std::size_t n_detectors = 0;
  std::string topology;
  std::string controller;
  std::size_t generated = 0, success = 0, late = 0, lost = 0, uncovered = 0;
  std::map<std::string, double> mean_delay;  // keyed as in the JSON, e.g. "d_up_s"
};

SummaryDigest parse_summary_json(const std::string& text);

struct ReportRow {
  std::size_t n_detectors = 0;
  std::string topology;
  std::string controller;
  std::size_t runs = 0;
  std::size_t generated = 0, success = 0, late = 0, lost = 0, uncovered = 0;
  /// Means weighted by the number of replied beacons of each run.
  std::map<std::string, double> mean_delay;
};

/// Rows keyed by (n_detectors, topology, controller), in key order, followed
/// by a totals row with topology and controller "all".
std::vector<ReportRow> aggregate(const std::vector<SummaryDigest>& summaries);

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);

}  // namespace vcsim
