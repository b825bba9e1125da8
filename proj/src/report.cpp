#include "vcsim/report.hpp"

#include <ostream>

#include <json.hpp>

#include "vcsim/csv.hpp"
#include "vcsim/error.hpp"
#include "vcsim/simcore.hpp"

namespace vcsim {

SummaryDigest parse_summary_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    SummaryDigest d;
    d.n_detectors = doc.at("n_detectors").get<std::size_t>();
    d.topology = doc.at("topology").get<std::string>();
    d.controller = doc.at("controller").get<std::string>();
    const auto& c = doc.at("counts");
    d.generated = c.at("generated").get<std::size_t>();
    d.success = c.at("success").get<std::size_t>();
    d.late = c.at("late").get<std::size_t>();
    d.lost = c.at("lost").get<std::size_t>();
    d.uncovered = c.at("uncovered").get<std::size_t>();
    for (const auto& [k, v] : doc.at("mean_delay").items()) d.mean_delay[k] = v.get<double>();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad summary document: ") + e.what());
  }
}

namespace {

void add(ReportRow& row, const SummaryDigest& s) {
  const double replied_before = static_cast<double>(row.success + row.late);
  const double replied = static_cast<double>(s.success + s.late);
  for (const auto& [k, v] : s.mean_delay) {
    double& m = row.mean_delay[k];
    if (replied_before + replied > 0.0) m = (m * replied_before + v * replied) / (replied_before + replied);
  }
  row.runs += 1;
  row.generated += s.generated;
  row.success += s.success;
  row.late += s.late;
  row.lost += s.lost;
  row.uncovered += s.uncovered;
}

}  // namespace

std::vector<ReportRow> aggregate(const std::vector<SummaryDigest>& summaries) {
  std::map<std::tuple<std::size_t, std::string, std::string>, ReportRow> rows;
  ReportRow total;
  total.topology = "all";
  total.controller = "all";
  for (const auto& s : summaries) {
    auto& row = rows[{s.n_detectors, s.topology, s.controller}];
    row.n_detectors = s.n_detectors;
    row.topology = s.topology;
    row.controller = s.controller;
    add(row, s);
    add(total, s);
  }
  std::vector<ReportRow> out;
  for (auto& [_, row] : rows) out.push_back(std::move(row));
  out.push_back(std::move(total));
  return out;
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "n_detectors,topology,controller,runs,generated,success,late,lost,uncovered,success_fraction";
  for (const auto& name : component_names()) out << ",mean_" << name << "_s";
  out << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const bool totals = i + 1 == rows.size();
    const std::size_t covered = r.success + r.late + r.lost;
    const double frac = covered == 0 ? 1.0 : static_cast<double>(r.success) / static_cast<double>(covered);
    out << (totals ? std::string("all") : std::to_string(r.n_detectors)) << ',' << r.topology << ',' << r.controller
        << ',' << r.runs << ',' << r.generated << ',' << r.success << ',' << r.late << ',' << r.lost << ','
        << r.uncovered << ',' << csv::fixed(frac, 6);
    for (const auto& name : component_names()) {
      auto it = r.mean_delay.find(name + "_s");
      out << ',' << csv::fixed(it == r.mean_delay.end() ? 0.0 : it->second, 12);
    }
    out << '\n';
  }
}

}  // namespace vcsim
