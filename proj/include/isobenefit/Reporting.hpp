#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "isobenefit/DnaAudit.hpp"
#include "isobenefit/Morphogenesis.hpp"
#include "isobenefit/Numeric.hpp"

namespace isobenefit {

inline constexpr const char* kMetricsHeader =
    "step,built_cells,centrality_count,nature_area_m2,garden_cells,benefit_min,benefit_cv,"
    "worst_walk_centrality_min,worst_walk_nature_min,worst_walk_green_min";

inline std::string format_metrics_row(const StepMetrics& m) {
  std::string row = std::to_string(m.step);
  row += ',';
  row += std::to_string(m.built_cells);
  row += ',';
  row += std::to_string(m.centrality_count);
  row += ',';
  row += fmt_double(m.nature_area_m2);
  row += ',';
  row += std::to_string(m.garden_cells);
  row += ',';
  row += fmt_double(m.benefit_min);
  row += ',';
  row += fmt_double(m.benefit_cv);
  row += ',';
  row += fmt_double(m.worst_walk_centrality_min);
  row += ',';
  row += fmt_double(m.worst_walk_nature_min);
  row += ',';
  row += fmt_double(m.worst_walk_green_min);
  return row;
}

inline void write_metrics_row(std::ostream& out, const StepMetrics& m) {
  out << format_metrics_row(m) << '\n';
  if (!out) throw IoError("failed to write metrics row");
}

/// Structured key=value rendering of an audit report. extra lines (e.g. the
/// effective configuration echo) are appended verbatim at the end.
inline std::string format_report(const AuditReport& report,
                                 const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  std::string out;
  const auto add = [&](const std::string& k, const std::string& v) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  };
  const auto add_bool = [&](const std::string& k, bool v) { add(k, v ? "true" : "false"); };

  add("isobenefit.report.v", "1");
  add("grid.digest", fmt_u64_hex(report.grid_digest));
  add_bool("overall_pass", report.overall_pass);
  add_bool("overall_vacuous", report.overall_vacuous);

  const DnaParams& p = report.params;
  add("params.t_star_min", fmt_double(p.t_star_min));
  add("params.walk_speed_kmh", fmt_double(p.walk_speed_kmh));
  add("params.d_star_m", fmt_double(p.d_star_m()));
  add("params.garden_time_min", fmt_double(p.garden_time_min));
  add("params.a_min_nature_m2", fmt_double(p.a_min_nature_m2));
  add("params.c_star", fmt_double(p.c_star));
  add("params.epsilon_cv", fmt_double(p.epsilon_cv));
  add("params.attractiveness_tolerance", fmt_double(p.attractiveness_tolerance));
  add("params.f_c_star", fmt_double(p.f_c_star));
  add("params.f_epsilon_cv", fmt_double(p.f_epsilon_cv));

  for (const PrincipleResult& r : report.results) {
    const std::string prefix = std::string("principle_") + principle_name(r.id);
    add_bool(prefix + ".passed", r.passed);
    add_bool(prefix + ".vacuous", r.vacuous);
    if (!r.measured_name.empty()) {
      add(prefix + ".measured." + r.measured_name, fmt_double(r.measured));
    }
    add(prefix + ".violation_count", std::to_string(r.violations.size()));
    for (std::size_t i = 0; i < r.violations.size(); ++i) {
      const Violation& v = r.violations[i];
      add(prefix + ".violation." + std::to_string(i),
          std::to_string(v.row) + "," + std::to_string(v.col) + "," + fmt_double(v.value));
    }
  }

  for (std::size_t i = 0; i < report.notes.size(); ++i) {
    add("note." + std::to_string(i), report.notes[i]);
  }
  for (const auto& [k, v] : extra) add(k, v);
  return out;
}

inline void write_report(std::ostream& out, const AuditReport& report,
                         const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  out << format_report(report, extra);
  if (!out) throw IoError("failed to write report");
}

}  // namespace isobenefit
