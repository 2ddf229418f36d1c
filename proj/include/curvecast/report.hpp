#pragma once

// CSV renderings of the analysis results.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "curvecast/analysis.hpp"

namespace curvecast {

namespace detail {

inline std::string g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void put_keys_header(std::ostream& os, const std::vector<GroupKey>& keys) {
  for (auto k : keys) os << to_string(k) << ',';
}

inline void put_keys(std::ostream& os, const std::vector<GroupKey>& keys, const std::vector<double>& v) {
  for (std::size_t i = 0; i < keys.size(); ++i) os << format_key_value(keys[i], v[i]) << ',';
}

}  // namespace detail

inline void write_summary_csv(std::ostream& os, const std::vector<GroupKey>& keys,
                              const std::vector<ConditionSummary>& rows) {
  detail::put_keys_header(os, keys);
  os << "mean_mt_s,mt_ci95_halfwidth,ci_defined,accuracy,accuracy_ci95_halfwidth,n_trials\n";
  for (const auto& r : rows) {
    detail::put_keys(os, keys, r.key);
    os << detail::g9(r.mean_mt_s) << ',' << detail::g9(r.mt_ci95_halfwidth) << ','
       << (r.ci_defined ? 1 : 0) << ',' << detail::g9(r.accuracy) << ','
       << detail::g9(r.accuracy_ci95_halfwidth) << ',' << r.n_trials << '\n';
  }
}

/// One row per technique (means of means).
inline void write_throughput_csv(std::ostream& os, const ThroughputReport& report) {
  os << "technique,participants,throughput_bps\n";
  for (const auto& t : report.techniques) {
    os << to_string(t.technique) << ',' << t.participants << ',' << detail::g9(t.throughput_bps) << '\n';
  }
}

/// One row per participant x technique x (A, W) cell.
inline void write_throughput_cells_csv(std::ostream& os, const ThroughputReport& report) {
  os << "participant_id,technique,amplitude_m,width_m,n_trials,effective_amplitude_m,"
        "effective_width_m,effective_id_bits,mean_mt_s,throughput_bps,width_floored\n";
  for (const auto& c : report.cells) {
    os << c.participant_id << ',' << to_string(c.technique) << ',' << detail::g9(c.amplitude_m) << ','
       << detail::g9(c.width_m) << ',' << c.n_trials << ',' << detail::g9(c.effective_amplitude_m) << ','
       << detail::g9(c.effective_width_m) << ',' << detail::g9(c.effective_id_bits) << ','
       << detail::g9(c.mean_mt_s) << ',' << detail::g9(c.throughput_bps) << ','
       << (c.width_floored ? 1 : 0) << '\n';
  }
}

inline void write_fitts_csv(std::ostream& os, const std::vector<GroupKey>& keys,
                            const std::vector<GroupFit>& rows) {
  detail::put_keys_header(os, keys);
  os << "intercept_s,slope_s_per_bit,r_squared,n_points\n";
  for (const auto& r : rows) {
    detail::put_keys(os, keys, r.key);
    os << detail::g9(r.fit.intercept_s) << ',' << detail::g9(r.fit.slope_s_per_bit) << ','
       << detail::g9(r.fit.r_squared) << ',' << r.n_points << '\n';
  }
}

inline void write_plot_csv(std::ostream& os, const std::vector<PlotPoint>& points) {
  os << "series,x,y,ci\n";
  for (const auto& p : points) {
    os << p.series << ',' << p.x << ',' << detail::g9(p.y) << ',' << detail::g9(p.ci) << '\n';
  }
}

}  // namespace curvecast
