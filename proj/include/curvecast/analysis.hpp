#pragma once

// Dependent measures over trial logs: descriptive summaries with t-based
// confidence intervals, Fitts regressions, and effective-width throughput
// aggregated as a mean of per-participant means.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <Eigen/Core>

#include "curvecast/experiment.hpp"
#include "curvecast/geometry.hpp"

namespace curvecast {

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 4.133 standard deviations span 96% of a normal endpoint distribution.
inline constexpr double kEffectiveWidthFactor = 4.133;

struct EffectiveWidth {
  double width_m = 0.0;
  bool floored = false;  // raw value fell below nominal_width / 100
};

inline double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) throw AnalysisError("standard deviation needs at least 2 samples");
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

/// Effective width from signed endpoint deviations along the task axis.
/// A degenerate spread (e.g. a noiseless agent) is floored at 1% of the
/// nominal width and flagged.
inline EffectiveWidth effective_width(std::span<const double> deviations,
                                      double nominal_width_m = 0.0) {
  if (deviations.size() < 2) {
    throw AnalysisError("effective width needs at least 2 endpoints");
  }
  EffectiveWidth we{kEffectiveWidthFactor * sample_sd(deviations), false};
  const double floor = nominal_width_m / 100.0;
  if (we.width_m < floor || we.width_m == 0.0) {
    we.width_m = std::max(floor, we.width_m);
    we.floored = true;
  }
  return we;
}

/// Endpoint projected on the unrolled start->target axis.
struct AxisProjection {
  double extent_m = 0.0;     // signed distance from start along the axis
  double deviation_m = 0.0;  // signed distance from the target center
};

inline AxisProjection project_endpoint(const TrialRecord& r, const DisplayGeometry& geom) {
  const Eigen::Vector2d s = unrolled({r.start_azimuth_rad, r.start_height_m}, geom);
  const Eigen::Vector2d t = unrolled({r.target_azimuth_rad, r.target_height_m}, geom);
  const Eigen::Vector2d e = unrolled({r.endpoint_azimuth_rad, r.endpoint_height_m}, geom);
  const Eigen::Vector2d axis = t - s;
  const double len = axis.norm();
  if (len == 0.0) {
    // Zero amplitude has no axis; fall back to the horizontal.
    return {0.0, e.x() - t.x()};
  }
  const Eigen::Vector2d u = axis / len;
  return {(e - s).dot(u), (e - t).dot(u)};
}

// ---------------------------------------------------------------------------
// Throughput

struct ThroughputCell {
  int participant_id = 0;
  TechniqueId technique = TechniqueId::ABSOLUTE;
  double amplitude_m = 0.0;
  double width_m = 0.0;
  std::size_t n_trials = 0;
  double effective_amplitude_m = 0.0;
  double effective_width_m = 0.0;
  double effective_id_bits = 0.0;
  double mean_mt_s = 0.0;
  double throughput_bps = 0.0;
  bool width_floored = false;
};

struct TechniqueThroughput {
  TechniqueId technique = TechniqueId::ABSOLUTE;
  std::size_t participants = 0;
  double throughput_bps = 0.0;
};

struct ThroughputReport {
  std::vector<ThroughputCell> cells;
  std::vector<TechniqueThroughput> techniques;
  std::vector<std::string> warnings;
};

/// One cell of trials. All trials count, misses included: the effective
/// width is what absorbs the errors.
inline ThroughputCell throughput_cell(std::span<const TrialRecord> trials,
                                      const DisplayGeometry& geom) {
  if (trials.size() < 2) throw AnalysisError("throughput cell needs at least 2 trials");
  ThroughputCell c;
  c.participant_id = trials.front().participant_id;
  c.technique = trials.front().technique;
  c.amplitude_m = trials.front().amplitude_m;
  c.width_m = trials.front().width_m;
  c.n_trials = trials.size();
  std::vector<double> dev;
  dev.reserve(trials.size());
  double extent = 0.0;
  double mt = 0.0;
  for (const auto& r : trials) {
    const AxisProjection p = project_endpoint(r, geom);
    dev.push_back(p.deviation_m);
    extent += p.extent_m;
    mt += r.movement_time_s;
  }
  const double n = static_cast<double>(trials.size());
  c.effective_amplitude_m = extent / n;
  c.mean_mt_s = mt / n;
  const EffectiveWidth we = effective_width(dev, c.width_m);
  c.effective_width_m = we.width_m;
  c.width_floored = we.floored;
  c.effective_id_bits = std::log2(std::max(0.0, c.effective_amplitude_m) / c.effective_width_m + 1.0);
  if (!(c.mean_mt_s > 0.0)) throw AnalysisError("throughput cell has non-positive mean movement time");
  c.throughput_bps = c.effective_id_bits / c.mean_mt_s;
  return c;
}

/// Per participant x technique x (A, W) cells, pooled over user positions.
/// Participant throughput is the mean over that participant's cells and the
/// technique throughput the mean over participants. Every participant x
/// technique must cover every (A, W) pair seen in the data.
inline ThroughputReport throughput(std::span<const TrialRecord> records,
                                   const DisplayGeometry& geom) {
  if (records.empty()) throw AnalysisError("no trials to analyze");
  using CellKey = std::tuple<int, TechniqueId, double, double>;
  std::map<CellKey, std::vector<TrialRecord>> cells;
  std::map<std::pair<double, double>, int> task_pairs;
  std::map<std::pair<int, TechniqueId>, int> blocks;
  for (const auto& r : records) {
    cells[{r.participant_id, r.technique, r.amplitude_m, r.width_m}].push_back(r);
    task_pairs[{r.amplitude_m, r.width_m}] = 0;
    blocks[{r.participant_id, r.technique}] = 0;
  }

  std::string missing;
  for (const auto& [block, unused] : blocks) {
    for (const auto& [task, unused2] : task_pairs) {
      if (!cells.contains({block.first, block.second, task.first, task.second})) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%sparticipant %d, %s, A=%g, W=%g", missing.empty() ? "" : "; ",
                      block.first, std::string(to_string(block.second)).c_str(), task.first, task.second);
        missing += buf;
      }
    }
  }
  if (!missing.empty()) throw AnalysisError("missing throughput cells: " + missing);

  ThroughputReport report;
  std::map<std::pair<TechniqueId, int>, std::vector<double>> per_participant;
  for (auto& [key, trials] : cells) {
    // Canonical order inside a cell, so input order cannot change the sums.
    std::sort(trials.begin(), trials.end(), [](const TrialRecord& a, const TrialRecord& b) {
      return std::tie(a.distance_multiple, a.lateral_offset_m, a.repetition, a.seed, a.movement_time_s,
                      a.endpoint_azimuth_rad, a.endpoint_height_m) <
             std::tie(b.distance_multiple, b.lateral_offset_m, b.repetition, b.seed, b.movement_time_s,
                      b.endpoint_azimuth_rad, b.endpoint_height_m);
    });
    if (trials.size() < 2) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "participant %d, %s, A=%g, W=%g has %zu trial(s); need 2",
                    std::get<0>(key), std::string(to_string(std::get<1>(key))).c_str(),
                    std::get<2>(key), std::get<3>(key), trials.size());
      throw AnalysisError(buf);
    }
    ThroughputCell c = throughput_cell(trials, geom);
    if (c.width_floored) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "participant %d, %s, A=%g, W=%g: endpoint spread is degenerate; effective "
                    "width floored at W/100",
                    c.participant_id, std::string(to_string(c.technique)).c_str(), c.amplitude_m,
                    c.width_m);
      report.warnings.emplace_back(buf);
    }
    per_participant[{c.technique, c.participant_id}].push_back(c.throughput_bps);
    report.cells.push_back(c);
  }

  std::map<TechniqueId, std::vector<double>> per_technique;
  for (const auto& [key, tps] : per_participant) {
    per_technique[key.first].push_back(std::accumulate(tps.begin(), tps.end(), 0.0) /
                                       static_cast<double>(tps.size()));
  }
  for (const auto& [tech, tps] : per_technique) {
    report.techniques.push_back({tech, tps.size(),
                                 std::accumulate(tps.begin(), tps.end(), 0.0) /
                                     static_cast<double>(tps.size())});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Fitts regression

struct FittsPoint {
  double id_bits = 0.0;
  double mean_mt_s = 0.0;
};

struct FittsFit {
  double intercept_s = 0.0;
  double slope_s_per_bit = 0.0;
  double r_squared = 0.0;  // 0 when MT does not vary
};

/// Ordinary least squares of mean MT on ID.
inline FittsFit fitts_fit(std::span<const FittsPoint> points) {
  if (points.size() < 2) throw AnalysisError("Fitts fit needs at least 2 points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& p : points) {
    mx += p.id_bits;
    my += p.mean_mt_s;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& p : points) {
    sxx += (p.id_bits - mx) * (p.id_bits - mx);
    sxy += (p.id_bits - mx) * (p.mean_mt_s - my);
    syy += (p.mean_mt_s - my) * (p.mean_mt_s - my);
  }
  if (sxx == 0.0) throw AnalysisError("Fitts fit needs at least 2 distinct IDs");
  FittsFit f;
  f.slope_s_per_bit = sxy / sxx;
  f.intercept_s = my - f.slope_s_per_bit * mx;
  f.r_squared = syy == 0.0 ? 0.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

/// Mean MT per (A, W) cell, ordered by ID.
inline std::vector<FittsPoint> fitts_points(std::span<const TrialRecord> records) {
  std::map<std::pair<double, double>, std::pair<double, std::size_t>> cells;
  for (const auto& r : records) {
    auto& c = cells[{r.amplitude_m, r.width_m}];
    c.first += r.movement_time_s;
    ++c.second;
  }
  std::vector<FittsPoint> out;
  for (const auto& [task, acc] : cells) {
    out.push_back({fitts_id(task.first, task.second), acc.first / static_cast<double>(acc.second)});
  }
  std::sort(out.begin(), out.end(),
            [](const FittsPoint& a, const FittsPoint& b) { return a.id_bits < b.id_bits; });
  return out;
}

// ---------------------------------------------------------------------------
// Grouped summaries

enum class GroupKey { Participant, Technique, Distance, Offset, Amplitude, Width, Id };

inline std::string_view to_string(GroupKey k) {
  switch (k) {
    case GroupKey::Participant: return "participant";
    case GroupKey::Technique: return "technique";
    case GroupKey::Distance: return "distance";
    case GroupKey::Offset: return "offset";
    case GroupKey::Amplitude: return "amplitude";
    case GroupKey::Width: return "width";
    case GroupKey::Id: return "id";
  }
  return "?";
}

inline GroupKey parse_group_key(std::string_view s) {
  for (auto k : {GroupKey::Participant, GroupKey::Technique, GroupKey::Distance, GroupKey::Offset,
                 GroupKey::Amplitude, GroupKey::Width, GroupKey::Id}) {
    if (s == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown grouping key '" + std::string(s) +
                              "' (expected participant, technique, distance, offset, amplitude, "
                              "width or id)");
}

/// Comma separated list of keys; the empty string means one overall group.
inline std::vector<GroupKey> parse_group_keys(std::string_view s) {
  std::vector<GroupKey> out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    out.push_back(parse_group_key(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

/// Numeric value of a key; techniques sort in declaration order.
inline double key_value(const TrialRecord& r, GroupKey k) {
  switch (k) {
    case GroupKey::Participant: return r.participant_id;
    case GroupKey::Technique: return static_cast<double>(r.technique);
    case GroupKey::Distance: return r.distance_multiple;
    case GroupKey::Offset: return r.lateral_offset_m;
    case GroupKey::Amplitude: return r.amplitude_m;
    case GroupKey::Width: return r.width_m;
    case GroupKey::Id: return r.id_bits;
  }
  return 0.0;
}

inline std::string format_key_value(GroupKey k, double v) {
  if (k == GroupKey::Technique) return std::string(to_string(static_cast<TechniqueId>(static_cast<int>(v))));
  char buf[32];
  std::snprintf(buf, sizeof buf, k == GroupKey::Participant ? "%.0f" : "%.9g", v);
  return buf;
}

struct MeanCi {
  double mean = 0.0;
  double ci95_halfwidth = 0.0;
  bool ci_defined = false;  // false for a single observation
};

/// Mean with a two-sided 95% Student-t interval on n - 1 degrees of freedom.
inline MeanCi mean_ci95(std::span<const double> xs) {
  if (xs.empty()) throw AnalysisError("mean of no observations");
  MeanCi m;
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() < 2) return m;
  const boost::math::students_t dist(static_cast<double>(xs.size() - 1));
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  m.ci95_halfwidth = t * sample_sd(xs) / std::sqrt(static_cast<double>(xs.size()));
  m.ci_defined = true;
  return m;
}

struct ConditionSummary {
  std::vector<double> key;  // one value per grouping key, see key_value()
  double mean_mt_s = 0.0;
  double mt_ci95_halfwidth = 0.0;
  bool ci_defined = false;
  double accuracy = 0.0;
  double accuracy_ci95_halfwidth = 0.0;
  std::size_t n_trials = 0;
};

/// Groups by `keys` (in ascending key order) and aggregates each group.
inline std::vector<ConditionSummary> summarize(std::span<const TrialRecord> records,
                                               const std::vector<GroupKey>& keys) {
  std::map<std::vector<double>, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& r : records) {
    std::vector<double> k;
    k.reserve(keys.size());
    for (auto g : keys) k.push_back(key_value(r, g));
    auto& grp = groups[k];
    grp.first.push_back(r.movement_time_s);
    grp.second.push_back(r.success ? 1.0 : 0.0);
  }
  std::vector<ConditionSummary> out;
  out.reserve(groups.size());
  for (const auto& [k, data] : groups) {
    const MeanCi mt = mean_ci95(data.first);
    const MeanCi acc = mean_ci95(data.second);
    out.push_back({k, mt.mean, mt.ci95_halfwidth, mt.ci_defined, acc.mean, acc.ci95_halfwidth,
                   data.first.size()});
  }
  return out;
}

inline std::vector<ConditionSummary> summarize(std::span<const TrialRecord> records,
                                               std::string_view keys) {
  return summarize(records, parse_group_keys(keys));
}

struct GroupFit {
  std::vector<double> key;
  FittsFit fit;
  std::size_t n_points = 0;
};

/// One Fitts regression per group.
inline std::vector<GroupFit> fitts_by_group(std::span<const TrialRecord> records,
                                            const std::vector<GroupKey>& keys) {
  std::map<std::vector<double>, std::vector<TrialRecord>> groups;
  for (const auto& r : records) {
    std::vector<double> k;
    for (auto g : keys) k.push_back(key_value(r, g));
    groups[k].push_back(r);
  }
  std::vector<GroupFit> out;
  for (const auto& [k, rs] : groups) {
    const auto pts = fitts_points(rs);
    out.push_back({k, fitts_fit(pts), pts.size()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Plot data

enum class Measure { MovementTime, Accuracy, ErrorRate };

inline Measure parse_measure(std::string_view s) {
  if (s == "mt") return Measure::MovementTime;
  if (s == "accuracy") return Measure::Accuracy;
  if (s == "error") return Measure::ErrorRate;
  throw std::invalid_argument("unknown measure '" + std::string(s) + "' (expected mt, accuracy or error)");
}

struct PlotPoint {
  std::string series;  // empty without a series key
  std::string x;
  double y = 0.0;
  double ci = 0.0;
};

/// Bar-chart style view: x from the first key, optional series from the
/// second, y the chosen measure with its 95% half-width.
inline std::vector<PlotPoint> plot_data(std::span<const TrialRecord> records,
                                        const std::vector<GroupKey>& keys, Measure measure) {
  if (keys.empty() || keys.size() > 2) {
    throw std::invalid_argument("plot data needs one x key and at most one series key");
  }
  std::vector<GroupKey> order = keys;
  if (order.size() == 2) std::swap(order[0], order[1]);  // sort by series first
  std::vector<PlotPoint> out;
  for (const auto& s : summarize(records, order)) {
    PlotPoint p;
    if (order.size() == 2) {
      p.series = format_key_value(order[0], s.key[0]);
      p.x = format_key_value(order[1], s.key[1]);
    } else {
      p.x = format_key_value(order[0], s.key[0]);
    }
    switch (measure) {
      case Measure::MovementTime: p.y = s.mean_mt_s; p.ci = s.mt_ci95_halfwidth; break;
      case Measure::Accuracy: p.y = s.accuracy; p.ci = s.accuracy_ci95_halfwidth; break;
      case Measure::ErrorRate: p.y = 1.0 - s.accuracy; p.ci = s.accuracy_ci95_halfwidth; break;
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace curvecast
