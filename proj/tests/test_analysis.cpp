#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "curvecast/analysis.hpp"
#include "curvecast/config.hpp"

using namespace curvecast;

namespace {

const DisplayGeometry kGeom;

// A horizontal trial: start at azimuth 0, target `a` meters to the right,
// endpoint `dev` meters past the target along the axis.
TrialRecord horizontal_trial(int participant, TechniqueId t, double a, double w, double dev, double mt,
                             int rep = 0) {
  TrialRecord r;
  r.participant_id = participant;
  r.technique = t;
  r.amplitude_m = a;
  r.width_m = w;
  r.id_bits = fitts_id(a, w);
  r.repetition = rep;
  r.movement_time_s = mt;
  r.success = std::abs(dev) <= w / 2;
  r.start_azimuth_rad = 0.0;
  r.start_height_m = 1.5;
  r.target_azimuth_rad = a / kGeom.radius_m;
  r.target_height_m = 1.5;
  r.endpoint_azimuth_rad = (a + dev) / kGeom.radius_m;
  r.endpoint_height_m = 1.5;
  return r;
}

// Two endpoints at +-d give SD d*sqrt(2), so We = 4.133 d sqrt(2).
// Picking A = 15 We makes IDe exactly log2(16) = 4 bits.
std::vector<TrialRecord> four_bit_cell(int participant, TechniqueId t, double w, double mt) {
  const double d = 0.01;
  const double a = 15.0 * 4.133 * d * std::sqrt(2.0);
  return {horizontal_trial(participant, t, a, w, -d, mt, 0), horizontal_trial(participant, t, a, w, d, mt, 1)};
}

// Least squares through Eigen's QR, independent of fitts_fit.
std::pair<double, double> qr_line(const std::vector<FittsPoint>& pts) {
  Eigen::MatrixXd X(pts.size(), 2);
  Eigen::VectorXd y(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = pts[i].id_bits;
    y(i) = pts[i].mean_mt_s;
  }
  const Eigen::Vector2d beta = X.colPivHouseholderQr().solve(y);
  return {beta(0), beta(1)};
}

}  // namespace

TEST(EffectiveWidth, NormalSamples) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> n(0.0, 0.05);
  std::vector<double> xs(10000);
  for (auto& x : xs) x = n(rng);
  const auto we = effective_width(xs);
  EXPECT_NEAR(we.width_m, 0.2066, 0.02 * 0.2066);
  EXPECT_FALSE(we.floored);
}

TEST(EffectiveWidth, TwoSymmetricPoints) {
  const std::vector<double> xs{-0.03, 0.03};
  EXPECT_NEAR(effective_width(xs).width_m, 4.133 * 0.03 * std::sqrt(2.0), 1e-15);
}

TEST(EffectiveWidth, DegenerateAndTooFew) {
  const std::vector<double> zeros(5, 0.0);
  const auto we = effective_width(zeros, 0.10);
  EXPECT_TRUE(we.floored);
  EXPECT_DOUBLE_EQ(we.width_m, 0.001);
  const std::vector<double> one{0.1};
  EXPECT_THROW(effective_width(one), AnalysisError);
}

TEST(EffectiveWidthProperty, TranslationAndScale) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 0.1);
  std::uniform_real_distribution<double> shift(-5.0, 5.0), scale(0.1, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> xs(30);
    for (auto& x : xs) x = n(rng);
    const double base = effective_width(xs).width_m;
    const double c = shift(rng), k = scale(rng);
    std::vector<double> moved = xs, scaled = xs;
    for (auto& x : moved) x += c;
    for (auto& x : scaled) x *= k;
    EXPECT_NEAR(effective_width(moved).width_m, base, 1e-9 * (1 + std::abs(c)));
    EXPECT_NEAR(effective_width(scaled).width_m, k * base, 1e-12 * k);
  }
}

TEST(Throughput, FourBitCell) {
  const auto cell = four_bit_cell(0, TechniqueId::PA, 0.1, 1.0);
  const auto c = throughput_cell(cell, kGeom);
  EXPECT_NEAR(c.effective_id_bits, 4.0, 1e-12);
  EXPECT_NEAR(c.throughput_bps, 4.0, 1e-12);
  EXPECT_NEAR(c.effective_amplitude_m, cell[0].amplitude_m, 1e-12);
}

TEST(Throughput, MeansOfMeans) {
  // One participant, two cells with TPs 2 and 4.
  auto rs = four_bit_cell(0, TechniqueId::PA, 0.1, 2.0);
  for (const auto& r : four_bit_cell(0, TechniqueId::PA, 0.2, 1.0)) rs.push_back(r);
  const auto rep = throughput(rs, kGeom);
  ASSERT_EQ(rep.cells.size(), 2u);
  ASSERT_EQ(rep.techniques.size(), 1u);
  EXPECT_NEAR(rep.techniques[0].throughput_bps, 3.0, 1e-12);

  // A second participant averaging 5 lifts the mean of means to 4, not to
  // the pooled cell mean.
  for (const auto& r : four_bit_cell(1, TechniqueId::PA, 0.1, 0.8)) rs.push_back(r);
  for (const auto& r : four_bit_cell(1, TechniqueId::PA, 0.2, 0.8)) rs.push_back(r);
  EXPECT_NEAR(throughput(rs, kGeom).techniques[0].throughput_bps, 4.0, 1e-12);
}

TEST(Throughput, MissingCellsAreReported) {
  auto rs = four_bit_cell(0, TechniqueId::PA, 0.1, 1.0);
  for (const auto& r : four_bit_cell(0, TechniqueId::PA, 0.2, 1.0)) rs.push_back(r);
  for (const auto& r : four_bit_cell(1, TechniqueId::PA, 0.1, 1.0)) rs.push_back(r);
  try {
    throughput(rs, kGeom);
    FAIL();
  } catch (const AnalysisError& e) {
    EXPECT_NE(std::string(e.what()).find("participant 1"), std::string::npos);
  }
  rs.pop_back();
  EXPECT_THROW(throughput(rs, kGeom), AnalysisError);
}

TEST(Throughput, NoiselessCellIsFlooredNotFatal) {
  std::vector<TrialRecord> rs{horizontal_trial(0, TechniqueId::PA, 2.5, 0.1, 0.0, 1.0, 0),
                              horizontal_trial(0, TechniqueId::PA, 2.5, 0.1, 0.0, 1.0, 1)};
  const auto rep = throughput(rs, kGeom);
  ASSERT_EQ(rep.warnings.size(), 1u);
  EXPECT_TRUE(rep.cells[0].width_floored);
  EXPECT_TRUE(std::isfinite(rep.techniques[0].throughput_bps));
  EXPECT_NEAR(rep.cells[0].effective_id_bits, std::log2(2.5 / 0.001 + 1.0), 1e-9);
}

TEST(ThroughputProperty, ScaleConsistency) {
  auto rs = run([] {
    auto p = preset_plan(Preset::Study2);
    p.virtual_participants = 2;
    p.repetitions = 3;
    return p;
  }());
  const auto base = throughput(rs, kGeom);
  for (double k : {0.5, 2.0, 4.0}) {
    auto scaled = rs;
    for (auto& r : scaled) r.movement_time_s *= k;
    const auto rep = throughput(scaled, kGeom);
    for (std::size_t i = 0; i < rep.cells.size(); ++i) {
      EXPECT_EQ(rep.cells[i].throughput_bps, base.cells[i].throughput_bps / k);
    }
    for (std::size_t i = 0; i < rep.techniques.size(); ++i) {
      EXPECT_EQ(rep.techniques[i].throughput_bps, base.techniques[i].throughput_bps / k);
    }
  }
  for (double k : {0.3, 1.7, 3.1}) {
    auto scaled = rs;
    for (auto& r : scaled) r.movement_time_s *= k;
    const auto rep = throughput(scaled, kGeom);
    for (std::size_t i = 0; i < rep.techniques.size(); ++i) {
      EXPECT_NEAR(rep.techniques[i].throughput_bps * k, base.techniques[i].throughput_bps,
                  1e-12 * base.techniques[i].throughput_bps);
    }
  }
}

TEST(ThroughputProperty, PermutationInvariance) {
  auto rs = run([] {
    auto p = preset_plan(Preset::Study2);
    p.virtual_participants = 3;
    p.repetitions = 3;
    return p;
  }());
  const auto base = throughput(rs, kGeom);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(rs.begin(), rs.end(), rng);
    const auto rep = throughput(rs, kGeom);
    ASSERT_EQ(rep.techniques.size(), base.techniques.size());
    for (std::size_t t = 0; t < rep.techniques.size(); ++t) {
      EXPECT_EQ(rep.techniques[t].throughput_bps, base.techniques[t].throughput_bps);
    }
  }
  // Relabeling participants leaves the means of means unchanged.
  for (auto& r : rs) r.participant_id = 2 - r.participant_id;
  const auto relabeled = throughput(rs, kGeom);
  for (std::size_t t = 0; t < relabeled.techniques.size(); ++t) {
    EXPECT_NEAR(relabeled.techniques[t].throughput_bps, base.techniques[t].throughput_bps, 1e-12);
  }
}

TEST(Fitts, ExactLine) {
  std::vector<FittsPoint> pts;
  for (double id : {2.19, 3.0, 3.9, 4.7, 5.27, 6.25}) pts.push_back({id, 0.41 + 0.21 * id});
  const auto f = fitts_fit(pts);
  EXPECT_NEAR(f.intercept_s, 0.41, 1e-12);
  EXPECT_NEAR(f.slope_s_per_bit, 0.21, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(Fitts, ConstantTimeAndDegenerateIds) {
  const std::vector<FittsPoint> flat{{1, 0.9}, {2, 0.9}, {3, 0.9}};
  const auto f = fitts_fit(flat);
  EXPECT_EQ(f.slope_s_per_bit, 0.0);
  EXPECT_EQ(f.r_squared, 0.0);
  const std::vector<FittsPoint> same{{2, 0.9}, {2, 1.1}};
  EXPECT_THROW(fitts_fit(same), AnalysisError);
  const std::vector<FittsPoint> one{{2, 0.9}};
  EXPECT_THROW(fitts_fit(one), AnalysisError);
}

TEST(Fitts, NoisySixPointsAgainstQrOracle) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<FittsPoint> pts;
  for (const auto& s : study1_specs()) {
    const double id = fitts_id(s.amplitude_m, s.width_m);
    pts.push_back({id, 0.42 + 0.22 * id + noise(rng)});
  }
  const auto f = fitts_fit(pts);
  const auto [b0, b1] = qr_line(pts);
  EXPECT_NEAR(f.intercept_s, b0, 1e-10);
  EXPECT_NEAR(f.slope_s_per_bit, b1, 1e-10);
  double my = 0.0;
  for (const auto& p : pts) my += p.mean_mt_s;
  my /= pts.size();
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& p : pts) {
    ss_res += std::pow(p.mean_mt_s - (b0 + b1 * p.id_bits), 2);
    ss_tot += std::pow(p.mean_mt_s - my, 2);
  }
  EXPECT_NEAR(f.r_squared, 1.0 - ss_res / ss_tot, 1e-10);
  EXPECT_GE(f.r_squared, 0.98);
}

TEST(Summary, SingleRecordAndHalfSuccess) {
  std::vector<TrialRecord> one{horizontal_trial(0, TechniqueId::PA, 2.5, 0.1, 0.0, 1.25)};
  const auto s = summarize(one, "technique");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].mean_mt_s, 1.25);
  EXPECT_EQ(s[0].mt_ci95_halfwidth, 0.0);
  EXPECT_FALSE(s[0].ci_defined);
  EXPECT_EQ(s[0].n_trials, 1u);

  std::vector<TrialRecord> half;
  for (int i = 0; i < 10; ++i) half.push_back(horizontal_trial(0, TechniqueId::PA, 2.5, 0.1, i % 2 ? 0.0 : 0.5, 1.0));
  EXPECT_DOUBLE_EQ(summarize(half, "").at(0).accuracy, 0.5);
}

TEST(Summary, StudentTInterval) {
  // Five values with SD 1: t(0.975, 4) = 2.776445 from tables.
  std::vector<TrialRecord> rs;
  const double sd_one[] = {-1.2649110640673518, -0.6324555320336759, 0.0, 0.6324555320336759, 1.2649110640673518};
  for (double x : sd_one) rs.push_back(horizontal_trial(0, TechniqueId::PA, 2.5, 0.1, 0.0, 2.0 + x));
  const auto s = summarize(rs, "");
  EXPECT_NEAR(s[0].mean_mt_s, 2.0, 1e-12);
  EXPECT_NEAR(s[0].mt_ci95_halfwidth, 2.776445 / std::sqrt(5.0), 1e-6);
  EXPECT_TRUE(s[0].ci_defined);
}

TEST(Summary, KeysAndOrdering) {
  EXPECT_THROW(summarize({}, "colour"), std::invalid_argument);
  EXPECT_THROW(parse_group_keys("distance,bogus"), std::invalid_argument);
  EXPECT_EQ(parse_group_keys("").size(), 0u);
  EXPECT_EQ(parse_group_keys("participant,technique,distance,offset,amplitude,width,id").size(), 7u);

  std::vector<TrialRecord> rs;
  for (auto t : {TechniqueId::PADIST, TechniqueId::PA, TechniqueId::PBA}) {
    rs.push_back(horizontal_trial(0, t, 2.5, 0.1, 0.0, 1.0));
  }
  const auto s = summarize(rs, "technique");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(format_key_value(GroupKey::Technique, s[0].key[0]), "PA");
  EXPECT_EQ(format_key_value(GroupKey::Technique, s[1].key[0]), "PBA");
  EXPECT_EQ(format_key_value(GroupKey::Technique, s[2].key[0]), "PADIST");
}

TEST(SummaryProperty, AccuracyFallsWithDistance) {
  const auto rs = run(preset_plan(Preset::Study1));
  const auto s = summarize(rs, "distance");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_GE(s[0].accuracy, s[1].accuracy);
  EXPECT_GE(s[1].accuracy, s[2].accuracy);
  for (const auto& row : s) {
    EXPECT_GE(row.accuracy, 0.0);
    EXPECT_LE(row.accuracy, 1.0);
    EXPECT_GT(row.n_trials, 0u);
  }
}

TEST(Fitts, ByGroup) {
  const auto rs = run([] {
    auto p = preset_plan(Preset::Study1);
    p.virtual_participants = 2;
    return p;
  }());
  const auto rows = fitts_by_group(rs, parse_group_keys("offset"));
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.n_points, 6u);
    EXPECT_GT(r.fit.slope_s_per_bit, 0.0);
  }
}

TEST(PlotData, SeriesAndMeasures) {
  std::vector<TrialRecord> rs;
  for (int i = 0; i < 4; ++i) {
    auto r = horizontal_trial(0, i < 2 ? TechniqueId::PA : TechniqueId::PBA, 2.5, 0.1, i == 0 ? 0.5 : 0.0, 1.0 + i);
    r.lateral_offset_m = (i % 2) ? -1.635 : 0.0;
    rs.push_back(r);
  }
  const auto pts = plot_data(rs, parse_group_keys("technique,offset"), Measure::ErrorRate);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_EQ(pts[0].series, "-1.635");
  EXPECT_EQ(pts[0].x, "PA");
  const auto mt = plot_data(rs, parse_group_keys("technique"), Measure::MovementTime);
  ASSERT_EQ(mt.size(), 2u);
  EXPECT_DOUBLE_EQ(mt[0].y, 1.5);
  EXPECT_TRUE(mt[0].series.empty());
  EXPECT_THROW(plot_data(rs, {}, Measure::Accuracy), std::invalid_argument);
  EXPECT_THROW(parse_measure("speed"), std::invalid_argument);
}
