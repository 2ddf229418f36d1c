#include <algorithm>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "curvecast/config.hpp"
#include "curvecast/csv.hpp"

using namespace curvecast;

namespace {

ExperimentPlan small_plan() {
  ExperimentPlan plan = preset_plan(Preset::Study2);
  plan.virtual_participants = 2;
  plan.repetitions = 2;
  plan.practice_trials_per_block = 3;
  return plan;
}

std::string to_csv(const std::vector<TrialRecord>& rs) {
  std::ostringstream os;
  write_csv(rs, os);
  return os.str();
}

}  // namespace

TEST(Experiment, PresetTrialArithmetic) {
  EXPECT_EQ(preset_plan(Preset::Study1).trial_count(), 4320u);
  EXPECT_EQ(preset_plan(Preset::Study2).trial_count(), 8640u);
  EXPECT_EQ(preset_plan(Preset::Study1).trial_count() / 12, 360u);
  EXPECT_EQ(preset_plan(Preset::Study2).trial_count() / 12, 720u);
}

TEST(Experiment, SingleCell) {
  ExperimentPlan plan;
  plan.techniques = {make_technique(TechniqueId::ABSOLUTE)};
  plan.positions = {{1.0, 0.0, 1.0}};
  plan.specs = {{2.5, 0.2}};
  plan.repetitions = 1;
  plan.virtual_participants = 1;
  const auto rs = run(plan);
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(rs[0].technique, TechniqueId::ABSOLUTE);
  EXPECT_NEAR(rs[0].id_bits, fitts_id(2.5, 0.2), 1e-8);
}

TEST(Experiment, CanonicalOrderAndFactorValues) {
  const auto plan = small_plan();
  const auto rs = run(plan);
  ASSERT_EQ(rs.size(), plan.trial_count());
  std::size_t i = 0;
  for (int p = 0; p < plan.virtual_participants; ++p)
    for (const auto& t : plan.techniques)
      for (const auto& pos : plan.positions)
        for (const auto& s : plan.specs)
          for (int rep = 0; rep < plan.repetitions; ++rep, ++i) {
            const auto& r = rs[i];
            ASSERT_EQ(r.participant_id, p);
            ASSERT_EQ(r.technique, t.id);
            ASSERT_EQ(r.distance_multiple, pos.distance_multiple);
            ASSERT_EQ(r.lateral_offset_m, pos.lateral_offset_m);
            ASSERT_EQ(r.amplitude_m, s.amplitude_m);
            ASSERT_EQ(r.width_m, s.width_m);
            ASSERT_EQ(r.repetition, rep);
            ASSERT_NEAR(r.id_bits, fitts_id(s.amplitude_m, s.width_m), 1e-8);
            ASSERT_GT(r.movement_time_s, 0.0);
          }
  std::set<std::uint64_t> seeds;
  for (const auto& r : rs) seeds.insert(r.seed);
  EXPECT_EQ(seeds.size(), rs.size());
}

TEST(Experiment, ThreadCountDoesNotChangeOutput) {
  auto plan = small_plan();
  plan.threads = 1;
  const std::string serial = to_csv(run(plan));
  plan.threads = 8;
  EXPECT_EQ(to_csv(run(plan)), serial);
  EXPECT_EQ(to_csv(run(plan)), serial);
}

TEST(Experiment, MasterSeedMatters) {
  auto plan = small_plan();
  const auto a = run(plan);
  plan.master_seed = 2;
  EXPECT_NE(to_csv(a), to_csv(run(plan)));
}

TEST(Experiment, CounterbalancingOnlyReordersBlocks) {
  auto plan = small_plan();
  plan.virtual_participants = 3;
  const auto plain = run(plan);
  plan.counterbalance = true;
  EXPECT_EQ(block_order(plan, 1).front(), 1u);
  EXPECT_EQ(to_csv(run(plan)), to_csv(plain));
}

TEST(Experiment, CommonRandomNumbersShareLayouts) {
  auto plan = small_plan();
  plan.common_random_numbers = true;
  const auto rs = run(plan);
  const std::size_t block = plan.positions.size() * plan.specs.size() * plan.repetitions;
  for (std::size_t t = 1; t < plan.techniques.size(); ++t) {
    for (std::size_t k = 0; k < block; ++k) {
      ASSERT_EQ(rs[k].seed, rs[t * block + k].seed);
      ASSERT_EQ(rs[k].target_azimuth_rad, rs[t * block + k].target_azimuth_rad);
    }
  }
  plan.common_random_numbers = false;
  const auto independent = run(plan);
  EXPECT_NE(independent[0].seed, independent[block].seed);
}

TEST(Experiment, InfeasibleSpecAbortsBeforeRunning) {
  auto plan = small_plan();
  plan.specs.push_back({11.0, 0.1});
  EXPECT_THROW(run(plan), std::invalid_argument);
  plan = small_plan();
  plan.repetitions = 0;
  EXPECT_THROW(run(plan), std::invalid_argument);
  plan = small_plan();
  plan.techniques.clear();
  EXPECT_THROW(run(plan), std::invalid_argument);
}

TEST(Experiment, DeriveSeedIsOrderSensitive) {
  EXPECT_NE(derive_seed(1, {1, 2}), derive_seed(1, {2, 1}));
  EXPECT_EQ(derive_seed(7, {0, 0, 0}), derive_seed(7, {0, 0, 0}));
  EXPECT_NE(derive_seed(7, {0}), derive_seed(8, {0}));
}

TEST(Csv, RoundTrip) {
  const auto rs = run(small_plan());
  std::istringstream is(to_csv(rs));
  EXPECT_EQ(read_csv(is), rs);
}

TEST(Csv, EmptyIsHeaderOnly) {
  const std::string s = to_csv({});
  EXPECT_EQ(s, std::string(kTrialCsvHeader) + "\n");
  std::istringstream is(s);
  EXPECT_TRUE(read_csv(is).empty());
}

TEST(Csv, TruncatedRowNamesTheLine) {
  auto text = to_csv(run(small_plan()));
  // Chop the third data row in half.
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) pos = text.find('\n', pos) + 1;
  const std::size_t end = text.find('\n', pos);
  text.erase(pos + (end - pos) / 2, end - pos - (end - pos) / 2);
  std::istringstream is(text);
  try {
    read_csv(is);
    FAIL() << "expected a parse error";
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
  }
}

TEST(Csv, RejectsBadFields) {
  const std::string header = std::string(kTrialCsvHeader) + "\n";
  std::istringstream wrong_header("a,b,c\n");
  EXPECT_THROW(read_csv(wrong_header), CsvError);
  std::istringstream bad_tech(header + "0,NOPE,1,0,2.5,0.1,4.7,0,1,1.0,1,0,1,0,1,0.025,0,1\n");
  EXPECT_THROW(read_csv(bad_tech), CsvError);
  std::istringstream bad_success(header + "0,PA,1,0,2.5,0.1,4.7,0,1,1.0,2,0,1,0,1,0.025,0,1\n");
  EXPECT_THROW(read_csv(bad_success), CsvError);
  std::istringstream bad_number(header + "0,PA,1,0,2.5x,0.1,4.7,0,1,1.0,1,0,1,0,1,0.025,0,1\n");
  EXPECT_THROW(read_csv(bad_number), CsvError);
}
