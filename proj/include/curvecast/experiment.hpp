#pragma once

// Full-factorial experiment runner: participants x techniques x positions x
// tasks x repetitions, with per-trial seeds derived from a master seed so the
// output does not depend on scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <initializer_list>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "curvecast/agent.hpp"
#include "curvecast/geometry.hpp"
#include "curvecast/tasks.hpp"
#include "curvecast/transfer.hpp"

namespace curvecast {

struct ExperimentPlan {
  std::vector<TechniqueConfig> techniques;
  std::vector<UserPosition> positions;
  std::vector<TaskSpec> specs;
  int repetitions = 10;
  int virtual_participants = 12;
  std::uint64_t master_seed = 1;
  AgentParams agent{};
  DisplayGeometry geom{};
  double tick_rate_hz = 90.0;
  SelectionRule selection = SelectionRule::Overlap;
  int practice_trials_per_block = 15;
  bool counterbalance = false;
  // Leave the technique out of the seed so every technique sees the same
  // layouts and noise draws (paired comparisons).
  bool common_random_numbers = false;
  unsigned threads = 0;  // 0: hardware concurrency

  std::size_t trial_count() const {
    return static_cast<std::size_t>(virtual_participants) * techniques.size() *
           positions.size() * specs.size() * static_cast<std::size_t>(repetitions);
  }

  void validate() const {
    if (techniques.empty() || positions.empty() || specs.empty()) {
      throw std::invalid_argument("plan needs at least one technique, position and task");
    }
    if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
    if (virtual_participants < 1) throw std::invalid_argument("virtual_participants must be at least 1");
    if (practice_trials_per_block < 0) throw std::invalid_argument("practice trials must be non-negative");
    if (!(tick_rate_hz > 0.0)) throw std::invalid_argument("tick rate must be positive");
    geom.validate();
    agent.validate();
    for (const auto& t : techniques) t.validate();
    for (const auto& p : positions) {
      if (!(p.distance_multiple > 0.0)) throw std::invalid_argument("distance multiple must be positive");
      const WorldVector w = user_world_position(p, geom);
      if (std::hypot(w.x(), w.z()) >= geom.radius_m) {
        throw std::invalid_argument("user position lies outside the display cylinder");
      }
    }
    for (const auto& s : specs) {
      if (!layout_feasible(s, geom)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "infeasible task: amplitude %.4g m, width %.4g m",
                      s.amplitude_m, s.width_m);
        throw std::invalid_argument(buf);
      }
    }
  }
};

struct TrialRecord {
  int participant_id = 0;
  TechniqueId technique = TechniqueId::ABSOLUTE;
  double distance_multiple = 1.0;
  double lateral_offset_m = 0.0;
  double amplitude_m = 0.0;
  double width_m = 0.0;
  double id_bits = 0.0;
  int repetition = 0;
  std::uint64_t seed = 0;
  double movement_time_s = 0.0;
  bool success = false;
  double endpoint_azimuth_rad = 0.0;
  double endpoint_height_m = 0.0;
  double target_azimuth_rad = 0.0;
  double target_height_m = 0.0;
  double click_diameter_m = 0.0;
  double start_azimuth_rad = 0.0;
  double start_height_m = 0.0;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for one trial: the master seed folded with each tuple index in
/// order (participant, technique, position, task, repetition).
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> indices) {
  std::uint64_t h = mix64(master);
  for (auto v : indices) h = mix64(h ^ v);
  return h;
}

/// Rounds to the 9 significant digits the CSV stores, so in-memory records
/// and records read back from disk are identical.
inline double quantize9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

namespace detail {

// Practice trials use a task index past the real ones so their seeds never
// collide with recorded trials.
inline constexpr std::uint64_t kPracticeTag = 0x7072616374696365ULL;

struct TrialJob {
  int participant;
  std::size_t technique;
  std::size_t position;
  std::size_t spec;
  int repetition;
  bool practice;
  std::size_t slot;  // index into the record vector (recorded trials only)
};

inline TrialRecord execute(const ExperimentPlan& plan, const TrialJob& job) {
  const auto& cfg = plan.techniques[job.technique];
  const auto& pos = plan.positions[job.position];
  const auto& spec = plan.specs[job.spec];
  const std::uint64_t technique_key =
      plan.common_random_numbers ? 0 : static_cast<std::uint64_t>(job.technique);
  const std::uint64_t seed =
      derive_seed(plan.master_seed, {static_cast<std::uint64_t>(job.participant), technique_key,
                                     job.position, job.practice ? kPracticeTag : job.spec,
                                     static_cast<std::uint64_t>(job.repetition)});
  std::mt19937_64 layout_rng(seed);
  const TrialLayout layout = generate_layout(layout_rng, spec, plan.geom);
  SimulationSettings sim;
  sim.tick_rate_hz = plan.tick_rate_hz;
  sim.selection = plan.selection;
  const TrialOutcome outcome =
      run_trial(mix64(seed ^ 0xa5a5a5a5a5a5a5a5ULL), plan.agent, cfg, pos, layout, plan.geom, sim);

  TrialRecord r;
  r.participant_id = job.participant;
  r.technique = cfg.id;
  r.distance_multiple = quantize9(pos.distance_multiple);
  r.lateral_offset_m = quantize9(pos.lateral_offset_m);
  r.amplitude_m = quantize9(spec.amplitude_m);
  r.width_m = quantize9(spec.width_m);
  r.id_bits = quantize9(fitts_id(spec.amplitude_m, spec.width_m));
  r.repetition = job.repetition;
  r.seed = seed;
  r.movement_time_s = quantize9(outcome.movement_time_s);
  r.success = outcome.success;
  r.endpoint_azimuth_rad = quantize9(outcome.endpoint.azimuth_rad);
  r.endpoint_height_m = quantize9(outcome.endpoint.height_m);
  r.target_azimuth_rad = quantize9(layout.target.azimuth_rad);
  r.target_height_m = quantize9(layout.target.height_m);
  r.click_diameter_m = quantize9(outcome.click_diameter_m);
  r.start_azimuth_rad = quantize9(layout.start.azimuth_rad);
  r.start_height_m = quantize9(layout.start.height_m);
  return r;
}

}  // namespace detail

/// Technique order for one participant. With counterbalancing on, blocks
/// rotate as in a Latin square; otherwise they follow the plan.
inline std::vector<std::size_t> block_order(const ExperimentPlan& plan, int participant) {
  std::vector<std::size_t> order(plan.techniques.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = plan.counterbalance ? (i + static_cast<std::size_t>(participant)) % order.size() : i;
  }
  return order;
}

/// Runs every recorded trial (and the discarded practice trials) and returns
/// records in canonical tuple order.
inline std::vector<TrialRecord> run(const ExperimentPlan& plan) {
  plan.validate();

  const std::size_t n_pos = plan.positions.size();
  const std::size_t n_spec = plan.specs.size();
  const std::size_t n_rep = static_cast<std::size_t>(plan.repetitions);
  auto slot_of = [&](int p, std::size_t t, std::size_t pos, std::size_t s, int rep) {
    return (((static_cast<std::size_t>(p) * plan.techniques.size() + t) * n_pos + pos) * n_spec + s) *
               n_rep +
           static_cast<std::size_t>(rep);
  };

  std::vector<detail::TrialJob> jobs;
  jobs.reserve(plan.trial_count() +
               static_cast<std::size_t>(plan.virtual_participants) * plan.techniques.size() * n_pos *
                   static_cast<std::size_t>(plan.practice_trials_per_block));
  for (int p = 0; p < plan.virtual_participants; ++p) {
    for (std::size_t t : block_order(plan, p)) {
      for (std::size_t pos = 0; pos < n_pos; ++pos) {
        for (int k = 0; k < plan.practice_trials_per_block; ++k) {
          jobs.push_back({p, t, pos, static_cast<std::size_t>(k) % n_spec, k, true, 0});
        }
        for (std::size_t s = 0; s < n_spec; ++s) {
          for (int rep = 0; rep < plan.repetitions; ++rep) {
            jobs.push_back({p, t, pos, s, rep, false, slot_of(p, t, pos, s, rep)});
          }
        }
      }
    }
  }

  std::vector<TrialRecord> records(plan.trial_count());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        TrialRecord r = detail::execute(plan, jobs[i]);
        if (!jobs[i].practice) records[jobs[i].slot] = r;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs.size());
      }
    }
  };

  unsigned n_threads = plan.threads ? plan.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, std::max<std::size_t>(1, jobs.size())));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

}  // namespace curvecast
