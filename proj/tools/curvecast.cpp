// curvecast: simulate experiments, analyze trial logs, serve the testbed.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 runtime failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "curvecast/analysis.hpp"
#include "curvecast/config.hpp"
#include "curvecast/csv.hpp"
#include "curvecast/protocol.hpp"
#include "curvecast/report.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines a `_res` macro that
// collides with Eigen parameter names.
#include "CLI11.hpp"
#include "httplib.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct SimulateArgs {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> participants;
  std::optional<unsigned> threads;
  bool crn = false;
  std::string out;
};

struct AnalyzeArgs {
  std::string in;
  std::string report;
  std::string group;
  std::string measure = "mt";
  std::string out;
};

struct ServeArgs {
  int port = 8765;
  std::string host = "127.0.0.1";
  std::string config;
  std::string preset;
};

curvecast::ExperimentPlan build_plan(const std::string& config, const std::string& preset) {
  std::optional<curvecast::Preset> p;
  if (!preset.empty()) p = curvecast::parse_preset(preset);
  if (!config.empty()) return curvecast::load_plan(config, p);
  return curvecast::preset_plan(p.value_or(curvecast::Preset::Study2));
}

int cmd_simulate(const SimulateArgs& a) {
  curvecast::ExperimentPlan plan;
  try {
    plan = build_plan(a.config, a.preset);
    if (a.seed) plan.master_seed = *a.seed;
    if (a.participants) plan.virtual_participants = *a.participants;
    if (a.threads) plan.threads = *a.threads;
    if (a.crn) plan.common_random_numbers = true;
    plan.validate();
  } catch (const std::exception& e) {
    std::cerr << "curvecast simulate: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const auto t0 = std::chrono::steady_clock::now();
    const auto records = curvecast::run(plan);
    if (a.out.empty() || a.out == "-") {
      curvecast::write_csv(records, std::cout);
    } else {
      curvecast::write_csv(records, a.out);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostream& log = (a.out.empty() || a.out == "-") ? std::cerr : std::cout;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu records in %.2f s", records.size(), secs);
    log << buf << '\n';
  } catch (const std::exception& e) {
    std::cerr << "curvecast simulate: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_analyze(const AnalyzeArgs& a) {
  std::vector<curvecast::TrialRecord> records;
  std::vector<curvecast::GroupKey> keys;
  curvecast::Measure measure{};
  try {
    records = curvecast::read_csv(a.in);
    keys = curvecast::parse_group_keys(a.group);
    measure = curvecast::parse_measure(a.measure);
    if (a.report == "plot" && (keys.empty() || keys.size() > 2)) {
      throw std::invalid_argument("--report plot needs --group with one or two keys");
    }
  } catch (const std::exception& e) {
    std::cerr << "curvecast analyze: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    std::ostringstream os;
    const curvecast::DisplayGeometry geom;
    if (a.report == "summary") {
      curvecast::write_summary_csv(os, keys, curvecast::summarize(records, keys));
    } else if (a.report == "fitts") {
      curvecast::write_fitts_csv(os, keys, curvecast::fitts_by_group(records, keys));
    } else if (a.report == "throughput" || a.report == "throughput-cells") {
      const auto report = curvecast::throughput(records, geom);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
      if (a.report == "throughput") {
        curvecast::write_throughput_csv(os, report);
      } else {
        curvecast::write_throughput_cells_csv(os, report);
      }
    } else {
      curvecast::write_plot_csv(os, curvecast::plot_data(records, keys, measure));
    }
    if (a.out.empty() || a.out == "-") {
      std::cout << os.str();
    } else {
      std::ofstream f(a.out, std::ios::binary);
      if (!f) throw std::runtime_error("cannot open '" + a.out + "' for writing");
      f << os.str();
    }
  } catch (const std::exception& e) {
    std::cerr << "curvecast analyze: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_serve(const ServeArgs& a) {
  curvecast::ExperimentPlan base;
  try {
    base = build_plan(a.config, a.preset);
  } catch (const std::exception& e) {
    std::cerr << "curvecast serve: " << e.what() << '\n';
    return kExitUsage;
  }
  curvecast::ProtocolServer protocol(base);
  httplib::Server server;
  auto handler = [&](const httplib::Request& req, httplib::Response& res) {
    res.set_content(protocol.handle_body(req.body), "application/x-ndjson");
  };
  server.Post("/", handler);
  server.Post("/rpc", handler);
  if (!server.bind_to_port(a.host, a.port)) {
    std::cerr << "curvecast serve: cannot bind " << a.host << ':' << a.port << '\n';
    return kExitUsage;
  }
  std::cout << "serving on http://" << a.host << ':' << a.port << '\n' << std::flush;
  if (!server.listen_after_bind()) {
    std::cerr << "curvecast serve: server stopped unexpectedly\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ray-cast pointing simulator and analysis toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "run an experiment plan and write the trial log");
  simulate->add_option("--config", sim.config, "JSON configuration file");
  simulate->add_option("--preset", sim.preset, "study1 or study2")
      ->check(CLI::IsMember({"study1", "study2"}));
  simulate->add_option("--seed", sim.seed, "master seed");
  simulate->add_option("--participants", sim.participants, "virtual participants");
  simulate->add_option("--threads", sim.threads, "worker threads (0: all cores)");
  simulate->add_flag("--crn", sim.crn, "share noise draws across techniques");
  simulate->add_option("--out", sim.out, "output CSV (default stdout)");

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "aggregate a trial log");
  analyze->add_option("--in", an.in, "trial CSV")->required();
  analyze->add_option("--report", an.report, "summary, fitts, throughput, throughput-cells or plot")
      ->required()
      ->check(CLI::IsMember({"summary", "fitts", "throughput", "throughput-cells", "plot"}));
  analyze->add_option("--group", an.group, "comma separated keys: participant, technique, distance, "
                                           "offset, amplitude, width, id");
  analyze->add_option("--measure", an.measure, "plot measure: mt, accuracy or error");
  analyze->add_option("--out", an.out, "output CSV (default stdout)");

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "answer testbed messages (NDJSON over HTTP POST)");
  serve->add_option("--port", sv.port, "TCP port");
  serve->add_option("--host", sv.host, "bind address");
  serve->add_option("--config", sv.config, "JSON configuration file");
  serve->add_option("--preset", sv.preset, "study1 or study2")
      ->check(CLI::IsMember({"study1", "study2"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (simulate->parsed()) return cmd_simulate(sim);
  if (analyze->parsed()) return cmd_analyze(an);
  return cmd_serve(sv);
}
