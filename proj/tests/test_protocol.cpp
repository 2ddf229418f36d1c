#include <random>
#include <string>

#include <gtest/gtest.h>

#include "curvecast/protocol.hpp"

using namespace curvecast;
using nlohmann::json;

namespace {

json start(ProtocolServer& srv, const std::string& technique = "PADISTSIZE", double d = 1.0) {
  return srv.handle({{"op", "start_session"},
                     {"technique", technique},
                     {"distance_multiple", d},
                     {"lateral_offset_m", 0.0},
                     {"preset", "study2"}});
}

json step_msg(std::int64_t id, double dyaw, double dpitch = 0.0, std::vector<double> dpos = {0, 0, 0}) {
  return {{"op", "step"},
          {"session", id},
          {"dt_s", 0.011},
          {"controller_delta", {{"yaw_rad", dyaw}, {"pitch_rad", dpitch}, {"pos_delta_m", dpos}}}};
}

}  // namespace

TEST(Protocol, StartSessionReturnsALayout) {
  ProtocolServer srv;
  const json r = start(srv);
  ASSERT_TRUE(r.contains("session")) << r.dump();
  const json& l = r["layout"];
  EXPECT_TRUE(l["start"].contains("azimuth_rad"));
  EXPECT_TRUE(l["target"].contains("height_m"));
  EXPECT_EQ(l["width_m"].get<double>(), 0.10);
  const SurfacePoint s{l["start"]["azimuth_rad"], l["start"]["height_m"]};
  const SurfacePoint t{l["target"]["azimuth_rad"], l["target"]["height_m"]};
  EXPECT_NEAR(geodesic_distance(s, t, DisplayGeometry{}), l["amplitude_m"].get<double>(), 1e-6);
  EXPECT_EQ(srv.session_count(), 1u);
}

TEST(Protocol, ZeroDeltaLeavesTheCursor) {
  ProtocolServer srv;
  const auto id = start(srv)["session"].get<std::int64_t>();
  const json a = srv.handle(step_msg(id, 0.0));
  const json b = srv.handle(step_msg(id, 0.0));
  ASSERT_FALSE(a.contains("error")) << a.dump();
  EXPECT_EQ(a["cursor"], b["cursor"]);
  const json c = srv.handle(step_msg(id, 0.05));
  EXPECT_NE(c["cursor"]["azimuth_rad"], a["cursor"]["azimuth_rad"]);
}

TEST(Protocol, StepMatchesTheCore) {
  ProtocolServer srv;
  const auto id = start(srv, "PA")["session"].get<std::int64_t>();
  const json r = srv.handle(step_msg(id, 0.01, 0.0, {0.011, 0, 0}));
  // 1.1 cm in 11 ms is 1 m/s.
  EXPECT_NEAR(r["gain"].get<double>(), gain(make_technique(TechniqueId::PA), 1.0, 3.27, DisplayGeometry{}), 1e-9);
  EXPECT_EQ(r["diameter_m"].get<double>(), 0.025);
}

TEST(Protocol, TechniqueSwitchTakesEffectOnTheNextStep) {
  ProtocolServer srv;
  const auto id = start(srv, "PA", 0.5)["session"].get<std::int64_t>();
  const json before = srv.handle(step_msg(id, 0.0));
  EXPECT_NEAR(before["gain"].get<double>(), 0.8, 1e-4);
  const json ack = srv.handle({{"op", "set_params"}, {"session", id}, {"technique", "PBASIZE"}});
  EXPECT_EQ(ack["ok"], true);
  EXPECT_EQ(ack["technique"], "PBASIZE");
  const json after = srv.handle(step_msg(id, 0.0, 0.0, {0.02, 0, 0}));
  EXPECT_NEAR(after["gain"].get<double>(), 4.5, 0.01);
  EXPECT_GT(after["diameter_m"].get<double>(), 0.025);

  const json moved = srv.handle({{"op", "set_params"}, {"session", id}, {"distance_multiple", 1.5}});
  EXPECT_EQ(moved["ok"], true);
  EXPECT_NEAR(srv.handle(step_msg(id, 0.0))["gain"].get<double>(), 0.7, 0.01);
}

TEST(Protocol, ValidateBatchMatchesTransfer) {
  ProtocolServer srv;
  const DisplayGeometry g;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> speed(0.0, 3.0), dist(0.5 * 3.27, 1.5 * 3.27);
  json pairs = json::array();
  for (int i = 0; i < 100; ++i) pairs.push_back({speed(rng), dist(rng)});
  for (auto id : {TechniqueId::PADISTSIZE, TechniqueId::PBA, TechniqueId::PASIZE}) {
    json msg{{"op", "validate"}, {"pairs", pairs}};
    if (id != TechniqueId::PADISTSIZE) msg["technique"] = std::string(to_string(id));
    const json r = srv.handle(msg);
    ASSERT_EQ(r["gains"].size(), 100u) << r.dump();
    const auto cfg = make_technique(id, g);
    for (std::size_t i = 0; i < 100; ++i) {
      const double s = pairs[i][0], d = pairs[i][1];
      EXPECT_NEAR(r["gains"][i].get<double>(), gain(cfg, s, d, g), 1e-9);
      EXPECT_NEAR(r["diameters"][i].get<double>(), cursor_diameter(cfg, s), 1e-9);
    }
  }
}

TEST(Protocol, ClickScoresAndAdvances) {
  ProtocolServer srv;
  const json s = start(srv, "ABSOLUTE");
  const auto id = s["session"].get<std::int64_t>();
  // The cursor starts on the start circle, far from the target.
  srv.handle(step_msg(id, 0.0));
  const json miss = srv.handle({{"op", "click"}, {"session", id}});
  EXPECT_EQ(miss["success"], false);
  EXPECT_NEAR(miss["movement_time_s"].get<double>(), 0.011, 1e-12);
  EXPECT_TRUE(miss["next_layout"].contains("target"));
  EXPECT_NE(miss["next_layout"], s["layout"]);
}

TEST(Protocol, ErrorsKeepTheSession) {
  ProtocolServer srv;
  const auto id = start(srv)["session"].get<std::int64_t>();
  EXPECT_TRUE(srv.handle(json::array()).contains("error"));
  EXPECT_TRUE(srv.handle({{"op", "dance"}}).contains("error"));
  EXPECT_TRUE(srv.handle({{"op", "step"}, {"session", 999}, {"dt_s", 0.01}}).contains("error"));
  EXPECT_TRUE(srv.handle({{"op", "step"}, {"session", id}, {"dt_s", 0.0}}).contains("error"));
  EXPECT_TRUE(srv.handle({{"op", "step"}, {"session", id}, {"dt_s", "fast"}}).contains("error"));
  EXPECT_TRUE(srv.handle({{"op", "set_params"}, {"session", id}, {"technique", "NOPE"}}).contains("error"));
  EXPECT_TRUE(srv.handle({{"op", "set_params"}, {"session", id}, {"colour", 1}}).contains("error"));
  EXPECT_TRUE(srv.handle({{"op", "validate"}, {"pairs", {{1.0}}}}).contains("error"));
  EXPECT_TRUE(srv.handle({{"op", "start_session"}, {"distance_multiple", 3.0}}).contains("error"));
  const std::string line = srv.handle_line("{not json");
  EXPECT_NE(line.find("\"error\""), std::string::npos);
  const json ok = srv.handle(step_msg(id, 0.0));
  EXPECT_FALSE(ok.contains("error")) << ok.dump();
}

TEST(Protocol, NdjsonBody) {
  ProtocolServer srv;
  const std::string body =
      R"({"op":"start_session","technique":"PA"})"
      "\n\n"
      R"({"op":"step","session":1,"dt_s":0.011,"controller_delta":{"yaw_rad":0,"pitch_rad":0,"pos_delta_m":[0,0,0]}})"
      "\r\n"
      "garbage\n";
  const std::string out = srv.handle_body(body);
  std::istringstream is(out);
  std::string line;
  std::vector<json> replies;
  while (std::getline(is, line)) replies.push_back(json::parse(line));
  ASSERT_EQ(replies.size(), 3u);
  EXPECT_EQ(replies[0]["session"], 1);
  EXPECT_TRUE(replies[1].contains("cursor"));
  EXPECT_TRUE(replies[2].contains("error"));
}
