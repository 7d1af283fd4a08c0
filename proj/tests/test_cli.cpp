#include <doctest.h>

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <memory>
#include <thread>

#include "grip/cli.hpp"
#include "grip/net.hpp"
#include "grip/simulator.hpp"
#include "test_util.hpp"

using grip::cli::run;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string p(const fs::path& path) { return path.string(); }

}  // namespace

TEST_CASE("simulate is byte-identical across runs with a fixed seed") {
  const auto dir = testutil::fresh_dir("cli_sim_det");
  const auto a = dir / "a.bin";
  const auto b = dir / "b.bin";
  REQUIRE(run({"simulate", "--archetype", "novice", "--seed", "7",
               "--duration-s", "10", "--out", p(a)}) == 0);
  REQUIRE(run({"simulate", "--archetype", "novice", "--seed", "7",
               "--duration-s", "10", "--out", p(b)}) == 0);
  const auto bytes = testutil::slurp(a);
  CHECK(bytes == testutil::slurp(b));
  CHECK(bytes.size() == 10 * 50 * 12 * 9);
}

TEST_CASE("simulate then ingest reproduces the session csv") {
  const auto dir = testutil::fresh_dir("cli_pipeline");
  const auto bin = dir / "stream.bin";
  const auto sim_csv = dir / "sim";
  const auto ingest_csv = dir / "ingest";
  REQUIRE(run({"simulate", "--archetype", "expert", "--seed", "3",
               "--duration-s", "4", "--out", p(bin), "--csv-out", p(sim_csv)}) == 0);
  // The users registry supplies both the dominant hand and the expertise.
  REQUIRE(run({"ingest", "--in", p(bin), "--csv-out", p(ingest_csv), "--user",
               "expert", "--users", p(sim_csv / "users.csv"), "--report",
               p(dir / "report.json")}) == 0);

  // The expert archetype is left-handed, so the file carries the L hand.
  CHECK(testutil::slurp(sim_csv / "expert_L_s1.csv") ==
        testutil::slurp(ingest_csv / "expert_L_s1.csv"));

  const auto report = json::parse(testutil::slurp(dir / "report.json"));
  CHECK(report["frames_decoded"] == 4 * 50 * 12);
  CHECK(report["pending_bytes"] == 0);
  CHECK(report["skipped_spans"].empty());
}

TEST_CASE("anova --model time reports the expected df column") {
  const auto dir = testutil::fresh_dir("cli_anova_time");
  const auto sessions = dir / "sessions";
  REQUIRE(run({"simulate", "--experiment", "--sessions-per-cell", "10",
               "--seed", "11", "--csv-out", p(sessions)}) == 0);
  const auto out = dir / "anova.json";
  REQUIRE(run({"anova", "--model", "time", "--in", p(sessions), "--format",
               "json", "--out", p(out)}) == 0);

  const auto table = json::parse(testutil::slurp(out));
  REQUIRE(table["rows"].size() == 3);
  CHECK(table["rows"][0]["term"] == "user");
  CHECK(table["rows"][0]["df"] == 2);
  CHECK(table["rows"][1]["term"] == "hand");
  CHECK(table["rows"][1]["df"] == 1);
  CHECK(table["rows"][2]["term"] == "user:hand");
  CHECK(table["rows"][2]["df"] == 2);
  CHECK(table["residual"]["df"] == 54);
}

TEST_CASE("anova --model force requires a unit and yields the three-way df") {
  const auto dir = testutil::fresh_dir("cli_anova_force");
  const auto sessions = dir / "sessions";
  REQUIRE(run({"simulate", "--experiment", "--sessions-per-cell", "2", "--seed",
               "5", "--csv-out", p(sessions)}) == 0);

  CHECK(run({"anova", "--model", "force", "--in", p(sessions)}) == 2);

  const auto out = dir / "force.json";
  REQUIRE(run({"anova", "--model", "force", "--unit", "session", "--in",
               p(sessions), "--format", "json", "--out", p(out)}) == 0);
  const auto table = json::parse(testutil::slurp(out));
  std::vector<int> dfs;
  for (const auto& row : table["rows"]) dfs.push_back(row["df"]);
  CHECK(dfs == std::vector<int>{2, 1, 11, 2, 22, 11});
}

TEST_CASE("degenerate data exits with code 3") {
  const auto dir = testutil::fresh_dir("cli_degenerate");
  const auto sessions = dir / "sessions";
  fs::create_directories(sessions);
  // Constant voltage everywhere: zero residual variance for the force model.
  for (const char* user : {"u1", "u2"}) {
    for (const char* hand : {"L", "R"}) {
      std::string body =
          "timestamp_ms,user,expertise,hand,session,sensor,voltage_mv\n";
      for (int i = 0; i < 10; ++i) {
        for (int sensor : {5, 6}) {
          body += std::to_string(20 * i) + "," + user + ",novice," + hand +
                  ",1," + std::to_string(sensor) + ",100\n";
        }
      }
      testutil::spit(sessions / (std::string(user) + "_" + hand + "_s1.csv"),
                     body);
    }
  }
  CHECK(run({"anova", "--model", "force", "--unit", "sample", "--in",
             p(sessions)}) == 3);
}

TEST_CASE("invalid flags and missing inputs map to documented exit codes") {
  CHECK(run({"anova", "--model", "bogus", "--in", "x"}) == 2);
  CHECK(run({"summary", "--in", "/nonexistent_path.csv"}) == 1);
  CHECK(run({"simulate", "--seed", "1"}) == 2);  // no output requested
  CHECK(run({"ingest"}) == 2);
  CHECK(run({"summary", "--in", ".", "--format", "csv"}) == 2);
}

TEST_CASE("profile emits deterministic csv and svg with step markers") {
  const auto dir = testutil::fresh_dir("cli_profile");
  const auto sessions = dir / "sessions";
  REQUIRE(run({"simulate", "--archetype", "novice", "--seed", "9",
               "--duration-s", "10", "--csv-out", p(sessions)}) == 0);

  const auto csv1 = dir / "prof1.csv";
  const auto svg1 = dir / "prof1.svg";
  REQUIRE(run({"profile", "--in", p(sessions / "novice_R_s1.csv"), "--steps",
               p(sessions / "steps.csv"), "--sensor", "5,6,7", "--csv-out",
               p(csv1), "--svg-out", p(svg1)}) == 0);
  const auto csv2 = dir / "prof2.csv";
  const auto svg2 = dir / "prof2.svg";
  REQUIRE(run({"profile", "--in", p(sessions / "novice_R_s1.csv"), "--steps",
               p(sessions / "steps.csv"), "--sensor", "5,6,7", "--csv-out",
               p(csv2), "--svg-out", p(svg2)}) == 0);

  for (int sensor : {5, 6, 7}) {
    const std::string suffix = "_s" + std::to_string(sensor) + ".csv";
    CHECK(testutil::slurp(dir / ("prof1" + suffix)) ==
          testutil::slurp(dir / ("prof2" + suffix)));
  }
  const auto svg = testutil::slurp(svg1);
  CHECK(svg == testutil::slurp(svg2));
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);  // step markers
  CHECK(svg.find("polyline") != std::string::npos);

  // 500 samples -> 5 windows per sensor.
  const auto prof = testutil::slurp(dir / "prof1_s5.csv");
  CHECK(std::count(prof.begin(), prof.end(), '\n') == 6);  // header + 5 rows
}

TEST_CASE("calibration overrides convert force reports to newtons") {
  const auto dir = testutil::fresh_dir("cli_newtons");
  const auto sessions = dir / "sessions";
  REQUIRE(run({"simulate", "--archetype", "expert", "--seed", "4",
               "--duration-s", "4", "--csv-out", p(sessions)}) == 0);

  const auto mv = dir / "mv.csv";
  const auto newton = dir / "newton.csv";
  REQUIRE(run({"summary", "--in", p(sessions), "--table", "force", "--format",
               "csv", "--out", p(mv)}) == 0);
  REQUIRE(run({"summary", "--in", p(sessions), "--table", "force", "--format",
               "csv", "--force-unit", "newton", "--v-max-mv", "3300",
               "--f-max-n", "33", "--out", p(newton)}) == 0);

  // With the full-scale anchor stretched to the rail the map is linear
  // (33 N / 3300 mV = 0.01 N per mV), so every mean scales exactly.
  const auto mv_body = testutil::slurp(mv);
  const auto n_body = testutil::slurp(newton);
  CHECK(mv_body.find("mean_mv") != std::string::npos);
  CHECK(n_body.find("mean_n") != std::string::npos);

  auto first_mean = [](const std::string& body) {
    const auto line_start = body.find('\n') + 1;
    const auto line = body.substr(line_start, body.find('\n', line_start) - line_start);
    std::size_t field = 0;
    std::size_t pos = 0;
    while (field < 3) {
      pos = line.find(',', pos) + 1;
      ++field;
    }
    return std::stod(line.substr(pos, line.find(',', pos) - pos));
  };
  CHECK(first_mean(n_body) ==
        doctest::Approx(first_mean(mv_body) * 0.01).epsilon(1e-9));

  const auto prof = dir / "prof.csv";
  REQUIRE(run({"profile", "--in", p(sessions / "expert_L_s1.csv"), "--sensor",
               "5", "--force-unit", "newton", "--csv-out", p(prof)}) == 0);
  CHECK(testutil::slurp(prof).find("window_index,mean_n,n_samples") == 0);
}

TEST_CASE("summary reports counts matching the emitted dataset") {
  const auto dir = testutil::fresh_dir("cli_summary");
  const auto sessions = dir / "sessions";
  REQUIRE(run({"simulate", "--archetype", "novice", "--seed", "2",
               "--duration-s", "10", "--csv-out", p(sessions)}) == 0);
  const auto out = dir / "summary.json";
  REQUIRE(run({"summary", "--in", p(sessions), "--format", "json", "--out",
               p(out)}) == 0);
  const auto j = json::parse(testutil::slurp(out));
  CHECK(j["signal_counts"]["grand_total"] == 6000);  // 10 s x 50 Hz x 12
  REQUIRE(j["total_force_v"].size() == 1);
  CHECK(j["total_force_v"][0]["user"] == "novice");
  CHECK(j["times"].size() == 1);
}

TEST_CASE("ingest accepts a single tcp connection") {
  const auto dir = testutil::fresh_dir("cli_tcp");
  const std::uint16_t port = 47113;

  int ingest_rc = -1;
  std::thread server([&] {
    ingest_rc = run({"ingest", "--tcp-listen", std::to_string(port), "--bind",
                     "127.0.0.1", "--csv-out", p(dir / "out"), "--user",
                     "novice", "--report", p(dir / "report.json")});
  });

  grip::sim::SimConfig config;
  config.seed = 6;
  config.duration_s = 2.0;
  config.active_sensors = {5};
  const auto session = grip::sim::generate_session(config);

  // The listener needs a moment to bind; retry until it accepts.
  std::unique_ptr<grip::net::TcpClientSink> sink;
  for (int attempt = 0; attempt < 100 && !sink; ++attempt) {
    try {
      sink = std::make_unique<grip::net::TcpClientSink>("127.0.0.1", port);
    } catch (const grip::SinkError&) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
  REQUIRE(sink != nullptr);
  grip::sim::emit_stream(session, *sink);
  sink.reset();  // EOF ends the ingest
  server.join();

  CHECK(ingest_rc == 0);
  const auto report = json::parse(testutil::slurp(dir / "report.json"));
  CHECK(report["frames_decoded"] == 100);
  CHECK(fs::exists(dir / "out" / "novice_R_s1.csv"));
}

TEST_CASE("anova --model trio picks first and last dominant sessions") {
  const auto dir = testutil::fresh_dir("cli_trio");
  const auto sessions = dir / "sessions";
  REQUIRE(run({"simulate", "--experiment", "--sessions-per-cell", "2", "--seed",
               "8", "--csv-out", p(sessions)}) == 0);
  const auto out = dir / "trio.json";
  REQUIRE(run({"anova", "--model", "trio", "--in", p(sessions), "--trio-users",
               "expert,novice", "--format", "json", "--out", p(out)}) == 0);
  const auto j = json::parse(testutil::slurp(out));
  REQUIRE(j["sensors"].size() == 3);
  CHECK(j["sensors"][0]["sensor"] == 5);
  CHECK(j["sensors"][0]["cells"].size() == 4);
  CHECK(j["sensors"][0]["anova"]["rows"][2]["df"] == 1);

  // Without narrowing, three users are ambiguous.
  CHECK(run({"anova", "--model", "trio", "--in", p(sessions)}) == 2);
}
