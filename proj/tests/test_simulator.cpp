#include <doctest.h>

#include <set>

#include "grip/simulator.hpp"
#include "grip/wire_protocol.hpp"
#include "test_util.hpp"

using namespace grip;
using namespace grip::sim;

namespace {

class FailingSink final : public io::ByteSink {
 public:
  explicit FailingSink(std::size_t fail_after) : remaining_(fail_after) {}
  void write(std::span<const std::uint8_t> bytes) override {
    if (remaining_ == 0) throw SinkError("sink closed");
    --remaining_;
    data_.insert(data_.end(), bytes.begin(), bytes.end());
  }
  std::size_t frames_accepted() const { return data_.size() / 9; }

 private:
  std::size_t remaining_;
  std::vector<std::uint8_t> data_;
};

double sensor_mean(const data::Session& s, int sensor) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : s.readings) {
    if (r.sensor_id == sensor) {
      sum += r.voltage_mv;
      ++n;
    }
  }
  return sum / static_cast<double>(n);
}

}  // namespace

TEST_CASE("generation is deterministic in (config, seed)") {
  SimConfig config;
  config.seed = 99;
  config.duration_s = 3.0;
  const auto a = generate_session(config);
  const auto b = generate_session(config);
  CHECK(a == b);

  config.seed = 100;
  const auto c = generate_session(config);
  CHECK(a.readings != c.readings);
}

TEST_CASE("10 s at 50 Hz yields 500 samples per sensor on exact ticks") {
  SimConfig config;
  config.duration_s = 10.0;
  config.active_sensors = {5};
  const auto session = generate_session(config);
  REQUIRE(session.readings.size() == 500);
  for (std::size_t i = 0; i < session.readings.size(); ++i) {
    CHECK(session.readings[i].timestamp_ms == 20 * i);
    CHECK(session.readings[i].voltage_mv <= 3300);
  }
}

TEST_CASE("full sensor set interleaves per tick in sensor order") {
  SimConfig config;
  config.duration_s = 1.0;
  const auto session = generate_session(config);
  REQUIRE(session.readings.size() == 50 * 12);
  for (std::size_t i = 0; i < session.readings.size(); ++i) {
    CHECK(session.readings[i].sensor_id == static_cast<int>(i % 12) + 1);
    CHECK(session.readings[i].timestamp_ms == 20 * (i / 12));
  }
}

TEST_CASE("generated sessions carry a four-step annotation") {
  SimConfig config;
  config.duration_s = 10.0;
  const auto session = generate_session(config);
  REQUIRE(session.steps.has_value());
  REQUIRE(session.steps->spans.size() == 4);
  CHECK(session.steps->spans.front().start_ms == 0);
  CHECK(session.steps->spans.back().end_ms ==
        session.readings.back().timestamp_ms);
  // Round trips through validation.
  CHECK_NOTHROW(data::attach_steps(session, *session.steps));
}

TEST_CASE("invalid configurations are rejected") {
  SimConfig config;
  config.duration_s = 0.0;
  CHECK_THROWS_AS(generate_session(config), InvalidConfig);
  config = {};
  config.active_sensors = {};
  CHECK_THROWS_AS(generate_session(config), InvalidConfig);
  config = {};
  config.active_sensors = {5, 5};
  CHECK_THROWS_AS(generate_session(config), InvalidConfig);
  config = {};
  config.active_sensors = {13};
  CHECK_THROWS_AS(generate_session(config), InvalidConfig);
  config = {};
  config.archetype.step_fraction = {0.5, 0.5, 0.5, 0.5};
  CHECK_THROWS_AS(generate_session(config), InvalidConfig);
  config = {};
  config.duration_s = 0.001;  // shorter than one tick
  CHECK_THROWS_AS(generate_session(config), InvalidConfig);
}

TEST_CASE("emitted streams decode back to the generated session") {
  SimConfig config;
  config.seed = 7;
  config.duration_s = 10.0;
  config.active_sensors = {5};
  const auto session = generate_session(config);

  io::VectorSink sink;
  const auto report = emit_stream(session, sink);
  CHECK(report.frames_written == 500);
  CHECK(sink.data().size() == 500 * wire::kFrameSize);

  const auto decoded = wire::decode_stream(sink.data());
  CHECK(decoded.readings == session.readings);
  CHECK(decoded.skipped_byte_spans.empty());
  CHECK(decoded.pending_bytes == 0);
}

TEST_CASE("timed and untimed emission produce identical bytes") {
  SimConfig config;
  config.seed = 3;
  config.duration_s = 0.4;
  config.active_sensors = {1, 2};
  const auto session = generate_session(config);

  io::VectorSink fast;
  emit_stream(session, fast, false);
  io::VectorSink paced;
  emit_stream(session, paced, true);
  CHECK(fast.data() == paced.data());
}

TEST_CASE("timed emission paces to the sample rate") {
  SimConfig config;
  config.seed = 5;
  config.duration_s = 2.0;
  config.active_sensors = {5};
  const auto session = generate_session(config);

  io::VectorSink sink;
  const auto report = emit_stream(session, sink, true);
  CHECK(report.frames_written == 100);
  // 100 frames at 50 Hz span 1.98 s of timestamps; allow the contract's 10%.
  CHECK(report.wall_seconds > 1.8);
  CHECK(report.wall_seconds < 2.2);
}

TEST_CASE("a failing sink reports the frames that made it out") {
  SimConfig config;
  config.duration_s = 1.0;
  config.active_sensors = {5};
  const auto session = generate_session(config);

  FailingSink sink(10);
  try {
    emit_stream(session, sink);
    FAIL("expected SinkError");
  } catch (const SinkError& e) {
    CHECK(e.frames_written == 10);
    CHECK(sink.frames_accepted() == 10);
  }
}

TEST_CASE("novice gross-force sensor runs higher than the expert's") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimConfig novice;
    novice.archetype = Archetype::novice();
    novice.seed = seed;
    novice.duration_s = 10.0;
    SimConfig expert = novice;
    expert.archetype = Archetype::expert();

    const double novice_s5 = sensor_mean(generate_session(novice), 5);
    const double expert_s5 = sensor_mean(generate_session(expert), 5);
    CHECK(novice_s5 > expert_s5);
  }
}

TEST_CASE("novice archetype applies more total force than the expert") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimConfig novice;
    novice.archetype = Archetype::novice();
    novice.seed = seed;
    novice.duration_s = 5.0;
    SimConfig expert = novice;
    expert.archetype = Archetype::expert();

    auto total = [](const data::Session& s) {
      double sum = 0.0;
      for (const auto& r : s.readings) sum += r.voltage_mv;
      return sum;
    };
    CHECK(total(generate_session(novice)) > total(generate_session(expert)));
  }
}

TEST_CASE("expert leads on the precision-grip sensor") {
  SimConfig novice;
  novice.archetype = Archetype::novice();
  novice.seed = 21;
  SimConfig expert = novice;
  expert.archetype = Archetype::expert();
  CHECK(sensor_mean(generate_session(expert), 7) >
        sensor_mean(generate_session(novice), 7));
}

TEST_CASE("experiment generation covers every cell deterministically") {
  const auto sessions = generate_experiment(42, 2);
  REQUIRE(sessions.size() == 3 * 2 * 2);

  std::set<std::tuple<std::string, data::HandRelation, int>> cells;
  std::set<double> durations;
  for (const auto& s : sessions) {
    cells.insert({s.user.user_id, s.hand, s.session_index});
    durations.insert(s.duration_s());
    CHECK_FALSE(s.readings.empty());
  }
  CHECK(cells.size() == sessions.size());
  // Session lengths vary across the dataset.
  CHECK(durations.size() > 1);

  const auto again = generate_experiment(42, 2);
  CHECK(again == sessions);

  CHECK_THROWS_AS(generate_experiment(1, 0), InvalidConfig);
}
