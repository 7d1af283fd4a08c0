#include "grip/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <thread>

#include "grip/wire_protocol.hpp"

namespace grip::sim {

// ---------------------------------------------------------------------------
// Rng: splitmix64 + Box-Muller.
// ---------------------------------------------------------------------------

Rng::Rng(std::uint64_t seed) : state_(seed) {}

std::uint64_t Rng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double Rng::uniform01() {
  // 53-bit mantissa, shifted into (0, 1].
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  have_spare_ = true;
  return radius * std::cos(angle);
}

// ---------------------------------------------------------------------------
// Archetypes.
// ---------------------------------------------------------------------------

namespace {

// Overall per-sensor baseline levels (mV); the palm and index sensors are
// rarely loaded, the middle/ring/pinky phalanx sensors carry most force.
constexpr std::array<double, 12> kBaseMeanMv = {
    0.12, 17.60, 115.70, 3.05, 337.63, 575.04,
    294.61, 193.40, 223.82, 320.96, 267.99, 261.28};

std::array<double, 12> scaled_means(double user_scale) {
  std::array<double, 12> means{};
  for (std::size_t i = 0; i < means.size(); ++i) {
    means[i] = kBaseMeanMv[i] * user_scale;
  }
  return means;
}

std::array<double, 12> jitter_for(const std::array<double, 12>& means) {
  std::array<double, 12> jitter{};
  for (std::size_t i = 0; i < means.size(); ++i) {
    jitter[i] = std::clamp(0.3 * means[i], 5.0, 130.0);
  }
  return jitter;
}

}  // namespace

Archetype Archetype::expert() {
  Archetype a;
  a.name = data::Expertise::Expert;
  a.mean_mv = scaled_means(0.74);
  // Representative sensors: low gross force (middle finger), strong precision
  // grip (pinky).
  a.mean_mv[4] = 240.37;
  a.mean_mv[5] = 575.63;
  a.mean_mv[6] = 594.02;
  a.jitter_mv = jitter_for(a.mean_mv);
  a.jitter_mv[4] = 127.0;
  a.jitter_mv[5] = 126.0;
  a.jitter_mv[6] = 95.0;
  a.step_multiplier = {0.7, 1.25, 1.1, 0.85};
  a.step_fraction = {0.30, 0.22, 0.28, 0.20};
  return a;
}

Archetype Archetype::intermediate() {
  Archetype a;
  a.name = data::Expertise::Intermediate;
  a.mean_mv = scaled_means(0.55);
  a.jitter_mv = jitter_for(a.mean_mv);
  a.step_multiplier = {0.7, 1.25, 1.1, 0.85};
  a.step_fraction = {0.35, 0.21, 0.26, 0.18};
  return a;
}

Archetype Archetype::novice() {
  Archetype a;
  a.name = data::Expertise::Novice;
  a.mean_mv = scaled_means(1.70);
  // Heavy task-irrelevant gross force, almost no precision grip.
  a.mean_mv[4] = 790.00;
  a.mean_mv[5] = 504.12;
  a.mean_mv[6] = 110.82;
  a.jitter_mv = jitter_for(a.mean_mv);
  a.jitter_mv[4] = 84.0;
  a.jitter_mv[5] = 68.0;
  a.jitter_mv[6] = 21.0;
  a.step_multiplier = {0.9, 1.3, 1.15, 0.95};
  a.step_fraction = {0.45, 0.19, 0.22, 0.14};
  return a;
}

Archetype Archetype::by_name(const std::string& token) {
  if (token == "expert") return expert();
  if (token == "intermediate") return intermediate();
  if (token == "novice") return novice();
  throw Error("unknown archetype '" + token + "'");
}

data::UserMeta Archetype::default_user() const {
  data::UserMeta user;
  user.user_id = data::to_token(name);
  user.expertise = name;
  user.dominant_hand =
      name == data::Expertise::Expert ? data::Hand::Left : data::Hand::Right;
  return user;
}

// ---------------------------------------------------------------------------
// Session generation.
// ---------------------------------------------------------------------------

void SimConfig::validate() const {
  if (!(duration_s > 0.0)) throw InvalidConfig("duration must be > 0 s");
  if (!(sample_rate_hz > 0.0)) throw InvalidConfig("sample rate must be > 0 Hz");
  if (std::floor(duration_s * sample_rate_hz) < 1.0) {
    throw InvalidConfig("duration too short for one sample at this rate");
  }
  if (active_sensors.empty()) throw InvalidConfig("no active sensors");
  std::set<int> seen;
  for (int s : active_sensors) {
    if (s < wire::kSensorIdMin || s > wire::kSensorIdMax) {
      throw InvalidConfig("sensor " + std::to_string(s) + " outside [1, 12]");
    }
    if (!seen.insert(s).second) {
      throw InvalidConfig("sensor " + std::to_string(s) + " listed twice");
    }
  }
  if (session_index < 1) throw InvalidConfig("session index must be >= 1");

  double fraction_sum = 0.0;
  for (double f : archetype.step_fraction) {
    if (!(f > 0.0)) throw InvalidConfig("step fractions must be positive");
    fraction_sum += f;
  }
  if (std::fabs(fraction_sum - 1.0) > 1e-9) {
    throw InvalidConfig("step fractions must sum to 1");
  }
  for (double m : archetype.mean_mv) {
    if (m < 0.0 || m > wire::kSupplyRailMv) {
      throw InvalidConfig("archetype mean level outside [0, 3300] mV");
    }
  }
  for (double j : archetype.jitter_mv) {
    if (j < 0.0) throw InvalidConfig("jitter must be >= 0");
  }
  for (double m : archetype.step_multiplier) {
    if (m < 0.0) throw InvalidConfig("step multipliers must be >= 0");
  }
}

data::Session generate_session(const SimConfig& config) {
  config.validate();

  const auto samples_per_sensor = static_cast<std::size_t>(
      std::floor(config.duration_s * config.sample_rate_hz));
  std::vector<int> sensors = config.active_sensors;
  std::sort(sensors.begin(), sensors.end());

  data::Session session;
  session.user = config.user.value_or(config.archetype.default_user());
  session.hand = config.hand;
  session.session_index = config.session_index;
  session.readings.reserve(samples_per_sensor * sensors.size());

  std::vector<std::uint32_t> ticks(samples_per_sensor);
  for (std::size_t i = 0; i < samples_per_sensor; ++i) {
    ticks[i] = static_cast<std::uint32_t>(
        std::llround(i * 1000.0 / config.sample_rate_hz));
  }
  const std::uint32_t last_ts = ticks.back();

  // Step boundaries across the session timespan.
  std::array<std::uint32_t, 5> bounds{};
  double cumulative = 0.0;
  bounds[0] = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    cumulative += config.archetype.step_fraction[k];
    bounds[k + 1] =
        static_cast<std::uint32_t>(std::llround(cumulative * last_ts));
  }
  bounds[4] = last_ts;

  auto step_at = [&](std::uint32_t t) {
    for (int k = 1; k <= 3; ++k) {
      if (t < bounds[static_cast<std::size_t>(k)]) return k;
    }
    return 4;
  };

  Rng rng(config.seed);
  for (std::size_t i = 0; i < samples_per_sensor; ++i) {
    const std::uint32_t t = ticks[i];
    const int step = step_at(t);
    const double multiplier =
        config.archetype.step_multiplier[static_cast<std::size_t>(step - 1)];
    for (int sensor : sensors) {
      const auto idx = static_cast<std::size_t>(sensor - 1);
      const double level = config.archetype.mean_mv[idx] * multiplier +
                           config.archetype.jitter_mv[idx] * rng.normal();
      const double clamped =
          std::clamp(level, 0.0, static_cast<double>(wire::kSupplyRailMv));
      session.readings.push_back(data::SensorReading{
          sensor, session.physical_hand(), t,
          static_cast<std::uint16_t>(std::llround(clamped))});
    }
  }

  // Annotate steps when every span is non-empty (long enough session).
  bool spans_ok = true;
  for (std::size_t k = 0; k < 4; ++k) {
    if (bounds[k] >= bounds[k + 1]) spans_ok = false;
  }
  if (spans_ok) {
    data::StepAnnotations steps;
    for (int k = 1; k <= 4; ++k) {
      steps.spans.push_back({k, bounds[static_cast<std::size_t>(k - 1)],
                             bounds[static_cast<std::size_t>(k)]});
    }
    session.steps = std::move(steps);
  }
  return session;
}

// ---------------------------------------------------------------------------
// Emission.
// ---------------------------------------------------------------------------

EmissionReport emit_stream(const data::Session& session, io::ByteSink& sink,
                           bool timed) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  std::uint64_t written = 0;
  const std::uint32_t t0 =
      session.readings.empty() ? 0 : session.readings.front().timestamp_ms;
  try {
    for (const auto& reading : session.readings) {
      if (timed) {
        std::this_thread::sleep_until(
            start + std::chrono::milliseconds(reading.timestamp_ms - t0));
      }
      const wire::Frame frame = wire::encode_frame(reading);
      sink.write(frame);
      ++written;
    }
  } catch (SinkError& e) {
    e.frames_written = written;
    throw;
  }
  EmissionReport report;
  report.frames_written = written;
  report.wall_seconds =
      std::chrono::duration<double>(clock::now() - start).count();
  return report;
}

// ---------------------------------------------------------------------------
// Experiment generation.
// ---------------------------------------------------------------------------

SessionTimeModel default_time_model(data::Expertise user, data::HandRelation hand) {
  const bool dominant = hand == data::HandRelation::Dominant;
  switch (user) {
    case data::Expertise::Expert:
      return dominant ? SessionTimeModel{8.88, 1.14} : SessionTimeModel{10.49, 1.55};
    case data::Expertise::Intermediate:
      return dominant ? SessionTimeModel{11.95, 1.55} : SessionTimeModel{13.53, 2.09};
    case data::Expertise::Novice:
      return dominant ? SessionTimeModel{15.56, 5.06} : SessionTimeModel{12.99, 2.37};
  }
  return {};
}

std::vector<data::Session> generate_experiment(std::uint64_t seed,
                                               int sessions_per_cell,
                                               double sample_rate_hz) {
  if (sessions_per_cell < 1) {
    throw InvalidConfig("sessions per cell must be >= 1");
  }
  Rng master(seed);
  std::vector<data::Session> sessions;
  const std::array<Archetype, 3> archetypes = {
      Archetype::expert(), Archetype::intermediate(), Archetype::novice()};
  for (const auto& archetype : archetypes) {
    for (data::HandRelation hand :
         {data::HandRelation::Dominant, data::HandRelation::NonDominant}) {
      const SessionTimeModel model = default_time_model(archetype.name, hand);
      for (int k = 1; k <= sessions_per_cell; ++k) {
        SimConfig config;
        config.archetype = archetype;
        config.hand = hand;
        config.session_index = k;
        config.sample_rate_hz = sample_rate_hz;
        config.duration_s =
            std::max(2.0, model.mean_s + model.sd_s * master.normal());
        config.seed = master.next_u64();
        sessions.push_back(generate_session(config));
      }
    }
  }
  return sessions;
}

}  // namespace grip::sim
