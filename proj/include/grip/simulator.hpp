#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "grip/datamodel.hpp"
#include "grip/sink.hpp"

namespace grip::sim {

// Deterministic generator state: splitmix64-seeded xorshift-free stream with
// a hand-rolled Box-Muller transform, so generated bytes depend only on the
// seed and the code here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next_u64();
  double uniform01();  // (0, 1]
  double normal();     // standard normal

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Synthetic per-user signal shape: per-sensor baseline and jitter, per-step
// force multipliers and step duration fractions.
struct Archetype {
  data::Expertise name = data::Expertise::Novice;
  std::array<double, 12> mean_mv{};
  std::array<double, 12> jitter_mv{};
  std::array<double, 4> step_multiplier{1.0, 1.0, 1.0, 1.0};
  std::array<double, 4> step_fraction{0.25, 0.25, 0.25, 0.25};

  static Archetype expert();
  static Archetype intermediate();
  static Archetype novice();
  static Archetype by_name(const std::string& token);  // throws Error

  // "expert"/"intermediate"/"novice" user, expert left-handed.
  data::UserMeta default_user() const;
};

struct SimConfig {
  Archetype archetype = Archetype::novice();
  data::HandRelation hand = data::HandRelation::Dominant;
  std::uint64_t seed = 0;
  double duration_s = 10.0;
  double sample_rate_hz = 50.0;
  std::vector<int> active_sensors = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  int session_index = 1;
  std::optional<data::UserMeta> user;  // defaults from the archetype

  void validate() const;  // throws InvalidConfig
};

// floor(duration_s * rate) samples per active sensor at exact tick
// timestamps; step annotations span the session timestamps when every step
// gets a non-empty span. Byte-for-byte deterministic for a fixed config.
data::Session generate_session(const SimConfig& config);

struct EmissionReport {
  std::uint64_t frames_written = 0;
  double wall_seconds = 0.0;
};

// Encodes the session's readings in timestamp order into the sink. Timed
// emission paces writes to the reading timestamps; the bytes are identical in
// both modes. A failing sink raises SinkError carrying frames_written.
EmissionReport emit_stream(const data::Session& session, io::ByteSink& sink,
                           bool timed = false);

// Per-session execution-time distribution used by experiment generation.
struct SessionTimeModel {
  double mean_s = 10.0;
  double sd_s = 1.0;
};

SessionTimeModel default_time_model(data::Expertise user, data::HandRelation hand);

// Full factorial dataset: every archetype, both hands, `sessions_per_cell`
// sessions with durations drawn from the time model. Child seeds derive from
// the master seed, so the whole dataset is reproducible.
std::vector<data::Session> generate_experiment(std::uint64_t seed,
                                               int sessions_per_cell,
                                               double sample_rate_hz = 50.0);

}  // namespace grip::sim
