#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "grip/datamodel.hpp"
#include "grip/stats.hpp"

namespace grip::profiles {

enum class WindowStat : std::uint8_t {
  Mean,  // arithmetic mean of each window
  Max,   // per-window peak
};

struct ProfilePoint {
  std::size_t window_index = 0;
  double value_mv = 0.0;
  std::size_t n_samples = 0;

  bool operator==(const ProfilePoint&) const = default;
};

struct StepBoundary {
  int step = 0;
  double window_pos = 0.0;  // fractional window index

  bool operator==(const StepBoundary&) const = default;
};

// Window-aggregated trace for one sensor, with optional task-step overlays.
struct ProfileSeries {
  int sensor_id = 0;
  std::size_t window_size = 100;
  WindowStat stat = WindowStat::Mean;
  std::vector<ProfilePoint> points;
  std::vector<StepBoundary> step_boundaries;

  std::size_t total_samples() const;
};

// Aggregates consecutive non-overlapping windows in arrival order. Every full
// window holds window_size samples; only the final window may be partial and
// is emitted with its true count. Readings must belong to one sensor and be
// time-sorted.
ProfileSeries build_profile(std::span<const data::SensorReading> readings,
                            std::size_t window_size = 100,
                            WindowStat stat = WindowStat::Mean);

// Maps each annotated span edge at time t to the fractional window index
// (t / 1000 * rate) / window_size. Throws BoundaryBeyondProfile when an edge
// lands past the profile's last sample.
ProfileSeries overlay_steps(ProfileSeries profile,
                            const data::StepAnnotations& annotations,
                            double sample_rate_hz = 50.0);

// `window_index,mean_mv,n_samples` rows; the value column can be renamed
// when the series carries converted units.
std::string profile_to_csv(const ProfileSeries& profile,
                           const std::string& value_column = "mean_mv");

enum class SessionSlot : std::uint8_t { First, Last };

struct TrioCell {
  std::string user_id;
  SessionSlot slot = SessionSlot::First;
  stats::SummaryStats stats;
};

struct TrioSensor {
  int sensor_id = 0;
  std::array<TrioCell, 4> cells;  // (userA,first), (userA,last), (userB,...)
  stats::AnovaTable anova;        // user x session over raw samples
};

// Expert-vs-novice style comparison over the representative sensors. Expects
// exactly two users with a first and a last dominant-hand session each.
struct TrioReport {
  std::vector<TrioSensor> sensors;
};

TrioReport trio_comparison(std::span<const data::Session> sessions,
                           const std::array<int, 3>& sensors = {5, 6, 7});

}  // namespace grip::profiles
