#include "grip/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace grip::profiles {

std::size_t ProfileSeries::total_samples() const {
  std::size_t n = 0;
  for (const auto& p : points) n += p.n_samples;
  return n;
}

ProfileSeries build_profile(std::span<const data::SensorReading> readings,
                            std::size_t window_size, WindowStat stat) {
  if (readings.empty()) throw EmptyInput("cannot profile an empty reading list");
  if (window_size < 1) throw Error("window size must be >= 1");
  const int sensor = readings.front().sensor_id;
  for (const auto& r : readings) {
    if (r.sensor_id != sensor) {
      throw Error("profile input mixes sensors " + std::to_string(sensor) +
                  " and " + std::to_string(r.sensor_id));
    }
  }

  ProfileSeries series;
  series.sensor_id = sensor;
  series.window_size = window_size;
  series.stat = stat;

  const std::size_t n = readings.size();
  for (std::size_t start = 0; start < n; start += window_size) {
    const std::size_t count = std::min(window_size, n - start);
    double value;
    if (stat == WindowStat::Mean) {
      // Integral millivolts: exact sum, one division.
      std::uint64_t sum = 0;
      for (std::size_t i = start; i < start + count; ++i) {
        sum += readings[i].voltage_mv;
      }
      value = static_cast<double>(sum) / static_cast<double>(count);
    } else {
      std::uint16_t peak = 0;
      for (std::size_t i = start; i < start + count; ++i) {
        peak = std::max(peak, readings[i].voltage_mv);
      }
      value = static_cast<double>(peak);
    }
    series.points.push_back({start / window_size, value, count});
  }
  return series;
}

ProfileSeries overlay_steps(ProfileSeries profile,
                            const data::StepAnnotations& annotations,
                            double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw Error("sample rate must be > 0");
  const double total = static_cast<double>(profile.total_samples());
  const double window = static_cast<double>(profile.window_size);

  auto to_window_pos = [&](std::uint32_t t_ms, int step) {
    const double samples = t_ms / 1000.0 * sample_rate_hz;
    if (samples > total + 1e-9) {
      throw BoundaryBeyondProfile(
          "step " + std::to_string(step) + " boundary at " +
          std::to_string(t_ms) + " ms is past the profile's last sample");
    }
    return samples / window;
  };

  profile.step_boundaries.clear();
  for (const auto& span : annotations.spans) {
    profile.step_boundaries.push_back(
        {span.step, to_window_pos(span.start_ms, span.step)});
    profile.step_boundaries.push_back(
        {span.step, to_window_pos(span.end_ms, span.step)});
  }
  return profile;
}

std::string profile_to_csv(const ProfileSeries& profile,
                           const std::string& value_column) {
  std::string out = "window_index," + value_column + ",n_samples\n";
  char line[96];
  for (const auto& p : profile.points) {
    std::snprintf(line, sizeof(line), "%zu,%.10g,%zu\n", p.window_index,
                  p.value_mv, p.n_samples);
    out += line;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Representative-sensor comparison.
// ---------------------------------------------------------------------------

namespace {

struct UserSlotKey {
  std::string user_id;
  SessionSlot slot;
};

std::vector<double> sensor_values(const data::Session& session, int sensor_id) {
  std::vector<double> values;
  for (const auto& r : session.readings) {
    if (r.sensor_id == sensor_id) values.push_back(r.voltage_mv);
  }
  return values;
}

}  // namespace

TrioReport trio_comparison(std::span<const data::Session> sessions,
                           const std::array<int, 3>& sensors) {
  if (sessions.size() != 4) {
    throw Error("expected exactly 4 sessions (two users, first and last), got " +
                std::to_string(sessions.size()));
  }
  std::map<std::string, std::vector<const data::Session*>> by_user;
  for (const auto& s : sessions) {
    if (s.hand != data::HandRelation::Dominant) {
      throw Error("trio comparison uses dominant-hand sessions only");
    }
    by_user[s.user.user_id].push_back(&s);
  }
  if (by_user.size() != 2) {
    throw Error("expected exactly two users, got " +
                std::to_string(by_user.size()));
  }
  std::vector<UserSlotKey> order;
  std::map<std::string, std::map<SessionSlot, const data::Session*>> resolved;
  for (auto& [user, list] : by_user) {
    if (list.size() != 2 ||
        list[0]->session_index == list[1]->session_index) {
      throw Error("user " + user + " needs two sessions with distinct indices");
    }
    const auto* first = list[0]->session_index < list[1]->session_index
                            ? list[0] : list[1];
    const auto* last = first == list[0] ? list[1] : list[0];
    resolved[user][SessionSlot::First] = first;
    resolved[user][SessionSlot::Last] = last;
    order.push_back({user, SessionSlot::First});
    order.push_back({user, SessionSlot::Last});
  }

  TrioReport report;
  for (int sensor : sensors) {
    TrioSensor entry;
    entry.sensor_id = sensor;

    std::vector<stats::Observation> observations;
    for (std::size_t c = 0; c < order.size(); ++c) {
      const auto& key = order[c];
      const auto* session = resolved.at(key.user_id).at(key.slot);
      const auto values = sensor_values(*session, sensor);
      if (values.empty()) {
        throw Error("sensor S" + std::to_string(sensor) +
                    " has no samples for user " + key.user_id);
      }
      entry.cells[c] = {key.user_id, key.slot, stats::summary_stats(values)};
      const std::string slot_label =
          key.slot == SessionSlot::First ? "first" : "last";
      for (double v : values) {
        observations.push_back(
            {v, {{"user", key.user_id}, {"session", slot_label}}});
      }
    }

    entry.anova = stats::fit_factorial_anova(
        observations, stats::ModelSpec::mains_and_two_way({"user", "session"}));
    report.sensors.push_back(std::move(entry));
  }
  return report;
}

}  // namespace grip::profiles
