#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grip/errors.hpp"
#include "grip/wire_protocol.hpp"

namespace grip::data {

using wire::Hand;
using wire::SensorReading;

enum class Expertise : std::uint8_t { Expert, Intermediate, Novice };
enum class HandRelation : std::uint8_t { Dominant, NonDominant };

std::string to_token(Expertise e);
std::string to_token(HandRelation h);
char hand_letter(Hand h);
Expertise expertise_from_token(const std::string& token);  // throws Error
Hand hand_from_letter(const std::string& token);           // throws Error

struct UserMeta {
  std::string user_id;
  Expertise expertise = Expertise::Novice;
  Hand dominant_hand = Hand::Right;

  bool operator==(const UserMeta&) const = default;
};

struct StepSpan {
  int step = 0;  // 1..4
  std::uint32_t start_ms = 0;
  std::uint32_t end_ms = 0;

  bool operator==(const StepSpan&) const = default;
};

// Ordered task-step spans for one session.
struct StepAnnotations {
  std::vector<StepSpan> spans;

  bool operator==(const StepAnnotations&) const = default;
};

// One labeled recording of one hand of one user.
struct Session {
  UserMeta user;
  HandRelation hand = HandRelation::Dominant;
  int session_index = 1;
  std::vector<SensorReading> readings;  // non-decreasing timestamps
  std::optional<StepAnnotations> steps;

  Hand physical_hand() const {
    return hand == HandRelation::Dominant ? user.dominant_hand
                                          : wire::other_hand(user.dominant_hand);
  }
  // Task execution time: last minus first timestamp. 0 with fewer than two
  // readings.
  double duration_s() const;

  bool operator==(const Session&) const = default;
};

// Maps user ids to their dominant hand (and expertise, when known) so that
// physical L/R labels in files can be resolved to dominant/non-dominant.
// Unknown users default to right-handed.
class UserRegistry {
 public:
  void put(const std::string& user_id, Hand dominant_hand);
  void put(const std::string& user_id, Hand dominant_hand, Expertise expertise);
  Hand dominant_hand_for(const std::string& user_id) const;
  std::optional<Expertise> expertise_for(const std::string& user_id) const;
  bool known(const std::string& user_id) const;

  // CSV with header `user,expertise,dominant_hand`, hand in {L,R}.
  static UserRegistry load_csv(const std::string& path);

 private:
  struct Entry {
    Hand dominant_hand = Hand::Right;
    std::optional<Expertise> expertise;
  };
  std::map<std::string, Entry> entries_;
};

// Writes the registry CSV for a set of users (sorted by id).
void save_users_csv(std::span<const UserMeta> users, const std::string& path);

struct LoadOptions {
  int max_session_index = 10;
};

// Column format, header required:
//   timestamp_ms,user,expertise,hand,session,sensor,voltage_mv
// hand is the physical hand in {L,R}; the session's dominant/non-dominant
// label is resolved against the registry.
Session load_session_csv(const std::string& path,
                         const UserRegistry& users = {},
                         const LoadOptions& options = {});
void save_session_csv(const Session& session, const std::string& path);

// Canonical file name for one session: "<user>_<L|R>_s<index>.csv".
std::string session_filename(const Session& session);

// Loads every session CSV in a directory (sorted by name). Files named
// users.csv, steps.csv or *_steps.csv are skipped; a users.csv, when present,
// seeds the registry; a steps.csv attaches annotations to matching sessions.
std::vector<Session> load_sessions_dir(const std::string& dir,
                                       const LoadOptions& options = {});

// Same, but with an explicit registry overriding any users.csv in the
// directory.
std::vector<Session> load_sessions_dir(const std::string& dir,
                                       const UserRegistry& users,
                                       const LoadOptions& options = {});

// Returns a copy of the session carrying the annotations; readings are
// untouched. Throws StepsOutOfOrder, OverlappingSteps or StepOutOfSession.
Session attach_steps(const Session& session, const StepAnnotations& annotations);

// Step-annotation CSV rows: `user,hand,session,step,start_ms,end_ms`.
struct StepRow {
  std::string user_id;
  Hand hand = Hand::Left;  // physical
  int session_index = 1;
  StepSpan span;
};

std::vector<StepRow> load_steps_csv(const std::string& path);
void save_steps_csv(std::span<const StepRow> rows, const std::string& path);

// Collects the spans matching one session, ordered by step.
std::optional<StepAnnotations> steps_for(std::span<const StepRow> rows,
                                         const std::string& user_id,
                                         Hand physical_hand,
                                         int session_index);

// (user, dominant/non-dominant) column key used by the accounting tables.
struct CellKey {
  std::string user_id;
  HandRelation hand = HandRelation::Dominant;

  auto operator<=>(const CellKey&) const = default;
};

// Per-(user, hand, sensor) reading counts.
struct SignalCounts {
  std::map<CellKey, std::array<std::uint64_t, 12>> cells;

  std::uint64_t sensor_total(int sensor_id) const;      // across all cells
  std::uint64_t cell_total(const CellKey& key) const;   // across all sensors
  std::uint64_t grand_total() const;
};

SignalCounts count_signals(std::span<const Session> sessions);

// Summed sampled voltages per (user, hand) column and sensor row, reported in
// volts.
struct TotalForceTable {
  std::map<CellKey, std::array<double, 12>> volts;

  double column_total(const CellKey& key) const;
};

TotalForceTable total_force_table(std::span<const Session> sessions);

}  // namespace grip::data
