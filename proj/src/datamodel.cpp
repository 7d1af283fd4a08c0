#include "grip/datamodel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace grip::data {

namespace fs = std::filesystem;

std::string to_token(Expertise e) {
  switch (e) {
    case Expertise::Expert: return "expert";
    case Expertise::Intermediate: return "intermediate";
    case Expertise::Novice: return "novice";
  }
  return "novice";
}

std::string to_token(HandRelation h) {
  return h == HandRelation::Dominant ? "dominant" : "nondominant";
}

char hand_letter(Hand h) { return h == Hand::Left ? 'L' : 'R'; }

Expertise expertise_from_token(const std::string& token) {
  if (token == "expert") return Expertise::Expert;
  if (token == "intermediate") return Expertise::Intermediate;
  if (token == "novice") return Expertise::Novice;
  throw Error("unknown expertise '" + token + "'");
}

Hand hand_from_letter(const std::string& token) {
  if (token == "L") return Hand::Left;
  if (token == "R") return Hand::Right;
  throw Error("hand must be L or R, got '" + token + "'");
}

double Session::duration_s() const {
  if (readings.size() < 2) return 0.0;
  return (readings.back().timestamp_ms - readings.front().timestamp_ms) / 1000.0;
}

// ---------------------------------------------------------------------------
// CSV plumbing.
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

bool plain_token(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

template <typename Int>
Int parse_int(const std::string& field, std::size_t line, const char* what) {
  Int value{};
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw MalformedRow(line, std::string(what) + " is not a valid integer: '" +
                                 field + "'");
  }
  return value;
}

// Reads all lines, stripping one trailing '\r' each. Throws IoError if the
// file cannot be opened.
std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

constexpr const char* kSessionHeader =
    "timestamp_ms,user,expertise,hand,session,sensor,voltage_mv";
constexpr const char* kStepsHeader = "user,hand,session,step,start_ms,end_ms";
constexpr const char* kUsersHeader = "user,expertise,dominant_hand";

}  // namespace

// ---------------------------------------------------------------------------
// UserRegistry.
// ---------------------------------------------------------------------------

void UserRegistry::put(const std::string& user_id, Hand dominant_hand) {
  entries_[user_id].dominant_hand = dominant_hand;
}

void UserRegistry::put(const std::string& user_id, Hand dominant_hand,
                       Expertise expertise) {
  entries_[user_id] = Entry{dominant_hand, expertise};
}

Hand UserRegistry::dominant_hand_for(const std::string& user_id) const {
  const auto it = entries_.find(user_id);
  return it == entries_.end() ? Hand::Right : it->second.dominant_hand;
}

std::optional<Expertise> UserRegistry::expertise_for(
    const std::string& user_id) const {
  const auto it = entries_.find(user_id);
  return it == entries_.end() ? std::nullopt : it->second.expertise;
}

bool UserRegistry::known(const std::string& user_id) const {
  return entries_.count(user_id) != 0;
}

UserRegistry UserRegistry::load_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw EmptyFile(path + " is empty");
  if (lines[0] != kUsersHeader) {
    throw MalformedRow(1, "expected header '" + std::string(kUsersHeader) + "'");
  }
  UserRegistry reg;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_fields(lines[i]);
    if (f.size() != 3) throw MalformedRow(i + 1, "expected 3 columns");
    if (!plain_token(f[0])) throw MalformedRow(i + 1, "bad user id '" + f[0] + "'");
    try {
      reg.put(f[0], hand_from_letter(f[2]), expertise_from_token(f[1]));
    } catch (const Error& e) {
      throw MalformedRow(i + 1, e.what());
    }
  }
  return reg;
}

void save_users_csv(std::span<const UserMeta> users, const std::string& path) {
  std::vector<UserMeta> sorted(users.begin(), users.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const UserMeta& a, const UserMeta& b) {
              return a.user_id < b.user_id;
            });
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << kUsersHeader << '\n';
  for (const auto& u : sorted) {
    out << u.user_id << ',' << to_token(u.expertise) << ','
        << hand_letter(u.dominant_hand) << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

// ---------------------------------------------------------------------------
// Session CSV.
// ---------------------------------------------------------------------------

Session load_session_csv(const std::string& path, const UserRegistry& users,
                         const LoadOptions& options) {
  const auto lines = read_lines(path);
  std::size_t n_data = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (!lines[i].empty()) ++n_data;
  }
  if (lines.empty() || n_data == 0) {
    throw EmptyFile(path + " has no data rows");
  }
  if (lines[0] != kSessionHeader) {
    throw MalformedRow(1,
                       "expected header '" + std::string(kSessionHeader) + "'");
  }

  Session session;
  bool first_row = true;
  Hand physical = Hand::Left;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t line_no = i + 1;
    const auto f = split_fields(lines[i]);
    if (f.size() != 7) {
      throw MalformedRow(line_no, "expected 7 columns, got " +
                                      std::to_string(f.size()));
    }
    const auto timestamp = parse_int<std::uint32_t>(f[0], line_no, "timestamp_ms");
    if (!plain_token(f[1])) throw MalformedRow(line_no, "bad user id '" + f[1] + "'");
    Expertise expertise;
    Hand hand;
    try {
      expertise = expertise_from_token(f[2]);
      hand = hand_from_letter(f[3]);
    } catch (const Error& e) {
      throw MalformedRow(line_no, e.what());
    }
    const int session_index = parse_int<int>(f[4], line_no, "session");
    if (session_index < 1 || session_index > options.max_session_index) {
      throw MalformedRow(line_no, "session " + std::to_string(session_index) +
                                      " outside [1, " +
                                      std::to_string(options.max_session_index) +
                                      "]");
    }
    const int sensor = parse_int<int>(f[5], line_no, "sensor");
    if (sensor < wire::kSensorIdMin || sensor > wire::kSensorIdMax) {
      throw MalformedRow(line_no, "sensor " + std::to_string(sensor) +
                                      " outside [1, 12]");
    }
    const auto voltage = parse_int<std::uint32_t>(f[6], line_no, "voltage_mv");
    if (voltage > wire::kSupplyRailMv) {
      throw MalformedRow(line_no, "voltage " + std::to_string(voltage) +
                                      " mV exceeds the 3300 mV rail");
    }

    if (first_row) {
      session.user.user_id = f[1];
      session.user.expertise = expertise;
      session.user.dominant_hand = users.dominant_hand_for(f[1]);
      session.session_index = session_index;
      physical = hand;
      session.hand = (hand == session.user.dominant_hand)
                         ? HandRelation::Dominant
                         : HandRelation::NonDominant;
      first_row = false;
    } else if (f[1] != session.user.user_id ||
               expertise != session.user.expertise || hand != physical ||
               session_index != session.session_index) {
      throw InconsistentMetadata(path + " line " + std::to_string(line_no) +
                                 ": mixed users, hands or sessions in one file");
    }

    session.readings.push_back(SensorReading{
        sensor, hand, timestamp, static_cast<std::uint16_t>(voltage)});
  }

  std::stable_sort(session.readings.begin(), session.readings.end(),
                   [](const SensorReading& a, const SensorReading& b) {
                     return a.timestamp_ms < b.timestamp_ms;
                   });
  return session;
}

void save_session_csv(const Session& session, const std::string& path) {
  if (!plain_token(session.user.user_id)) {
    throw Error("user id '" + session.user.user_id +
                "' is not a plain token (letters, digits, _ or -)");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << kSessionHeader << '\n';
  const char hand = hand_letter(session.physical_hand());
  const std::string expertise = to_token(session.user.expertise);
  for (const auto& r : session.readings) {
    out << r.timestamp_ms << ',' << session.user.user_id << ',' << expertise
        << ',' << hand << ',' << session.session_index << ',' << r.sensor_id
        << ',' << r.voltage_mv << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

std::string session_filename(const Session& session) {
  std::string name = session.user.user_id;
  name += '_';
  name += hand_letter(session.physical_hand());
  name += "_s";
  name += std::to_string(session.session_index);
  name += ".csv";
  return name;
}

namespace {

std::vector<Session> load_sessions_dir_impl(const std::string& dir,
                                            const UserRegistry* override_users,
                                            const LoadOptions& options) {
  if (!fs::is_directory(dir)) throw IoError(dir + " is not a directory");

  UserRegistry registry;
  if (override_users != nullptr) {
    registry = *override_users;
  } else {
    const fs::path users_csv = fs::path(dir) / "users.csv";
    if (fs::exists(users_csv)) {
      registry = UserRegistry::load_csv(users_csv.string());
    }
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (entry.path().extension() != ".csv") continue;
    if (name == "users.csv" || name == "steps.csv" ||
        name.ends_with("_steps.csv")) {
      continue;
    }
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no session csv files in " + dir);

  std::vector<StepRow> steps;
  const fs::path steps_csv = fs::path(dir) / "steps.csv";
  if (fs::exists(steps_csv)) steps = load_steps_csv(steps_csv.string());

  std::vector<Session> sessions;
  sessions.reserve(files.size());
  for (const auto& f : files) {
    Session s = load_session_csv(f.string(), registry, options);
    if (const auto ann = steps_for(steps, s.user.user_id, s.physical_hand(),
                                   s.session_index)) {
      s = attach_steps(s, *ann);
    }
    sessions.push_back(std::move(s));
  }
  return sessions;
}

}  // namespace

std::vector<Session> load_sessions_dir(const std::string& dir,
                                       const LoadOptions& options) {
  return load_sessions_dir_impl(dir, nullptr, options);
}

std::vector<Session> load_sessions_dir(const std::string& dir,
                                       const UserRegistry& users,
                                       const LoadOptions& options) {
  return load_sessions_dir_impl(dir, &users, options);
}

// ---------------------------------------------------------------------------
// Step annotations.
// ---------------------------------------------------------------------------

Session attach_steps(const Session& session, const StepAnnotations& annotations) {
  const auto& spans = annotations.spans;
  for (const auto& s : spans) {
    if (s.step < 1 || s.step > 4) {
      throw Error("step number " + std::to_string(s.step) + " outside [1, 4]");
    }
    if (s.start_ms >= s.end_ms) {
      throw Error("step " + std::to_string(s.step) + " span must have start < end");
    }
  }
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].step <= spans[i - 1].step ||
        spans[i].start_ms < spans[i - 1].start_ms) {
      throw StepsOutOfOrder("step spans must appear in step and time order");
    }
    if (spans[i].start_ms < spans[i - 1].end_ms) {
      throw OverlappingSteps("step " + std::to_string(spans[i].step) +
                             " overlaps step " + std::to_string(spans[i - 1].step));
    }
  }
  if (!spans.empty()) {
    if (session.readings.empty()) {
      throw StepOutOfSession("session has no readings to annotate");
    }
    const std::uint32_t first = session.readings.front().timestamp_ms;
    const std::uint32_t last = session.readings.back().timestamp_ms;
    for (const auto& s : spans) {
      if (s.start_ms < first || s.end_ms > last) {
        throw StepOutOfSession("step " + std::to_string(s.step) +
                               " span exceeds the session timespan [" +
                               std::to_string(first) + ", " +
                               std::to_string(last) + "] ms");
      }
    }
  }
  Session out = session;
  out.steps = annotations;
  return out;
}

std::vector<StepRow> load_steps_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw EmptyFile(path + " is empty");
  if (lines[0] != kStepsHeader) {
    throw MalformedRow(1, "expected header '" + std::string(kStepsHeader) + "'");
  }
  std::vector<StepRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t line_no = i + 1;
    const auto f = split_fields(lines[i]);
    if (f.size() != 6) throw MalformedRow(line_no, "expected 6 columns");
    StepRow row;
    if (!plain_token(f[0])) throw MalformedRow(line_no, "bad user id '" + f[0] + "'");
    row.user_id = f[0];
    try {
      row.hand = hand_from_letter(f[1]);
    } catch (const Error& e) {
      throw MalformedRow(line_no, e.what());
    }
    row.session_index = parse_int<int>(f[2], line_no, "session");
    row.span.step = parse_int<int>(f[3], line_no, "step");
    row.span.start_ms = parse_int<std::uint32_t>(f[4], line_no, "start_ms");
    row.span.end_ms = parse_int<std::uint32_t>(f[5], line_no, "end_ms");
    rows.push_back(std::move(row));
  }
  return rows;
}

void save_steps_csv(std::span<const StepRow> rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << kStepsHeader << '\n';
  for (const auto& r : rows) {
    out << r.user_id << ',' << hand_letter(r.hand) << ',' << r.session_index
        << ',' << r.span.step << ',' << r.span.start_ms << ',' << r.span.end_ms
        << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

std::optional<StepAnnotations> steps_for(std::span<const StepRow> rows,
                                         const std::string& user_id,
                                         Hand physical_hand,
                                         int session_index) {
  StepAnnotations ann;
  for (const auto& r : rows) {
    if (r.user_id == user_id && r.hand == physical_hand &&
        r.session_index == session_index) {
      ann.spans.push_back(r.span);
    }
  }
  if (ann.spans.empty()) return std::nullopt;
  std::sort(ann.spans.begin(), ann.spans.end(),
            [](const StepSpan& a, const StepSpan& b) { return a.step < b.step; });
  return ann;
}

// ---------------------------------------------------------------------------
// Accounting.
// ---------------------------------------------------------------------------

SignalCounts count_signals(std::span<const Session> sessions) {
  SignalCounts counts;
  for (const auto& s : sessions) {
    auto& cell = counts.cells[CellKey{s.user.user_id, s.hand}];
    for (const auto& r : s.readings) {
      ++cell[static_cast<std::size_t>(r.sensor_id - 1)];
    }
  }
  return counts;
}

std::uint64_t SignalCounts::sensor_total(int sensor_id) const {
  std::uint64_t total = 0;
  for (const auto& [key, per_sensor] : cells) {
    total += per_sensor[static_cast<std::size_t>(sensor_id - 1)];
  }
  return total;
}

std::uint64_t SignalCounts::cell_total(const CellKey& key) const {
  const auto it = cells.find(key);
  if (it == cells.end()) return 0;
  std::uint64_t total = 0;
  for (auto c : it->second) total += c;
  return total;
}

std::uint64_t SignalCounts::grand_total() const {
  std::uint64_t total = 0;
  for (const auto& [key, per_sensor] : cells) {
    for (auto c : per_sensor) total += c;
  }
  return total;
}

TotalForceTable total_force_table(std::span<const Session> sessions) {
  // Voltages are integral millivolts; sum exactly, convert to volts once.
  std::map<CellKey, std::array<std::uint64_t, 12>> sums;
  for (const auto& s : sessions) {
    auto& cell = sums[CellKey{s.user.user_id, s.hand}];
    for (const auto& r : s.readings) {
      cell[static_cast<std::size_t>(r.sensor_id - 1)] += r.voltage_mv;
    }
  }
  TotalForceTable table;
  for (const auto& [key, mv] : sums) {
    auto& row = table.volts[key];
    for (std::size_t i = 0; i < mv.size(); ++i) {
      row[i] = static_cast<double>(mv[i]) / 1000.0;
    }
  }
  return table;
}

double TotalForceTable::column_total(const CellKey& key) const {
  const auto it = volts.find(key);
  if (it == volts.end()) return 0.0;
  double total = 0.0;
  for (double v : it->second) total += v;
  return total;
}

}  // namespace grip::data
