#include "grip/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include "grip/calibration.hpp"
#include "grip/datamodel.hpp"
#include "grip/net.hpp"
#include "grip/profiles.hpp"
#include "grip/simulator.hpp"
#include "grip/sink.hpp"
#include "grip/stats.hpp"
#include "grip/svg.hpp"
#include "grip/wire_protocol.hpp"

namespace grip::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Small shared helpers.
// ---------------------------------------------------------------------------

std::string sensor_label(int id) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "S%02d", id);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

// Empty or "-" means stdout.
void emit_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
  } else {
    write_file(path, content);
  }
}

data::UserRegistry load_registry(const std::string& path) {
  if (path.empty()) return {};
  return data::UserRegistry::load_csv(path);
}

std::vector<data::Session> load_inputs(const std::string& in,
                                       const std::string& users_path) {
  if (fs::is_directory(in)) {
    if (users_path.empty()) return data::load_sessions_dir(in);
    return data::load_sessions_dir(in, load_registry(users_path));
  }
  return {data::load_session_csv(in, load_registry(users_path))};
}

std::string hand_suffix(data::HandRelation h) {
  return h == data::HandRelation::Dominant ? "D" : "N";
}

std::string fmt_double(double v, const char* spec = "%.6g") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string fmt_sem(const std::optional<double>& sem) {
  return sem ? fmt_double(*sem) : std::string("-");
}

// Writes session CSVs plus steps.csv and users.csv into a directory.
void write_session_dir(std::span<const data::Session> sessions,
                       const std::string& dir) {
  fs::create_directories(dir);
  std::vector<data::StepRow> step_rows;
  std::map<std::string, data::UserMeta> users;
  for (const auto& s : sessions) {
    data::save_session_csv(s, (fs::path(dir) / data::session_filename(s)).string());
    users.emplace(s.user.user_id, s.user);
    if (s.steps) {
      for (const auto& span : s.steps->spans) {
        step_rows.push_back(
            {s.user.user_id, s.physical_hand(), s.session_index, span});
      }
    }
  }
  std::vector<data::UserMeta> user_list;
  for (const auto& [id, meta] : users) user_list.push_back(meta);
  data::save_users_csv(user_list, (fs::path(dir) / "users.csv").string());
  if (!step_rows.empty()) {
    data::save_steps_csv(step_rows, (fs::path(dir) / "steps.csv").string());
  }
}

// ---------------------------------------------------------------------------
// Observation builders.
// ---------------------------------------------------------------------------

std::vector<stats::Observation> time_observations(
    std::span<const data::Session> sessions) {
  std::vector<stats::Observation> obs;
  obs.reserve(sessions.size());
  for (const auto& s : sessions) {
    obs.push_back({s.duration_s(),
                   {{"user", s.user.user_id}, {"hand", data::to_token(s.hand)}}});
  }
  return obs;
}

std::vector<stats::Observation> force_observations(
    std::span<const data::Session> sessions, bool per_sample) {
  std::vector<stats::Observation> obs;
  for (const auto& s : sessions) {
    const std::string user = s.user.user_id;
    const std::string hand = data::to_token(s.hand);
    if (per_sample) {
      for (const auto& r : s.readings) {
        obs.push_back({static_cast<double>(r.voltage_mv),
                       {{"user", user},
                        {"hand", hand},
                        {"sensor", sensor_label(r.sensor_id)}}});
      }
    } else {
      // Per-session aggregate: mean millivolts per occupied sensor.
      std::array<std::uint64_t, 12> sums{};
      std::array<std::uint64_t, 12> counts{};
      for (const auto& r : s.readings) {
        const auto i = static_cast<std::size_t>(r.sensor_id - 1);
        sums[i] += r.voltage_mv;
        ++counts[i];
      }
      for (std::size_t i = 0; i < sums.size(); ++i) {
        if (counts[i] == 0) continue;
        obs.push_back({static_cast<double>(sums[i]) / counts[i],
                       {{"user", user},
                        {"hand", hand},
                        {"sensor", sensor_label(static_cast<int>(i) + 1)}}});
      }
    }
  }
  return obs;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string archetype = "novice";
  std::uint64_t seed = 0;
  double duration_s = 10.0;
  double rate_hz = 50.0;
  std::string hand = "dominant";
  int session = 1;
  std::vector<int> sensors = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::string out;
  std::string tcp;
  bool timed = false;
  std::string csv_out;
  bool experiment = false;
  int sessions_per_cell = 10;
};

void emit_to_sink(const data::Session& session, io::ByteSink& sink, bool timed) {
  const auto report = sim::emit_stream(session, sink, timed);
  json j{{"frames_written", report.frames_written},
         {"wall_seconds", report.wall_seconds}};
  std::cerr << j.dump() << '\n';
}

int cmd_simulate(const SimulateArgs& args) {
  if (args.experiment) {
    if (args.csv_out.empty()) {
      throw Error("--experiment requires --csv-out");
    }
    if (!args.out.empty() || !args.tcp.empty()) {
      throw Error("--experiment writes CSV only; drop --out/--tcp");
    }
    const auto sessions = sim::generate_experiment(
        args.seed, args.sessions_per_cell, args.rate_hz);
    write_session_dir(sessions, args.csv_out);
    std::uint64_t readings = 0;
    for (const auto& s : sessions) readings += s.readings.size();
    std::cerr << json{{"sessions_written", sessions.size()},
                      {"readings", readings}}
                     .dump()
              << '\n';
    return 0;
  }

  if (args.out.empty() && args.tcp.empty() && args.csv_out.empty()) {
    throw Error("no output requested; use --out, --tcp or --csv-out");
  }

  sim::SimConfig config;
  config.archetype = sim::Archetype::by_name(args.archetype);
  config.hand = args.hand == "dominant" ? data::HandRelation::Dominant
                                        : data::HandRelation::NonDominant;
  config.seed = args.seed;
  config.duration_s = args.duration_s;
  config.sample_rate_hz = args.rate_hz;
  config.active_sensors = args.sensors;
  config.session_index = args.session;
  const data::Session session = sim::generate_session(config);

  if (!args.csv_out.empty()) {
    write_session_dir(std::span(&session, 1), args.csv_out);
  }
  if (!args.tcp.empty()) {
    const auto [host, port] = net::parse_endpoint(args.tcp);
    net::TcpClientSink sink(host, port);
    emit_to_sink(session, sink, args.timed);
  }
  if (!args.out.empty()) {
    if (args.out == "-") {
      io::OstreamSink sink(std::cout);
      emit_to_sink(session, sink, args.timed);
      std::cout.flush();
    } else {
      std::ofstream file(args.out, std::ios::binary);
      if (!file) throw IoError("cannot write " + args.out);
      io::OstreamSink sink(file);
      emit_to_sink(session, sink, args.timed);
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string in;
  int tcp_listen = -1;
  std::string bind_addr = "0.0.0.0";
  std::string csv_out = ".";
  std::string user = "anon";
  std::string expertise = "novice";
  bool expertise_set = false;  // explicit flag beats the registry
  int session = 1;
  std::string users;
  std::string report_out = "-";
};

std::vector<std::uint8_t> read_binary(const std::string& path) {
  if (path == "-") {
    std::vector<std::uint8_t> bytes;
    char buf[4096];
    while (std::cin.read(buf, sizeof(buf)) || std::cin.gcount() > 0) {
      bytes.insert(bytes.end(), buf, buf + std::cin.gcount());
    }
    return bytes;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

int cmd_ingest(const IngestArgs& args) {
  if (args.in.empty() == (args.tcp_listen < 0)) {
    throw Error("exactly one of --in or --tcp-listen is required");
  }
  if (args.tcp_listen > 65535) {
    throw Error("--tcp-listen port must be in [0, 65535]");
  }

  std::vector<std::uint8_t> bytes;
  if (args.tcp_listen >= 0) {
    net::TcpListener listener(static_cast<std::uint16_t>(args.tcp_listen),
                              args.bind_addr);
    std::cerr << "listening on " << args.bind_addr << ":" << listener.port()
              << '\n';
    bytes = listener.accept_and_read_all();
  } else {
    bytes = read_binary(args.in);
  }

  const auto decoded = wire::decode_stream(bytes);

  const auto registry = load_registry(args.users);
  data::Expertise expertise = data::expertise_from_token(args.expertise);
  if (!args.expertise_set) {
    if (const auto known = registry.expertise_for(args.user)) {
      expertise = *known;
    }
  }
  const data::Hand dominant = registry.dominant_hand_for(args.user);

  std::map<data::Hand, std::vector<data::SensorReading>> by_hand;
  for (const auto& r : decoded.readings) by_hand[r.hand].push_back(r);

  fs::create_directories(args.csv_out);
  json session_list = json::array();
  for (auto& [hand, readings] : by_hand) {
    data::Session session;
    session.user = {args.user, expertise, dominant};
    session.hand = hand == dominant ? data::HandRelation::Dominant
                                    : data::HandRelation::NonDominant;
    session.session_index = args.session;
    std::stable_sort(readings.begin(), readings.end(),
                     [](const data::SensorReading& a,
                        const data::SensorReading& b) {
                       return a.timestamp_ms < b.timestamp_ms;
                     });
    session.readings = std::move(readings);
    const std::string path =
        (fs::path(args.csv_out) / data::session_filename(session)).string();
    data::save_session_csv(session, path);
    session_list.push_back({{"path", path},
                            {"hand", std::string(1, data::hand_letter(hand))},
                            {"readings", session.readings.size()}});
  }

  json skipped = json::array();
  for (const auto& span : decoded.skipped_byte_spans) {
    skipped.push_back({{"offset", span.offset}, {"length", span.length}});
  }
  const json report{{"frames_decoded", decoded.readings.size()},
                    {"pending_bytes", decoded.pending_bytes},
                    {"skipped_spans", skipped},
                    {"sessions", session_list}};
  emit_output(args.report_out, report.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// summary
// ---------------------------------------------------------------------------

struct SummaryArgs {
  std::string in;
  std::string users;
  std::string table = "all";
  std::string format = "text";
  std::string out = "-";
  std::string force_unit = "mv";  // mv | newton (presentation transform)
  double v_max_mv = 1500.0;
  double f_max_n = 10.0;
};

struct LevelRow {
  std::string level;
  stats::SummaryStats stats;
};

// Per-sample force stats by factor level; `convert` maps raw millivolts to
// the reporting unit.
std::map<std::string, std::vector<LevelRow>> force_level_rows(
    std::span<const data::Session> sessions,
    const std::function<double(double)>& convert) {
  std::map<std::string, std::map<std::string, std::vector<double>>> samples;
  for (const auto& s : sessions) {
    for (const auto& r : s.readings) {
      const double v = convert(r.voltage_mv);
      samples["user"][s.user.user_id].push_back(v);
      samples["hand"][data::to_token(s.hand)].push_back(v);
      samples["sensor"][sensor_label(r.sensor_id)].push_back(v);
    }
  }
  std::map<std::string, std::vector<LevelRow>> rows;
  for (const auto& [factor, levels] : samples) {
    for (const auto& [level, values] : levels) {
      rows[factor].push_back({level, stats::summary_stats(values)});
    }
  }
  return rows;
}

std::function<double(double)> unit_converter(const std::string& force_unit,
                                             double v_max_mv, double f_max_n) {
  if (force_unit == "newton") {
    const cal::CalibrationCurve curve{v_max_mv, f_max_n};
    return [curve](double mv) { return cal::estimate_force_n(mv, curve); };
  }
  return [](double mv) { return mv; };
}

std::map<data::CellKey, stats::SummaryStats> time_rows(
    std::span<const data::Session> sessions) {
  std::map<data::CellKey, std::vector<double>> durations;
  for (const auto& s : sessions) {
    durations[data::CellKey{s.user.user_id, s.hand}].push_back(s.duration_s());
  }
  std::map<data::CellKey, stats::SummaryStats> rows;
  for (const auto& [key, values] : durations) {
    rows[key] = stats::summary_stats(values);
  }
  return rows;
}

int cmd_summary(const SummaryArgs& args) {
  if (args.format == "csv" && args.table == "all") {
    throw Error("--format csv needs a single --table");
  }
  const auto sessions = load_inputs(args.in, args.users);
  const bool want_times = args.table == "times" || args.table == "all";
  const bool want_force = args.table == "force" || args.table == "all";
  const bool want_total = args.table == "total" || args.table == "all";

  const bool newtons = args.force_unit == "newton";
  const auto convert = unit_converter(args.force_unit, args.v_max_mv, args.f_max_n);
  const std::string unit_suffix = newtons ? "_n" : "_mv";
  const std::string unit_name = newtons ? "N" : "mV";

  const auto counts = data::count_signals(sessions);

  std::string text;
  json j;

  if (want_times) {
    const auto rows = time_rows(sessions);
    if (args.format == "json") {
      j["times"] = json::array();
      for (const auto& [key, s] : rows) {
        j["times"].push_back({{"user", key.user_id},
                              {"hand", data::to_token(key.hand)},
                              {"n", s.n},
                              {"mean_s", s.mean},
                              {"sem_s", s.sem ? json(*s.sem) : json(nullptr)}});
      }
    } else {
      text += "Task execution times (s)\n";
      text += "user            hand         n       mean        sem\n";
      for (const auto& [key, s] : rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-15s %-11s %5zu %10.6g %10s\n",
                      key.user_id.c_str(), data::to_token(key.hand).c_str(),
                      s.n, s.mean, fmt_sem(s.sem).c_str());
        text += line;
      }
      text += "\n";
    }
  }

  if (want_force) {
    const auto rows = force_level_rows(sessions, convert);
    if (args.format == "json") {
      j["force_levels"] = json::object();
      for (const auto& [factor, levels] : rows) {
        j["force_levels"][factor] = json::array();
        for (const auto& r : levels) {
          j["force_levels"][factor].push_back(
              {{"level", r.level},
               {"n", r.stats.n},
               {"mean" + unit_suffix, r.stats.mean},
               {"sem" + unit_suffix,
                r.stats.sem ? json(*r.stats.sem) : json(nullptr)}});
        }
      }
    } else {
      text += "Force level means (" + unit_name + ")\n";
      text += "factor    level           n          mean        sem\n";
      for (const auto& [factor, levels] : rows) {
        for (const auto& r : levels) {
          char line[160];
          std::snprintf(line, sizeof(line), "%-9s %-15s %8zu %12.6g %10s\n",
                        factor.c_str(), r.level.c_str(), r.stats.n,
                        r.stats.mean, fmt_sem(r.stats.sem).c_str());
          text += line;
        }
      }
      text += "\n";
    }
  }

  if (want_total) {
    const auto table = data::total_force_table(sessions);
    if (args.format == "json") {
      j["total_force_v"] = json::array();
      for (const auto& [key, volts] : table.volts) {
        j["total_force_v"].push_back(
            {{"user", key.user_id},
             {"hand", data::to_token(key.hand)},
             {"by_sensor", volts},
             {"total", table.column_total(key)}});
      }
      j["signal_counts"] = {{"grand_total", counts.grand_total()}};
    } else {
      text += "Total force across sessions per sensor (V)\n";
      std::string header = "sensor";
      for (const auto& [key, volts] : table.volts) {
        header += "  " + key.user_id + "_" + hand_suffix(key.hand);
      }
      text += header + "\n";
      for (int sensor = 1; sensor <= 12; ++sensor) {
        std::string line = sensor_label(sensor);
        for (const auto& [key, volts] : table.volts) {
          line += "  " + fmt_double(volts[static_cast<std::size_t>(sensor - 1)],
                                    "%.2f");
        }
        text += line + "\n";
      }
      std::string totals = "total ";
      for (const auto& [key, volts] : table.volts) {
        totals += "  " + fmt_double(table.column_total(key), "%.2f");
      }
      text += totals + "\n";
      text += "signals total: " + std::to_string(counts.grand_total()) + "\n";
    }
  }

  if (args.format == "json") {
    emit_output(args.out, j.dump(2) + "\n");
  } else if (args.format == "csv") {
    std::string csv;
    if (args.table == "times") {
      csv = "user,hand,n,mean_s,sem_s\n";
      for (const auto& [key, s] : time_rows(sessions)) {
        csv += key.user_id + "," + data::to_token(key.hand) + "," +
               std::to_string(s.n) + "," + fmt_double(s.mean, "%.10g") + "," +
               (s.sem ? fmt_double(*s.sem, "%.10g") : "") + "\n";
      }
    } else if (args.table == "force") {
      csv = "factor,level,n,mean" + unit_suffix + ",sem" + unit_suffix + "\n";
      for (const auto& [factor, levels] : force_level_rows(sessions, convert)) {
        for (const auto& r : levels) {
          csv += factor + "," + r.level + "," + std::to_string(r.stats.n) +
                 "," + fmt_double(r.stats.mean, "%.10g") + "," +
                 (r.stats.sem ? fmt_double(*r.stats.sem, "%.10g") : "") + "\n";
        }
      }
    } else {
      const auto table = data::total_force_table(sessions);
      csv = "sensor";
      for (const auto& [key, volts] : table.volts) {
        csv += "," + key.user_id + "_" + hand_suffix(key.hand);
      }
      csv += "\n";
      for (int sensor = 1; sensor <= 12; ++sensor) {
        csv += sensor_label(sensor);
        for (const auto& [key, volts] : table.volts) {
          csv += "," + fmt_double(volts[static_cast<std::size_t>(sensor - 1)],
                                  "%.10g");
        }
        csv += "\n";
      }
    }
    emit_output(args.out, csv);
  } else {
    emit_output(args.out, text);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// anova
// ---------------------------------------------------------------------------

struct AnovaArgs {
  std::string model;
  std::string in;
  std::string users;
  std::string unit;
  std::string format = "text";
  std::string out = "-";
  std::string trio_users;
};

json anova_json(const stats::AnovaTable& table) {
  return json::parse(stats::to_json_string(table));
}

std::string trio_text(const profiles::TrioReport& report) {
  std::string text;
  for (const auto& sensor : report.sensors) {
    text += "== " + sensor_label(sensor.sensor_id) + " ==\n";
    text += "user            session   n          mean_mv      sem_mv\n";
    for (const auto& cell : sensor.cells) {
      char line[160];
      std::snprintf(line, sizeof(line), "%-15s %-8s %7zu %12.6g %11s\n",
                    cell.user_id.c_str(),
                    cell.slot == profiles::SessionSlot::First ? "first" : "last",
                    cell.stats.n, cell.stats.mean,
                    fmt_sem(cell.stats.sem).c_str());
      text += line;
    }
    text += stats::to_text(sensor.anova);
    text += "\n";
  }
  return text;
}

json trio_json(const profiles::TrioReport& report) {
  json sensors = json::array();
  for (const auto& sensor : report.sensors) {
    json cells = json::array();
    for (const auto& cell : sensor.cells) {
      cells.push_back(
          {{"user", cell.user_id},
           {"session",
            cell.slot == profiles::SessionSlot::First ? "first" : "last"},
           {"n", cell.stats.n},
           {"mean_mv", cell.stats.mean},
           {"sem_mv", cell.stats.sem ? json(*cell.stats.sem) : json(nullptr)}});
    }
    sensors.push_back({{"sensor", sensor.sensor_id},
                       {"cells", cells},
                       {"anova", anova_json(sensor.anova)}});
  }
  return json{{"sensors", sensors}};
}

// Picks each user's lowest- and highest-numbered dominant-hand session.
std::vector<data::Session> pick_trio_sessions(
    std::span<const data::Session> sessions, const std::string& trio_users) {
  std::set<std::string> wanted;
  if (!trio_users.empty()) {
    std::size_t start = 0;
    while (start <= trio_users.size()) {
      const auto comma = trio_users.find(',', start);
      const auto id = trio_users.substr(
          start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!id.empty()) wanted.insert(id);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (wanted.size() != 2) {
      throw Error("--trio-users needs exactly two comma-separated ids");
    }
  }

  std::map<std::string, std::vector<const data::Session*>> dominant;
  for (const auto& s : sessions) {
    if (s.hand != data::HandRelation::Dominant) continue;
    if (!wanted.empty() && !wanted.count(s.user.user_id)) continue;
    dominant[s.user.user_id].push_back(&s);
  }
  if (dominant.size() != 2) {
    throw Error("trio comparison needs exactly two users with dominant-hand "
                "sessions; found " + std::to_string(dominant.size()) +
                " (narrow with --trio-users)");
  }
  std::vector<data::Session> picked;
  for (auto& [user, list] : dominant) {
    auto by_index = [](const data::Session* a, const data::Session* b) {
      return a->session_index < b->session_index;
    };
    const auto [lo, hi] = std::minmax_element(list.begin(), list.end(), by_index);
    if ((*lo)->session_index == (*hi)->session_index) {
      throw Error("user " + user + " needs two sessions with distinct indices");
    }
    picked.push_back(**lo);
    picked.push_back(**hi);
  }
  return picked;
}

int cmd_anova(const AnovaArgs& args) {
  // Flag conflicts are rejected before any file is touched.
  if (args.model == "force") {
    if (args.unit != "sample" && args.unit != "session") {
      throw Error("--model force requires --unit sample or --unit session");
    }
  } else if (!args.unit.empty()) {
    throw Error("--unit applies to --model force only");
  }
  if (!args.trio_users.empty() && args.model != "trio") {
    throw Error("--trio-users applies to --model trio only");
  }

  const auto sessions = load_inputs(args.in, args.users);

  if (args.model == "trio") {
    const auto picked = pick_trio_sessions(sessions, args.trio_users);
    const auto report = profiles::trio_comparison(picked);
    emit_output(args.out, args.format == "json"
                              ? trio_json(report).dump(2) + "\n"
                              : trio_text(report));
    return 0;
  }

  std::vector<stats::Observation> observations;
  stats::ModelSpec spec;
  if (args.model == "time") {
    observations = time_observations(sessions);
    spec = stats::ModelSpec::mains_and_two_way({"user", "hand"});
  } else {
    observations = force_observations(sessions, args.unit == "sample");
    spec = stats::ModelSpec::mains_and_two_way({"user", "hand", "sensor"});
  }

  const auto table = stats::fit_factorial_anova(observations, spec);
  emit_output(args.out, args.format == "json"
                            ? anova_json(table).dump(2) + "\n"
                            : stats::to_text(table));
  return 0;
}

// ---------------------------------------------------------------------------
// profile
// ---------------------------------------------------------------------------

struct ProfileArgs {
  std::string in;
  std::string users;
  std::vector<int> sensors = {5, 6, 7};
  std::size_t window = 100;
  std::string stat = "mean";
  double rate_hz = 50.0;
  std::string steps;
  std::string csv_out;
  std::string svg_out;
  std::string title = "grip force profile";
  std::string force_unit = "mv";
  double v_max_mv = 1500.0;
  double f_max_n = 10.0;
};

std::string csv_path_for_sensor(const std::string& base, int sensor,
                                bool multi) {
  if (!multi) return base;
  const fs::path p(base);
  fs::path named = p.parent_path() / p.stem();
  named += "_s" + std::to_string(sensor);
  named += p.extension();
  return named.string();
}

int cmd_profile(const ProfileArgs& args) {
  const auto session = data::load_session_csv(args.in, load_registry(args.users));

  std::optional<data::StepAnnotations> annotations = session.steps;
  if (!args.steps.empty()) {
    const auto rows = data::load_steps_csv(args.steps);
    annotations = data::steps_for(rows, session.user.user_id,
                                  session.physical_hand(),
                                  session.session_index);
    if (!annotations) {
      throw Error("no step rows in " + args.steps + " match this session");
    }
  }

  const profiles::WindowStat stat = args.stat == "max"
                                        ? profiles::WindowStat::Max
                                        : profiles::WindowStat::Mean;
  std::vector<profiles::ProfileSeries> series;
  for (int sensor : args.sensors) {
    std::vector<data::SensorReading> readings;
    for (const auto& r : session.readings) {
      if (r.sensor_id == sensor) readings.push_back(r);
    }
    if (readings.empty()) {
      throw Error("sensor " + sensor_label(sensor) + " has no samples in " +
                  args.in);
    }
    auto profile = profiles::build_profile(readings, args.window, stat);
    if (annotations) {
      profile = profiles::overlay_steps(std::move(profile), *annotations,
                                        args.rate_hz);
    }
    series.push_back(std::move(profile));
  }

  // Presentation-layer unit conversion on the aggregated trace.
  const bool newtons = args.force_unit == "newton";
  if (newtons) {
    const auto convert =
        unit_converter(args.force_unit, args.v_max_mv, args.f_max_n);
    for (auto& s : series) {
      for (auto& point : s.points) point.value_mv = convert(point.value_mv);
    }
  }
  const std::string value_column = newtons ? "mean_n" : "mean_mv";

  if (!args.csv_out.empty()) {
    const bool multi = series.size() > 1;
    for (const auto& s : series) {
      write_file(csv_path_for_sensor(args.csv_out, s.sensor_id, multi),
                 profiles::profile_to_csv(s, value_column));
    }
  }
  if (!args.svg_out.empty()) {
    svg::ChartOptions options;
    options.title = args.title;
    write_file(args.svg_out, svg::render_profiles(series, options));
  }
  if (args.csv_out.empty() && args.svg_out.empty()) {
    std::string out;
    for (const auto& s : series) {
      out += "# " + sensor_label(s.sensor_id) + "\n";
      out += profiles::profile_to_csv(s, value_column);
    }
    emit_output("-", out);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Wiring.
// ---------------------------------------------------------------------------

int dispatch(CLI::App& app, const SimulateArgs& sim_args,
             const IngestArgs& ingest_args, const SummaryArgs& summary_args,
             const AnovaArgs& anova_args, const ProfileArgs& profile_args) {
  if (app.got_subcommand("simulate")) return cmd_simulate(sim_args);
  if (app.got_subcommand("ingest")) return cmd_ingest(ingest_args);
  if (app.got_subcommand("summary")) return cmd_summary(summary_args);
  if (app.got_subcommand("anova")) return cmd_anova(anova_args);
  if (app.got_subcommand("profile")) return cmd_profile(profile_args);
  throw Error("no subcommand selected");
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"grip-force biosensor stream toolkit"};
  app.name("gripstream");
  app.require_subcommand(1);
  app.set_config("--config");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand(
      "simulate", "generate a synthetic glove session and emit it");
  simulate->add_option("--archetype", sim_args.archetype,
                       "expert|intermediate|novice")
      ->check(CLI::IsMember({"expert", "intermediate", "novice"}))
      ->capture_default_str();
  simulate->add_option("--seed", sim_args.seed, "rng seed")
      ->capture_default_str();
  simulate->add_option("--duration-s", sim_args.duration_s, "session length")
      ->capture_default_str();
  simulate->add_option("--rate", sim_args.rate_hz, "sample rate in Hz")
      ->capture_default_str();
  simulate->add_option("--hand", sim_args.hand, "dominant|nondominant")
      ->check(CLI::IsMember({"dominant", "nondominant"}))
      ->capture_default_str();
  simulate->add_option("--session", sim_args.session, "session index")
      ->capture_default_str();
  simulate->add_option("--sensors", sim_args.sensors, "active sensor ids")
      ->delimiter(',');
  simulate->add_option("--out", sim_args.out, "frame sink path, - for stdout");
  simulate->add_option("--tcp", sim_args.tcp, "frame sink host:port");
  simulate->add_flag("--timed", sim_args.timed, "pace frames to the sample rate");
  simulate->add_option("--csv-out", sim_args.csv_out,
                       "directory for session/steps/users CSVs");
  simulate->add_flag("--experiment", sim_args.experiment,
                     "emit the full users x hands x sessions dataset");
  simulate->add_option("--sessions-per-cell", sim_args.sessions_per_cell,
                       "sessions per user/hand cell with --experiment")
      ->capture_default_str();

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand(
      "ingest", "decode a frame stream into session CSVs plus a report");
  ingest->add_option("--in", ingest_args.in, "frame source path, - for stdin");
  ingest->add_option("--tcp-listen", ingest_args.tcp_listen,
                     "listen on a TCP port for one connection");
  ingest->add_option("--bind", ingest_args.bind_addr, "listen address")
      ->capture_default_str();
  ingest->add_option("--csv-out", ingest_args.csv_out, "output directory")
      ->capture_default_str();
  ingest->add_option("--user", ingest_args.user, "user id for the session")
      ->capture_default_str();
  auto* ingest_expertise =
      ingest->add_option("--expertise", ingest_args.expertise,
                         "expert|intermediate|novice (registry value otherwise)")
          ->check(CLI::IsMember({"expert", "intermediate", "novice"}))
          ->capture_default_str();
  ingest->add_option("--session", ingest_args.session, "session index")
      ->capture_default_str();
  ingest->add_option("--users", ingest_args.users,
                     "users.csv for dominant-hand resolution");
  ingest->add_option("--report", ingest_args.report_out,
                     "decode report path, - for stdout")
      ->capture_default_str();

  SummaryArgs summary_args;
  auto* summary = app.add_subcommand(
      "summary", "means/SEM and total-force tables over sessions");
  summary->add_option("--in", summary_args.in, "session CSV or directory")
      ->required();
  summary->add_option("--users", summary_args.users, "users.csv registry");
  summary->add_option("--table", summary_args.table, "times|force|total|all")
      ->check(CLI::IsMember({"times", "force", "total", "all"}))
      ->capture_default_str();
  summary->add_option("--format", summary_args.format, "text|json|csv")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();
  summary->add_option("--out", summary_args.out, "output path, - for stdout")
      ->capture_default_str();
  summary->add_option("--force-unit", summary_args.force_unit,
                      "mv|newton force reporting unit")
      ->check(CLI::IsMember({"mv", "newton"}))
      ->capture_default_str();
  summary->add_option("--v-max-mv", summary_args.v_max_mv,
                      "calibration full-scale voltage")
      ->capture_default_str();
  summary->add_option("--f-max-n", summary_args.f_max_n,
                      "calibration full-scale force")
      ->capture_default_str();

  AnovaArgs anova_args;
  auto* anova = app.add_subcommand(
      "anova", "factorial ANOVA over time, force or representative sensors");
  anova->add_option("--model", anova_args.model, "time|force|trio")
      ->check(CLI::IsMember({"time", "force", "trio"}))
      ->required();
  anova->add_option("--in", anova_args.in, "session CSV or directory")
      ->required();
  anova->add_option("--users", anova_args.users, "users.csv registry");
  anova->add_option("--unit", anova_args.unit,
                    "sample|session (required for --model force)")
      ->check(CLI::IsMember({"sample", "session"}));
  anova->add_option("--format", anova_args.format, "text|json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  anova->add_option("--out", anova_args.out, "output path, - for stdout")
      ->capture_default_str();
  anova->add_option("--trio-users", anova_args.trio_users,
                    "two comma-separated user ids for --model trio");

  ProfileArgs profile_args;
  auto* profile = app.add_subcommand(
      "profile", "windowed grip-force profiles with step overlays");
  profile->add_option("--in", profile_args.in, "session CSV")->required();
  profile->add_option("--users", profile_args.users, "users.csv registry");
  profile->add_option("--sensor", profile_args.sensors, "sensor ids")
      ->delimiter(',');
  profile->add_option("--window", profile_args.window, "samples per window")
      ->capture_default_str();
  profile->add_option("--stat", profile_args.stat, "mean|max per window")
      ->check(CLI::IsMember({"mean", "max"}))
      ->capture_default_str();
  profile->add_option("--rate", profile_args.rate_hz,
                      "sample rate for step overlays")
      ->capture_default_str();
  profile->add_option("--steps", profile_args.steps, "steps.csv with annotations");
  profile->add_option("--csv-out", profile_args.csv_out, "profile CSV path");
  profile->add_option("--svg-out", profile_args.svg_out, "profile SVG path");
  profile->add_option("--title", profile_args.title, "SVG chart title")
      ->capture_default_str();
  profile->add_option("--force-unit", profile_args.force_unit,
                      "mv|newton trace unit")
      ->check(CLI::IsMember({"mv", "newton"}))
      ->capture_default_str();
  profile->add_option("--v-max-mv", profile_args.v_max_mv,
                      "calibration full-scale voltage")
      ->capture_default_str();
  profile->add_option("--f-max-n", profile_args.f_max_n,
                      "calibration full-scale force")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  ingest_args.expertise_set = ingest_expertise->count() > 0;

  try {
    return dispatch(app, sim_args, ingest_args, summary_args, anova_args,
                    profile_args);
  } catch (const ZeroResidualVariance& e) {
    std::cerr << "gripstream: " << e.what() << '\n';
    return 3;
  } catch (const RankDeficientDesign& e) {
    std::cerr << "gripstream: " << e.what() << '\n';
    return 3;
  } catch (const InsufficientResidualDf& e) {
    std::cerr << "gripstream: " << e.what() << '\n';
    return 3;
  } catch (const SingletonSem& e) {
    std::cerr << "gripstream: " << e.what() << '\n';
    return 3;
  } catch (const EmptyInput& e) {
    std::cerr << "gripstream: " << e.what() << '\n';
    return 3;
  } catch (const SinkError& e) {
    std::cerr << "gripstream: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    std::cerr << "gripstream: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "gripstream: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "gripstream: " << e.what() << '\n';
    return 1;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("gripstream");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace grip::cli
