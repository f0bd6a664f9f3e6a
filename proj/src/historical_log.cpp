#include "hvacrl/historical_log.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "hvacrl/errors.hpp"

namespace hvacrl {

namespace {

constexpr int kControlMinutes = 5;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  for (auto& c : out) {
    while (!c.empty() && (c.back() == ' ' || c.back() == '\r')) c.pop_back();
    while (!c.empty() && c.front() == ' ') c.erase(c.begin());
  }
  return out;
}

double parse_double(const std::string& text, std::size_t row, const std::string& column) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw DataError("row " + std::to_string(row) + ", column " + column + ": cannot parse '" + text + "'", row, column);
  }
  return v;
}

int parse_int(const std::string& text, std::size_t row, const std::string& column) {
  const double v = parse_double(text, row, column);
  if (v != std::floor(v) || v < 0.0 || v > 1e6) {
    throw DataError("row " + std::to_string(row) + ", column " + column + ": expected a count, got '" + text + "'", row,
                    column);
  }
  return static_cast<int>(v);
}

std::string zone_column(const char* stem, int zone) { return std::string(stem) + "_" + std::to_string(zone + 1); }

}  // namespace

const std::vector<std::string>& log_columns() {
  static const std::vector<std::string> columns = [] {
    std::vector<std::string> c{"timestamp", "outdoor_temp"};
    for (const char* stem : {"zone_temp", "FCU_fan", "supply_temp", "return_temp", "supply_pressure",
                             "return_pressure", "occupant_num"}) {
      for (int j = 0; j < kZones; ++j) c.push_back(zone_column(stem, j));
    }
    return c;
  }();
  return columns;
}

std::string format_timestamp(std::int64_t minute) {
  using namespace std::chrono;
  const auto days = static_cast<int>(minute >= 0 ? minute / 1440 : (minute - 1439) / 1440);
  const int in_day = static_cast<int>(minute - static_cast<std::int64_t>(days) * 1440);
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), in_day / 60, in_day % 60);
  return buf;
}

std::int64_t parse_timestamp(const std::string& text) {
  int y = 0;
  unsigned mo = 0;
  unsigned d = 0;
  int h = 0;
  int mi = 0;
  int s = 0;
  char sep = 0;
  int consumed = 0;
  const int n = std::sscanf(text.c_str(), "%4d-%2u-%2u%c%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &consumed);
  if (n < 6 || (sep != ' ' && sep != 'T')) throw ConfigError("bad timestamp '" + text + "'");
  std::string rest = text.substr(static_cast<std::size_t>(consumed));
  if (!rest.empty()) {
    int more = 0;
    if (std::sscanf(rest.c_str(), ":%2d%n", &s, &more) != 1 || static_cast<std::size_t>(more) != rest.size()) {
      throw ConfigError("bad timestamp '" + text + "'");
    }
    if (s != 0) throw ConfigError("timestamp '" + text + "' is not on a whole minute");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59) throw ConfigError("bad timestamp '" + text + "'");
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 1440 + h * 60 + mi;
}

HistoricalLog read_historical(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty log: missing header", 0, "");
  const auto header = split_csv(line);
  const auto& expected = log_columns();
  std::map<std::string, std::size_t> position;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (std::find(expected.begin(), expected.end(), header[c]) == expected.end()) {
      throw DataError("unknown column '" + header[c] + "'", 0, header[c]);
    }
    if (!position.emplace(header[c], c).second) throw DataError("duplicate column '" + header[c] + "'", 0, header[c]);
  }
  for (const auto& name : expected) {
    if (!position.count(name)) throw DataError("missing column '" + name + "'", 0, name);
  }

  HistoricalLog log;
  std::size_t row = 0;
  std::int64_t last = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) + " fields, got " +
                          std::to_string(cells.size()),
                      row, "");
    }
    auto cell = [&](const std::string& name) -> const std::string& { return cells[position.at(name)]; };
    LogRow r;
    try {
      r.minute = parse_timestamp(cell("timestamp"));
    } catch (const ConfigError& e) {
      throw DataError("row " + std::to_string(row) + ", column timestamp: " + e.what(), row, "timestamp");
    }
    if (row > 1 && r.minute <= last) {
      throw DataError("row " + std::to_string(row) + ": timestamps must be strictly increasing", row, "timestamp");
    }
    last = r.minute;
    r.outdoor_temp = parse_double(cell("outdoor_temp"), row, "outdoor_temp");
    for (int j = 0; j < kZones; ++j) {
      const auto z = static_cast<std::size_t>(j);
      r.zone_temp[z] = parse_double(cell(zone_column("zone_temp", j)), row, zone_column("zone_temp", j));
      const auto fan_col = zone_column("FCU_fan", j);
      r.fcu_fan[z] = parse_int(cell(fan_col), row, fan_col);
      if (r.fcu_fan[z] >= kFanLevels) {
        throw DataError("row " + std::to_string(row) + ", column " + fan_col + ": fan mode out of range", row, fan_col);
      }
      r.supply_temp[z] = parse_double(cell(zone_column("supply_temp", j)), row, zone_column("supply_temp", j));
      r.return_temp[z] = parse_double(cell(zone_column("return_temp", j)), row, zone_column("return_temp", j));
      r.supply_pressure[z] =
          parse_double(cell(zone_column("supply_pressure", j)), row, zone_column("supply_pressure", j));
      r.return_pressure[z] =
          parse_double(cell(zone_column("return_pressure", j)), row, zone_column("return_pressure", j));
      r.occupant_num[z] = parse_int(cell(zone_column("occupant_num", j)), row, zone_column("occupant_num", j));
    }
    // measurements may be logged every minute; actions change on the 5-minute grid
    if (r.minute % kControlMinutes == 0) log.rows.push_back(r);
  }
  return log;
}

HistoricalLog load_historical(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open log '" + path.string() + "'");
  return read_historical(in);
}

void write_historical(std::ostream& out, const HistoricalLog& log) {
  const auto& columns = log_columns();
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.4f", v);
    out << ',' << buf;
  };
  for (const auto& r : log.rows) {
    out << format_timestamp(r.minute);
    num(r.outdoor_temp);
    for (double v : r.zone_temp) num(v);
    for (int v : r.fcu_fan) out << ',' << v;
    for (double v : r.supply_temp) num(v);
    for (double v : r.return_temp) num(v);
    for (double v : r.supply_pressure) num(v);
    for (double v : r.return_pressure) num(v);
    for (int v : r.occupant_num) out << ',' << v;
    out << '\n';
  }
}

void save_historical(const std::filesystem::path& path, const HistoricalLog& log) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write log '" + path.string() + "'");
  write_historical(out, log);
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

std::uint64_t demonstration_day_seed(std::uint64_t seed, int day) {
  // keep demonstration days apart from the small seeds used for evaluation
  return 1'000'000ULL + seed * 10'000ULL + static_cast<std::uint64_t>(day);
}

HistoricalLog generate_demonstrations(const Scenario& scenario, int n_days, std::uint64_t seed,
                                      const BehaviorPolicy& policy) {
  if (n_days < 0) throw ConfigError("number of demonstration days must be non-negative");
  Environment env(scenario);
  auto noise = make_rng(seed, 4);
  const BehaviorPolicy behave = policy ? policy : [&scenario](const BuildingState& s, std::mt19937_64& rng) {
    return noisy_rule_action(s, scenario.rule, rng);
  };
  // first logged day: 2024-07-01
  const std::int64_t first_day = parse_timestamp("2024-07-01 00:00");
  HistoricalLog log;
  log.rows.reserve(static_cast<std::size_t>(n_days * scenario.episode_steps));
  for (int day = 0; day < n_days; ++day) {
    env.reset(demonstration_day_seed(seed, day));
    while (!env.done()) {
      const BuildingState s = env.state();
      const JointAction a = behave(s, noise);
      LogRow r;
      r.minute = first_day + day * 1440LL + kDayStartMinute + s.clock_min;
      r.outdoor_temp = s.outdoor_temp_C;
      for (std::size_t j = 0; j < static_cast<std::size_t>(kZones); ++j) {
        r.zone_temp[j] = s.zone_temps_C[j];
        r.fcu_fan[j] = a.levels()[j];
        r.supply_temp[j] = s.aux.fcu_supply_temp_C[j];
        r.return_temp[j] = s.aux.fcu_return_temp_C[j];
        r.supply_pressure[j] = s.aux.fcu_supply_pressure_kPa[j];
        r.return_pressure[j] = s.aux.fcu_return_pressure_kPa[j];
        r.occupant_num[j] = s.occupancy[j];
      }
      log.rows.push_back(r);
      env.step(a);
    }
  }
  return log;
}

std::vector<Demonstration> to_demonstrations(const HistoricalLog& log) {
  std::vector<Demonstration> out;
  out.reserve(log.rows.size());
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    const LogRow& r = log.rows[i];
    Demonstration d;
    BuildingState& s = d.state;
    s.outdoor_temp_C = r.outdoor_temp;
    JointAction::Levels levels{};
    for (std::size_t j = 0; j < static_cast<std::size_t>(kZones); ++j) {
      s.zone_temps_C[j] = r.zone_temp[j];
      s.occupancy[j] = r.occupant_num[j];
      s.aux.fcu_supply_temp_C[j] = r.supply_temp[j];
      s.aux.fcu_return_temp_C[j] = r.return_temp[j];
      s.aux.fcu_supply_pressure_kPa[j] = r.supply_pressure[j];
      s.aux.fcu_return_pressure_kPa[j] = r.return_pressure[j];
      levels[j] = static_cast<std::uint8_t>(r.fcu_fan[j]);
    }
    const auto minute_of_day = static_cast<int>(((r.minute % 1440) + 1440) % 1440);
    s.clock_min = minute_of_day - kDayStartMinute;
    const bool continues = i > 0 && log.rows[i - 1].minute == r.minute - kControlMinutes;
    s.prev_action = continues ? out.back().action : JointAction::all_off();
    d.action = JointAction(levels);
    out.push_back(d);
  }
  return out;
}

}  // namespace hvacrl
