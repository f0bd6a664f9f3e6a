#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "hvacrl/environment.hpp"
#include "hvacrl/features.hpp"

namespace hvacrl {

/// One logged control step, in the column layout of the building export.
struct LogRow {
  std::int64_t minute = 0;  // minutes since 1970-01-01 00:00
  double outdoor_temp = 0.0;
  std::array<double, kZones> zone_temp{};
  std::array<int, kZones> fcu_fan{};
  std::array<double, kZones> supply_temp{};
  std::array<double, kZones> return_temp{};
  std::array<double, kZones> supply_pressure{};
  std::array<double, kZones> return_pressure{};
  std::array<int, kZones> occupant_num{};
};

struct HistoricalLog {
  std::vector<LogRow> rows;
};

/// Header in file order: timestamp, outdoor_temp, then the seven per-zone groups.
const std::vector<std::string>& log_columns();

std::string format_timestamp(std::int64_t minute);
/// Accepts "YYYY-MM-DD HH:MM" with optional ":SS" (seconds must be 0) and an
/// optional 'T' separator.
std::int64_t parse_timestamp(const std::string& text);

/// Parses and validates a log. Rows off the 5-minute control grid are dropped.
HistoricalLog read_historical(std::istream& in);
HistoricalLog load_historical(const std::filesystem::path& path);
void write_historical(std::ostream& out, const HistoricalLog& log);
void save_historical(const std::filesystem::path& path, const HistoricalLog& log);

using BehaviorPolicy = std::function<JointAction(const BuildingState&, std::mt19937_64&)>;

/// Rolls the behaviour policy (the noisy rule when empty) over `n_days`
/// simulated days, logging every control step.
HistoricalLog generate_demonstrations(const Scenario& scenario, int n_days, std::uint64_t seed,
                                      const BehaviorPolicy& policy = {});

/// Episode seed used for demonstration day `day`.
std::uint64_t demonstration_day_seed(std::uint64_t seed, int day);

/// State/action pairs recovered from a log. The previous action of the first
/// row of each day (or after a gap) is all-off.
struct Demonstration {
  BuildingState state;
  JointAction action;
};

std::vector<Demonstration> to_demonstrations(const HistoricalLog& log);

}  // namespace hvacrl
