#include "hvacrl/prompt.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "hvacrl/errors.hpp"

namespace hvacrl {

using nlohmann::json;

namespace {

constexpr const char* kCurrentLabel = "t: ";

double round_to(double v, double scale) { return std::round(v * scale) / scale; }

std::string clock_text(int clock_min) {
  const int minute = kDayStartMinute + clock_min;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minute / 60, minute % 60);
  return buf;
}

json state_json(const BuildingState& s) {
  json temps = json::array();
  json occ = json::array();
  json fan = json::array();
  for (int j = 0; j < kZones; ++j) {
    temps.push_back(round_to(s.zone_temps_C[static_cast<std::size_t>(j)], 100.0));
    occ.push_back(s.occupancy[static_cast<std::size_t>(j)]);
    fan.push_back(s.prev_action.level(j));
  }
  json out;
  out["time"] = clock_text(s.clock_min);
  out["outdoor_temp"] = round_to(s.outdoor_temp_C, 100.0);
  out["zone_temp"] = temps;
  out["occupant_num"] = occ;
  out["FCU_fan"] = fan;
  out["supply_water_temp"] = round_to(s.aux.supply_water_C, 100.0);
  out["return_water_temp"] = round_to(s.aux.return_water_C, 100.0);
  out["pump_freq"] = round_to(s.aux.pump_freq_Hz, 10.0);
  return out;
}

std::string zone_key(int j) { return "zone_" + std::to_string(j + 1); }

// One zone's list; throws on the first problem.
std::uint8_t parse_zone(const json& recs, int j) {
  const std::string key = zone_key(j);
  if (!recs.contains(key)) throw RecommendationError(RecommendationError::Kind::kMissingZone, "missing " + key);
  const json& list = recs.at(key);
  if (!list.is_array()) throw RecommendationError(RecommendationError::Kind::kMalformed, key + " is not a list");
  if (list.empty()) throw RecommendationError(RecommendationError::Kind::kEmptySet, key + " is empty");
  std::uint8_t bits = 0;
  for (const auto& v : list) {
    if (!v.is_number_integer()) {
      throw RecommendationError(RecommendationError::Kind::kMalformed, key + " holds a non-integer level");
    }
    const auto level = v.get<std::int64_t>();
    if (level < 0 || level >= kFanLevels) {
      throw RecommendationError(RecommendationError::Kind::kOutOfRange,
                                key + " level " + std::to_string(level) + " outside 0..3");
    }
    bits |= static_cast<std::uint8_t>(1U << level);
  }
  return bits;
}

const json& recommendations_of(const json& doc) {
  if (!doc.is_object() || !doc.contains("recommendations") || !doc.at("recommendations").is_object()) {
    throw RecommendationError(RecommendationError::Kind::kMalformed, "reply lacks a recommendations object");
  }
  return doc.at("recommendations");
}

json parse_document(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw RecommendationError(RecommendationError::Kind::kMalformed, "reply is not valid JSON");
  return doc;
}

}  // namespace

std::string serialize_prompt(std::span<const BuildingState> window) {
  if (window.size() != static_cast<std::size_t>(kPromptWindow)) {
    throw ConfigError("prompt window needs exactly " + std::to_string(kPromptWindow) + " states, got " +
                      std::to_string(window.size()));
  }
  std::ostringstream os;
  os << "### Instruction\n"
        "You control the fan coil units of a seven-zone office floor during working hours. "
        "From the recent states below, list for every zone the fan modes that are reasonable to apply next.\n"
        "### Building notes\n"
        "- Fan modes: 0 = off, 1 = low, 2 = medium, 3 = high. Higher modes move more air over the chilled-water "
        "coil and draw more fan power; the pump speeds up with the number of running units.\n"
        "- Zones 1-4 are separate offices with no heat exchange between them. Zones 5, 6 and 7 share an open "
        "area: 5 exchanges heat with 6, and 6 with 7.\n"
        "- Occupants add heat and only occupied zones count toward comfort; vacant zones are normally left off.\n"
        "- Fields: time, outdoor_temp (C), zone_temp (C, zones 1-7), occupant_num (people), FCU_fan (mode applied "
        "during the previous interval), supply/return water temperature (C), pump_freq (Hz).\n"
        "### Recent states (5-minute steps, oldest first)\n";
  for (int k = 0; k < kPromptWindow; ++k) {
    const int lag = kPromptWindow - 1 - k;
    os << (lag == 0 ? std::string(kCurrentLabel) : "t-" + std::to_string(lag) + ": ")
       << state_json(window[static_cast<std::size_t>(k)]).dump() << "\n";
  }
  os << "### Output format\n"
        "Reply with a single JSON object and nothing else. It must have exactly two fields: \"analysis\", a short "
        "string, and \"recommendations\", an object mapping each of \"zone_1\" ... \"zone_7\" to a non-empty list "
        "of allowed fan modes taken from [0, 1, 2, 3].\n";
  return os.str();
}

FeasibleSets parse_recommendations(const std::string& json_text) {
  const json doc = parse_document(json_text);
  const json& recs = recommendations_of(doc);
  FeasibleSets sets;
  for (int j = 0; j < kZones; ++j) sets.per_zone[static_cast<std::size_t>(j)] = parse_zone(recs, j);
  return sets;
}

FeasibleSets parse_recommendations_or_full(const std::string& json_text, std::vector<std::string>* warnings) {
  FeasibleSets sets = FeasibleSets::full();
  json doc;
  try {
    doc = parse_document(json_text);
    const json& recs = recommendations_of(doc);
    for (int j = 0; j < kZones; ++j) {
      try {
        sets.per_zone[static_cast<std::size_t>(j)] = parse_zone(recs, j);
      } catch (const RecommendationError& e) {
        if (warnings) warnings->push_back(std::string(e.what()) + "; using all modes for " + zone_key(j));
      }
    }
  } catch (const RecommendationError& e) {
    if (warnings) warnings->push_back(std::string(e.what()) + "; using all modes for every zone");
  }
  return sets;
}

json recommendations_json(const FeasibleSets& sets) {
  json recs = json::object();
  for (int j = 0; j < kZones; ++j) {
    json list = json::array();
    for (int l = 0; l < kFanLevels; ++l) {
      if (sets.contains(j, l)) list.push_back(l);
    }
    recs[zone_key(j)] = list;
  }
  return recs;
}

std::string render_reply(const std::string& analysis, const FeasibleSets& sets) {
  json doc;
  doc["analysis"] = analysis;
  doc["recommendations"] = recommendations_json(sets);
  return doc.dump();
}

std::string analysis_text(std::span<const BuildingState> window, const FeasibleSets& sets) {
  if (window.empty()) throw ConfigError("analysis needs at least one state");
  auto mean_temp = [](const BuildingState& s) {
    double sum = 0.0;
    for (double t : s.zone_temps_C) sum += t;
    return sum / kZones;
  };
  const double now = mean_temp(window.back());
  const double change = now - mean_temp(window.front());
  const char* trend = change > 0.1 ? "rising" : change < -0.1 ? "falling" : "steady";
  int pruned = 0;
  for (int j = 0; j < kZones; ++j) pruned += kFanLevels - sets.size(j);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "Zone temperatures are %s, averaging %.1f C (%+.1f C over the window). "
                "%d occupants are present. %d of %d zone fan modes are ruled out.",
                trend, now, change, window.back().occupants_total(), pruned, kZones * kFanLevels);
  return buf;
}

BuildingState current_state_from_prompt(const std::string& prompt) {
  const std::string marker = std::string("\n") + kCurrentLabel;
  const auto at = prompt.find(marker);
  if (at == std::string::npos) throw ConfigError("prompt has no current-state line");
  const auto begin = at + marker.size();
  const auto end = prompt.find('\n', begin);
  const json s = json::parse(prompt.substr(begin, end == std::string::npos ? std::string::npos : end - begin), nullptr,
                             false);
  if (s.is_discarded()) throw ConfigError("current-state line is not valid JSON");
  BuildingState state;
  try {
    const auto time = s.at("time").get<std::string>();
    int h = 0;
    int m = 0;
    if (std::sscanf(time.c_str(), "%d:%d", &h, &m) != 2) throw ConfigError("bad time '" + time + "'");
    state.clock_min = h * 60 + m - kDayStartMinute;
    state.outdoor_temp_C = s.at("outdoor_temp").get<double>();
    JointAction::Levels levels{};
    for (std::size_t j = 0; j < static_cast<std::size_t>(kZones); ++j) {
      state.zone_temps_C[j] = s.at("zone_temp").at(j).get<double>();
      state.occupancy[j] = s.at("occupant_num").at(j).get<int>();
      levels[j] = static_cast<std::uint8_t>(s.at("FCU_fan").at(j).get<int>());
    }
    state.prev_action = JointAction(levels);
    state.aux.supply_water_C = s.at("supply_water_temp").get<double>();
    state.aux.return_water_C = s.at("return_water_temp").get<double>();
    state.aux.pump_freq_Hz = s.at("pump_freq").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("current-state line: ") + e.what());
  }
  return state;
}

CompletionFn knn_completion(std::shared_ptr<const KnnMaskSource> oracle) {
  return [oracle = std::move(oracle)](const std::string& prompt) {
    const BuildingState state = current_state_from_prompt(prompt);
    const FeasibleSets sets = oracle->sets_for(state);
    return render_reply(analysis_text(std::span<const BuildingState>(&state, 1), sets), sets);
  };
}

}  // namespace hvacrl
