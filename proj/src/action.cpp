#include "hvacrl/action.hpp"

#include <bit>
#include <sstream>

#include "hvacrl/errors.hpp"

namespace hvacrl {

int encode_levels(const JointAction::Levels& levels) {
  int index = 0;
  for (int j = kZones - 1; j >= 0; --j) {
    const int l = levels[static_cast<std::size_t>(j)];
    if (l < 0 || l >= kFanLevels) throw ConfigError("fan level " + std::to_string(l) + " out of range");
    index = index * kFanLevels + l;
  }
  return index;
}

JointAction::Levels decode_index(int flat_index) {
  if (flat_index < 0 || flat_index >= kActionCount) {
    throw ConfigError("action index " + std::to_string(flat_index) + " out of range");
  }
  JointAction::Levels levels{};
  for (int j = 0; j < kZones; ++j) {
    levels[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(flat_index % kFanLevels);
    flat_index /= kFanLevels;
  }
  return levels;
}

JointAction::JointAction(const Levels& levels) : levels_(levels), index_(encode_levels(levels)) {}

JointAction JointAction::from_index(int flat_index) { return JointAction(decode_index(flat_index)); }

FeasibleSets FeasibleSets::full() {
  FeasibleSets s;
  s.per_zone.fill(0b1111);
  return s;
}

int FeasibleSets::size(int zone) const noexcept {
  return std::popcount(static_cast<unsigned>(per_zone[static_cast<std::size_t>(zone)] & 0b1111U));
}

bool FeasibleSets::valid() const noexcept {
  for (auto s : per_zone) {
    if (s == 0 || (s & ~0b1111U) != 0) return false;
  }
  return true;
}

bool FeasibleSets::admits(const JointAction& action) const noexcept {
  for (int j = 0; j < kZones; ++j) {
    if (!contains(j, action.level(j))) return false;
  }
  return true;
}

std::string to_string(const FeasibleSets& sets) {
  std::ostringstream os;
  for (int j = 0; j < kZones; ++j) {
    os << (j ? " " : "") << "z" << j + 1 << "{";
    bool first = true;
    for (int l = 0; l < kFanLevels; ++l) {
      if (!sets.contains(j, l)) continue;
      os << (first ? "" : ",") << l;
      first = false;
    }
    os << "}";
  }
  return os.str();
}

ActionMask ActionMask::all_ones() {
  ActionMask m;
  m.bits.set();
  m.joint_count = kActionCount;
  return m;
}

ActionMask joint_mask(const FeasibleSets& sets) {
  ActionMask mask;
  // enumerate the product set digit by digit
  std::array<int, kZones> options_count{};
  std::array<std::array<int, kFanLevels>, kZones> options{};
  for (int j = 0; j < kZones; ++j) {
    for (int l = 0; l < kFanLevels; ++l) {
      if (sets.contains(j, l)) options[static_cast<std::size_t>(j)][static_cast<std::size_t>(options_count[static_cast<std::size_t>(j)]++)] = l;
    }
    if (options_count[static_cast<std::size_t>(j)] == 0) return mask;
  }
  std::array<int, kZones> cursor{};
  for (;;) {
    int index = 0;
    for (int j = kZones - 1; j >= 0; --j) {
      index = index * kFanLevels + options[static_cast<std::size_t>(j)][static_cast<std::size_t>(cursor[static_cast<std::size_t>(j)])];
    }
    mask.bits.set(static_cast<std::size_t>(index));
    ++mask.joint_count;
    int j = 0;
    while (j < kZones && ++cursor[static_cast<std::size_t>(j)] == options_count[static_cast<std::size_t>(j)]) {
      cursor[static_cast<std::size_t>(j)] = 0;
      ++j;
    }
    if (j == kZones) break;
  }
  return mask;
}

double remaining_percentage(int joint_count) {
  return static_cast<double>(joint_count) / static_cast<double>(kActionCount) * 100.0;
}

double remaining_percentage(const ActionMask& mask) { return remaining_percentage(mask.joint_count); }

}  // namespace hvacrl
