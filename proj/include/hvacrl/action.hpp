#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <string>

#include "hvacrl/hvac_equipment.hpp"

namespace hvacrl {

inline constexpr int kZones = 7;
inline constexpr int kActionCount = 16384;  // 4^7

/// Joint fan-speed vector. Zone 1 is the least significant base-4 digit of
/// the flat index.
class JointAction {
 public:
  using Levels = std::array<std::uint8_t, kZones>;

  constexpr JointAction() = default;
  explicit JointAction(const Levels& levels);

  static JointAction from_index(int flat_index);
  static JointAction all_off() { return JointAction(); }

  const Levels& levels() const noexcept { return levels_; }
  int level(int zone) const { return levels_.at(static_cast<std::size_t>(zone)); }
  int index() const noexcept { return index_; }

  friend bool operator==(const JointAction&, const JointAction&) = default;

 private:
  Levels levels_{};
  int index_ = 0;
};

int encode_levels(const JointAction::Levels& levels);
JointAction::Levels decode_index(int flat_index);

/// Per-zone feasible level sets, each a 4-bit set over {0,1,2,3}.
struct FeasibleSets {
  std::array<std::uint8_t, kZones> per_zone{};

  static FeasibleSets full();
  bool contains(int zone, int level) const noexcept { return (per_zone[static_cast<std::size_t>(zone)] >> level) & 1U; }
  int size(int zone) const noexcept;
  bool valid() const noexcept;
  bool admits(const JointAction& action) const noexcept;

  friend bool operator==(const FeasibleSets&, const FeasibleSets&) = default;
};

std::string to_string(const FeasibleSets& sets);

using MaskBits = std::bitset<kActionCount>;

struct ActionMask {
  MaskBits bits;
  int joint_count = 0;

  bool allows(int flat_index) const { return bits.test(static_cast<std::size_t>(flat_index)); }
  static ActionMask all_ones();
};

/// Bit a is set iff every digit of a lies in its zone's set.
ActionMask joint_mask(const FeasibleSets& sets);

double remaining_percentage(const ActionMask& mask);
double remaining_percentage(int joint_count);

}  // namespace hvacrl
