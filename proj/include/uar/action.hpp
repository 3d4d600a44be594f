#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace uar {

// Stable integer encoding 0-7 in this order.
enum class ActionClass : int {
  HandWaving = 0,
  Throwing,
  Kicking,
  PickingUp,
  Walking,
  LyingDown,
  Sitting,
  Standing,
};

inline constexpr std::size_t kNumActionClasses = 8;

inline constexpr std::array<ActionClass, kNumActionClasses> kAllActionClasses = {
    ActionClass::HandWaving, ActionClass::Throwing,  ActionClass::Kicking, ActionClass::PickingUp,
    ActionClass::Walking,    ActionClass::LyingDown, ActionClass::Sitting, ActionClass::Standing,
};

inline constexpr std::array<std::string_view, kNumActionClasses> kActionNames = {
    "hand-waving", "throwing", "kicking", "picking-up", "walking", "lying-down", "sitting", "standing",
};

constexpr int to_index(ActionClass a) { return static_cast<int>(a); }
constexpr std::string_view to_string(ActionClass a) { return kActionNames[static_cast<std::size_t>(a)]; }

inline std::optional<ActionClass> parse_action(std::string_view name) {
  for (std::size_t i = 0; i < kNumActionClasses; ++i)
    if (kActionNames[i] == name) return kAllActionClasses[i];
  return std::nullopt;
}

inline std::optional<ActionClass> action_from_index(int i) {
  if (i < 0 || i >= static_cast<int>(kNumActionClasses)) return std::nullopt;
  return kAllActionClasses[static_cast<std::size_t>(i)];
}

}  // namespace uar
