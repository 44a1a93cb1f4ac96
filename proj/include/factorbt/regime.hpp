#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace factorbt {

enum class Regime { Bull, Bear, Shock };

inline constexpr std::array<Regime, 3> kRegimes = {Regime::Bull, Regime::Bear, Regime::Shock};

constexpr std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Bull: return "bull";
    case Regime::Bear: return "bear";
    case Regime::Shock: return "shock";
  }
  return "shock";
}

constexpr std::optional<Regime> regime_from_string(std::string_view s) {
  for (Regime r : kRegimes) {
    if (to_string(r) == s) {
      return r;
    }
  }
  return std::nullopt;
}

}  // namespace factorbt
