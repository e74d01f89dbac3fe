#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace edw {

inline constexpr int kSymbols = 4;
// Observation index used for undef; never a member of the observation set.
inline constexpr int kUndef = kSymbols;

// Bit i is action i in the ordinary branch; bit i+4 is action i when the
// imagination choice is taken.
using ActionBits = std::uint8_t;
inline constexpr ActionBits kAllBits = 0xff;
inline constexpr ActionBits kRealBits = 0x0f;

struct SymbolAlphabets {
  std::array<std::string, kSymbols> actions{"0", "a", "b", "c"};
  std::array<std::string, kSymbols> observations{"0", "x", "y", "z"};
  std::string undef_symbol = "undef";

  int action_index(std::string_view s) const;
  int observation_index(std::string_view s) const;  // kUndef for undef_symbol
  const std::string& observation_name(int idx) const;

  // Empty when valid, otherwise a message.
  std::string check() const;

  bool operator==(const SymbolAlphabets&) const = default;
};

// Mask digit: 2 = a forbidden, 4 = b forbidden, 6 = both.
int mask_digit(ActionBits forbidden);

}  // namespace edw
