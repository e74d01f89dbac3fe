#include "edw/alphabet.hpp"

#include <set>

namespace edw {

int SymbolAlphabets::action_index(std::string_view s) const {
  for (int i = 0; i < kSymbols; ++i)
    if (actions[i] == s) return i;
  return -1;
}

int SymbolAlphabets::observation_index(std::string_view s) const {
  for (int i = 0; i < kSymbols; ++i)
    if (observations[i] == s) return i;
  if (s == undef_symbol) return kUndef;
  return -1;
}

const std::string& SymbolAlphabets::observation_name(int idx) const {
  return idx == kUndef ? undef_symbol : observations.at(idx);
}

std::string SymbolAlphabets::check() const {
  std::set<std::string> a(actions.begin(), actions.end());
  std::set<std::string> o(observations.begin(), observations.end());
  if (a.size() != kSymbols) return "action symbols must be distinct";
  if (o.size() != kSymbols) return "observation symbols must be distinct";
  if (o.count(undef_symbol)) return "undef symbol collides with an observation";
  return {};
}

int mask_digit(ActionBits forbidden) {
  return ((forbidden & 2) ? 2 : 0) + ((forbidden & 4) ? 4 : 0);
}

}  // namespace edw
