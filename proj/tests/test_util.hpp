#pragma once

#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include "edw/errors.hpp"
#include "edw/worldlang.hpp"

namespace testutil {

inline const std::string kAlphabet =
    "alphabet {\n  actions 0 a b c\n  observations 0 x y z\n  undef undef\n}\n";

// Parses a world that must be free of errors.
inline edw::WorldDescription world(const std::string& body) {
  auto r = edw::parse_world(kAlphabet + body);
  if (!r.world) {
    std::string msg;
    for (const auto& d : r.diagnostics) msg += edw::format(d, "test") + "\n";
    throw std::runtime_error(msg);
  }
  return *r.world;
}

// Facts for evaluating models outside the engine: model states by index.
struct StubFacts final : edw::FactSource {
  std::map<int, edw::ActiveSet> active;
  int obs = 0;
  mutable std::mt19937_64 rng{7};

  int last_observation() const override { return obs; }
  bool in_state(const edw::EventLiteral& l) const override {
    auto it = active.find(l.ia);
    return it != active.end() && edw::contains(it->second, l.ib);
  }
  bool has_marker(const edw::EventLiteral&) const override { return false; }
  double draw() const override { return std::uniform_real_distribution<double>(0, 1)(rng); }
};

inline edw::EvalContext ctx(const edw::FactSource& f, int action, edw::EvalMode mode = edw::EvalMode::Reality,
                            bool choice = false) {
  return {action, &f, mode, choice};
}

}  // namespace testutil
