#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "edw/engine.hpp"

namespace edw {

constexpr int kHalt = -1;

struct TMBranch {
  int write = 0;  // 0 or 1
  int dir = 1;    // -1 left, +1 right
  int next = kHalt;
  bool operator==(const TMBranch&) const = default;
};

struct TMCommand {
  std::string name;
  TMBranch on[2];
  bool operator==(const TMCommand&) const = default;
};

struct TMSpec {
  std::vector<TMCommand> commands;  // command 0 starts
  // Commands in the compiled machine, counting the halting one.
  std::size_t command_count() const { return commands.size() + 1; }
  bool operator==(const TMSpec&) const = default;
};

struct TMConfig {
  std::int64_t head = 0;
  std::map<std::int64_t, int> tape;  // cells holding 1
  int command = 0;                   // kHalt once halted

  bool halted() const { return command == kHalt; }
  bool operator==(const TMConfig&) const = default;
};

// `q0: 0 -> w1,R,q1 ; 1 -> w0,L,H`, one command per line, `#` comments.
TMSpec parse_tm(const std::string& text);
// Canonical table text; parse_tm(format_tm(s)) reproduces s.
std::string format_tm(const TMSpec& spec);
TMConfig tape_config(const std::string& bits, std::int64_t head = 0);
std::string tape_string(const TMConfig& c);

TMConfig simulate_tm(const TMSpec& spec, TMConfig init, std::size_t steps);
std::size_t steps_to_halt(const TMSpec& spec, TMConfig init, std::size_t limit);

WorldDescription compile_tm(const TMSpec& spec, const TMConfig& init = {});
std::string machine_state(const TMSpec& spec, int command, const char* part);

struct CosimReport {
  bool ok = true;
  std::size_t steps = 0;       // machine steps compared
  std::size_t divergence = 0;  // machine step of the first mismatch
  std::string message;
};

// Drives the compiled world with the only permitted action and compares
// head, tape and command after every machine step.
CosimReport cosimulate(const TMSpec& spec, const TMConfig& init, std::size_t steps);
CosimReport cosimulate_world(const TMSpec& spec, const WorldDescription& wd, const TMConfig& init,
                             std::size_t steps);

// Reads the machine configuration back out of a compiled world.
TMConfig read_config(const TMSpec& spec, const Engine& e, const WorldState& ws);

}  // namespace edw
