#include "edw/tm.hpp"

#include <regex>
#include <sstream>

#include "edw/errors.hpp"
#include "edw/worldlang.hpp"

namespace edw {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

const char* kEvents[] = {"write0", "write1", "left", "right"};

int event_of_write(int s) { return s; }
int event_of_move(int d) { return d < 0 ? 2 : 3; }

}  // namespace

TMSpec parse_tm(const std::string& text) {
  static const std::regex line_re(
      R"(^([A-Za-z_][A-Za-z0-9_]*)\s*:\s*0\s*->\s*w([01])\s*,\s*([LR])\s*,\s*([A-Za-z_][A-Za-z0-9_]*)\s*;\s*1\s*->\s*w([01])\s*,\s*([LR])\s*,\s*([A-Za-z_][A-Za-z0-9_]*)$)");
  struct Raw {
    int line;
    std::string target[2];
  };
  TMSpec spec;
  std::vector<Raw> raw;
  std::map<std::string, int> index;
  std::istringstream in(text);
  std::string ln;
  int n = 0;
  while (std::getline(in, ln)) {
    ++n;
    if (auto h = ln.find('#'); h != std::string::npos) ln.erase(h);
    ln = trim(ln);
    if (ln.empty()) continue;
    std::smatch m;
    if (!std::regex_match(ln, m, line_re))
      throw CompileError("line " + std::to_string(n) + ": expected `q: 0 -> wS,D,q ; 1 -> wS,D,q`");
    TMCommand c;
    c.name = m[1];
    if (c.name == "H") throw CompileError("line " + std::to_string(n) + ": H is reserved for halting");
    if (!index.emplace(c.name, static_cast<int>(spec.commands.size())).second)
      throw CompileError("line " + std::to_string(n) + ": command " + c.name + " defined twice");
    for (int b = 0; b < 2; ++b) {
      c.on[b].write = m[static_cast<std::size_t>(2 + 3 * b)].str() == "1";
      c.on[b].dir = m[static_cast<std::size_t>(3 + 3 * b)].str() == "L" ? -1 : 1;
    }
    raw.push_back({n, {m[4], m[7]}});
    spec.commands.push_back(std::move(c));
  }
  if (spec.commands.empty()) throw CompileError("machine has no commands");
  for (std::size_t i = 0; i < raw.size(); ++i)
    for (int b = 0; b < 2; ++b) {
      const auto& t = raw[i].target[b];
      if (t == "H") continue;
      auto it = index.find(t);
      if (it == index.end())
        throw CompileError("line " + std::to_string(raw[i].line) + ": unknown command " + t);
      spec.commands[i].on[b].next = it->second;
    }
  return spec;
}

std::string format_tm(const TMSpec& spec) {
  std::string out;
  for (const TMCommand& c : spec.commands) {
    out += c.name + ":";
    for (int b = 0; b < 2; ++b) {
      const TMBranch& br = c.on[b];
      out += b ? " ; 1 -> w" : " 0 -> w";
      out += br.write ? '1' : '0';
      out += br.dir < 0 ? ",L," : ",R,";
      out += br.next == kHalt ? std::string("H") : spec.commands[static_cast<std::size_t>(br.next)].name;
    }
    out += '\n';
  }
  return out;
}

TMConfig tape_config(const std::string& bits, std::int64_t head) {
  TMConfig c;
  c.head = head;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') c.tape[static_cast<std::int64_t>(i)] = 1;
    else if (bits[i] != '0') throw ArgumentError("tape symbols are 0 and 1");
  }
  return c;
}

std::string tape_string(const TMConfig& c) {
  if (c.tape.empty()) return "";
  std::int64_t lo = std::min<std::int64_t>(0, c.tape.begin()->first), hi = c.tape.rbegin()->first;
  std::string s;
  for (std::int64_t k = lo; k <= hi; ++k) s += c.tape.count(k) ? '1' : '0';
  return s;
}

TMConfig simulate_tm(const TMSpec& spec, TMConfig c, std::size_t steps) {
  for (std::size_t i = 0; i < steps && !c.halted(); ++i) {
    const auto& br = spec.commands.at(static_cast<std::size_t>(c.command)).on[c.tape.count(c.head) ? 1 : 0];
    if (br.write) c.tape[c.head] = 1;
    else c.tape.erase(c.head);
    c.head += br.dir;
    c.command = br.next;
  }
  return c;
}

std::size_t steps_to_halt(const TMSpec& spec, TMConfig c, std::size_t limit) {
  std::size_t n = 0;
  while (!c.halted() && n < limit) {
    c = simulate_tm(spec, c, 1);
    ++n;
  }
  return n;
}

std::string machine_state(const TMSpec& spec, int command, const char* part) {
  return (command == kHalt ? std::string("H") : spec.commands.at(static_cast<std::size_t>(command)).name) + "." + part;
}

WorldDescription compile_tm(const TMSpec& spec, const TMConfig& init) {
  std::ostringstream os;
  os << "alphabet {\n  actions 0 a b c\n  observations 0 x y z\n  undef undef\n}\n";
  os << "markers one\n";
  os << "event write0 = action=0\nevent write1 = action=a\nevent left = action=b\nevent right = action=c\n";
  os << "event observe0 = !has(tape,one)\nevent observe1 = has(tape,one)\n\n";
  os << "model head kind counter {\n  initial " << init.head << "\n  step -1 : left\n  step 1 : right\n}\n\n";

  os << "model machine kind pattern {\n  states";
  const char* parts[] = {"r0", "r1", "m0", "m1"};
  for (int q = 0; q <= static_cast<int>(spec.commands.size()); ++q) {
    int cmd = q == static_cast<int>(spec.commands.size()) ? kHalt : q;
    for (const char* p : parts) os << ' ' << machine_state(spec, cmd, p);
  }
  os << "\n  initial " << machine_state(spec, init.command, "r0") << ' ' << machine_state(spec, init.command, "r1") << '\n';
  auto only = [&](const std::string& s, int allowed) {
    for (int ev = 0; ev < 4; ++ev)
      if (ev != allowed) os << "  trace " << s << " never " << kEvents[ev] << '\n';
  };
  for (int q = 0; q <= static_cast<int>(spec.commands.size()); ++q) {
    const bool halt = q == static_cast<int>(spec.commands.size());
    const int cmd = halt ? kHalt : q;
    for (int b = 0; b < 2; ++b) {
      std::string r = machine_state(spec, cmd, parts[b]), m = machine_state(spec, cmd, parts[2 + b]);
      os << "  trace " << r << " must observe" << b << '\n';
      if (halt) {
        // Halting: nothing is possible any more.
        os << "  arrow " << r << " -> " << m << " : never\n";
        only(r, -1);
        only(m, -1);
        continue;
      }
      const auto& br = spec.commands[static_cast<std::size_t>(q)].on[b];
      os << "  arrow " << r << " -> " << m << " : " << kEvents[event_of_write(br.write)] << '\n';
      for (const char* nr : {"r0", "r1"})
        os << "  arrow " << m << " -> " << machine_state(spec, br.next, nr) << " : " << kEvents[event_of_move(br.dir)] << '\n';
      only(r, event_of_write(br.write));
      only(m, event_of_move(br.dir));
    }
  }
  os << "}\n\n";
  os << "movtrace tape over head {\n";
  for (const auto& [k, v] : init.tape)
    if (v) os << "  cell " << k << " : one\n";
  os << "}\n\n";
  os << "rule write_one priority 1 {\n  when write1 & observe0\n  add tape@cur one\n}\n";
  os << "rule write_zero priority 2 {\n  when write0\n  remove tape@cur one\n}\n";

  auto r = parse_world(os.str());
  if (!r.world) {
    std::string msg = "compiled machine does not validate:\n";
    for (const auto& d : r.diagnostics) msg += format(d, "machine") + "\n";
    throw CompileError(msg);
  }
  return std::move(*r.world);
}

TMConfig read_config(const TMSpec& spec, const Engine& e, const WorldState& ws) {
  TMConfig c;
  const auto& h = e.active(ws, 0, "head");
  if (h.size() != 1) throw EngineFault("head position is ambiguous");
  c.head = h.front();
  const auto& tape = e.trace(ws, 0, "tape");
  int one = e.world().marker_index("one");
  for (const auto& [k, cell] : tape.set_cells)
    if (cell_has(cell, static_cast<MarkerId>(one))) c.tape[k] = 1;
  const auto& m = e.active(ws, 0, "machine");
  if (m.size() != 1) throw EngineFault("machine state is ambiguous");
  std::string name = e.world().models[static_cast<std::size_t>(e.world().model_index("machine"))].name_of(m.front());
  std::string cmd = name.substr(0, name.find('.'));
  c.command = kHalt;
  for (std::size_t i = 0; i < spec.commands.size(); ++i)
    if (spec.commands[i].name == cmd) c.command = static_cast<int>(i);
  if (name.substr(name.find('.') + 1, 1) != "r") throw EngineFault("machine between micro-steps: " + name);
  return c;
}

CosimReport cosimulate_world(const TMSpec& spec, const WorldDescription& wd, const TMConfig& init,
                             std::size_t steps) {
  CosimReport rep;
  Engine e(wd);
  WorldState ws = e.init(0);
  auto policy = forced_policy();
  TMConfig sim = init;
  auto compare = [&](std::size_t i) {
    TMConfig got;
    try {
      got = read_config(spec, e, ws);
    } catch (const Error& err) {
      rep.ok = false;
      rep.divergence = i;
      rep.message = err.what();
      return false;
    }
    if (got == sim) return true;
    std::ostringstream os;
    os << "step " << i << ": world head " << got.head << " tape " << tape_string(got) << " command "
       << machine_state(spec, got.command, "") << "; simulator head " << sim.head << " tape " << tape_string(sim)
       << " command " << machine_state(spec, sim.command, "");
    rep.ok = false;
    rep.divergence = i;
    rep.message = os.str();
    return false;
  };
  if (!compare(0)) return rep;
  for (std::size_t i = 1; i <= steps && !sim.halted(); ++i) {
    try {
      for (int micro = 0; micro < 2; ++micro) {
        ActionBits f = e.forbidden(ws, 0);
        e.step(ws, 0, policy->choose({}, f));
      }
    } catch (const Error& err) {
      rep.ok = false;
      rep.divergence = i;
      rep.message = err.what();
      return rep;
    }
    sim = simulate_tm(spec, sim, 1);
    rep.steps = i;
    if (!compare(i)) return rep;
  }
  return rep;
}

CosimReport cosimulate(const TMSpec& spec, const TMConfig& init, std::size_t steps) {
  return cosimulate_world(spec, compile_tm(spec, init), init, steps);
}

}  // namespace edw
