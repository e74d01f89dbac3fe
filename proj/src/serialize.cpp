#include <sstream>

#include "edw/worldlang.hpp"

namespace edw {

namespace {

void join(std::ostringstream& os, const std::vector<std::string>& v) {
  for (const auto& s : v) os << ' ' << s;
}

void model(std::ostringstream& os, const EDModel& m) {
  os << "model " << m.id << " kind " << to_string(m.kind);
  if (m.phase) os << " phase";
  if (m.imagined) os << " imagined";
  os << " {\n";
  if (!m.states.empty()) {
    os << "  states";
    join(os, m.states);
    os << '\n';
  }
  if (!m.initial.empty()) {
    os << "  initial";
    join(os, m.initial);
    os << '\n';
  }
  if (!m.entry.empty()) os << "  entry " << m.entry << '\n';
  if (!m.exits.empty()) {
    os << "  exit";
    join(os, m.exits);
    os << '\n';
  }
  if (m.activation) os << "  when " << to_string(*m.activation) << '\n';
  for (const auto& a : m.arrows) os << "  arrow " << a.from << " -> " << a.to << " : " << to_string(a.event) << '\n';
  for (const auto& s : m.steps) os << "  step " << s.offset << " : " << to_string(s.event) << '\n';
  for (const auto& t : m.traces)
    os << "  trace " << t.state << ' ' << to_string(t.polarity) << ' ' << to_string(t.event) << '\n';
  os << "}\n";
}

}  // namespace

std::string serialize_world(const WorldDescription& in) {
  WorldDescription wd = in;
  canonicalize(wd);
  std::ostringstream os;
  const auto& al = wd.alphabets;
  os << "alphabet {\n  actions";
  for (const auto& s : al.actions) os << ' ' << s;
  os << "\n  observations";
  for (const auto& s : al.observations) os << ' ' << s;
  os << "\n  undef " << al.undef_symbol << "\n}\n";

  if (!wd.markers.empty()) {
    os << "\nmarkers";
    join(os, wd.markers);
    os << '\n';
  }
  if (!wd.registers.empty()) {
    os << '\n';
    for (const auto& r : wd.registers) os << "register " << r << '\n';
  }
  if (!wd.events.empty()) {
    os << '\n';
    for (const auto& e : wd.events) os << "event " << e.name << " = " << to_string(e.event) << '\n';
  }
  for (const auto& m : wd.models) {
    os << '\n';
    model(os, m);
  }
  if (!wd.products.empty()) {
    os << '\n';
    for (const auto& p : wd.products) os << "product " << p.id << " = " << p.a << " x " << p.b << '\n';
  }
  for (const auto& t : wd.traces) {
    os << "\nmovtrace " << t.id << " over " << t.over << " {\n";
    if (!t.default_markers.empty()) {
      os << "  default :";
      join(os, t.default_markers);
      os << '\n';
    }
    for (const auto& c : t.cells) {
      os << "  cell " << c.state << " :";
      join(os, c.markers);
      os << '\n';
    }
    os << "}\n";
  }
  for (const auto& r : wd.rules) {
    os << "\nrule " << r.id << " priority " << r.priority << (r.forbid ? " forbid" : "") << " {\n";
    os << "  when " << to_string(r.guard) << '\n';
    for (const auto& e : r.effects) os << "  " << to_string(e) << '\n';
    os << "}\n";
  }
  for (const auto& a : wd.agents) {
    os << "\nagent " << a.id << " {\n";
    if (!a.models.empty()) {
      os << "  models";
      join(os, a.models);
      os << '\n';
    }
    if (!a.traces.empty()) {
      os << "  traces";
      join(os, a.traces);
      os << '\n';
    }
    if (!a.policy.empty()) os << "  policy " << a.policy << '\n';
    for (const auto& i : a.init) os << "  init " << i.model << " = " << i.state << '\n';
    if (a.reply) os << "  reply " << a.reply->algorithm << " after " << to_string(a.reply->trigger) << '\n';
    os << "}\n";
  }
  return os.str();
}

}  // namespace edw
