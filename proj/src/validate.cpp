#include <algorithm>
#include <deque>
#include <set>

#include "edw/worldlang.hpp"

namespace edw {

namespace {

void warn(std::vector<Diagnostic>& d, SourcePos p, std::string msg) {
  d.push_back({Diagnostic::Severity::Warning, p, std::move(msg)});
}

// States reachable from the initial states, the entry, rule overrides and
// agent init overrides by following arrows regardless of their events.
std::vector<bool> reachable(const WorldDescription& wd, const EDModel& m) {
  std::vector<bool> seen(m.states.size(), false);
  std::deque<StateKey> q;
  auto push = [&](const std::string& s) {
    if (auto k = m.key_of(s); k && !seen[static_cast<std::size_t>(*k)]) {
      seen[static_cast<std::size_t>(*k)] = true;
      q.push_back(*k);
    }
  };
  for (const auto& s : m.initial) push(s);
  if (!m.entry.empty()) push(m.entry);
  for (const auto& r : wd.rules)
    for (const auto& e : r.effects)
      if (e.op == EffectOp::SetState && e.model == m.id) push(e.state);
  for (const auto& a : wd.agents)
    for (const auto& i : a.init)
      if (i.model == m.id) push(i.state);
  while (!q.empty()) {
    StateKey s = q.front();
    q.pop_front();
    for (const auto& a : m.arrows)
      if (a.from_key == s) push(a.to);
  }
  return seen;
}

}  // namespace

std::vector<Diagnostic> validate(const WorldDescription& in) {
  WorldDescription wd = in;
  auto diags = resolve(wd);
  for (const auto& d : diags)
    if (d.error()) return diags;

  for (const auto& m : wd.models) {
    if (m.counter()) continue;
    if (m.states.size() == 1)
      warn(diags, m.pos, "model " + m.id + " has a single state and so a single possible answer");
    if (m.kind == ModelKind::Pattern && m.traces.empty())
      warn(diags, m.pos, "pattern " + m.id + " has no permanent trace and will be hard to discover");
    if (m.kind == ModelKind::Algorithm && m.exits.empty())
      warn(diags, m.pos, "algorithm " + m.id + " has no exit state");
    auto seen = reachable(wd, m);
    for (std::size_t i = 0; i < seen.size(); ++i)
      if (!seen[i]) warn(diags, m.pos, "model " + m.id + ": state " + m.states[i] + " is unreachable");
  }

  std::set<std::string> owned_models, owned_traces;
  for (const auto& a : wd.agents) {
    owned_models.insert(a.models.begin(), a.models.end());
    owned_traces.insert(a.traces.begin(), a.traces.end());
  }
  // Owned items must be owned consistently: either every agent owns them or
  // none does; a partial split would leave some agent without an active set.
  for (const auto& id : owned_models)
    for (const auto& a : wd.agents)
      if (std::find(a.models.begin(), a.models.end(), id) == a.models.end())
        diags.push_back({Diagnostic::Severity::Error, a.pos,
                         "agent " + a.id + " does not own model " + id + " which another agent owns"});
  for (const auto& id : owned_traces)
    for (const auto& a : wd.agents)
      if (std::find(a.traces.begin(), a.traces.end(), id) == a.traces.end())
        diags.push_back({Diagnostic::Severity::Error, a.pos,
                         "agent " + a.id + " does not own movtrace " + id + " which another agent owns"});
  return diags;
}

}  // namespace edw
