#include "edw/model.hpp"

#include <algorithm>
#include <charconv>

#include "edw/errors.hpp"

namespace edw {

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Pattern: return "pattern";
    case ModelKind::Algorithm: return "algorithm";
    case ModelKind::Property: return "property";
    case ModelKind::Counter: return "counter";
  }
  return "?";
}

const char* to_string(Polarity p) { return p == Polarity::MustOccur ? "must" : "never"; }

std::optional<StateKey> EDModel::key_of(std::string_view name) const {
  if (counter()) {
    StateKey v = 0;
    auto [p, ec] = std::from_chars(name.data(), name.data() + name.size(), v);
    if (ec != std::errc() || p != name.data() + name.size()) return std::nullopt;
    return v;
  }
  auto it = std::find(states.begin(), states.end(), name);
  if (it == states.end()) return std::nullopt;
  return static_cast<StateKey>(it - states.begin());
}

std::string EDModel::name_of(StateKey k) const {
  if (counter()) return std::to_string(k);
  return states.at(static_cast<std::size_t>(k));
}

ActiveSet EDModel::initial_set() const {
  ActiveSet s;
  for (const auto& n : initial) {
    auto k = key_of(n);
    if (!k) throw DescriptionError("model " + id + ": unknown initial state " + n);
    s.push_back(*k);
  }
  normalize(s);
  return s;
}

void EDModel::index() {
  auto need = [&](const std::string& n) {
    auto k = key_of(n);
    if (!k) throw DescriptionError("model " + id + ": unknown state " + n);
    return *k;
  };
  for (auto& a : arrows) {
    a.from_key = need(a.from);
    a.to_key = need(a.to);
  }
  for (auto& t : traces) t.key = need(t.state);
}

ActiveSet make_active(std::initializer_list<StateKey> keys) {
  ActiveSet s(keys.begin(), keys.end());
  normalize(s);
  return s;
}

void normalize(ActiveSet& s) {
  if (s.size() < 2) return;
  if (s.size() == 2) {
    if (s[0] > s[1]) std::swap(s[0], s[1]);
    else if (s[0] == s[1]) s.pop_back();
    return;
  }
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
}

bool contains(const ActiveSet& s, StateKey k) {
  return std::binary_search(s.begin(), s.end(), k);
}

bool action_dependent(const Event& e, const FactSource* names) {
  for (const auto& l : e.literals) {
    switch (l.kind) {
      case LiteralKind::Action:
      case LiteralKind::Never:
      case LiteralKind::Random: return true;
      case LiteralKind::Ref:
        if (names) {
          if (const Event* r = names->named_event(l); r && action_dependent(*r, names)) return true;
        }
        break;
      default: break;
    }
  }
  return false;
}

ActiveSet step_model(const EDModel& m, const ActiveSet& active, const EvalContext& ctx) {
  ActiveSet out;
  for (StateKey s : active) {
    bool fired = false;
    if (m.counter()) {
      for (const auto& st : m.steps)
        if (eval_event(st.event, ctx)) {
          out.push_back(s + st.offset);
          fired = true;
        }
    } else {
      for (const auto& a : m.arrows)
        if (a.from_key == s && eval_event(a.event, ctx)) {
          out.push_back(a.to_key);
          fired = true;
        }
    }
    if (!fired) out.push_back(s);
  }
  normalize(out);
  return out;
}

bool trace_violated(const PermanentTrace& t, const EvalContext& ctx) {
  bool happens = eval_event(t.event, ctx);
  return t.polarity == Polarity::MustOccur ? !happens : happens;
}

ActiveSet filter_by_traces(const EDModel& m, const ActiveSet& active, const EvalContext& ctx,
                           TraceScope scope) {
  ActiveSet out;
  for (StateKey s : active) {
    bool ok = true;
    for (const auto& t : m.traces) {
      if (t.key != s) continue;
      if (scope != TraceScope::All) {
        bool dyn = action_dependent(t.event, ctx.facts);
        if (dyn != (scope == TraceScope::Dynamic)) continue;
      }
      if (trace_violated(t, ctx)) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(s);
  }
  if (out.empty())
    throw ContradictionError("model " + m.id + ": every candidate state contradicts its traces");
  return out;
}

ActionBits forbidden_actions(std::span<const std::pair<const EDModel*, ActiveSet>> models,
                             const FactSource& facts, EvalMode mode) {
  const ActionBits full = mode == EvalMode::Reality ? kRealBits : kAllBits;
  ActionBits forb = 0;
  for (const auto& [m, active] : models) {
    if (m->kind == ModelKind::Property) continue;
    ActionBits all = full;
    for (StateKey s : active) {
      ActionBits v = 0;
      for (const auto& t : m->traces) {
        if (t.key != s || !action_dependent(t.event, &facts)) continue;
        ActionBits b = event_bits(t.event, facts, mode);
        v |= t.polarity == Polarity::MustOccur ? static_cast<ActionBits>(~b) : b;
      }
      all &= v;
    }
    if (!active.empty()) forb |= all;
  }
  return forb & full;
}

std::string product_state_name(const std::string& a, const std::string& b) {
  return "(" + a + "," + b + ")";
}

namespace {

using Conj = std::vector<EventLiteral>;

// DNF of "none of these events holds". An empty conjunction means true.
std::vector<Conj> none_of(const std::vector<const Event*>& events) {
  std::vector<Conj> acc{Conj{}};
  for (const Event* e : events) {
    std::vector<Conj> next;
    for (const auto& c : acc) {
      for (const auto& l : e->literals) {
        EventLiteral n = l;
        n.negated = !n.negated;
        n = normalized(n);
        if (n.kind == LiteralKind::Never) continue;  // literal was always: cannot fail
        Conj d = c;
        if (n.kind != LiteralKind::Always) d.push_back(n);
        next.push_back(std::move(d));
      }
    }
    acc = std::move(next);
    if (acc.size() > 4096) throw UnsupportedError("product arrow expansion too large");
  }
  return acc;
}

Event conj_event(const Conj& c) {
  if (c.empty()) return Event::always();
  return Event{c};
}

}  // namespace

EDModel product(const EDModel& a, const EDModel& b) {
  if (a.counter() || b.counter())
    throw UnsupportedError("product with a counter model is not supported");
  EDModel p;
  p.id = a.id + "x" + b.id;
  p.kind = a.kind == b.kind ? a.kind : ModelKind::Pattern;
  const auto na = a.states.size(), nb = b.states.size();
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) p.states.push_back(product_state_name(a.states[i], b.states[j]));
  for (const auto& x : a.initial)
    for (const auto& y : b.initial) p.initial.push_back(product_state_name(x, y));
  if (!a.entry.empty() && !b.entry.empty()) p.entry = product_state_name(a.entry, b.entry);
  for (const auto& x : a.exits)
    for (const auto& y : b.exits) p.exits.push_back(product_state_name(x, y));

  auto from = [](const EDModel& m, const std::string& s) {
    std::vector<const Arrow*> r;
    for (const auto& ar : m.arrows)
      if (ar.from == s) r.push_back(&ar);
    return r;
  };
  auto events = [](const std::vector<const Arrow*>& as) {
    std::vector<const Event*> r;
    for (auto* x : as) r.push_back(&x->event);
    return r;
  };
  for (const auto& s : a.states) {
    auto A = from(a, s);
    auto notA = none_of(events(A));
    for (const auto& t : b.states) {
      auto B = from(b, t);
      auto notB = none_of(events(B));
      const auto src = product_state_name(s, t);
      for (auto* x : A)
        for (auto* y : B)
          p.arrows.push_back({src, product_state_name(x->to, y->to), x->event & y->event, {}});
      for (auto* x : A)
        for (const auto& c : notB)
          p.arrows.push_back({src, product_state_name(x->to, t), x->event & conj_event(c), {}});
      for (auto* y : B)
        for (const auto& c : notA)
          p.arrows.push_back({src, product_state_name(s, y->to), conj_event(c) & y->event, {}});
    }
  }
  for (const auto& tr : a.traces)
    for (const auto& t : b.states)
      p.traces.push_back({product_state_name(tr.state, t), tr.polarity, tr.event, {}});
  for (const auto& tr : b.traces)
    for (const auto& s : a.states)
      p.traces.push_back({product_state_name(s, tr.state), tr.polarity, tr.event, {}});
  p.index();
  return p;
}

}  // namespace edw
