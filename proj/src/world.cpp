#include "edw/world.hpp"

#include <algorithm>
#include <climits>
#include <functional>
#include <set>

#include "edw/errors.hpp"

namespace edw {

std::string format(const Diagnostic& d, const std::string& file) {
  return file + ":" + std::to_string(d.pos.line) + ":" + std::to_string(d.pos.col) + ": " +
         (d.error() ? "error" : "warning") + ": " + d.message;
}

namespace {

template <class V, class F>
int find_index(const V& v, std::string_view key, F get) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (get(v[i]) == key) return static_cast<int>(i);
  return -1;
}

}  // namespace

int WorldDescription::model_index(std::string_view id) const {
  return find_index(models, id, [](const EDModel& m) -> const std::string& { return m.id; });
}
int WorldDescription::trace_index(std::string_view id) const {
  return find_index(traces, id, [](const TraceDecl& t) -> const std::string& { return t.id; });
}
int WorldDescription::event_index(std::string_view name) const {
  return find_index(events, name, [](const NamedEvent& e) -> const std::string& { return e.name; });
}
int WorldDescription::marker_index(std::string_view name) const {
  return find_index(markers, name, [](const std::string& s) -> const std::string& { return s; });
}
int WorldDescription::register_index(std::string_view name) const {
  return find_index(registers, name, [](const std::string& s) -> const std::string& { return s; });
}
int WorldDescription::product_index(std::string_view id) const {
  return find_index(products, id, [](const ProductDecl& p) -> const std::string& { return p.id; });
}
int WorldDescription::agent_index(std::string_view id) const {
  return find_index(agents, id, [](const AgentSpec& a) -> const std::string& { return a.id; });
}
int WorldDescription::rule_index(std::string_view id) const {
  return find_index(rules, id, [](const Rule& r) -> const std::string& { return r.id; });
}

const EDModel& WorldDescription::model(std::string_view id) const {
  int i = model_index(id);
  if (i < 0) throw DescriptionError("no model " + std::string(id));
  return models[static_cast<std::size_t>(i)];
}

const TraceDecl& WorldDescription::trace(std::string_view id) const {
  int i = trace_index(id);
  if (i < 0) throw DescriptionError("no trace " + std::string(id));
  return traces[static_cast<std::size_t>(i)];
}

std::size_t WorldDescription::view_size(const TraceDecl& t) const {
  if (int p = product_index(t.over); p >= 0) {
    const auto& pd = products[static_cast<std::size_t>(p)];
    return model(pd.a).states.size() * model(pd.b).states.size();
  }
  return model(t.over).states.size();
}

namespace {

// "(x,y)" -> {"x","y"}
std::optional<std::pair<std::string, std::string>> split_pair(std::string_view s) {
  if (s.size() < 5 || s.front() != '(' || s.back() != ')') return std::nullopt;
  auto c = s.find(',');
  if (c == std::string_view::npos) return std::nullopt;
  return std::pair{std::string(s.substr(1, c - 1)), std::string(s.substr(c + 1, s.size() - c - 2))};
}

}  // namespace

std::optional<StateKey> WorldDescription::view_key(const TraceDecl& t, std::string_view state) const {
  if (int p = product_index(t.over); p >= 0) {
    const auto& pd = products[static_cast<std::size_t>(p)];
    int ia = model_index(pd.a), ib = model_index(pd.b);
    if (ia < 0 || ib < 0) return std::nullopt;
    auto parts = split_pair(state);
    if (!parts) return std::nullopt;
    const auto& ma = models[static_cast<std::size_t>(ia)];
    const auto& mb = models[static_cast<std::size_t>(ib)];
    auto ka = ma.key_of(parts->first), kb = mb.key_of(parts->second);
    if (!ka || !kb || ma.counter() || mb.counter()) return std::nullopt;
    return *ka * static_cast<StateKey>(mb.states.size()) + *kb;
  }
  int m = model_index(t.over);
  if (m < 0) return std::nullopt;
  return models[static_cast<std::size_t>(m)].key_of(state);
}

std::string WorldDescription::view_name(const TraceDecl& t, StateKey k) const {
  if (int p = product_index(t.over); p >= 0) {
    const auto& pd = products[static_cast<std::size_t>(p)];
    const auto& ma = model(pd.a);
    const auto& mb = model(pd.b);
    auto nb = static_cast<StateKey>(mb.states.size());
    return product_state_name(ma.name_of(k / nb), mb.name_of(k % nb));
  }
  return model(t.over).name_of(k);
}

namespace {

std::pair<long long, std::string> state_order(const EDModel& m, const std::string& s) {
  auto k = m.key_of(s);
  return {k ? static_cast<long long>(*k) : LLONG_MAX, s};
}

}  // namespace

void canonicalize(WorldDescription& wd) {
  std::sort(wd.markers.begin(), wd.markers.end());
  std::sort(wd.registers.begin(), wd.registers.end());
  std::sort(wd.events.begin(), wd.events.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });
  std::sort(wd.models.begin(), wd.models.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (auto& m : wd.models) {
    auto ord = [&](const std::string& s) { return state_order(m, s); };
    std::sort(m.initial.begin(), m.initial.end(), [&](auto& a, auto& b) { return ord(a) < ord(b); });
    std::sort(m.exits.begin(), m.exits.end(), [&](auto& a, auto& b) { return ord(a) < ord(b); });
    std::sort(m.arrows.begin(), m.arrows.end(), [&](const Arrow& a, const Arrow& b) {
      auto ka = std::tuple(ord(a.from), ord(a.to)), kb = std::tuple(ord(b.from), ord(b.to));
      if (ka != kb) return ka < kb;
      return to_string(a.event) < to_string(b.event);
    });
    std::sort(m.steps.begin(), m.steps.end(), [](const CounterStep& a, const CounterStep& b) {
      if (a.offset != b.offset) return a.offset < b.offset;
      return to_string(a.event) < to_string(b.event);
    });
    std::sort(m.traces.begin(), m.traces.end(), [&](const PermanentTrace& a, const PermanentTrace& b) {
      auto ka = std::tuple(ord(a.state), a.polarity), kb = std::tuple(ord(b.state), b.polarity);
      if (ka != kb) return ka < kb;
      return to_string(a.event) < to_string(b.event);
    });
  }
  std::sort(wd.products.begin(), wd.products.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(wd.traces.begin(), wd.traces.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (auto& t : wd.traces) {
    std::sort(t.default_markers.begin(), t.default_markers.end());
    for (auto& c : t.cells) std::sort(c.markers.begin(), c.markers.end());
    auto key = [&](const CellInit& c) {
      auto k = wd.view_key(t, c.state);
      return std::pair(k ? static_cast<long long>(*k) : LLONG_MAX, c.state);
    };
    std::sort(t.cells.begin(), t.cells.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
  }
  std::sort(wd.rules.begin(), wd.rules.end(), [](const Rule& a, const Rule& b) {
    return std::tie(a.priority, a.id) < std::tie(b.priority, b.id);
  });
  std::sort(wd.agents.begin(), wd.agents.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (auto& a : wd.agents) {
    std::sort(a.models.begin(), a.models.end());
    std::sort(a.traces.begin(), a.traces.end());
    std::sort(a.init.begin(), a.init.end(),
              [](const auto& x, const auto& y) { return x.model < y.model; });
  }
}

namespace {

class Resolver {
 public:
  Resolver(WorldDescription& wd) : wd_(wd) {}

  std::vector<Diagnostic> run() {
    if (auto m = wd_.alphabets.check(); !m.empty()) err({1, 1}, m);
    dupes();
    for (auto& e : wd_.events) resolve_event(e.event, e.pos, "event " + e.name);
    event_cycles();
    int phases = 0;
    for (auto& m : wd_.models) {
      model(m);
      phases += m.phase;
    }
    if (phases > 1) err(wd_.models.front().pos, "more than one step-phase model");
    for (auto& p : wd_.products) product(p);
    for (auto& t : wd_.traces) trace(t);
    for (auto& r : wd_.rules) rule(r);
    for (auto& a : wd_.agents) agent(a);
    return std::move(diags_);
  }

 private:
  void err(SourcePos p, std::string msg) {
    diags_.push_back({Diagnostic::Severity::Error, p, std::move(msg)});
  }

  template <class V, class F>
  void unique_names(const V& v, F get, const std::string& what, SourcePos fallback) {
    std::set<std::string> seen;
    for (const auto& x : v) {
      auto [name, pos] = get(x);
      if (!seen.insert(name).second) err(pos.line ? pos : fallback, "duplicate " + what + " " + name);
    }
  }

  void dupes() {
    unique_names(wd_.models, [](auto& m) { return std::pair(m.id, m.pos); }, "model", {});
    unique_names(wd_.events, [](auto& e) { return std::pair(e.name, e.pos); }, "event", {});
    unique_names(wd_.traces, [](auto& t) { return std::pair(t.id, t.pos); }, "movtrace", {});
    unique_names(wd_.products, [](auto& p) { return std::pair(p.id, p.pos); }, "product", {});
    unique_names(wd_.rules, [](auto& r) { return std::pair(r.id, r.pos); }, "rule", {});
    unique_names(wd_.agents, [](auto& a) { return std::pair(a.id, a.pos); }, "agent", {});
    unique_names(wd_.markers, [](auto& m) { return std::pair(m, SourcePos{}); }, "marker", {1, 1});
    unique_names(wd_.registers, [](auto& r) { return std::pair(r, SourcePos{}); }, "register", {1, 1});
    std::set<std::string> views;
    for (auto& m : wd_.models) views.insert(m.id);
    for (auto& p : wd_.products)
      if (views.count(p.id)) err(p.pos, "product " + p.id + " clashes with a model id");
  }

  void literal(EventLiteral& l, SourcePos pos, const std::string& where) {
    auto dangling = [&](const std::string& what, const std::string& name) {
      err(pos, where + ": unknown " + what + " " + name);
    };
    l.ia = -1;
    l.ib = -1;
    l.via = -1;
    switch (l.kind) {
      case LiteralKind::Action:
        l.ia = wd_.alphabets.action_index(l.a);
        if (l.ia < 0) dangling("action symbol", l.a);
        break;
      case LiteralKind::Observation:
        l.ia = wd_.alphabets.observation_index(l.a);
        if (l.ia < 0) dangling("observation symbol", l.a);
        break;
      case LiteralKind::InState: {
        l.ia = wd_.model_index(l.a);
        if (l.ia < 0) {
          dangling("model", l.a);
          break;
        }
        auto k = wd_.models[static_cast<std::size_t>(l.ia)].key_of(l.b);
        if (!k) {
          err(pos, where + ": model " + l.a + " has no state " + l.b);
          l.ia = -1;
          break;
        }
        l.ib = *k;
        break;
      }
      case LiteralKind::Random:
        if (!(0.0 <= l.p_lo && l.p_lo <= l.p_hi && l.p_hi <= 1.0))
          err(pos, where + ": random interval must satisfy 0 <= p1 <= p2 <= 1");
        break;
      case LiteralKind::Marker:
        l.ia = wd_.trace_index(l.a);
        if (l.ia < 0) dangling("movtrace", l.a);
        marker_name(l.b, l.ib, l.via, pos, where);
        break;
      case LiteralKind::Executable: {
        l.ia = wd_.model_index(l.a);
        if (l.ia < 0) dangling("model", l.a);
        else if (wd_.models[static_cast<std::size_t>(l.ia)].kind != ModelKind::Algorithm)
          err(pos, where + ": exec needs an algorithm model, " + l.a + " is not one");
        if (l.depth < 0) err(pos, where + ": exec depth must be positive");
        break;
      }
      case LiteralKind::Ref:
        l.ia = wd_.event_index(l.a);
        if (l.ia < 0) dangling("event", l.a);
        break;
      case LiteralKind::Always:
      case LiteralKind::Never:
        if (l.negated) err(pos, where + ": always/never cannot be negated");
        break;
    }
  }

  void marker_name(const std::string& name, std::int64_t& idx, int& via, SourcePos pos,
                   const std::string& where) {
    if (!name.empty() && name[0] == '@') {
      via = wd_.model_index(name.substr(1));
      if (via < 0) err(pos, where + ": unknown model " + name.substr(1));
      return;
    }
    idx = wd_.marker_index(name);
    if (idx < 0) err(pos, where + ": unknown marker " + name);
  }

  void resolve_event(Event& e, SourcePos pos, const std::string& where) {
    if (e.literals.empty()) err(pos, where + ": empty event");
    for (auto& l : e.literals) literal(l, pos, where);
  }

  void event_cycles() {
    std::vector<int> state(wd_.events.size(), 0);
    std::function<bool(int)> visit = [&](int i) {
      if (state[i] == 1) return true;
      if (state[i] == 2) return false;
      state[i] = 1;
      for (const auto& l : wd_.events[i].event.literals)
        if (l.kind == LiteralKind::Ref && l.ia >= 0 && visit(l.ia)) return true;
      state[i] = 2;
      return false;
    };
    for (std::size_t i = 0; i < wd_.events.size(); ++i) {
      std::fill(state.begin(), state.end(), 0);
      if (visit(static_cast<int>(i))) {
        err(wd_.events[i].pos, "event " + wd_.events[i].name + " refers to itself");
        return;
      }
    }
  }

  void model(EDModel& m) {
    const std::string where = "model " + m.id;
    if (m.counter()) {
      if (!m.states.empty()) err(m.pos, where + ": counter models take no state list");
      if (!m.arrows.empty()) err(m.pos, where + ": counter models use step schemas, not arrows");
    } else {
      if (m.states.empty()) err(m.pos, where + ": model has no states");
      std::set<std::string> seen;
      for (auto& s : m.states)
        if (!seen.insert(s).second) err(m.pos, where + ": duplicate state " + s);
      if (!m.steps.empty()) err(m.pos, where + ": only counter models take step schemas");
    }
    auto key = [&](const std::string& s, SourcePos p, const char* what) -> StateKey {
      auto k = m.key_of(s);
      if (!k) {
        err(p.line ? p : m.pos, where + ": " + what + " refers to undeclared state " + s);
        return -1;
      }
      return *k;
    };
    if (m.initial.empty() && m.kind != ModelKind::Algorithm)
      err(m.pos, where + ": no initial state");
    for (auto& s : m.initial) key(s, m.pos, "initial");
    if (m.kind == ModelKind::Algorithm) {
      if (m.entry.empty()) err(m.pos, where + ": algorithm needs an entry state");
      else key(m.entry, m.pos, "entry");
    } else if (!m.entry.empty() || !m.exits.empty()) {
      err(m.pos, where + ": only algorithms have entry and exit states");
    }
    for (auto& s : m.exits) key(s, m.pos, "exit");
    if (m.activation) {
      if (m.kind != ModelKind::Property) err(m.pos, where + ": only properties take a 'when' activation");
      resolve_event(*m.activation, m.pos, where);
    }
    for (auto& a : m.arrows) {
      a.from_key = key(a.from, a.pos, "arrow");
      a.to_key = key(a.to, a.pos, "arrow");
      resolve_event(a.event, a.pos, where);
    }
    for (auto& s : m.steps) resolve_event(s.event, s.pos, where);
    for (auto& t : m.traces) {
      t.key = key(t.state, t.pos, "trace");
      resolve_event(t.event, t.pos, where);
    }
  }

  void product(ProductDecl& p) {
    p.ia = wd_.model_index(p.a);
    p.ib = wd_.model_index(p.b);
    if (p.ia < 0) err(p.pos, "product " + p.id + ": unknown model " + p.a);
    if (p.ib < 0) err(p.pos, "product " + p.id + ": unknown model " + p.b);
    if (p.ia >= 0 && p.ib >= 0 &&
        (wd_.models[static_cast<std::size_t>(p.ia)].counter() ||
         wd_.models[static_cast<std::size_t>(p.ib)].counter()))
      err(p.pos, "product " + p.id + ": products with counter models are not supported");
  }

  void trace(TraceDecl& t) {
    const std::string where = "movtrace " + t.id;
    t.over_model = wd_.model_index(t.over);
    t.over_product = wd_.product_index(t.over);
    if (t.over_model < 0 && t.over_product < 0) {
      err(t.pos, where + ": unknown model or product " + t.over);
      return;
    }
    if (t.over_product >= 0) {
      const auto& p = wd_.products[static_cast<std::size_t>(t.over_product)];
      if (p.ia < 0 || p.ib < 0) return;
    }
    bool counter = t.over_model >= 0 && wd_.models[static_cast<std::size_t>(t.over_model)].counter();
    if (!counter && !t.default_markers.empty())
      err(t.pos, where + ": only traces over counters have a default cell");
    std::set<StateKey> seen;
    for (auto& c : t.cells) {
      auto k = wd_.view_key(t, c.state);
      if (!k) {
        err(c.pos.line ? c.pos : t.pos, where + ": no cell " + c.state);
        continue;
      }
      c.key = *k;
      if (!seen.insert(*k).second) err(c.pos.line ? c.pos : t.pos, where + ": cell " + c.state + " listed twice");
      for (auto& mk : c.markers)
        if (wd_.marker_index(mk) < 0) err(c.pos.line ? c.pos : t.pos, where + ": unknown marker " + mk);
    }
    for (auto& mk : t.default_markers)
      if (wd_.marker_index(mk) < 0) err(t.pos, where + ": unknown marker " + mk);
  }

  void cell_ref(CellRef& r, SourcePos pos, const std::string& where) {
    r.trace_index = wd_.trace_index(r.trace);
    if (r.trace_index < 0) {
      err(pos, where + ": unknown movtrace " + r.trace);
      return;
    }
    const auto& t = wd_.traces[static_cast<std::size_t>(r.trace_index)];
    switch (r.cell.kind) {
      case CellSelector::Kind::Current: break;
      case CellSelector::Kind::Explicit: {
        auto k = wd_.view_key(t, r.cell.name);
        if (!k) err(pos, where + ": movtrace " + r.trace + " has no cell " + r.cell.name);
        else r.cell.key = *k;
        break;
      }
      case CellSelector::Kind::Remembered:
        r.cell.reg = wd_.register_index(r.cell.name);
        if (r.cell.reg < 0) err(pos, where + ": unknown register " + r.cell.name);
        break;
    }
  }

  void rule(Rule& r) {
    const std::string where = "rule " + r.id;
    resolve_event(r.guard, r.pos, where);
    if (r.forbid && !r.effects.empty()) err(r.pos, where + ": forbid rules take no effects");
    for (auto& e : r.effects) {
      SourcePos p = e.pos.line ? e.pos : r.pos;
      e.marker_index = -1;
      e.marker_via = -1;
      switch (e.op) {
        case EffectOp::AddMarker:
        case EffectOp::RemoveMarker: {
          cell_ref(e.target, p, where);
          std::int64_t idx = -1;
          if (e.marker == "*") err(p, where + ": '*' is only allowed in move");
          else marker_name(e.marker, idx, e.marker_via, p, where);
          e.marker_index = static_cast<int>(idx);
          break;
        }
        case EffectOp::MoveMarkers: {
          cell_ref(e.source, p, where);
          cell_ref(e.target, p, where);
          if (e.marker != "*") {
            std::int64_t idx = -1;
            marker_name(e.marker, idx, e.marker_via, p, where);
            e.marker_index = static_cast<int>(idx);
          }
          break;
        }
        case EffectOp::ClearCell: cell_ref(e.target, p, where); break;
        case EffectOp::CopyCell:
          cell_ref(e.source, p, where);
          cell_ref(e.target, p, where);
          break;
        case EffectOp::Remember:
          cell_ref(e.target, p, where);
          e.reg_index = wd_.register_index(e.reg);
          if (e.reg_index < 0) err(p, where + ": unknown register " + e.reg);
          break;
        case EffectOp::SetState: {
          e.model_index = wd_.model_index(e.model);
          if (e.model_index < 0) {
            err(p, where + ": unknown model " + e.model);
            break;
          }
          auto k = wd_.models[static_cast<std::size_t>(e.model_index)].key_of(e.state);
          if (!k) err(p, where + ": model " + e.model + " has no state " + e.state);
          else e.state_key = *k;
          break;
        }
      }
    }
  }

  void agent(AgentSpec& a) {
    const std::string where = "agent " + a.id;
    for (auto& m : a.models)
      if (wd_.model_index(m) < 0) err(a.pos, where + ": unknown model " + m);
    for (auto& t : a.traces)
      if (wd_.trace_index(t) < 0) err(a.pos, where + ": unknown movtrace " + t);
    for (auto& i : a.init) {
      int mi = wd_.model_index(i.model);
      if (mi < 0) err(a.pos, where + ": unknown model " + i.model);
      else if (!wd_.models[static_cast<std::size_t>(mi)].key_of(i.state))
        err(a.pos, where + ": model " + i.model + " has no state " + i.state);
      else if (std::find(a.models.begin(), a.models.end(), i.model) == a.models.end())
        err(a.pos, where + ": init override for model " + i.model + " which the agent does not own");
    }
    if (a.reply) {
      a.reply->algorithm_index = wd_.model_index(a.reply->algorithm);
      if (a.reply->algorithm_index < 0) err(a.pos, where + ": unknown model " + a.reply->algorithm);
      else if (wd_.models[static_cast<std::size_t>(a.reply->algorithm_index)].kind != ModelKind::Algorithm)
        err(a.pos, where + ": reply needs an algorithm model");
      resolve_event(a.reply->trigger, a.pos, where);
    }
  }

  WorldDescription& wd_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

std::vector<Diagnostic> resolve(WorldDescription& wd) {
  canonicalize(wd);
  return Resolver(wd).run();
}

void resolve_or_throw(WorldDescription& wd) {
  for (const auto& d : resolve(wd))
    if (d.error()) throw DescriptionError(d.message);
}

MovingTraceArray build_trace(const WorldDescription& wd, const TraceDecl& t) {
  MovingTraceArray a;
  a.id = t.id;
  a.over = t.over;
  a.sparse = t.over_model >= 0 && wd.models[static_cast<std::size_t>(t.over_model)].counter();
  auto add_all = [&](Cell& c, const std::vector<std::string>& names) {
    for (const auto& n : names) cell_add(c, static_cast<MarkerId>(wd.marker_index(n)));
  };
  if (a.sparse) add_all(a.default_cell, t.default_markers);
  else a.cells.assign(wd.view_size(t), Cell{});
  for (const auto& c : t.cells) add_all(a.at_mut(c.key), c.markers);
  a.compact();
  return a;
}

}  // namespace edw
