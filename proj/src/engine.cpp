#include <algorithm>
#include <random>
#include <sstream>

#include "engine_internal.hpp"

namespace edw {

double next_uniform(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

TraceSlot TraceSlot::make(MovingTraceArray a) {
  TraceSlot s;
  s.h1 = a.hash(0x51ed270b0a1c3f2dULL);
  s.h2 = a.hash(0x7a3c9e4b61d2f805ULL);
  s.data = std::make_shared<const MovingTraceArray>(std::move(a));
  return s;
}

bool WorldState::same_world(const WorldState& o) const {
  if (step_index != o.step_index || active != o.active || registers != o.registers || rng != o.rng)
    return false;
  if (traces.size() != o.traces.size() || agents.size() != o.agents.size()) return false;
  for (std::size_t i = 0; i < traces.size(); ++i)
    if (traces[i].data != o.traces[i].data && !(*traces[i].data == *o.traces[i].data)) return false;
  for (std::size_t i = 0; i < agents.size(); ++i)
    if (agents[i].last_obs != o.agents[i].last_obs) return false;
  return true;
}

// ---- facts ----

int Facts::last_observation() const { return ws_.agents[static_cast<std::size_t>(agent_)].last_obs; }

bool Facts::in_state(const EventLiteral& l) const {
  int slot = c_.model_slot[static_cast<std::size_t>(agent_)][static_cast<std::size_t>(l.ia)];
  return contains(ws_.active[static_cast<std::size_t>(slot)], l.ib);
}

StateKey Facts::current_key(int trace) const {
  const auto& tv = c_.tviews[static_cast<std::size_t>(trace)];
  const auto& slots = c_.model_slot[static_cast<std::size_t>(agent_)];
  const auto& a = ws_.active[static_cast<std::size_t>(slots[static_cast<std::size_t>(tv.model_a)])];
  if (a.size() != 1)
    throw AmbiguityError("current cell of " + e_.world().traces[static_cast<std::size_t>(trace)].id +
                         " is ambiguous");
  if (tv.model_b < 0) return a.front();
  const auto& b = ws_.active[static_cast<std::size_t>(slots[static_cast<std::size_t>(tv.model_b)])];
  if (b.size() != 1)
    throw AmbiguityError("current cell of " + e_.world().traces[static_cast<std::size_t>(trace)].id +
                         " is ambiguous");
  return a.front() * tv.nb + b.front();
}

int Facts::marker_via(int model) const {
  int slot = c_.model_slot[static_cast<std::size_t>(agent_)][static_cast<std::size_t>(model)];
  const auto& a = ws_.active[static_cast<std::size_t>(slot)];
  if (a.size() != 1) throw AmbiguityError("marker named by a non-deterministic model");
  const auto& tbl = c_.marker_of_state[static_cast<std::size_t>(model)];
  auto k = static_cast<std::size_t>(a.front());
  return k < tbl.size() ? tbl[k] : -1;
}

bool Facts::has_marker(const EventLiteral& l) const {
  int ts = c_.trace_slot[static_cast<std::size_t>(agent_)][static_cast<std::size_t>(l.ia)];
  StateKey key = current_key(l.ia);
  int m = l.via >= 0 ? marker_via(l.via) : static_cast<int>(l.ib);
  if (m < 0) return false;
  return cell_has(ws_.traces[static_cast<std::size_t>(ts)].data->at(key), static_cast<MarkerId>(m));
}

bool Facts::executable(const EventLiteral& l) const {
  return e_.can_execute(ws_, agent_, l.ia, l.depth > 0 ? l.depth : e_.options().exec_depth);
}

const Event* Facts::named_event(const EventLiteral& l) const {
  return &e_.world().events[static_cast<std::size_t>(l.ia)].event;
}

double Facts::draw() const {
  if (!rng_) throw EngineFault("random event evaluated without a randomness source");
  return next_uniform(*rng_);
}

ActionBits Facts::eval(int ev) const {
  const auto& e = c_.events[static_cast<std::size_t>(ev)];
  ActionBits r = kAllBits;
  for (const auto& l : e.lits) {
    r &= literal_bits(l, *this, mode_);
    if (!r) break;
  }
  return r;
}

ActionBits Facts::eval_prefix(const CEvent& e) const {
  ActionBits r = kAllBits;
  for (std::size_t i = 0; i < e.exec_from; ++i) {
    r &= literal_bits(e.lits[i], *this, mode_);
    if (!r) break;
  }
  return r;
}

ActionBits Facts::eval_exec(const CEvent& e, ActionBits m) const {
  for (std::size_t i = e.exec_from; i < e.lits.size() && m; ++i) m &= literal_bits(e.lits[i], *this, mode_);
  return m;
}

// ---- compilation ----

namespace {

class Compiler {
 public:
  Compiler(const WorldDescription& wd, Engine::Compiled& c) : wd_(wd), c_(c) {}

  int event(const Event& e) {
    CEvent ce;
    flatten(e, ce.lits, 0);
    auto mid = std::stable_partition(ce.lits.begin(), ce.lits.end(),
                                     [](const EventLiteral& l) { return l.kind != LiteralKind::Executable; });
    ce.exec_from = static_cast<std::size_t>(mid - ce.lits.begin());
    c_.events.push_back(std::move(ce));
    return static_cast<int>(c_.events.size() - 1);
  }

  bool dynamic(const Event& e) const {
    for (const auto& l : e.literals) {
      if (l.kind == LiteralKind::Action || l.kind == LiteralKind::Never || l.kind == LiteralKind::Random)
        return true;
      if (l.kind == LiteralKind::Ref && dynamic(wd_.events[static_cast<std::size_t>(l.ia)].event)) return true;
    }
    return false;
  }

 private:
  void flatten(const Event& e, std::vector<EventLiteral>& out, int depth) {
    if (depth > 64) throw DescriptionError("event references nest too deeply");
    for (const auto& l : e.literals) {
      if (l.kind == LiteralKind::Ref && !l.negated) flatten(wd_.events[static_cast<std::size_t>(l.ia)].event, out, depth + 1);
      else if (l.kind == LiteralKind::Always) continue;
      else out.push_back(l);
    }
  }

  const WorldDescription& wd_;
  Engine::Compiled& c_;
};

}  // namespace

Engine::Engine(WorldDescription wd, EngineOptions opts) : wd_(std::move(wd)), opts_(opts) {
  resolve_or_throw(wd_);
  c_ = std::make_unique<Compiled>();
  auto& c = *c_;
  Compiler comp(wd_, c);

  if (wd_.agents.empty()) agent_ids_.push_back("agent");
  for (const auto& a : wd_.agents) agent_ids_.push_back(a.id);
  c.n_agents = static_cast<int>(agent_ids_.size());
  c.n_regs = static_cast<int>(wd_.registers.size());
  const auto na = static_cast<std::size_t>(c.n_agents);

  auto owned_model = [&](const std::string& id) {
    for (const auto& a : wd_.agents)
      if (std::find(a.models.begin(), a.models.end(), id) != a.models.end()) return true;
    return false;
  };
  auto owned_trace = [&](const std::string& id) {
    for (const auto& a : wd_.agents)
      if (std::find(a.traces.begin(), a.traces.end(), id) != a.traces.end()) return true;
    return false;
  };
  c.model_slot.assign(na, std::vector<int>(wd_.models.size(), -1));
  for (std::size_t m = 0; m < wd_.models.size(); ++m) {
    if (owned_model(wd_.models[m].id)) {
      for (std::size_t g = 0; g < na; ++g) {
        c.model_slot[g][m] = static_cast<int>(c.slot_model.size());
        c.slot_model.push_back(static_cast<int>(m));
      }
    } else {
      for (std::size_t g = 0; g < na; ++g) c.model_slot[g][m] = static_cast<int>(c.slot_model.size());
      c.slot_model.push_back(static_cast<int>(m));
    }
  }
  c.trace_slot.assign(na, std::vector<int>(wd_.traces.size(), -1));
  for (std::size_t t = 0; t < wd_.traces.size(); ++t) {
    if (owned_trace(wd_.traces[t].id)) {
      for (std::size_t g = 0; g < na; ++g) {
        c.trace_slot[g][t] = static_cast<int>(c.slot_trace.size());
        c.slot_trace.push_back(static_cast<int>(t));
      }
    } else {
      for (std::size_t g = 0; g < na; ++g) c.trace_slot[g][t] = static_cast<int>(c.slot_trace.size());
      c.slot_trace.push_back(static_cast<int>(t));
    }
  }

  for (const auto& m : wd_.models) {
    CModel cm;
    cm.src = &m;
    cm.counter = m.counter();
    cm.property = m.kind == ModelKind::Property;
    cm.imagined = m.imagined;
    cm.states.resize(m.states.size());
    for (const auto& a : m.arrows)
      cm.states[static_cast<std::size_t>(a.from_key)].arrows.push_back({a.to_key, comp.event(a.event)});
    for (const auto& st : m.steps) cm.steps.emplace_back(st.offset, comp.event(st.event));
    for (const auto& t : m.traces) {
      auto& cs = cm.states[static_cast<std::size_t>(t.key)];
      if (cm.property) {
        const auto& ls = t.event.literals;
        if (ls.size() != 1 || ls[0].kind != LiteralKind::Observation || ls[0].negated || ls[0].ia >= kSymbols)
          throw DescriptionError("property " + m.id + ": traces must be single obs= votes");
        cs.votes.emplace_back(ls[0].ia, t.polarity == Polarity::MustOccur ? 1 : -1);
        continue;
      }
      CTrace ct{comp.event(t.event), t.polarity == Polarity::MustOccur};
      if (comp.dynamic(t.event)) cs.dyn.push_back(ct);
      else {
        cs.stat.push_back(ct);
        cm.has_static = true;
      }
    }
    if (m.activation) cm.activation = comp.event(*m.activation);
    if (!m.entry.empty()) cm.entry = *m.key_of(m.entry);
    cm.exit.assign(m.states.size(), 0);
    for (const auto& x : m.exits) cm.exit[static_cast<std::size_t>(*m.key_of(x))] = 1;
    cm.initial = m.initial_set();
    if (cm.initial.empty() && cm.entry >= 0) cm.initial = make_active({cm.entry});
    c.models.push_back(std::move(cm));

    std::vector<int> mk;
    for (const auto& s : m.states) mk.push_back(wd_.marker_index(s));
    c.marker_of_state.push_back(std::move(mk));
  }

  for (const auto& t : wd_.traces) {
    CTraceView tv;
    if (t.over_product >= 0) {
      const auto& p = wd_.products[static_cast<std::size_t>(t.over_product)];
      tv.model_a = p.ia;
      tv.model_b = p.ib;
      tv.nb = static_cast<StateKey>(wd_.models[static_cast<std::size_t>(p.ib)].states.size());
    } else {
      tv.model_a = t.over_model;
    }
    c.tviews.push_back(tv);
  }

  for (std::size_t i = 0; i < wd_.rules.size(); ++i)
    c.rules.push_back({static_cast<int>(i), wd_.rules[i].forbid, comp.event(wd_.rules[i].guard)});

  c.reply_trigger.assign(na, -1);
  c.reply_alg.assign(na, -1);
  c.init_overrides.resize(na);
  for (std::size_t g = 0; g < wd_.agents.size(); ++g) {
    const auto& a = wd_.agents[g];
    if (a.reply) {
      c.reply_trigger[g] = comp.event(a.reply->trigger);
      c.reply_alg[g] = a.reply->algorithm_index;
    }
    for (const auto& o : a.init) {
      int mi = wd_.model_index(o.model);
      c.init_overrides[g].emplace_back(mi, *wd_.models[static_cast<std::size_t>(mi)].key_of(o.state));
    }
  }

  c.views.resize(na);
  for (std::size_t g = 0; g < na; ++g) {
    auto& v = c.views[g];
    for (std::size_t m = 0; m < wd_.models.size(); ++m) {
      const auto& cm = c.models[m];
      if (cm.property) v.props.push_back(c.model_slot[g][m]);
      else if (!cm.imagined) v.steps.push_back(c.model_slot[g][m]);
    }
    for (std::size_t t = 0; t < wd_.traces.size(); ++t) v.traces.push_back(c.trace_slot[g][t]);
  }
  for (const CEvent& ev : c.events)
    for (const EventLiteral& l : ev.lits) {
      c.reads_obs = c.reads_obs || l.kind == LiteralKind::Observation;
      c.reads_rng = c.reads_rng || l.kind == LiteralKind::Random;
    }
  choosers_.assign(na, first_chooser());
}

Engine::~Engine() = default;

int Engine::agent_index(std::string_view id) const {
  for (std::size_t i = 0; i < agent_ids_.size(); ++i)
    if (agent_ids_[i] == id) return static_cast<int>(i);
  return -1;
}

std::vector<int> Engine::acting_agents() const {
  std::vector<int> r;
  for (int g = 0; g < agent_count(); ++g)
    if (c_->reply_alg[static_cast<std::size_t>(g)] < 0) r.push_back(g);
  return r;
}

void Engine::set_chooser(int agent, Chooser ch) { choosers_.at(static_cast<std::size_t>(agent)) = std::move(ch); }

WorldState Engine::init(std::uint64_t seed) const {
  auto& c = *c_;
  WorldState ws;
  ws.rng = mix64(0x2545f4914f6cdd1dULL, seed);
  ws.active.resize(c.slot_model.size());
  for (std::size_t s = 0; s < c.slot_model.size(); ++s)
    ws.active[s] = c.models[static_cast<std::size_t>(c.slot_model[s])].initial;
  for (std::size_t g = 0; g < c.init_overrides.size(); ++g)
    for (auto [m, k] : c.init_overrides[g])
      ws.active[static_cast<std::size_t>(c.model_slot[g][static_cast<std::size_t>(m)])] = make_active({k});
  std::vector<TraceSlot> proto;
  for (const auto& t : wd_.traces) proto.push_back(TraceSlot::make(build_trace(wd_, t)));
  for (int t : c.slot_trace) ws.traces.push_back(proto[static_cast<std::size_t>(t)]);
  ws.registers.assign(static_cast<std::size_t>(c.n_agents * c.n_regs), std::nullopt);
  ws.agents.resize(static_cast<std::size_t>(c.n_agents));

  Engine& self = const_cast<Engine&>(*this);
  Stepper st(self);
  for (int g = 0; g < c.n_agents; ++g) {
    if (!st.post_filter(ws, g, -1, EvalMode::Reality))
      throw EngineFault(st.fault(ws, g, "initial state contradicts a trace"));
    WorldState pre = ws;
    st.properties_and_vote(pre, ws, g, -1);
  }
  for (int g = 0; g < c.n_agents; ++g) st.refresh(ws, g);
  return ws;
}

ActionBits Engine::forbidden(WorldState& ws, int agent) {
  auto& rt = ws.agents.at(static_cast<std::size_t>(agent));
  if (!rt.analysis) Stepper(*this).refresh(ws, agent);
  return rt.analysis->forbidden;
}

StepResult Engine::step(WorldState& ws, int agent, int action) {
  if (action < 0 || action >= kSymbols) throw ArgumentError("action outside the alphabet");
  if (agent < 0 || agent >= agent_count()) throw ArgumentError("unknown agent");
  Stepper st(*this);
  StepResult res;
  ActionBits forb = forbidden(ws, agent);
  if ((forb >> action) & 1) {
    res.undef = true;
    res.observation = kUndef;
    res.mask = mask_digit(forb);
    return res;
  }
  auto an = ws.agents[static_cast<std::size_t>(agent)].analysis;
  std::optional<WorldState> n;
  try {
    n = st.successor(ws, agent, action, *an, EvalMode::Reality, &res.fired_rules);
  } catch (const EngineFault&) {
    throw;
  } catch (const Error& e) {
    throw EngineFault(st.fault(ws, agent, e.what()));
  }
  if (!n) throw EngineFault(st.fault(ws, agent, "trace contradiction after action " + wd_.alphabets.actions[static_cast<std::size_t>(action)]));
  st.properties_and_vote(ws, *n, agent, action);
  n->step_index = ws.step_index + 1;
  for (auto& rt : n->agents) rt.analysis.reset();
  res.observation = n->agents[static_cast<std::size_t>(agent)].last_obs;

  for (int g = 0; g < agent_count(); ++g) {
    int trig = c_->reply_trigger[static_cast<std::size_t>(g)];
    if (g == agent || trig < 0) continue;
    std::uint64_t scratch = ws.rng;
    Facts f(*this, *c_, ws, agent, EvalMode::Reality, &scratch);
    if (!((f.eval(trig) >> action) & 1)) continue;
    ReplyOutcome out = antagonist_reply(*n, g, c_->reply_alg[static_cast<std::size_t>(g)],
                                        choosers_[static_cast<std::size_t>(g)]);
    res.reply_ran = true;
    res.reply_candidates = out.candidates;
    if (out.terminal) res.terminal = true;
    else *n = std::move(out.state);
  }
  ws = std::move(*n);
  st.refresh(ws, agent);
  res.mask = mask_digit(ws.agents[static_cast<std::size_t>(agent)].analysis->forbidden);
  return res;
}

const ActiveSet& Engine::active(const WorldState& ws, int agent, int model) const {
  return ws.active.at(static_cast<std::size_t>(c_->model_slot.at(static_cast<std::size_t>(agent)).at(static_cast<std::size_t>(model))));
}

const ActiveSet& Engine::active(const WorldState& ws, int agent, std::string_view model) const {
  int m = wd_.model_index(model);
  if (m < 0) throw ArgumentError("no model " + std::string(model));
  return active(ws, agent, m);
}

const MovingTraceArray& Engine::trace(const WorldState& ws, int agent, int t) const {
  return *ws.traces.at(static_cast<std::size_t>(c_->trace_slot.at(static_cast<std::size_t>(agent)).at(static_cast<std::size_t>(t)))).data;
}

const MovingTraceArray& Engine::trace(const WorldState& ws, int agent, std::string_view t) const {
  int i = wd_.trace_index(t);
  if (i < 0) throw ArgumentError("no movtrace " + std::string(t));
  return trace(ws, agent, i);
}

void Engine::set_active(WorldState& ws, int agent, std::string_view model, ActiveSet states) const {
  int m = wd_.model_index(model);
  if (m < 0) throw ArgumentError("no model " + std::string(model));
  const EDModel& md = wd_.models[static_cast<std::size_t>(m)];
  std::size_t n = md.states.size();
  std::sort(states.begin(), states.end());
  if (states.empty() || std::unique(states.begin(), states.end()) != states.end())
    throw ArgumentError("active set of " + std::string(model) + " must be non-empty and duplicate-free");
  for (StateKey k : states)
    if (md.kind != ModelKind::Counter && (k < 0 || static_cast<std::size_t>(k) >= n)) throw ArgumentError("state key outside model " + std::string(model));
  ws.active.at(static_cast<std::size_t>(c_->model_slot.at(static_cast<std::size_t>(agent)).at(static_cast<std::size_t>(m)))) =
      std::move(states);
  for (auto& rt : ws.agents) rt.analysis.reset();
}

void Engine::set_trace(WorldState& ws, int agent, std::string_view trace, MovingTraceArray data) const {
  int t = wd_.trace_index(trace);
  if (t < 0) throw ArgumentError("no movtrace " + std::string(trace));
  auto& slot = ws.traces.at(static_cast<std::size_t>(c_->trace_slot.at(static_cast<std::size_t>(agent)).at(static_cast<std::size_t>(t))));
  if (data.cells.size() != slot.data->cells.size() || data.sparse != slot.data->sparse)
    throw ArgumentError("movtrace " + std::string(trace) + " has a different shape");
  slot = TraceSlot::make(std::move(data));
  for (auto& rt : ws.agents) rt.analysis.reset();
}

StateKey Engine::current_key(const WorldState& ws, int agent, int t) const {
  Facts f(const_cast<Engine&>(*this), *c_, ws, agent, EvalMode::Reality, nullptr);
  return f.current_key(t);
}

std::optional<StateKey> Engine::register_value(const WorldState& ws, int agent, std::string_view reg) const {
  int r = wd_.register_index(reg);
  if (r < 0) throw ArgumentError("no register " + std::string(reg));
  return ws.registers.at(static_cast<std::size_t>(agent * c_->n_regs + r));
}

std::string Engine::dump(const WorldState& ws, int agent) const {
  std::ostringstream os;
  os << "agent " << agent_id(agent) << " step " << ws.step_index << " last observation "
     << wd_.alphabets.observation_name(ws.agents[static_cast<std::size_t>(agent)].last_obs) << '\n';
  for (std::size_t m = 0; m < wd_.models.size(); ++m) {
    const auto& md = wd_.models[m];
    os << "  " << md.id << " {";
    const auto& a = active(ws, agent, static_cast<int>(m));
    for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << md.name_of(a[i]);
    os << "}\n";
  }
  for (std::size_t t = 0; t < wd_.traces.size(); ++t) {
    const auto& td = wd_.traces[t];
    const auto& tr = trace(ws, agent, static_cast<int>(t));
    os << "  movtrace " << td.id << ':';
    auto cell = [&](StateKey k, const Cell& c) {
      if (c.empty()) return;
      os << ' ' << wd_.view_name(td, k) << '[';
      for (std::size_t i = 0; i < c.size(); ++i) os << (i ? " " : "") << wd_.markers[c[i]];
      os << ']';
    };
    if (tr.sparse)
      for (const auto& [k, c] : tr.set_cells) cell(k, c);
    else
      for (std::size_t k = 0; k < tr.cells.size(); ++k) cell(static_cast<StateKey>(k), tr.cells[k]);
    os << '\n';
  }
  for (std::size_t r = 0; r < wd_.registers.size(); ++r) {
    auto v = ws.registers[static_cast<std::size_t>(agent * c_->n_regs) + r];
    os << "  register " << wd_.registers[r] << " = " << (v ? std::to_string(*v) : "unset") << '\n';
  }
  return os.str();
}

std::size_t Engine::memo_size() const {
  std::lock_guard lk(memo_mu_);
  return memo_.size();
}

void Engine::clear_memo() {
  std::lock_guard lk(memo_mu_);
  memo_.clear();
}

int vote_observation(std::span<const int> net) {
  int best = 0;
  for (std::size_t i = 1; i < net.size(); ++i)
    if (net[i] > net[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return net.empty() || net[static_cast<std::size_t>(best)] <= 0 ? 0 : best;
}

// ---- free functions ----

WorldState init_world(const Engine& e, std::uint64_t seed) { return e.init(seed); }

std::pair<WorldState, StepResult> step(Engine& e, WorldState ws, int agent, int action) {
  StepResult r = e.step(ws, agent, action);
  return {std::move(ws), std::move(r)};
}

bool can_execute(Engine& e, const WorldState& ws, int agent, const std::string& algorithm, int depth) {
  int m = e.world().model_index(algorithm);
  if (m < 0) throw ArgumentError("no model " + algorithm);
  return e.can_execute(ws, agent, m, depth);
}

Chooser first_chooser() {
  return [](const std::vector<ReplyCandidate>&) -> std::size_t { return 0; };
}

Chooser seeded_chooser(std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [rng](const std::vector<ReplyCandidate>& c) -> std::size_t {
    return static_cast<std::size_t>((*rng)() % c.size());
  };
}

}  // namespace edw
