#include <algorithm>

#include "engine_internal.hpp"

namespace edw {

namespace {

// Cells resolve against the pre-step configuration; registers are read from
// the state being built so a later effect sees an earlier `remember`.
class StepResolver final : public CellResolver {
 public:
  StepResolver(const Facts& pre, const WorldState& n, int agent, int n_regs)
      : pre_(pre), n_(n), agent_(agent), n_regs_(n_regs) {}
  StateKey current(int trace) const override { return pre_.current_key(trace); }
  StateKey remembered(int reg) const override {
    const auto& v = n_.registers[static_cast<std::size_t>(agent_ * n_regs_ + reg)];
    if (!v) throw EngineFault("register read before it was set");
    return *v;
  }
  MarkerId marker_via(int model) const override {
    int m = pre_.marker_via(model);
    if (m < 0) throw EngineFault("state has no marker of the same name");
    return static_cast<MarkerId>(m);
  }

 private:
  const Facts& pre_;
  const WorldState& n_;
  int agent_;
  int n_regs_;
};

}  // namespace

Stepper::SlotList Stepper::slots(int agent, int extra_slot) const {
  const auto& v = c_.views[static_cast<std::size_t>(agent)].steps;
  SlotList s(v.begin(), v.end());
  if (extra_slot >= 0) s.push_back(extra_slot);
  return s;
}

Analysis Stepper::analyze(const WorldState& ws, int agent, EvalMode mode, int extra_slot, std::uint64_t* rng) {
  Analysis an;
  an.extra_slot = extra_slot;
  an.bits.reserve(256);
  an.rule_bits.reserve(c_.rules.size());
  Facts f(e_, c_, ws, agent, mode, rng);
  const ActionBits full = mode == EvalMode::Reality ? kRealBits : kAllBits;
  ActionBits forb = 0;
  for (int slot : slots(agent, extra_slot)) {
    const auto& cm = c_.models[static_cast<std::size_t>(c_.slot_model[static_cast<std::size_t>(slot)])];
    const auto& act = ws.active[static_cast<std::size_t>(slot)];
    ActionBits all_viol = full;
    for (StateKey s : act) {
      if (cm.counter) {
        an.bits.push_back(0);
        all_viol = 0;
        for (const auto& [off, ev] : cm.steps) an.bits.push_back(f.eval(ev) & full);
        continue;
      }
      const auto& st = cm.states[static_cast<std::size_t>(s)];
      ActionBits viol = 0;
      for (const auto& t : st.dyn) {
        ActionBits b = f.eval(t.ev);
        viol |= t.must ? static_cast<ActionBits>(~b) : b;
      }
      viol &= full;
      an.bits.push_back(viol);
      all_viol &= viol;
      for (const auto& a : st.arrows) an.bits.push_back(f.eval(a.ev) & full);
    }
    if (!act.empty()) forb |= all_viol;
  }
  for (const auto& r : c_.rules) {
    if (!r.forbid) {
      an.rule_bits.push_back(f.eval(r.guard) & full);
      continue;
    }
    const auto& ce = c_.events[static_cast<std::size_t>(r.guard)];
    ActionBits b = f.eval_prefix(ce) & full & static_cast<ActionBits>(~forb);
    if (b && ce.exec_from < ce.lits.size()) b = f.eval_exec(ce, b);
    forb |= b;
  }
  an.forbidden = forb & full;
  return an;
}

std::optional<WorldState> Stepper::successor(const WorldState& ws, int agent, int bit, const Analysis& an,
                                             EvalMode mode, std::vector<std::string>* fired) {
  WorldState n = ws;
  std::size_t k = 0;
  for (int slot : slots(agent, an.extra_slot)) {
    const auto& cm = c_.models[static_cast<std::size_t>(c_.slot_model[static_cast<std::size_t>(slot)])];
    const auto& act = ws.active[static_cast<std::size_t>(slot)];
    if (act.size() == 1 && !cm.counter) {
      // Common case: one active state; untouched unless an arrow fires or it is violated.
      const auto& arrows = cm.states[static_cast<std::size_t>(act[0])].arrows;
      bool viol = (an.bits[k] >> bit) & 1;
      bool fires = false;
      for (std::size_t i = 0; i < arrows.size(); ++i) fires |= (an.bits[k + 1 + i] >> bit) & 1;
      if (!viol && !fires) {
        k += 1 + arrows.size();
        continue;
      }
    }
    ActiveSet out;
    for (StateKey s : act) {
      bool viol = (an.bits[k++] >> bit) & 1;
      bool moved = false;
      if (cm.counter) {
        for (const auto& st : cm.steps) {
          if (!viol && ((an.bits[k] >> bit) & 1)) {
            out.push_back(s + st.first);
            moved = true;
          }
          ++k;
        }
      } else {
        for (const auto& a : cm.states[static_cast<std::size_t>(s)].arrows) {
          if (!viol && ((an.bits[k] >> bit) & 1)) {
            out.push_back(a.to);
            moved = true;
          }
          ++k;
        }
      }
      if (!viol && !moved) out.push_back(s);
    }
    if (out.empty()) return std::nullopt;
    normalize(out);
    n.active[static_cast<std::size_t>(slot)] = std::move(out);
  }

  std::vector<std::pair<int, MovingTraceArray>> dirty;
  std::size_t j = 0;
  for (const auto& r : c_.rules) {
    if (r.forbid) continue;
    if ((an.rule_bits[j++] >> bit) & 1) {
      const auto& rule = e_.wd_.rules[static_cast<std::size_t>(r.index)];
      apply_rule(rule, ws, n, agent, dirty);
      if (fired) fired->push_back(rule.id);
    }
  }
  for (auto& [slot, arr] : dirty) {
    if (arr.sparse) arr.compact();
    n.traces[static_cast<std::size_t>(slot)] = TraceSlot::make(std::move(arr));
  }

  if (!post_filter(n, agent, an.extra_slot, mode)) return std::nullopt;
  n.agents[static_cast<std::size_t>(agent)].analysis.reset();
  return n;
}

void Stepper::apply_rule(const Rule& r, const WorldState& pre, WorldState& n, int agent,
                         std::vector<std::pair<int, MovingTraceArray>>& dirty) {
  Facts f(e_, c_, pre, agent, EvalMode::Reality, nullptr);
  StepResolver res(f, n, agent, c_.n_regs);
  const auto ag = static_cast<std::size_t>(agent);
  auto array_of = [&](int slot) -> std::size_t {
    for (std::size_t i = 0; i < dirty.size(); ++i)
      if (dirty[i].first == slot) return i;
    dirty.emplace_back(slot, *n.traces[static_cast<std::size_t>(slot)].data);
    return dirty.size() - 1;
  };
  auto checked = [](const MovingTraceArray& a, StateKey k) {
    if (!a.valid_key(k)) throw EngineFault("cell " + std::to_string(k) + " is outside movtrace " + a.id);
    return k;
  };
  for (const auto& e : r.effects) {
    switch (e.op) {
      case EffectOp::Remember:
        n.registers[ag * static_cast<std::size_t>(c_.n_regs) + static_cast<std::size_t>(e.reg_index)] =
            resolve_cell(e.target.cell, e.target.trace_index, res);
        continue;
      case EffectOp::SetState:
        n.active[static_cast<std::size_t>(c_.model_slot[ag][static_cast<std::size_t>(e.model_index)])] =
            make_active({e.state_key});
        continue;
      default: break;
    }
    bool all = e.marker == "*";
    MarkerId m = (all || e.op == EffectOp::ClearCell || e.op == EffectOp::CopyCell) ? 0 : resolve_marker(e, res);
    int ts = c_.trace_slot[ag][static_cast<std::size_t>(e.target.trace_index)];
    StateKey t = resolve_cell(e.target.cell, e.target.trace_index, res);
    if (e.op == EffectOp::MoveMarkers || e.op == EffectOp::CopyCell) {
      int ss = c_.trace_slot[ag][static_cast<std::size_t>(e.source.trace_index)];
      StateKey s = resolve_cell(e.source.cell, e.source.trace_index, res);
      if (ss == ts && s == t) continue;
      std::size_t si = array_of(ss);
      std::size_t ti = array_of(ts);
      Cell& src = dirty[si].second.at_mut(checked(dirty[si].second, s));
      Cell& dst = dirty[ti].second.at_mut(checked(dirty[ti].second, t));
      edit_cells(e.op, &src, dst, m, all);
    } else {
      std::size_t ti = array_of(ts);
      edit_cells(e.op, nullptr, dirty[ti].second.at_mut(checked(dirty[ti].second, t)), m, all);
    }
  }
}

bool Stepper::post_filter(WorldState& n, int agent, int extra_slot, EvalMode mode) {
  Facts f(e_, c_, n, agent, mode, &n.rng);
  const auto sl = slots(agent, extra_slot);
  for (bool changed = true; changed;) {
    changed = false;
    for (int slot : sl) {
      const auto& cm = c_.models[static_cast<std::size_t>(c_.slot_model[static_cast<std::size_t>(slot)])];
      if (!cm.has_static) continue;
      auto& act = n.active[static_cast<std::size_t>(slot)];
      ActiveSet keep;
      for (StateKey s : act) {
        bool ok = true;
        for (const auto& t : cm.states[static_cast<std::size_t>(s)].stat) {
          bool holds = f.eval(t.ev) & 1;
          if (holds != t.must) {
            ok = false;
            break;
          }
        }
        if (ok) keep.push_back(s);
      }
      if (keep.size() == act.size()) continue;
      if (keep.empty()) return false;
      act = std::move(keep);
      changed = true;
    }
  }
  return true;
}

void Stepper::properties_and_vote(const WorldState& pre, WorldState& post, int agent, int action) {
  const auto& view = c_.views[static_cast<std::size_t>(agent)];
  Facts fpre(e_, c_, pre, agent, EvalMode::Reality, &post.rng);
  Facts fpost(e_, c_, post, agent, EvalMode::Reality, &post.rng);
  const int bit = action < 0 ? 0 : action;
  int net[kSymbols] = {0, 0, 0, 0};
  for (int slot : view.props) {
    const auto& cm = c_.models[static_cast<std::size_t>(c_.slot_model[static_cast<std::size_t>(slot)])];
    auto on = [&](const Facts& f) { return cm.activation < 0 || ((f.eval(cm.activation) >> bit) & 1); };
    bool act_post = on(fpost);
    auto& cur = post.active[static_cast<std::size_t>(slot)];
    if (action >= 0) {
      if (on(fpre) && act_post) {
        ActiveSet out;
        for (StateKey s : pre.active[static_cast<std::size_t>(slot)]) {
          bool moved = false;
          for (const auto& a : cm.states[static_cast<std::size_t>(s)].arrows)
            if ((fpre.eval(a.ev) >> bit) & 1) {
              out.push_back(a.to);
              moved = true;
            }
          if (!moved) out.push_back(s);
        }
        normalize(out);
        cur = std::move(out);
      } else {
        cur = cm.initial;
      }
    }
    if (!act_post) continue;
    for (StateKey s : cur)
      for (auto [o, w] : cm.states[static_cast<std::size_t>(s)].votes) net[o] += w;
  }
  post.agents[static_cast<std::size_t>(agent)].last_obs = vote_observation(net);
}

void Stepper::refresh(WorldState& ws, int agent) {
  ws.agents[static_cast<std::size_t>(agent)].analysis =
      std::make_shared<const Analysis>(analyze(ws, agent, EvalMode::Reality, -1, &ws.rng));
}

Key128 Stepper::fingerprint(const WorldState& ws, int agent, int extra_slot) const {
  std::uint64_t a = 0x6a09e667f3bcc908ULL, b = 0xbb67ae8584caa73bULL;
  auto put = [&](std::uint64_t v) {
    a = (a ^ v) * 0xff51afd7ed558ccdULL;
    a ^= a >> 32;
    b = (b + v + 0x3c6ef372fe94f82bULL) * 0xc4ceb9fe1a85ec53ULL;
    b ^= b >> 29;
  };
  const auto& view = c_.views[static_cast<std::size_t>(agent)];
  auto put_slot = [&](int slot) {
    const auto& act = ws.active[static_cast<std::size_t>(slot)];
    put(act.size());
    for (StateKey k : act) put(static_cast<std::uint64_t>(k));
  };
  for (int slot : view.steps) put_slot(slot);
  if (extra_slot >= 0) put_slot(extra_slot);
  for (int ts : view.traces) {
    a = mix64(a, ws.traces[static_cast<std::size_t>(ts)].h1);
    b = mix64(b, ws.traces[static_cast<std::size_t>(ts)].h2);
  }
  for (int r = 0; r < c_.n_regs; ++r) {
    const auto& v = ws.registers[static_cast<std::size_t>(agent * c_.n_regs + r)];
    put(v ? static_cast<std::uint64_t>(*v) : 0xdeadbeefcafef00dULL);
  }
  if (c_.reads_obs) put(static_cast<std::uint64_t>(ws.agents[static_cast<std::size_t>(agent)].last_obs));
  if (c_.reads_rng) put(ws.rng);
  return {mix64(a, b), mix64(b, a)};
}

std::vector<int> Stepper::distinct_bits(const Analysis& an, EvalMode mode) const {
  static_assert(sizeof(ActionBits) == 1);
  const int nb = mode == EvalMode::Reality ? kSymbols : 2 * kSymbols;
  // Two actions behave alike when every mask has equal bits for them, so
  // only the set of distinct mask values matters.
  std::uint64_t present[4] = {};
  for (ActionBits m : an.bits) present[m >> 6] |= std::uint64_t{1} << (m & 63);
  for (ActionBits m : an.rule_bits) present[m >> 6] |= std::uint64_t{1} << (m & 63);
  unsigned diff[2 * kSymbols] = {};
  for (unsigned w = 0; w < 4; ++w)
    for (std::uint64_t p = present[w]; p; p &= p - 1) {
      unsigned m = w * 64 + static_cast<unsigned>(__builtin_ctzll(p));
      for (int x = 0; x < nb; ++x) diff[x] |= ((m >> x) & 1) ? ~m : m;
    }
  std::vector<int> reps;
  for (int x = 0; x < nb; ++x) {
    if ((an.forbidden >> x) & 1) continue;
    bool dup = false;
    for (int y : reps)
      if (!((diff[x] >> y) & 1)) {
        dup = true;
        break;
      }
    if (!dup) reps.push_back(x);
  }
  return reps;
}

std::string Stepper::fault(const WorldState& ws, int agent, const std::string& why) const {
  return why + "\n" + e_.dump(ws, agent);
}

}  // namespace edw
