#include <deque>

#include "engine_internal.hpp"

namespace edw {

namespace {

bool at_exit(const CModel& cm, const ActiveSet& act) {
  for (StateKey k : act)
    if (k >= 0 && static_cast<std::size_t>(k) < cm.exit.size() && cm.exit[static_cast<std::size_t>(k)]) return true;
  return false;
}

int algorithm_slot(const Engine::Compiled& c, const WorldDescription& wd, int agent, int algorithm) {
  if (agent < 0 || agent >= c.n_agents) throw ArgumentError("unknown agent");
  if (algorithm < 0 || static_cast<std::size_t>(algorithm) >= c.models.size())
    throw ArgumentError("unknown algorithm");
  if (c.models[static_cast<std::size_t>(algorithm)].entry < 0)
    throw ArgumentError(wd.models[static_cast<std::size_t>(algorithm)].id + " is not an algorithm");
  return c.model_slot[static_cast<std::size_t>(agent)][static_cast<std::size_t>(algorithm)];
}

}  // namespace

// Breadth-first search over imagined configurations: the agent's models plus
// the algorithm, with every action and every "never" branch open.
bool Engine::can_execute(const WorldState& ws, int agent, int algorithm, int depth) {
  if (depth <= 0) throw ArgumentError("search depth must be positive");
  const int slot = algorithm_slot(*c_, wd_, agent, algorithm);
  const auto& cm = c_->models[static_cast<std::size_t>(algorithm)];
  Stepper st(*this);

  WorldState start = ws;
  start.active[static_cast<std::size_t>(slot)] = make_active({cm.entry});
  for (auto& rt : start.agents) rt.analysis.reset();

  std::uint64_t key = 0;
  if (opts_.memo) {
    Key128 fp = st.fingerprint(start, agent, slot);
    key = mix64(mix64(mix64(mix64(fp.a, fp.b), static_cast<std::uint64_t>(algorithm)),
                      static_cast<std::uint64_t>(depth)),
                static_cast<std::uint64_t>(agent));
    std::lock_guard lk(memo_mu_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  auto remember = [&](bool v) {
    if (opts_.memo) {
      std::lock_guard lk(memo_mu_);
      memo_.emplace(key, v);
    }
    return v;
  };
  if (at_exit(cm, start.active[static_cast<std::size_t>(slot)])) return remember(true);

  std::unordered_set<Key128, Key128Hash> seen;
  seen.insert(st.fingerprint(start, agent, slot));
  std::vector<WorldState> frontier, next;
  frontier.push_back(std::move(start));
  for (int level = 0; level < depth && !frontier.empty(); ++level) {
    for (auto& cfg : frontier) {
      std::uint64_t scratch = cfg.rng;
      Analysis an;
      try {
        an = st.analyze(cfg, agent, EvalMode::Imagination, slot, &scratch);
      } catch (const AmbiguityError&) {
        continue;
      }
      for (int bit : st.distinct_bits(an, EvalMode::Imagination)) {
        std::optional<WorldState> s;
        try {
          s = st.successor(cfg, agent, bit, an, EvalMode::Imagination, nullptr);
        } catch (const AmbiguityError&) {
          continue;
        } catch (const EngineFault&) {
          continue;
        }
        if (!s) continue;
        if (at_exit(cm, s->active[static_cast<std::size_t>(slot)])) return remember(true);
        if (seen.insert(st.fingerprint(*s, agent, slot)).second) next.push_back(std::move(*s));
      }
    }
    frontier.swap(next);
    next.clear();
  }
  return remember(false);
}

// Real-world search for the agent's reply: every distinct resulting world
// reachable by running the algorithm from entry to an exit.
std::vector<ReplyCandidate> Engine::reply_candidates(const WorldState& ws, int agent, int algorithm) {
  const int slot = algorithm_slot(*c_, wd_, agent, algorithm);
  const auto& cm = c_->models[static_cast<std::size_t>(algorithm)];
  const auto& view = c_->views[static_cast<std::size_t>(agent)];
  Stepper st(*this);

  struct Node {
    WorldState ws;
    int parent;
    int action;
  };
  std::vector<Node> nodes;
  WorldState start = ws;
  start.active[static_cast<std::size_t>(slot)] = make_active({cm.entry});
  for (auto& rt : start.agents) rt.analysis.reset();

  std::vector<ReplyCandidate> out;
  std::unordered_set<Key128, Key128Hash> seen, outcomes;
  auto path_to = [&](int idx, int last) {
    std::vector<int> p{last};
    for (int i = idx; i > 0; i = nodes[static_cast<std::size_t>(i)].parent)
      p.push_back(nodes[static_cast<std::size_t>(i)].action);
    return std::vector<int>(p.rbegin(), p.rend());
  };
  auto board_key = [&](const WorldState& s) {
    std::uint64_t a = 0x9e3779b97f4a7c15ULL, b = 0x2545f4914f6cdd1dULL;
    for (int ts : view.traces) {
      a = mix64(a, s.traces[static_cast<std::size_t>(ts)].h1);
      b = mix64(b, s.traces[static_cast<std::size_t>(ts)].h2);
    }
    return Key128{a, b};
  };

  seen.insert(st.fingerprint(start, agent, slot));
  nodes.push_back({std::move(start), -1, -1});
  std::size_t begin = 0;
  for (int level = 0; level < opts_.reply_depth && begin < nodes.size(); ++level) {
    const std::size_t end = nodes.size();
    for (std::size_t i = begin; i < end; ++i) {
      WorldState cfg = nodes[i].ws;
      Analysis an = st.analyze(cfg, agent, EvalMode::Reality, slot, &cfg.rng);
      for (int bit : st.distinct_bits(an, EvalMode::Reality)) {
        std::optional<WorldState> s;
        try {
          s = st.successor(cfg, agent, bit, an, EvalMode::Reality, nullptr);
        } catch (const EngineFault&) {
          continue;
        }
        if (!s) continue;
        if (at_exit(cm, s->active[static_cast<std::size_t>(slot)])) {
          if (outcomes.insert(board_key(*s)).second)
            out.push_back({path_to(static_cast<int>(i), bit), std::move(*s)});
          continue;
        }
        if (seen.insert(st.fingerprint(*s, agent, slot)).second)
          nodes.push_back({std::move(*s), static_cast<int>(i), bit});
      }
    }
    begin = end;
  }
  return out;
}

ReplyOutcome Engine::antagonist_reply(const WorldState& ws, int agent, int algorithm, const Chooser& chooser) {
  ReplyOutcome r;
  auto cands = reply_candidates(ws, agent, algorithm);
  r.candidates = cands.size();
  if (cands.empty()) {
    r.state = ws;
    r.terminal = true;
    return r;
  }
  std::size_t pick = chooser ? chooser(cands) : 0;
  if (pick >= cands.size()) throw EngineFault("reply chooser returned an out-of-range index");
  const auto& cand = cands[pick];

  // Replay the chosen path with full reality steps.
  const int slot = algorithm_slot(*c_, wd_, agent, algorithm);
  const auto& cm = c_->models[static_cast<std::size_t>(algorithm)];
  Stepper st(*this);
  WorldState cur = ws;
  cur.active[static_cast<std::size_t>(slot)] = make_active({cm.entry});
  for (auto& rt : cur.agents) rt.analysis.reset();
  for (int a : cand.actions) {
    Analysis an = st.analyze(cur, agent, EvalMode::Reality, slot, &cur.rng);
    if ((an.forbidden >> a) & 1) throw EngineFault(st.fault(cur, agent, "reply replay hit a forbidden action"));
    auto n = st.successor(cur, agent, a, an, EvalMode::Reality, nullptr);
    if (!n) throw EngineFault(st.fault(cur, agent, "reply replay contradicts a trace"));
    st.properties_and_vote(cur, *n, agent, a);
    cur = std::move(*n);
  }
  if (!at_exit(cm, cur.active[static_cast<std::size_t>(slot)]))
    throw EngineFault(st.fault(cur, agent, "reply replay did not reach an exit"));
  for (int ts : c_->views[static_cast<std::size_t>(agent)].traces)
    if (!(*cur.traces[static_cast<std::size_t>(ts)].data == *cand.result.traces[static_cast<std::size_t>(ts)].data))
      throw EngineFault(st.fault(cur, agent, "reply replay diverged from the searched outcome"));
  cur.active[static_cast<std::size_t>(slot)] = cm.initial;
  for (auto& rt : cur.agents) rt.analysis.reset();
  r.state = std::move(cur);
  r.actions = cand.actions;
  return r;
}

}  // namespace edw
