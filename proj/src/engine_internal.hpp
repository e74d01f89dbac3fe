#pragma once

#include <unordered_set>

#include <boost/container/small_vector.hpp>

#include "edw/engine.hpp"
#include "edw/errors.hpp"

namespace edw {

struct CEvent {
  std::vector<EventLiteral> lits;  // refs inlined, exec literals last
  std::size_t exec_from = 0;
};

struct CArrow {
  StateKey to;
  int ev;
};

struct CTrace {
  int ev;
  bool must;
};

struct CState {
  std::vector<CArrow> arrows;
  std::vector<CTrace> dyn;   // action-dependent: checked before the step
  std::vector<CTrace> stat;  // checked after the step
  std::vector<std::pair<int, int>> votes;  // property: (observation, +1 emit / -1 forbid)
};

struct CModel {
  const EDModel* src = nullptr;
  bool counter = false;
  bool property = false;
  bool imagined = false;
  bool has_static = false;
  std::vector<CState> states;
  std::vector<std::pair<std::int64_t, int>> steps;
  int activation = -1;
  ActiveSet initial;
  StateKey entry = -1;
  std::vector<char> exit;
};

struct CRule {
  int index;  // into wd.rules
  bool forbid;
  int guard;
};

struct CTraceView {
  int model_a = -1;
  int model_b = -1;  // product views only
  StateKey nb = 0;
};

struct Engine::Compiled {
  int n_agents = 1;
  int n_regs = 0;
  std::vector<std::vector<int>> model_slot;  // [agent][model]
  std::vector<std::vector<int>> trace_slot;  // [agent][trace]
  std::vector<int> slot_model;
  std::vector<int> slot_trace;
  struct View {
    std::vector<int> steps;  // non-property, non-imagined model slots
    std::vector<int> props;
    std::vector<int> traces;
  };
  std::vector<View> views;
  std::vector<CModel> models;
  std::vector<CEvent> events;
  std::vector<CRule> rules;  // priority order
  std::vector<CTraceView> tviews;
  std::vector<std::vector<int>> marker_of_state;  // [model][state]
  std::vector<int> reply_trigger;  // per agent, event id or -1
  std::vector<int> reply_alg;
  std::vector<std::vector<std::pair<int, StateKey>>> init_overrides;  // per agent: (model, key)
  // Whether any compiled event reads the previous observation or draws from
  // the rng; when not, neither belongs in a configuration fingerprint.
  bool reads_obs = false;
  bool reads_rng = false;
};

struct Analysis {
  ActionBits forbidden = 0;
  std::vector<ActionBits> bits;       // per step slot: per active state viol, arrows, steps
  std::vector<ActionBits> rule_bits;  // effect rules, in rule order
  int extra_slot = -1;
};

struct Key128 {
  std::uint64_t a, b;
  bool operator==(const Key128&) const = default;
};

struct Key128Hash {
  std::size_t operator()(const Key128& k) const { return static_cast<std::size_t>(k.a ^ (k.b * 0x9e3779b97f4a7c15ULL)); }
};

inline std::uint64_t mix64(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return h;
}
double next_uniform(std::uint64_t& state);

// Evaluation of facts against one agent's view of a world state.
class Facts final : public FactSource {
 public:
  Facts(Engine& e, const Engine::Compiled& c, const WorldState& ws, int agent, EvalMode mode,
        std::uint64_t* rng)
      : e_(e), c_(c), ws_(ws), agent_(agent), mode_(mode), rng_(rng) {}

  int last_observation() const override;
  bool in_state(const EventLiteral& l) const override;
  bool has_marker(const EventLiteral& l) const override;
  bool executable(const EventLiteral& l) const override;
  const Event* named_event(const EventLiteral& l) const override;
  double draw() const override;

  ActionBits eval(int ev) const;
  ActionBits eval_prefix(const CEvent& ev) const;
  ActionBits eval_exec(const CEvent& ev, ActionBits m) const;
  StateKey current_key(int trace) const;
  int marker_via(int model) const;
  EvalMode mode() const { return mode_; }

 private:
  Engine& e_;
  const Engine::Compiled& c_;
  const WorldState& ws_;
  int agent_;
  EvalMode mode_;
  std::uint64_t* rng_;
};

// The step machinery shared by reality steps and the searches.
class Stepper {
 public:
  Stepper(Engine& e) : e_(e), c_(*e.c_) {}

  Analysis analyze(const WorldState& ws, int agent, EvalMode mode, int extra_slot, std::uint64_t* rng);
  // Micro-step on `bit`; nullopt when the successor contradicts a trace
  // (only reachable in searches).
  std::optional<WorldState> successor(const WorldState& ws, int agent, int bit, const Analysis& an,
                                      EvalMode mode, std::vector<std::string>* fired);
  void properties_and_vote(const WorldState& pre, WorldState& post, int agent, int action);
  void refresh(WorldState& ws, int agent);
  Key128 fingerprint(const WorldState& ws, int agent, int extra_slot) const;
  // Bits whose successors may differ, one representative per class.
  std::vector<int> distinct_bits(const Analysis& an, EvalMode mode) const;

  bool post_filter(WorldState& n, int agent, int extra_slot, EvalMode mode);
  std::string fault(const WorldState& ws, int agent, const std::string& why) const;

 private:
  void apply_rule(const Rule& r, const WorldState& pre, WorldState& n, int agent,
                  std::vector<std::pair<int, MovingTraceArray>>& dirty);
  using SlotList = boost::container::small_vector<int, 48>;
  SlotList slots(int agent, int extra_slot) const;

  Engine& e_;
  const Engine::Compiled& c_;
};

}  // namespace edw
