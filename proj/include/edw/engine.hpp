#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "edw/world.hpp"

namespace edw {

struct TraceSlot {
  std::shared_ptr<const MovingTraceArray> data;
  std::uint64_t h1 = 0;
  std::uint64_t h2 = 0;

  static TraceSlot make(MovingTraceArray a);
};

struct Analysis;

struct AgentRuntime {
  int last_obs = 0;
  // Event bits of the current configuration, computed once per step and
  // shared by the mask and the next transition.
  std::shared_ptr<const Analysis> analysis;
};

// Active sets, traces and registers live in flat slot vectors; owned items
// get one slot per agent, shared ones a single slot.
struct WorldState {
  std::uint64_t step_index = 0;
  std::vector<ActiveSet> active;
  std::vector<TraceSlot> traces;
  std::vector<std::optional<StateKey>> registers;  // agent-major
  std::vector<AgentRuntime> agents;
  std::uint64_t rng = 0;

  // Compares everything except cached analyses.
  bool same_world(const WorldState& o) const;
};

struct StepResult {
  int observation = 0;  // kUndef for a forbidden action
  int mask = 0;         // mask digit for the next step
  std::vector<std::string> fired_rules;
  bool undef = false;
  bool reply_ran = false;
  bool terminal = false;  // a reply was due but none exists
  std::size_t reply_candidates = 0;
};

struct ReplyCandidate {
  std::vector<int> actions;
  WorldState result;
};

using Chooser = std::function<std::size_t(const std::vector<ReplyCandidate>&)>;
Chooser first_chooser();
Chooser seeded_chooser(std::uint64_t seed);

struct ReplyOutcome {
  WorldState state;
  bool terminal = false;
  std::size_t candidates = 0;
  std::vector<int> actions;
};

struct EngineOptions {
  int exec_depth = 64;
  int reply_depth = 64;
  bool memo = true;
};

class Engine {
 public:
  explicit Engine(WorldDescription wd, EngineOptions opts = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const WorldDescription& world() const { return wd_; }
  const EngineOptions& options() const { return opts_; }
  int agent_count() const { return static_cast<int>(agent_ids_.size()); }
  const std::string& agent_id(int a) const { return agent_ids_[static_cast<std::size_t>(a)]; }
  int agent_index(std::string_view id) const;
  // Agents that act on their own, i.e. that are not reply-only.
  std::vector<int> acting_agents() const;

  WorldState init(std::uint64_t seed = 0) const;
  StepResult step(WorldState& ws, int agent, int action);
  ActionBits forbidden(WorldState& ws, int agent);

  bool can_execute(const WorldState& ws, int agent, int algorithm, int depth);
  ReplyOutcome antagonist_reply(const WorldState& ws, int agent, int algorithm, const Chooser& chooser);
  std::vector<ReplyCandidate> reply_candidates(const WorldState& ws, int agent, int algorithm);
  void set_chooser(int agent, Chooser c);

  // Reads.
  const ActiveSet& active(const WorldState& ws, int agent, int model) const;
  const ActiveSet& active(const WorldState& ws, int agent, std::string_view model) const;
  const MovingTraceArray& trace(const WorldState& ws, int agent, int trace) const;
  const MovingTraceArray& trace(const WorldState& ws, int agent, std::string_view trace) const;
  StateKey current_key(const WorldState& ws, int agent, int trace) const;
  std::optional<StateKey> register_value(const WorldState& ws, int agent, std::string_view reg) const;
  std::string dump(const WorldState& ws, int agent) const;

  // Direct writes for tests and tools; cached analyses are dropped.
  void set_active(WorldState& ws, int agent, std::string_view model, ActiveSet states) const;
  void set_trace(WorldState& ws, int agent, std::string_view trace, MovingTraceArray data) const;

  std::size_t memo_size() const;
  void clear_memo();

  struct Compiled;

 private:
  friend class Stepper;
  WorldDescription wd_;
  EngineOptions opts_;
  std::vector<std::string> agent_ids_;
  std::unique_ptr<Compiled> c_;
  std::vector<Chooser> choosers_;
  mutable std::mutex memo_mu_;
  std::unordered_map<std::uint64_t, bool> memo_;
};

// Free-function forms of the engine operations.
WorldState init_world(const Engine& e, std::uint64_t seed = 0);
std::pair<WorldState, StepResult> step(Engine& e, WorldState ws, int agent, int action);
bool can_execute(Engine& e, const WorldState& ws, int agent, const std::string& algorithm, int depth);

// Observation vote: net = emits - forbids per symbol, argmax with ties to the
// earlier symbol, nil when nothing is positive.
int vote_observation(std::span<const int> net_scores);

struct StreamEntry {
  std::uint64_t t = 0;
  int agent = 0;
  int observation = 0;
  int mask = 0;  // mask the action was chosen under
  int action = 0;
  std::vector<std::string> fired_rules;
  bool terminal = false;
};
using StreamLog = std::vector<StreamEntry>;

class Policy {
 public:
  virtual ~Policy() = default;
  // `forbidden` has bit i set when action i is currently impossible.
  virtual int choose(std::span<const StreamEntry> history, ActionBits forbidden) = 0;
};

std::unique_ptr<Policy> random_policy(std::uint64_t seed);
std::unique_ptr<Policy> script_policy(std::vector<int> actions);
std::unique_ptr<Policy> surveillance_policy();
// Picks the only permitted action (lowest when several are permitted).
std::unique_ptr<Policy> forced_policy();
std::unique_ptr<Policy> make_policy(const std::string& spec, const SymbolAlphabets& al, std::uint64_t seed);

struct EpisodeHooks {
  std::function<void(const WorldState&, const StreamEntry&, const StepResult&)> after_step;
};

StreamLog run_episode(Engine& e, WorldState& ws, std::map<int, Policy*> policies, std::size_t n_steps,
                      const EpisodeHooks& hooks = {});

}  // namespace edw
