#include <random>

#include "edw/engine.hpp"
#include "edw/errors.hpp"
#include "edw/worldlang.hpp"

namespace edw {

namespace {

int first_permitted(ActionBits forbidden) {
  for (int a = 0; a < kSymbols; ++a)
    if (!((forbidden >> a) & 1)) return a;
  return 0;
}

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  int choose(std::span<const StreamEntry>, ActionBits forbidden) override {
    int ok[kSymbols];
    int n = 0;
    for (int a = 0; a < kSymbols; ++a)
      if (!((forbidden >> a) & 1)) ok[n++] = a;
    if (n == 0) return 0;
    return ok[rng_() % static_cast<std::uint64_t>(n)];
  }

 private:
  std::mt19937_64 rng_;
};

// Plays the script in a loop, forbidden entries included.
class ScriptPolicy final : public Policy {
 public:
  explicit ScriptPolicy(std::vector<int> a) : a_(std::move(a)) {}
  int choose(std::span<const StreamEntry>, ActionBits) override {
    if (a_.empty()) return 0;
    return a_[i_++ % a_.size()];
  }

 private:
  std::vector<int> a_;
  std::size_t i_ = 0;
};

// Looks without touching: alternates the idle action and the fourth one.
class SurveillancePolicy final : public Policy {
 public:
  int choose(std::span<const StreamEntry>, ActionBits forbidden) override {
    int want = (n_++ % 2) ? kSymbols - 1 : 0;
    return ((forbidden >> want) & 1) ? first_permitted(forbidden) : want;
  }

 private:
  std::size_t n_ = 0;
};

class ForcedPolicy final : public Policy {
 public:
  int choose(std::span<const StreamEntry>, ActionBits forbidden) override { return first_permitted(forbidden); }
};

}  // namespace

std::unique_ptr<Policy> random_policy(std::uint64_t seed) { return std::make_unique<RandomPolicy>(seed); }
std::unique_ptr<Policy> script_policy(std::vector<int> a) { return std::make_unique<ScriptPolicy>(std::move(a)); }
std::unique_ptr<Policy> surveillance_policy() { return std::make_unique<SurveillancePolicy>(); }
std::unique_ptr<Policy> forced_policy() { return std::make_unique<ForcedPolicy>(); }

std::unique_ptr<Policy> make_policy(const std::string& spec, const SymbolAlphabets& al, std::uint64_t seed) {
  if (spec == "random") return random_policy(seed);
  if (spec == "surveillance") return surveillance_policy();
  if (spec == "forced") return forced_policy();
  if (spec.rfind("script:", 0) == 0) {
    std::string text = read_file(spec.substr(7));
    std::vector<int> acts;
    std::string tok;
    auto flush = [&] {
      if (tok.empty()) return;
      int a = al.action_index(tok);
      if (a < 0) throw ArgumentError("script symbol '" + tok + "' is not an action");
      acts.push_back(a);
      tok.clear();
    };
    for (char ch : text) {
      if (ch == ' ' || ch == '\n' || ch == '\t' || ch == '\r' || ch == ',') flush();
      else tok += ch;
    }
    flush();
    return script_policy(std::move(acts));
  }
  throw ArgumentError("unknown policy '" + spec + "'");
}

StreamLog run_episode(Engine& e, WorldState& ws, std::map<int, Policy*> policies, std::size_t n_steps,
                      const EpisodeHooks& hooks) {
  StreamLog log;
  log.reserve(n_steps);
  std::vector<int> order;
  for (auto& [g, p] : policies)
    if (p) order.push_back(g);
  if (order.empty()) throw ArgumentError("no policy for any acting agent");
  for (std::size_t t = 0; t < n_steps; ++t) {
    int g = order[t % order.size()];
    ActionBits forb = e.forbidden(ws, g);
    StreamEntry en;
    en.t = ws.step_index;
    en.agent = g;
    en.mask = mask_digit(forb);
    en.action = policies[g]->choose(log, forb);
    StepResult r = e.step(ws, g, en.action);
    en.observation = r.observation;
    en.fired_rules = r.fired_rules;
    en.terminal = r.terminal;
    log.push_back(en);
    if (hooks.after_step) hooks.after_step(ws, log.back(), r);
    if (r.terminal) break;
  }
  return log;
}

}  // namespace edw
