#pragma once

#include <boost/container/small_vector.hpp>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edw/event.hpp"

namespace edw {

// Finite models use the index into EDModel::states; counters use the integer.
using StateKey = std::int64_t;
// Sorted, duplicate free.
using ActiveSet = boost::container::small_vector<StateKey, 2>;

enum class ModelKind : std::uint8_t { Pattern, Algorithm, Property, Counter };
enum class Polarity : std::uint8_t { MustOccur, MustNotOccur };

const char* to_string(ModelKind k);
const char* to_string(Polarity p);

struct Arrow {
  std::string from;
  std::string to;
  Event event;
  SourcePos pos;
  StateKey from_key = -1;
  StateKey to_key = -1;

  bool operator==(const Arrow& o) const {
    return from == o.from && to == o.to && event == o.event;
  }
};

// Counter arrow schema: every state n moves to n + offset when the event holds.
struct CounterStep {
  std::int64_t offset = 0;
  Event event;
  SourcePos pos;

  bool operator==(const CounterStep& o) const {
    return offset == o.offset && event == o.event;
  }
};

struct PermanentTrace {
  std::string state;
  Polarity polarity = Polarity::MustNotOccur;
  Event event;
  SourcePos pos;
  StateKey key = -1;

  bool operator==(const PermanentTrace& o) const {
    return state == o.state && polarity == o.polarity && event == o.event;
  }
};

struct EDModel {
  std::string id;
  ModelKind kind = ModelKind::Pattern;
  bool phase = false;     // the world's step-phase pattern
  bool imagined = false;  // stepped only inside executability searches
  std::vector<std::string> states;
  std::vector<std::string> initial;
  std::string entry;
  std::vector<std::string> exits;
  std::optional<Event> activation;  // property models only
  std::vector<Arrow> arrows;
  std::vector<CounterStep> steps;
  std::vector<PermanentTrace> traces;
  SourcePos pos;

  bool operator==(const EDModel& o) const {
    return id == o.id && kind == o.kind && phase == o.phase && imagined == o.imagined &&
           states == o.states && initial == o.initial && entry == o.entry &&
           exits == o.exits && activation == o.activation && arrows == o.arrows &&
           steps == o.steps && traces == o.traces;
  }

  bool counter() const { return kind == ModelKind::Counter; }
  std::optional<StateKey> key_of(std::string_view name) const;
  std::string name_of(StateKey k) const;
  ActiveSet initial_set() const;
  // Fills arrow and trace keys; throws DescriptionError on a dangling state.
  void index();
};

ActiveSet make_active(std::initializer_list<StateKey> keys);
void normalize(ActiveSet& s);
bool contains(const ActiveSet& s, StateKey k);

// True when the event can tell actions apart: it mentions an action, a
// never-event or a random draw.
bool action_dependent(const Event& e, const FactSource* names = nullptr);

enum class TraceScope : std::uint8_t { All, Dynamic, Static };

ActiveSet step_model(const EDModel& m, const ActiveSet& active, const EvalContext& ctx);
ActiveSet filter_by_traces(const EDModel& m, const ActiveSet& active, const EvalContext& ctx,
                           TraceScope scope = TraceScope::All);
bool trace_violated(const PermanentTrace& t, const EvalContext& ctx);

// Actions (low four bits) for which some model has every active state
// violating one of its action-dependent traces.
ActionBits forbidden_actions(std::span<const std::pair<const EDModel*, ActiveSet>> models,
                             const FactSource& facts, EvalMode mode = EvalMode::Reality);

std::string product_state_name(const std::string& a, const std::string& b);
EDModel product(const EDModel& a, const EDModel& b);

}  // namespace edw
