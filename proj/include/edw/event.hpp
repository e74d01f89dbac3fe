#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edw/alphabet.hpp"

namespace edw {

struct SourcePos {
  int line = 0;
  int col = 0;
};

enum class EvalMode : std::uint8_t { Reality, Imagination };

enum class LiteralKind : std::uint8_t {
  Action,       // action=a
  Observation,  // obs=x (the previous observation)
  InState,      // in(model,state)
  Always,
  Never,
  Random,       // random[p1,p2]
  Marker,       // has(trace,marker) on the trace's current cell
  Executable,   // exec(model[,depth])
  Ref,          // a named event
};

struct EventLiteral {
  LiteralKind kind = LiteralKind::Always;
  bool negated = false;
  std::string a;  // symbol, model, trace or event name
  std::string b;  // state or marker; "@model" reads the marker name off a model
  double p_lo = 0.0;
  double p_hi = 0.0;
  int depth = 0;  // exec only, 0 means the engine default

  // Resolved indices, filled by resolve(); not part of equality.
  int ia = -1;
  std::int64_t ib = -1;
  int via = -1;

  bool operator==(const EventLiteral& o) const;
};

// A conjunction of literals.
struct Event {
  std::vector<EventLiteral> literals;

  bool operator==(const Event&) const = default;

  static Event always();
  static Event never();
  static Event action(const std::string& sym);
  static Event in_state(const std::string& model, const std::string& state);
  Event operator&(const Event& o) const;
  Event operator!() const;  // only for single-literal events
};

EventLiteral normalized(EventLiteral l);
std::string to_string(const EventLiteral& l);
std::string to_string(const Event& e);

// Random draws arrive through the fact source so a world can seed them.
class FactSource {
 public:
  virtual ~FactSource() = default;
  virtual int last_observation() const = 0;
  virtual bool in_state(const EventLiteral& l) const = 0;
  virtual bool has_marker(const EventLiteral& l) const = 0;
  virtual bool executable(const EventLiteral& l) const;
  virtual const Event* named_event(const EventLiteral& l) const;
  virtual double draw() const = 0;
};

struct EvalContext {
  int action = 0;
  const FactSource* facts = nullptr;
  EvalMode mode = EvalMode::Reality;
  bool choice = false;  // imagination branch where never-events happen
};

ActionBits literal_bits(const EventLiteral& l, const FactSource& f, EvalMode mode);
// Evaluates the event for every action (and both imagination branches) at
// once. Literals after the first that zeroes the result are skipped.
ActionBits event_bits(const Event& e, const FactSource& f, EvalMode mode);
bool eval_event(const Event& e, const EvalContext& ctx);

inline int bit_of(int action, bool choice) { return action + (choice ? kSymbols : 0); }

}  // namespace edw
