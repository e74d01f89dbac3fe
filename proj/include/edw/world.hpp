#pragma once

#include <optional>
#include <string>
#include <vector>

#include "edw/alphabet.hpp"
#include "edw/model.hpp"
#include "edw/traces.hpp"

namespace edw {

struct Diagnostic {
  enum class Severity : std::uint8_t { Error, Warning };
  Severity severity = Severity::Error;
  SourcePos pos;
  std::string message;

  bool error() const { return severity == Severity::Error; }
};

std::string format(const Diagnostic& d, const std::string& file);

struct NamedEvent {
  std::string name;
  Event event;
  SourcePos pos;

  bool operator==(const NamedEvent& o) const { return name == o.name && event == o.event; }
};

struct ProductDecl {
  std::string id;
  std::string a;
  std::string b;
  SourcePos pos;
  int ia = -1;
  int ib = -1;

  bool operator==(const ProductDecl& o) const { return id == o.id && a == o.a && b == o.b; }
};

struct CellInit {
  std::string state;
  std::vector<std::string> markers;
  SourcePos pos;
  StateKey key = -1;

  bool operator==(const CellInit& o) const { return state == o.state && markers == o.markers; }
};

struct TraceDecl {
  std::string id;
  std::string over;
  std::vector<CellInit> cells;
  std::vector<std::string> default_markers;  // counter traces only
  SourcePos pos;
  int over_model = -1;
  int over_product = -1;

  bool operator==(const TraceDecl& o) const {
    return id == o.id && over == o.over && cells == o.cells && default_markers == o.default_markers;
  }
};

struct Rule {
  std::string id;
  int priority = 0;
  bool forbid = false;  // guard marks the action as impossible instead of firing
  Event guard;
  std::vector<TraceEffect> effects;
  SourcePos pos;

  bool operator==(const Rule& o) const {
    return id == o.id && priority == o.priority && forbid == o.forbid && guard == o.guard &&
           effects == o.effects;
  }
};

struct InitOverride {
  std::string model;
  std::string state;

  bool operator==(const InitOverride&) const = default;
};

// The agent answers another agent's step: when `trigger` held for that step,
// this agent runs `algorithm` to an exit within the same step.
struct ReplySpec {
  std::string algorithm;
  Event trigger;
  int algorithm_index = -1;

  bool operator==(const ReplySpec& o) const {
    return algorithm == o.algorithm && trigger == o.trigger;
  }
};

struct AgentSpec {
  std::string id;
  std::vector<std::string> models;  // owned: one active set per owning agent
  std::vector<std::string> traces;
  std::string policy;
  std::vector<InitOverride> init;
  std::optional<ReplySpec> reply;
  SourcePos pos;

  bool operator==(const AgentSpec& o) const {
    return id == o.id && models == o.models && traces == o.traces && policy == o.policy &&
           init == o.init && reply == o.reply;
  }
};

struct WorldDescription {
  SymbolAlphabets alphabets;
  std::vector<std::string> markers;
  std::vector<std::string> registers;
  std::vector<NamedEvent> events;
  std::vector<EDModel> models;
  std::vector<ProductDecl> products;
  std::vector<TraceDecl> traces;
  std::vector<Rule> rules;
  std::vector<AgentSpec> agents;

  bool operator==(const WorldDescription& o) const {
    return alphabets == o.alphabets && markers == o.markers && registers == o.registers &&
           events == o.events && models == o.models && products == o.products &&
           traces == o.traces && rules == o.rules && agents == o.agents;
  }

  int model_index(std::string_view id) const;
  int trace_index(std::string_view id) const;
  int event_index(std::string_view name) const;
  int marker_index(std::string_view name) const;
  int register_index(std::string_view name) const;
  int product_index(std::string_view id) const;
  int agent_index(std::string_view id) const;
  int rule_index(std::string_view id) const;

  const EDModel& model(std::string_view id) const;
  const TraceDecl& trace(std::string_view id) const;

  // Number of cells / key space of the view a trace is laid over.
  std::size_t view_size(const TraceDecl& t) const;
  std::optional<StateKey> view_key(const TraceDecl& t, std::string_view state) const;
  std::string view_name(const TraceDecl& t, StateKey k) const;
};

// Sorts every section into canonical order.
void canonicalize(WorldDescription& wd);
// Canonicalizes, then fills every resolved index. Returns reference errors.
std::vector<Diagnostic> resolve(WorldDescription& wd);
// resolve() that throws DescriptionError on the first error.
void resolve_or_throw(WorldDescription& wd);

MovingTraceArray build_trace(const WorldDescription& wd, const TraceDecl& t);

}  // namespace edw
