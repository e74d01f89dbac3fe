#include "edw/event.hpp"

#include <charconv>

#include "edw/errors.hpp"

namespace edw {

bool EventLiteral::operator==(const EventLiteral& o) const {
  return kind == o.kind && negated == o.negated && a == o.a && b == o.b &&
         p_lo == o.p_lo && p_hi == o.p_hi && depth == o.depth;
}

Event Event::always() { return Event{{EventLiteral{}}}; }

Event Event::never() {
  EventLiteral l;
  l.kind = LiteralKind::Never;
  return Event{{l}};
}

Event Event::action(const std::string& sym) {
  EventLiteral l;
  l.kind = LiteralKind::Action;
  l.a = sym;
  return Event{{l}};
}

Event Event::in_state(const std::string& model, const std::string& state) {
  EventLiteral l;
  l.kind = LiteralKind::InState;
  l.a = model;
  l.b = state;
  return Event{{l}};
}

Event Event::operator&(const Event& o) const {
  Event r = *this;
  r.literals.insert(r.literals.end(), o.literals.begin(), o.literals.end());
  return r;
}

Event Event::operator!() const {
  if (literals.size() != 1) throw ArgumentError("only a single-literal event can be negated");
  EventLiteral l = literals.front();
  l.negated = !l.negated;
  return Event{{normalized(l)}};
}

EventLiteral normalized(EventLiteral l) {
  if (l.negated && l.kind == LiteralKind::Always) {
    l.kind = LiteralKind::Never;
    l.negated = false;
  } else if (l.negated && l.kind == LiteralKind::Never) {
    l.kind = LiteralKind::Always;
    l.negated = false;
  }
  return l;
}

namespace {

std::string fmt_prob(double p) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, p);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string to_string(const EventLiteral& l) {
  std::string s = l.negated ? "!" : "";
  switch (l.kind) {
    case LiteralKind::Action: return s + "action=" + l.a;
    case LiteralKind::Observation: return s + "obs=" + l.a;
    case LiteralKind::InState: return s + "in(" + l.a + "," + l.b + ")";
    case LiteralKind::Always: return s + "always";
    case LiteralKind::Never: return s + "never";
    case LiteralKind::Random:
      return s + "random[" + fmt_prob(l.p_lo) + "," + fmt_prob(l.p_hi) + "]";
    case LiteralKind::Marker: return s + "has(" + l.a + "," + l.b + ")";
    case LiteralKind::Executable:
      return s + "exec(" + l.a + (l.depth > 0 ? "," + std::to_string(l.depth) : "") + ")";
    case LiteralKind::Ref: return s + l.a;
  }
  return s;
}

std::string to_string(const Event& e) {
  std::string s;
  for (const auto& l : e.literals) {
    if (!s.empty()) s += " & ";
    s += to_string(l);
  }
  return s;
}

bool FactSource::executable(const EventLiteral& l) const {
  throw UnsupportedError("no executability search available for " + l.a);
}

const Event* FactSource::named_event(const EventLiteral&) const { return nullptr; }

ActionBits literal_bits(const EventLiteral& l, const FactSource& f, EvalMode mode) {
  ActionBits r = 0;
  switch (l.kind) {
    case LiteralKind::Action:
      if (l.ia < 0) throw DescriptionError("unresolved action symbol " + l.a);
      r = static_cast<ActionBits>((1u << l.ia) | (1u << (l.ia + kSymbols)));
      break;
    case LiteralKind::Observation:
      if (l.ia < 0) throw DescriptionError("unresolved observation symbol " + l.a);
      r = f.last_observation() == l.ia ? kAllBits : 0;
      break;
    case LiteralKind::InState:
      if (l.ia < 0) throw DescriptionError("dangling model reference " + l.a);
      r = f.in_state(l) ? kAllBits : 0;
      break;
    case LiteralKind::Always: r = kAllBits; break;
    case LiteralKind::Never: r = mode == EvalMode::Imagination ? 0xf0 : 0; break;
    case LiteralKind::Random:
      if (mode == EvalMode::Imagination) {
        if (l.p_lo >= 1.0) r = kAllBits;
        else if (l.p_hi <= 0.0) r = 0;
        else r = 0xf0;
      } else {
        double p = l.p_lo + (l.p_hi - l.p_lo) * f.draw();
        r = f.draw() < p ? kAllBits : 0;
      }
      break;
    case LiteralKind::Marker:
      if (l.ia < 0) throw DescriptionError("dangling trace reference " + l.a);
      r = f.has_marker(l) ? kAllBits : 0;
      break;
    case LiteralKind::Executable:
      // Nested searches are cut off: inside imagination the literal is false.
      r = mode == EvalMode::Imagination ? 0 : (f.executable(l) ? kAllBits : 0);
      break;
    case LiteralKind::Ref: {
      const Event* e = f.named_event(l);
      if (!e) throw DescriptionError("dangling event reference " + l.a);
      r = event_bits(*e, f, mode);
      break;
    }
  }
  return l.negated ? static_cast<ActionBits>(~r) : r;
}

ActionBits event_bits(const Event& e, const FactSource& f, EvalMode mode) {
  ActionBits r = kAllBits;
  for (const auto& l : e.literals) {
    r &= literal_bits(l, f, mode);
    if (!r) break;
  }
  return r;
}

bool eval_event(const Event& e, const EvalContext& ctx) {
  if (!ctx.facts) throw ArgumentError("evaluation context without facts");
  ActionBits b = event_bits(e, *ctx.facts, ctx.mode);
  bool choice = ctx.mode == EvalMode::Imagination && ctx.choice;
  return (b >> bit_of(ctx.action, choice)) & 1;
}

}  // namespace edw
