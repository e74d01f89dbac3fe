#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "edw/errors.hpp"
#include "edw/worldlang.hpp"

namespace edw {

namespace {

enum class Tok {
  Ident, LBrace, RBrace, LParen, RParen, LBracket, RBracket,
  Comma, Colon, Eq, Amp, Bang, At, Dollar, Arrow, Star, Newline, End, Bad
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Colon: return "':'";
    case Tok::Eq: return "'='";
    case Tok::Amp: return "'&'";
    case Tok::Bang: return "'!'";
    case Tok::At: return "'@'";
    case Tok::Dollar: return "'$'";
    case Tok::Arrow: return "'->'";
    case Tok::Star: return "'*'";
    case Tok::Newline: return "end of line";
    case Tok::End: return "end of file";
    case Tok::Bad: return "invalid character";
  }
  return "?";
}

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
};

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto push = [&](Tok k, std::string t, SourcePos p) {
    if (k == Tok::Newline && (out.empty() || out.back().kind == Tok::Newline)) return;
    out.push_back({k, std::move(t), p});
  };
  while (i < s.size()) {
    char c = s[i];
    SourcePos p{line, col};
    if (c == '\n') {
      push(Tok::Newline, "", p);
      ++i;
      ++line;
      col = 1;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      ++col;
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
      push(Tok::Arrow, "->", p);
      i += 2;
      col += 2;
      continue;
    }
    if (ident_char(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j]) && !(s[j] == '-' && j + 1 < s.size() && s[j + 1] == '>')) ++j;
      push(Tok::Ident, std::string(s.substr(i, j - i)), p);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    Tok k = Tok::Bad;
    switch (c) {
      case '{': k = Tok::LBrace; break;
      case '}': k = Tok::RBrace; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case '[': k = Tok::LBracket; break;
      case ']': k = Tok::RBracket; break;
      case ',': k = Tok::Comma; break;
      case ':': k = Tok::Colon; break;
      case '=': k = Tok::Eq; break;
      case '&': k = Tok::Amp; break;
      case '!': k = Tok::Bang; break;
      case '@': k = Tok::At; break;
      case '$': k = Tok::Dollar; break;
      case '*': k = Tok::Star; break;
      default: break;
    }
    push(k, std::string(1, c), p);
    ++i;
    ++col;
  }
  push(Tok::Newline, "", {line, col});
  out.push_back({Tok::End, "", {line, col}});
  return out;
}

struct SyntaxError {
  SourcePos pos;
  std::string message;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  WorldDescription parse() {
    WorldDescription wd;
    skip_nl();
    while (peek().kind != Tok::End) {
      statement(wd);
      skip_nl();
    }
    return wd;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }

  [[noreturn]] void fail(const Token& t, const std::string& expected) {
    std::string got = t.kind == Tok::Ident ? "'" + t.text + "'" : tok_name(t.kind);
    throw SyntaxError{t.pos, "expected " + expected + ", found " + got};
  }

  const Token& expect(Tok k) {
    if (peek().kind != k) fail(peek(), tok_name(k));
    return next();
  }

  std::string ident(const char* what = "identifier") {
    if (peek().kind != Tok::Ident) fail(peek(), what);
    return next().text;
  }

  void keyword(const char* kw) {
    if (peek().kind != Tok::Ident || peek().text != kw) fail(peek(), std::string("'") + kw + "'");
    next();
  }

  bool accept(Tok k) {
    if (peek().kind != k) return false;
    next();
    return true;
  }

  bool at_kw(const char* kw) const { return peek().kind == Tok::Ident && peek().text == kw; }

  void skip_nl() {
    while (peek().kind == Tok::Newline) next();
  }

  void eol() {
    if (peek().kind == Tok::RBrace) return;
    expect(Tok::Newline);
  }

  std::vector<std::string> ident_list() {
    std::vector<std::string> r;
    while (peek().kind == Tok::Ident) r.push_back(next().text);
    return r;
  }

  long long integer(const char* what) {
    const Token& t = peek();
    std::string s = ident(what);
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail(t, what);
    return v;
  }

  double number() {
    const Token& t = peek();
    std::string s = ident("probability");
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) fail(t, "probability");
      return v;
    } catch (const std::logic_error&) {
      fail(t, "probability");
    }
  }

  // State names: identifiers or "(a,b)" pairs for product views.
  std::string state_name() {
    if (accept(Tok::LParen)) {
      std::string a = ident("state");
      expect(Tok::Comma);
      std::string b = ident("state");
      expect(Tok::RParen);
      return product_state_name(a, b);
    }
    return ident("state");
  }

  std::string marker_ref() {
    if (accept(Tok::At)) return "@" + ident("model");
    return ident("marker");
  }

  EventLiteral literal() {
    EventLiteral l;
    if (accept(Tok::Bang)) l.negated = true;
    const Token& t = peek();
    std::string w = ident("event literal");
    bool call = peek().kind == Tok::LParen;
    if (w == "action" && peek().kind == Tok::Eq) {
      next();
      l.kind = LiteralKind::Action;
      l.a = ident("action symbol");
    } else if (w == "obs" && peek().kind == Tok::Eq) {
      next();
      l.kind = LiteralKind::Observation;
      l.a = ident("observation symbol");
    } else if (w == "in" && call) {
      next();
      l.kind = LiteralKind::InState;
      l.a = ident("model");
      expect(Tok::Comma);
      l.b = ident("state");
      expect(Tok::RParen);
    } else if (w == "has" && call) {
      next();
      l.kind = LiteralKind::Marker;
      l.a = ident("movtrace");
      expect(Tok::Comma);
      l.b = marker_ref();
      expect(Tok::RParen);
    } else if (w == "exec" && call) {
      next();
      l.kind = LiteralKind::Executable;
      l.a = ident("model");
      if (accept(Tok::Comma)) l.depth = static_cast<int>(integer("depth"));
      expect(Tok::RParen);
    } else if (w == "random" && peek().kind == Tok::LBracket) {
      next();
      l.kind = LiteralKind::Random;
      l.p_lo = number();
      expect(Tok::Comma);
      l.p_hi = number();
      expect(Tok::RBracket);
    } else if (w == "always") {
      l.kind = LiteralKind::Always;
    } else if (w == "never") {
      l.kind = LiteralKind::Never;
    } else {
      if (call) fail(t, "event literal");
      l.kind = LiteralKind::Ref;
      l.a = w;
    }
    return l;
  }

  Event event() {
    Event e;
    e.literals.push_back(literal());
    while (accept(Tok::Amp)) e.literals.push_back(literal());
    return e;
  }

  void statement(WorldDescription& wd) {
    const Token& t = peek();
    std::string kw = ident("section keyword");
    if (kw == "alphabet") alphabet(wd);
    else if (kw == "markers") {
      auto v = ident_list();
      wd.markers.insert(wd.markers.end(), v.begin(), v.end());
      eol();
    } else if (kw == "register") {
      auto v = ident_list();
      if (v.empty()) fail(peek(), "register name");
      wd.registers.insert(wd.registers.end(), v.begin(), v.end());
      eol();
    } else if (kw == "event") {
      NamedEvent e;
      e.pos = t.pos;
      e.name = ident("event name");
      if (e.name == "always" || e.name == "never") fail(t, "event name other than always/never");
      expect(Tok::Eq);
      e.event = event();
      eol();
      wd.events.push_back(std::move(e));
    } else if (kw == "model") model(wd, t.pos);
    else if (kw == "product") {
      ProductDecl p;
      p.pos = t.pos;
      p.id = ident("product id");
      expect(Tok::Eq);
      p.a = ident("model");
      keyword("x");
      p.b = ident("model");
      eol();
      wd.products.push_back(std::move(p));
    } else if (kw == "movtrace") movtrace(wd, t.pos);
    else if (kw == "rule") rule(wd, t.pos);
    else if (kw == "agent") agent(wd, t.pos);
    else fail(t, "one of alphabet, markers, register, event, model, product, movtrace, rule, agent");
  }

  void block_open() {
    expect(Tok::LBrace);
    skip_nl();
  }

  void alphabet(WorldDescription& wd) {
    block_open();
    while (!accept(Tok::RBrace)) {
      const Token& t = peek();
      std::string kw = ident("actions, observations or undef");
      if (kw == "actions" || kw == "observations") {
        auto v = ident_list();
        if (v.size() != kSymbols)
          throw SyntaxError{t.pos, kw + " needs exactly 4 symbols, found " + std::to_string(v.size())};
        auto& dst = kw == "actions" ? wd.alphabets.actions : wd.alphabets.observations;
        std::copy(v.begin(), v.end(), dst.begin());
      } else if (kw == "undef") {
        wd.alphabets.undef_symbol = ident("undef symbol");
      } else {
        fail(t, "actions, observations or undef");
      }
      eol();
      skip_nl();
    }
    eol();
  }

  ModelKind kind(const Token& t, const std::string& s) {
    if (s == "pattern") return ModelKind::Pattern;
    if (s == "algorithm") return ModelKind::Algorithm;
    if (s == "property") return ModelKind::Property;
    if (s == "counter") return ModelKind::Counter;
    fail(t, "pattern, algorithm, property or counter");
  }

  void model(WorldDescription& wd, SourcePos pos) {
    EDModel m;
    m.pos = pos;
    m.id = ident("model id");
    keyword("kind");
    const Token& kt = peek();
    m.kind = kind(kt, ident("model kind"));
    while (peek().kind == Tok::Ident) {
      const Token& f = peek();
      std::string flag = next().text;
      if (flag == "phase") m.phase = true;
      else if (flag == "imagined") m.imagined = true;
      else fail(f, "'phase', 'imagined' or '{'");
    }
    block_open();
    while (!accept(Tok::RBrace)) {
      const Token& t = peek();
      std::string kw = ident("model statement");
      if (kw == "states") {
        auto v = ident_list();
        m.states.insert(m.states.end(), v.begin(), v.end());
      } else if (kw == "initial") {
        auto v = ident_list();
        if (v.empty()) fail(peek(), "state");
        m.initial.insert(m.initial.end(), v.begin(), v.end());
      } else if (kw == "entry") {
        m.entry = ident("state");
      } else if (kw == "exit") {
        auto v = ident_list();
        if (v.empty()) fail(peek(), "state");
        m.exits.insert(m.exits.end(), v.begin(), v.end());
      } else if (kw == "when") {
        m.activation = event();
      } else if (kw == "arrow") {
        Arrow a;
        a.pos = t.pos;
        a.from = ident("state");
        expect(Tok::Arrow);
        a.to = ident("state");
        expect(Tok::Colon);
        a.event = event();
        m.arrows.push_back(std::move(a));
      } else if (kw == "step") {
        CounterStep s;
        s.pos = t.pos;
        s.offset = integer("integer offset");
        expect(Tok::Colon);
        s.event = event();
        m.steps.push_back(std::move(s));
      } else if (kw == "trace") {
        PermanentTrace tr;
        tr.pos = t.pos;
        tr.state = ident("state");
        const Token& pt = peek();
        std::string pol = ident("'must' or 'never'");
        if (pol == "must") tr.polarity = Polarity::MustOccur;
        else if (pol == "never") tr.polarity = Polarity::MustNotOccur;
        else fail(pt, "'must' or 'never'");
        tr.event = event();
        m.traces.push_back(std::move(tr));
      } else {
        fail(t, "states, initial, entry, exit, when, arrow, step or trace");
      }
      eol();
      skip_nl();
    }
    eol();
    wd.models.push_back(std::move(m));
  }

  void movtrace(WorldDescription& wd, SourcePos pos) {
    TraceDecl t;
    t.pos = pos;
    t.id = ident("movtrace id");
    keyword("over");
    t.over = ident("model or product");
    block_open();
    while (!accept(Tok::RBrace)) {
      const Token& s = peek();
      std::string kw = ident("'cell' or 'default'");
      if (kw == "cell") {
        CellInit c;
        c.pos = s.pos;
        c.state = state_name();
        expect(Tok::Colon);
        c.markers = ident_list();
        t.cells.push_back(std::move(c));
      } else if (kw == "default") {
        expect(Tok::Colon);
        t.default_markers = ident_list();
      } else {
        fail(s, "'cell' or 'default'");
      }
      eol();
      skip_nl();
    }
    eol();
    wd.traces.push_back(std::move(t));
  }

  CellRef cell_ref() {
    CellRef r;
    r.trace = ident("movtrace");
    expect(Tok::At);
    if (accept(Tok::Dollar)) {
      r.cell.kind = CellSelector::Kind::Remembered;
      r.cell.name = ident("register");
    } else if (at_kw("cur")) {
      next();
      r.cell.kind = CellSelector::Kind::Current;
    } else {
      r.cell.kind = CellSelector::Kind::Explicit;
      r.cell.name = state_name();
    }
    return r;
  }

  void rule(WorldDescription& wd, SourcePos pos) {
    Rule r;
    r.pos = pos;
    r.id = ident("rule id");
    keyword("priority");
    r.priority = static_cast<int>(integer("integer priority"));
    if (at_kw("forbid")) {
      next();
      r.forbid = true;
    }
    block_open();
    bool guard = false;
    while (!accept(Tok::RBrace)) {
      const Token& t = peek();
      std::string kw = ident("rule statement");
      TraceEffect e;
      e.pos = t.pos;
      if (kw == "when") {
        r.guard = event();
        guard = true;
      } else if (kw == "add" || kw == "remove") {
        e.op = kw == "add" ? EffectOp::AddMarker : EffectOp::RemoveMarker;
        e.target = cell_ref();
        e.marker = marker_ref();
      } else if (kw == "move") {
        e.op = EffectOp::MoveMarkers;
        e.marker = accept(Tok::Star) ? "*" : marker_ref();
        e.source = cell_ref();
        expect(Tok::Arrow);
        e.target = cell_ref();
      } else if (kw == "clear") {
        e.op = EffectOp::ClearCell;
        e.target = cell_ref();
      } else if (kw == "copy") {
        e.op = EffectOp::CopyCell;
        e.source = cell_ref();
        expect(Tok::Arrow);
        e.target = cell_ref();
      } else if (kw == "remember") {
        e.op = EffectOp::Remember;
        e.reg = ident("register");
        e.target = cell_ref();
      } else if (kw == "set") {
        e.op = EffectOp::SetState;
        e.model = ident("model");
        expect(Tok::Eq);
        e.state = ident("state");
      } else {
        fail(t, "when, add, remove, move, clear, copy, remember or set");
      }
      if (kw != "when") r.effects.push_back(std::move(e));
      eol();
      skip_nl();
    }
    if (!guard) throw SyntaxError{pos, "rule " + r.id + " has no 'when' guard"};
    eol();
    wd.rules.push_back(std::move(r));
  }

  void agent(WorldDescription& wd, SourcePos pos) {
    AgentSpec a;
    a.pos = pos;
    a.id = ident("agent id");
    block_open();
    while (!accept(Tok::RBrace)) {
      const Token& t = peek();
      std::string kw = ident("agent statement");
      if (kw == "models") {
        auto v = ident_list();
        a.models.insert(a.models.end(), v.begin(), v.end());
      } else if (kw == "traces") {
        auto v = ident_list();
        a.traces.insert(a.traces.end(), v.begin(), v.end());
      } else if (kw == "policy") {
        a.policy = ident("policy name");
      } else if (kw == "init") {
        InitOverride o;
        o.model = ident("model");
        expect(Tok::Eq);
        o.state = ident("state");
        a.init.push_back(std::move(o));
      } else if (kw == "reply") {
        ReplySpec r;
        r.algorithm = ident("algorithm");
        keyword("after");
        r.trigger = event();
        a.reply = std::move(r);
      } else {
        fail(t, "models, traces, policy, init or reply");
      }
      eol();
      skip_nl();
    }
    eol();
    wd.agents.push_back(std::move(a));
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

}  // namespace

ParseResult parse_world(std::string_view text) {
  ParseResult r;
  WorldDescription wd;
  try {
    wd = Parser(text).parse();
  } catch (const SyntaxError& e) {
    r.diagnostics.push_back({Diagnostic::Severity::Error, e.pos, e.message});
    return r;
  }
  r.diagnostics = validate(wd);
  bool bad = false;
  for (const auto& d : r.diagnostics) bad |= d.error();
  if (!bad) {
    resolve(wd);
    r.world = std::move(wd);
  }
  return r;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DescriptionError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DescriptionError("cannot write " + path);
  out << text;
}

WorldDescription load_world(const std::string& path) {
  auto r = parse_world(read_file(path));
  if (r.world) return std::move(*r.world);
  std::string msg;
  for (const auto& d : r.diagnostics)
    if (d.error()) msg += format(d, path) + "\n";
  throw DescriptionError(msg);
}

}  // namespace edw
