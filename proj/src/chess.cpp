#include "edw/chess.hpp"

#include <random>
#include <set>
#include <sstream>

#include "edw/errors.hpp"
#include "edw/worldlang.hpp"

namespace edw {

namespace {

const char* const kPieces[] = {"king", "queen", "rook", "bishop", "knight", "pawn"};

class Emitter {
 public:
  void line(const std::string& s) { os_ << s << '\n'; }
  void model(const std::string& head) { os_ << "model " << head << " {\n"; }
  void states(const std::vector<std::string>& v) {
    os_ << "  states";
    for (const auto& s : v) os_ << ' ' << s;
    os_ << '\n';
  }
  void arrow(const std::string& a, const std::string& b, const std::string& ev) {
    os_ << "  arrow " << a << " -> " << b << " : " << ev << '\n';
  }
  void never(const std::string& s, const std::string& ev) { os_ << "  trace " << s << " never " << ev << '\n'; }
  void must(const std::string& s, const std::string& ev) { os_ << "  trace " << s << " must " << ev << '\n'; }
  void stmt(const std::string& s) { os_ << "  " << s << '\n'; }
  void end() { os_ << "}\n\n"; }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

const std::string kOccupied[] = {"has(board,white)", "has(board,black)"};

void never_occupied(Emitter& e, const std::string& s, const std::string& ev) {
  for (const auto& o : kOccupied) e.never(s, ev + " & " + o);
}

void rail_head(Emitter& e, const std::string& id, const std::vector<std::string>& states, const std::string& trigger) {
  e.model(id + " kind algorithm");
  e.states(states);
  e.stmt("initial idle");
  e.stmt("entry s1");
  e.stmt("exit idle");
  e.arrow("idle", "s1", trigger);
  for (const auto& s : states)
    if (s != "idle") e.arrow(s, "idle", "drop");
}

std::string box_name(int dx, int dy) {
  if (dx == 0 && dy == 0) return "s1";
  return "x" + std::to_string(dx) + "y" + std::to_string(dy);
}

// King and knight: the gaze may wander inside a box around the source.
void box_rail(Emitter& e, const std::string& id, const std::string& piece, int r, bool knight) {
  std::vector<std::string> st{"idle"};
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) st.push_back(box_name(dx, dy));
  rail_head(e, id, st, "lift & has(board," + piece + ")");
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      std::string s = box_name(dx, dy);
      if (dx > -r) e.arrow(s, box_name(dx - 1, dy), "left");
      else e.never(s, "left");
      if (dx < r) e.arrow(s, box_name(dx + 1, dy), "right");
      else e.never(s, "right");
      if (dy < r) e.arrow(s, box_name(dx, dy + 1), "forward");
      else e.never(s, "forward");
      if (dy > -r) e.arrow(s, box_name(dx, dy - 1), "backward");
      else e.never(s, "backward");
      int ax = dx < 0 ? -dx : dx, ay = dy < 0 ? -dy : dy;
      bool target = (ax == 1 && ay == 2) || (ax == 2 && ay == 1);
      if (knight && !(target || (ax == 0 && ay == 0))) e.never(s, "drop");
    }
  e.end();
}

struct Dir {
  const char* name;
  const char* out;
  const char* in;
};
const Dir kLines[] = {{"L", "left", "right"}, {"R", "right", "left"}, {"F", "forward", "backward"}, {"B", "backward", "forward"}};

bool horizontal(const std::string& ev) { return ev == "left" || ev == "right"; }

// Rook lines: state sX is anywhere on ray X past the source; stepping back
// is resolved by whether the lift mark is seen.
void line_states(Emitter& e) {
  for (const auto& d : kLines) {
    std::string s = std::string("s") + d.name;
    e.arrow("s1", s, d.out);
    e.arrow(s, s, d.out);
    e.arrow(s, s, d.in);
    e.arrow(s, "s1", d.in);
    never_occupied(e, s, d.out);
    for (const char* ev : {"left", "right", "forward", "backward"})
      if (ev != std::string(d.out) && ev != std::string(d.in) && horizontal(ev) != horizontal(d.out))
        e.never(s, ev);
    e.never(s, "has(board,Lifted)");
  }
}

struct Diag {
  const char* name;
  const char* h_out;
  const char* h_in;
  const char* v_out;
  const char* v_in;
};
const Diag kDiags[] = {{"LF", "left", "right", "forward", "backward"},
                       {"LB", "left", "right", "backward", "forward"},
                       {"RF", "right", "left", "forward", "backward"},
                       {"RB", "right", "left", "backward", "forward"}};

// Diagonals in two half steps, horizontal first: dX on the diagonal, oX one
// column past it, iX one column short of it.
void diagonal_states(Emitter& e) {
  for (const auto& d : kDiags) {
    std::string o = std::string("o") + d.name, i = std::string("i") + d.name, g = std::string("d") + d.name;
    e.arrow("s1", o, d.h_out);
    e.arrow(o, g, d.v_out);
    e.arrow(o, g, d.h_in);
    e.arrow(o, "s1", d.h_in);
    e.never(o, "drop");
    e.never(o, d.h_out);
    e.never(o, d.v_in);
    e.arrow(g, o, d.h_out);
    e.arrow(g, i, d.h_in);
    never_occupied(e, g, d.h_out);
    e.never(g, "forward");
    e.never(g, "backward");
    e.never(g, "has(board,Lifted)");
    e.arrow(i, g, d.v_in);
    e.arrow(i, "s1", d.v_in);
    e.arrow(i, g, d.h_out);
    e.never(i, "drop");
    e.never(i, d.h_in);
    e.never(i, d.v_out);
  }
}

std::vector<std::string> line_names() { return {"sL", "sR", "sF", "sB"}; }
std::vector<std::string> diag_names() {
  std::vector<std::string> v;
  for (const char* p : {"o", "d", "i"})
    for (const auto& d : kDiags) v.push_back(p + std::string(d.name));
  return v;
}

void slider_rail(Emitter& e, const std::string& id, const std::string& piece, bool lines, bool diags) {
  std::vector<std::string> st{"idle", "s1"};
  if (lines)
    for (auto& s : line_names()) st.push_back(s);
  if (diags)
    for (auto& s : diag_names()) st.push_back(s);
  rail_head(e, id, st, "lift & has(board," + piece + ")");
  e.must("s1", "has(board,Lifted)");
  if (!lines) {
    e.never("s1", "forward");
    e.never("s1", "backward");
  }
  if (lines) line_states(e);
  if (diags) diagonal_states(e);
  e.end();
}

void pawn_rail(Emitter& e, const std::string& id, bool white, bool fresh) {
  const std::string adv = white ? "forward" : "backward", back = white ? "backward" : "forward";
  const std::string mine = white ? "white" : "black", enemy = white ? "black" : "white";
  std::vector<std::string> st{"idle", "s1", "f1"};
  if (fresh) st.push_back("f2");
  for (const char* s : {"hL", "dL", "hR", "dR"}) st.push_back(s);
  rail_head(e, id, st,
            "lift & has(board,pawn) & has(board," + mine + ")" + (fresh ? " & has(board,unmov)" : " & !has(board,unmov)"));
  e.never("s1", back);
  e.arrow("s1", "f1", adv);
  e.arrow("f1", "s1", back);
  e.never("f1", "left");
  e.never("f1", "right");
  never_occupied(e, "f1", "drop");
  if (fresh) {
    e.arrow("f1", "f2", adv);
    never_occupied(e, "f1", adv);
    e.arrow("f2", "f1", back);
    for (const std::string& ev : {std::string("left"), std::string("right"), adv}) e.never("f2", ev);
    never_occupied(e, "f2", "drop");
  } else {
    e.never("f1", adv);
  }
  for (const auto& [side, out, in] : {std::tuple{"L", "left", "right"}, std::tuple{"R", "right", "left"}}) {
    std::string h = std::string("h") + side, d = std::string("d") + side;
    e.arrow("s1", h, out);
    e.arrow(h, "s1", in);
    e.arrow(h, d, adv);
    e.never(h, "drop");
    e.never(h, out);
    e.never(h, back);
    e.arrow(d, h, back);
    for (const std::string& ev : {std::string("left"), std::string("right"), adv}) e.never(d, ev);
    e.never(d, "drop & !has(board," + enemy + ")");
  }
  e.end();
}

struct PropShape {
  int n = 2;
  std::vector<std::array<int, kSymbols>> next;               // -1: stay
  std::vector<std::vector<std::pair<int, int>>> votes;       // (obs, +1 emit / -1 forbid)
};

std::vector<int> surveillance_signature(const PropShape& p) {
  std::vector<int> sig;
  int s = 0;
  for (int t = 0; t <= 30; ++t) {
    if (t > 0) {
      int a = (t - 1) % 2 ? kSymbols - 1 : 0;
      if (p.next[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] >= 0)
        s = p.next[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
    }
    int net[kSymbols] = {0, 0, 0, 0};
    for (auto [o, w] : p.votes[static_cast<std::size_t>(s)]) net[o] += w;
    sig.push_back(vote_observation(net));
  }
  return sig;
}

PropShape random_shape(std::mt19937_64& rng) {
  PropShape p;
  p.n = 2 + static_cast<int>(rng() % 3);
  p.next.assign(static_cast<std::size_t>(p.n), {-1, -1, -1, -1});
  p.votes.resize(static_cast<std::size_t>(p.n));
  for (int s = 0; s < p.n; ++s) {
    for (int a = 0; a < kSymbols; ++a)
      if (rng() % 2) p.next[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = static_cast<int>(rng() % static_cast<std::uint64_t>(p.n));
    int k = static_cast<int>(rng() % 3);
    std::set<int> used;
    for (int v = 0; v < k; ++v) {
      int o = 1 + static_cast<int>(rng() % 3);
      if (!used.insert(o).second) continue;
      p.votes[static_cast<std::size_t>(s)].emplace_back(o, rng() % 4 ? 1 : -1);
    }
  }
  return p;
}

bool all_reachable(const PropShape& p) {
  std::vector<char> seen(static_cast<std::size_t>(p.n), 0);
  std::vector<int> todo{0};
  seen[0] = 1;
  while (!todo.empty()) {
    int s = todo.back();
    todo.pop_back();
    for (int nx : p.next[static_cast<std::size_t>(s)])
      if (nx >= 0 && !seen[static_cast<std::size_t>(nx)]) {
        seen[static_cast<std::size_t>(nx)] = 1;
        todo.push_back(nx);
      }
  }
  for (char c : seen)
    if (!c) return false;
  return true;
}

bool has_trace(const PropShape& p) {
  for (const auto& v : p.votes)
    if (!v.empty()) return true;
  return false;
}

std::vector<PropShape> property_shapes(std::uint64_t seed) {
  std::vector<PropShape> out;
  std::set<std::vector<int>> seen;
  const auto& names = chess_property_markers();
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + i);
    for (;;) {
      PropShape p = random_shape(rng);
      if (!has_trace(p) || !all_reachable(p)) continue;
      auto sig = surveillance_signature(p);
      bool silent = true;
      for (int o : sig) silent &= o == 0;
      if (silent || !seen.insert(sig).second) continue;
      out.push_back(std::move(p));
      break;
    }
  }
  return out;
}

}  // namespace

const std::vector<std::string>& chess_property_markers() {
  static const std::vector<std::string> m{"king", "queen", "rook", "bishop", "knight", "pawn", "white", "black", "unmov", "Lifted"};
  return m;
}

std::string chess_source(const ChessWorldConfig& cfg) {
  const bool two = cfg.variant == ChessVariant::TwoAgent;
  Emitter e;
  e.line("alphabet {");
  e.line("  actions 0 a b c");
  e.line("  observations 0 x y z");
  e.line("  undef undef");
  e.line("}");
  e.line("markers king queen rook bishop knight pawn white black unmov Lifted");
  e.line("register src");
  e.line("event left = in(phase,1) & action=a");
  e.line("event right = in(phase,1) & action=b");
  e.line("event forward = in(phase,2) & action=a");
  e.line("event backward = in(phase,2) & action=b");
  e.line("event lift = in(phase,3) & action=a");
  e.line("event drop = in(phase,3) & action=b");
  e.line("event real_move = drop & !has(board,Lifted)");
  e.line("event fake_drop = drop & has(board,Lifted)");
  e.line(two ? "event change = never" : "event change = real_move");
  e.line(two ? "event turn = change" : "event turn = always");
  e.line("");

  e.model("phase kind pattern phase");
  e.states({"1", "2", "3"});
  e.stmt("initial 1");
  e.arrow("1", "2", "always");
  e.arrow("2", "3", "always");
  e.arrow("3", "1", "always");
  e.never("3", "action=a & in(lifted,held)");
  e.never("3", "action=b & in(lifted,idle)");
  e.end();

  for (const auto& [id, lo, hi] : {std::tuple{"horiz", "left", "right"}, std::tuple{"vert", "backward", "forward"}}) {
    e.model(std::string(id) + " kind pattern");
    e.states({"1", "2", "3", "4", "5", "6", "7", "8"});
    e.stmt("initial 1");
    for (int i = 1; i < 8; ++i) {
      e.arrow(std::to_string(i), std::to_string(i + 1), hi);
      e.arrow(std::to_string(i + 1), std::to_string(i), lo);
    }
    e.never("1", lo);
    e.never("8", hi);
    e.end();
  }

  e.model("lifted kind pattern");
  e.states({"idle", "held"});
  e.stmt("initial idle");
  e.arrow("idle", "held", "lift");
  e.arrow("held", "idle", "drop");
  e.never("idle", "drop");
  e.never("held", "lift");
  e.end();

  e.model("color kind pattern");
  e.states({"white", "black"});
  e.stmt("initial white");
  e.arrow("white", "black", "change");
  e.arrow("black", "white", "change");
  e.never("white", "lift & has(board,black)");
  e.never("black", "lift & has(board,white)");
  e.end();

  box_rail(e, "king_alg", "king", 1, false);
  box_rail(e, "knight_alg", "knight", 2, true);
  slider_rail(e, "rook_alg", "rook", true, false);
  slider_rail(e, "bishop_alg", "bishop", false, true);
  slider_rail(e, "queen_alg", "queen", true, true);
  pawn_rail(e, "wpawn_new", true, true);
  pawn_rail(e, "wpawn_old", true, false);
  pawn_rail(e, "bpawn_new", false, true);
  pawn_rail(e, "bpawn_old", false, false);

  const char* obs[] = {"0", "x", "y", "z"};
  const char* act[] = {"0", "a", "b", "c"};
  auto shapes = property_shapes(cfg.seed);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto& p = shapes[i];
    const auto& mk = chess_property_markers()[i];
    e.model("prop_" + mk + " kind property");
    std::vector<std::string> st;
    for (int s = 0; s < p.n; ++s) st.push_back("q" + std::to_string(s + 1));
    e.states(st);
    e.stmt("initial q1");
    e.stmt("when has(board," + mk + ")");
    for (int s = 0; s < p.n; ++s) {
      for (int a = 0; a < kSymbols; ++a) {
        int t = p.next[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
        if (t >= 0 && t != s) e.arrow(st[static_cast<std::size_t>(s)], st[static_cast<std::size_t>(t)], std::string("action=") + act[a]);
      }
      for (auto [o, w] : p.votes[static_cast<std::size_t>(s)]) {
        if (w > 0) e.must(st[static_cast<std::size_t>(s)], std::string("obs=") + obs[o]);
        else e.never(st[static_cast<std::size_t>(s)], std::string("obs=") + obs[o]);
      }
    }
    e.end();
  }

  // Switch sides in imagination and capture the king.
  e.model("capture_king kind algorithm imagined");
  e.states({"s1", "s2", "s3", "s4", "s5"});
  e.stmt("entry s1");
  e.stmt("exit s5");
  e.arrow("s1", "s2", "real_move");
  e.arrow("s2", "s3", "turn");
  e.arrow("s3", "s4", "lift");
  e.arrow("s4", "s5", "real_move & has(board,king)");
  for (const char* ev : {"left", "right", "forward", "backward"}) e.never("s1", ev);
  e.never("s2", "lift");
  e.never("s2", "drop");
  e.never("s4", "drop & !has(board,king)");
  if (two)
    for (const char* s : {"s1", "s3", "s4"}) e.never(s, "change");
  e.end();

  if (two) {
    e.model("black_reply kind algorithm imagined");
    e.states({"r1", "r2", "r3"});
    e.stmt("entry r1");
    e.stmt("exit r3");
    e.arrow("r1", "r2", "lift");
    e.arrow("r2", "r1", "fake_drop");
    e.arrow("r2", "r3", "real_move");
    e.end();
  }

  e.line("product gaze = horiz x vert");
  e.line("");
  e.line("movtrace board over gaze {");
  const char* back[] = {"rook", "knight", "bishop", "queen", "king", "bishop", "knight", "rook"};
  for (int c = 1; c <= 8; ++c) {
    auto cell = [&](int r, const std::string& m) {
      e.line("  cell (" + std::to_string(c) + "," + std::to_string(r) + ") : " + m + " unmov");
    };
    cell(1, std::string("white ") + back[c - 1]);
    cell(2, "white pawn");
    cell(7, "black pawn");
    cell(8, std::string("black ") + back[c - 1]);
  }
  e.line("}");
  e.line("");
  e.line("movtrace lifted over lifted {");
  e.line("}");
  e.line("");

  e.line("rule lift priority 1 {");
  e.line("  when lift");
  e.line("  move * board@cur -> lifted@idle");
  e.line("  add board@cur Lifted");
  e.line("  remember src board@cur");
  e.line("}");
  e.line("rule lift_own priority 2 forbid {");
  e.line("  when lift & !has(board,@color)");
  e.line("}");
  e.line("rule lift_empty priority 3 forbid {");
  e.line("  when lift & !has(board,white) & !has(board,black)");
  e.line("}");
  e.line("rule fake_move priority 4 {");
  e.line("  when fake_drop");
  e.line("  remove board@cur Lifted");
  e.line("  move * lifted@idle -> board@cur");
  e.line("}");
  e.line("rule real_move priority 5 {");
  e.line("  when real_move");
  e.line("  clear board@cur");
  e.line("  move * lifted@idle -> board@cur");
  e.line("  remove board@cur unmov");
  e.line("  remove board@$src Lifted");
  e.line("}");
  e.line("rule own_capture priority 6 forbid {");
  e.line("  when real_move & has(board,@color)");
  e.line("}");
  e.line("rule check priority 7 forbid {");
  e.line("  when real_move & exec(capture_king," + std::to_string(cfg.depth) + ")");
  e.line("}");

  if (two) {
    std::string models = "  models phase horiz vert lifted color king_alg knight_alg rook_alg bishop_alg queen_alg "
                         "wpawn_new wpawn_old bpawn_new bpawn_old capture_king black_reply";
    for (const auto& mk : chess_property_markers()) models += " prop_" + mk;
    e.line("");
    e.line("agent white {");
    e.line(models);
    e.line("  traces lifted");
    e.line("  policy random");
    e.line("}");
    e.line("agent black {");
    e.line(models);
    e.line("  traces lifted");
    e.line("  init color = black");
    e.line("  reply black_reply after real_move");
    e.line("}");
  }
  return e.str();
}

WorldDescription build_chess(const ChessWorldConfig& cfg) {
  auto r = parse_world(chess_source(cfg));
  if (!r.world) {
    std::string msg = "chess world failed to build:\n";
    for (const auto& d : r.diagnostics) msg += format(d, "chess") + "\n";
    throw EngineFault(msg);
  }
  return std::move(*r.world);
}

Square chess_gaze(const Engine& e, const WorldState& ws, int agent) {
  const auto& h = e.active(ws, agent, "horiz");
  const auto& v = e.active(ws, agent, "vert");
  return {static_cast<int>(h.front()) + 1, static_cast<int>(v.front()) + 1};
}

int chess_phase(const Engine& e, const WorldState& ws, int agent) {
  return static_cast<int>(e.active(ws, agent, "phase").front()) + 1;
}

bool chess_lifted(const Engine& e, const WorldState& ws, int agent) {
  return e.active(ws, agent, "lifted").front() == 1;
}

Color chess_color(const Engine& e, const WorldState& ws, int agent) {
  return e.active(ws, agent, "color").front() == 0 ? Color::White : Color::Black;
}

}  // namespace edw
