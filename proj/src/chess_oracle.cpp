// Plain chess movement, written independently of the world description. Used
// by the tests to judge what the engine permits.
#include <algorithm>

#include "edw/chess.hpp"
#include "edw/errors.hpp"

namespace edw {

namespace {

bool on_board(Square s) { return s.col >= 1 && s.col <= 8 && s.row >= 1 && s.row <= 8; }

Piece piece_named(const std::string& m) {
  if (m == "king") return Piece::King;
  if (m == "queen") return Piece::Queen;
  if (m == "rook") return Piece::Rook;
  if (m == "bishop") return Piece::Bishop;
  if (m == "knight") return Piece::Knight;
  if (m == "pawn") return Piece::Pawn;
  return Piece::None;
}

const char* piece_name(Piece p) {
  switch (p) {
    case Piece::King: return "king";
    case Piece::Queen: return "queen";
    case Piece::Rook: return "rook";
    case Piece::Bishop: return "bishop";
    case Piece::Knight: return "knight";
    case Piece::Pawn: return "pawn";
    default: return "";
  }
}

StateKey key_of(Square s) { return static_cast<StateKey>((s.col - 1) * 8 + (s.row - 1)); }

void slide(const OracleBoard& b, Square from, int dc, int dr, Color me, std::vector<Square>& out) {
  Square s{from.col + dc, from.row + dr};
  while (on_board(s)) {
    const auto& c = b.at(s);
    if (c.piece == Piece::None) {
      out.push_back(s);
    } else {
      if (c.color != me) out.push_back(s);
      return;
    }
    s = {s.col + dc, s.row + dr};
  }
}

void jump(const OracleBoard& b, Square from, int dc, int dr, Color me, std::vector<Square>& out) {
  Square s{from.col + dc, from.row + dr};
  if (!on_board(s)) return;
  const auto& c = b.at(s);
  if (c.piece == Piece::None || c.color != me) out.push_back(s);
}

}  // namespace

OracleBoard oracle_initial() {
  OracleBoard b;
  const Piece back[] = {Piece::Rook, Piece::Knight, Piece::Bishop, Piece::Queen,
                        Piece::King, Piece::Bishop, Piece::Knight, Piece::Rook};
  for (int c = 1; c <= 8; ++c) {
    b.at({c, 1}) = {back[c - 1], Color::White, false};
    b.at({c, 2}) = {Piece::Pawn, Color::White, false};
    b.at({c, 7}) = {Piece::Pawn, Color::Black, false};
    b.at({c, 8}) = {back[c - 1], Color::Black, false};
  }
  return b;
}

OracleBoard oracle_from_trace(const MovingTraceArray& board, const WorldDescription& wd, Color to_move) {
  OracleBoard b;
  b.to_move = to_move;
  int kings[2] = {0, 0};
  for (int col = 1; col <= 8; ++col)
    for (int row = 1; row <= 8; ++row) {
      const Cell& cell = board.at(key_of({col, row}));
      OracleCell oc;
      int colors = 0, pieces = 0;
      bool unmov = false;
      for (MarkerId m : cell) {
        const std::string& name = wd.markers.at(m);
        if (name == "white" || name == "black") {
          oc.color = name == "white" ? Color::White : Color::Black;
          ++colors;
        } else if (name == "unmov") {
          unmov = true;
        } else if (Piece p = piece_named(name); p != Piece::None) {
          oc.piece = p;
          ++pieces;
        } else if (name != "Lifted") {
          throw ArgumentError("unexpected marker " + name);
        }
      }
      if (pieces == 0 && colors == 0 && !unmov) continue;
      if (pieces != 1 || colors != 1)
        throw ArgumentError("inconsistent cell (" + std::to_string(col) + "," + std::to_string(row) + ")");
      oc.moved = !unmov;
      if (oc.piece == Piece::King) ++kings[oc.color == Color::White ? 0 : 1];
      b.at({col, row}) = oc;
    }
  if (kings[0] != 1 || kings[1] != 1) throw ArgumentError("board needs exactly one king per color");
  return b;
}

MovingTraceArray trace_from_oracle(const OracleBoard& b, const WorldDescription& wd) {
  int ti = wd.trace_index("board");
  if (ti < 0) throw ArgumentError("world has no board");
  MovingTraceArray t = build_trace(wd, wd.traces[static_cast<std::size_t>(ti)]);
  for (auto& c : t.cells) c.clear();
  auto mk = [&](const std::string& n) { return static_cast<MarkerId>(wd.marker_index(n)); };
  for (int col = 1; col <= 8; ++col)
    for (int row = 1; row <= 8; ++row) {
      const auto& oc = b.at({col, row});
      if (oc.piece == Piece::None) continue;
      Cell& c = t.at_mut(key_of({col, row}));
      cell_add(c, mk(piece_name(oc.piece)));
      cell_add(c, mk(oc.color == Color::White ? "white" : "black"));
      if (!oc.moved) cell_add(c, mk("unmov"));
    }
  return t;
}

std::vector<Square> oracle_pseudo_destinations(const OracleBoard& b, Square from) {
  std::vector<Square> out;
  const auto& p = b.at(from);
  const Color me = p.color;
  switch (p.piece) {
    case Piece::None: break;
    case Piece::King:
      for (int dc = -1; dc <= 1; ++dc)
        for (int dr = -1; dr <= 1; ++dr)
          if (dc || dr) jump(b, from, dc, dr, me, out);
      break;
    case Piece::Knight:
      for (auto [dc, dr] : {std::pair{1, 2}, {2, 1}, {2, -1}, {1, -2}, {-1, -2}, {-2, -1}, {-2, 1}, {-1, 2}})
        jump(b, from, dc, dr, me, out);
      break;
    case Piece::Rook:
    case Piece::Bishop:
    case Piece::Queen:
      for (int dc = -1; dc <= 1; ++dc)
        for (int dr = -1; dr <= 1; ++dr) {
          if (!dc && !dr) continue;
          bool diag = dc && dr;
          if (p.piece == Piece::Rook && diag) continue;
          if (p.piece == Piece::Bishop && !diag) continue;
          slide(b, from, dc, dr, me, out);
        }
      break;
    case Piece::Pawn: {
      int dir = me == Color::White ? 1 : -1;
      Square one{from.col, from.row + dir};
      if (on_board(one) && b.at(one).piece == Piece::None) {
        out.push_back(one);
        Square two{from.col, from.row + 2 * dir};
        if (!p.moved && on_board(two) && b.at(two).piece == Piece::None) out.push_back(two);
      }
      for (int dc : {-1, 1}) {
        Square d{from.col + dc, from.row + dir};
        if (on_board(d) && b.at(d).piece != Piece::None && b.at(d).color != me) out.push_back(d);
      }
      break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool oracle_attacks(const OracleBoard& b, Square target, Color by) {
  for (int col = 1; col <= 8; ++col)
    for (int row = 1; row <= 8; ++row) {
      const auto& c = b.at({col, row});
      if (c.piece == Piece::None || c.color != by) continue;
      auto d = oracle_pseudo_destinations(b, {col, row});
      if (std::find(d.begin(), d.end(), target) != d.end()) return true;
    }
  return false;
}

bool oracle_in_check(const OracleBoard& b, Color c) {
  for (int col = 1; col <= 8; ++col)
    for (int row = 1; row <= 8; ++row) {
      const auto& k = b.at({col, row});
      if (k.piece == Piece::King && k.color == c) return oracle_attacks(b, {col, row}, other(c));
    }
  return false;
}

OracleBoard oracle_apply(const OracleBoard& b, Square from, Square to) {
  OracleBoard n = b;
  n.at(to) = b.at(from);
  n.at(to).moved = true;
  n.at(from) = {};
  n.to_move = other(b.to_move);
  return n;
}

std::vector<Square> oracle_legal_destinations(const OracleBoard& b, Square from) {
  std::vector<Square> out;
  const Color me = b.at(from).color;
  for (Square to : oracle_pseudo_destinations(b, from))
    if (!oracle_in_check(oracle_apply(b, from, to), me)) out.push_back(to);
  return out;
}

std::vector<std::pair<Square, Square>> oracle_legal_moves(const OracleBoard& b) {
  std::vector<std::pair<Square, Square>> out;
  for (int col = 1; col <= 8; ++col)
    for (int row = 1; row <= 8; ++row) {
      const auto& c = b.at({col, row});
      if (c.piece == Piece::None || c.color != b.to_move) continue;
      for (Square to : oracle_legal_destinations(b, {col, row})) out.emplace_back(Square{col, row}, to);
    }
  return out;
}

std::string oracle_render(const OracleBoard& b) {
  std::string s;
  const char* letters = " KQRBNP";
  for (int row = 8; row >= 1; --row) {
    for (int col = 1; col <= 8; ++col) {
      const auto& c = b.at({col, row});
      char ch = c.piece == Piece::None ? '.' : letters[static_cast<int>(c.piece)];
      if (c.piece != Piece::None && c.color == Color::Black) ch = static_cast<char>(ch - 'A' + 'a');
      s += ch;
    }
    s += '\n';
  }
  return s;
}

}  // namespace edw
