#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edw/engine.hpp"

namespace edw {

enum class ChessVariant { Solitaire, TwoAgent };

struct ChessWorldConfig {
  ChessVariant variant = ChessVariant::Solitaire;
  std::uint64_t seed = 1;  // property automata
  int depth = 64;          // check search
};

// World text in the description language; build_chess parses it.
std::string chess_source(const ChessWorldConfig& cfg);
WorldDescription build_chess(const ChessWorldConfig& cfg);

// Markers whose property models vote on the observation, in model order.
const std::vector<std::string>& chess_property_markers();

// ---- independent oracle ----

enum class Piece : std::uint8_t { None, King, Queen, Rook, Bishop, Knight, Pawn };
enum class Color : std::uint8_t { White, Black };

inline Color other(Color c) { return c == Color::White ? Color::Black : Color::White; }

struct Square {
  int col = 1;  // 1..8, left to right
  int row = 1;  // 1..8, white's back rank is 1
  bool operator==(const Square&) const = default;
  auto operator<=>(const Square&) const = default;
};

struct OracleCell {
  Piece piece = Piece::None;
  Color color = Color::White;
  bool moved = false;
  bool operator==(const OracleCell&) const = default;
};

struct OracleBoard {
  std::array<OracleCell, 64> cells{};
  Color to_move = Color::White;

  OracleCell& at(Square s) { return cells[static_cast<std::size_t>((s.row - 1) * 8 + (s.col - 1))]; }
  const OracleCell& at(Square s) const { return cells[static_cast<std::size_t>((s.row - 1) * 8 + (s.col - 1))]; }
  bool operator==(const OracleBoard& o) const { return cells == o.cells; }
};

OracleBoard oracle_initial();
// Decodes the board movtrace; throws ArgumentError on inconsistent cells or
// a missing king. A cell holding only the lift mark is read as empty.
OracleBoard oracle_from_trace(const MovingTraceArray& board, const WorldDescription& wd, Color to_move);
MovingTraceArray trace_from_oracle(const OracleBoard& b, const WorldDescription& wd);

// Movement plus the own-capture ban, ignoring check.
std::vector<Square> oracle_pseudo_destinations(const OracleBoard& b, Square from);
std::vector<Square> oracle_legal_destinations(const OracleBoard& b, Square from);
bool oracle_in_check(const OracleBoard& b, Color c);
bool oracle_attacks(const OracleBoard& b, Square target, Color by);
OracleBoard oracle_apply(const OracleBoard& b, Square from, Square to);
std::vector<std::pair<Square, Square>> oracle_legal_moves(const OracleBoard& b);
std::string oracle_render(const OracleBoard& b);

// ---- engine-side helpers ----

Square chess_gaze(const Engine& e, const WorldState& ws, int agent);
int chess_phase(const Engine& e, const WorldState& ws, int agent);
bool chess_lifted(const Engine& e, const WorldState& ws, int agent);
Color chess_color(const Engine& e, const WorldState& ws, int agent);

}  // namespace edw
