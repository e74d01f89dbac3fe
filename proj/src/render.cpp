#include "edw/render.hpp"

#include <json.hpp>

#include "edw/errors.hpp"

namespace edw {

namespace {

char symbol_char(const std::string& name, int idx, bool action) {
  if (idx == 0) return '.';
  if (action && idx == 3) return '-';
  return name.empty() ? '?' : name[0];
}

char obs_char(const SymbolAlphabets& al, int obs) {
  if (obs == kUndef) return '*';
  return symbol_char(al.observations[static_cast<std::size_t>(obs)], obs, false);
}

}  // namespace

std::string render_stream(const StreamLog& log, const SymbolAlphabets& al, std::size_t window) {
  if (log.empty() || window == 0) return "";
  std::size_t from = log.size() > window ? log.size() - window : 0;
  std::string obs, mask, act;
  for (std::size_t i = from; i < log.size(); ++i) {
    obs += i == 0 ? '.' : obs_char(al, log[i - 1].observation);
    mask += static_cast<char>('0' + log[i].mask);
    act += symbol_char(al.actions[static_cast<std::size_t>(log[i].action)], log[i].action, true);
  }
  return obs + "\n" + mask + "\n" + act + "\n";
}

std::string render_board(const Engine& e, const WorldState& ws, int agent) {
  const WorldDescription& wd = e.world();
  if (wd.model_index("horiz") < 0 || wd.model_index("vert") < 0 || wd.trace_index("board") < 0)
    throw ArgumentError("board rendering needs horiz, vert and a board trace");
  const MovingTraceArray& board = e.trace(ws, agent, "board");
  if (board.cells.size() != 64) throw ArgumentError("board trace does not have 64 cells");
  const ActiveSet& h = e.active(ws, agent, "horiz");
  const ActiveSet& v = e.active(ws, agent, "vert");
  int gc = h.size() == 1 ? static_cast<int>(h.front()) : -1;
  int gr = v.size() == 1 ? static_cast<int>(v.front()) : -1;

  const char* pieces[] = {"king", "queen", "rook", "bishop", "knight", "pawn"};
  const char letters[] = "KQRBNP";
  int white = wd.marker_index("white"), lifted = wd.marker_index("Lifted");
  auto letter = [&](const Cell& c) {
    for (int i = 0; i < 6; ++i) {
      int m = wd.marker_index(pieces[i]);
      if (m >= 0 && cell_has(c, static_cast<MarkerId>(m))) {
        bool w = white >= 0 && cell_has(c, static_cast<MarkerId>(white));
        return w ? letters[i] : static_cast<char>(letters[i] - 'A' + 'a');
      }
    }
    return '.';
  };
  std::string out;
  for (int row = 7; row >= 0; --row) {
    out += static_cast<char>('1' + row);
    out += ' ';
    for (int col = 0; col < 8; ++col) {
      const Cell& c = board.cells[static_cast<std::size_t>(col * 8 + row)];
      bool gaze = col == gc && row == gr;
      bool src = lifted >= 0 && cell_has(c, static_cast<MarkerId>(lifted));
      out += gaze ? '[' : src ? '{' : ' ';
      out += letter(c);
      out += gaze ? ']' : src ? '}' : ' ';
    }
    out += '\n';
  }
  out += "   a  b  c  d  e  f  g  h\n";
  if (wd.trace_index("lifted") >= 0) {
    const MovingTraceArray& lt = e.trace(ws, agent, "lifted");
    if (!lt.cells.empty()) {
      char l = letter(lt.cells[0]);
      if (l != '.') out += std::string("lifted ") + l + "\n";
    }
  }
  return out;
}

std::string render_jsonl(const StreamEntry& en, const SymbolAlphabets& al) {
  nlohmann::ordered_json j;
  j["t"] = en.t;
  j["agent"] = en.agent;
  j["obs"] = al.observation_name(en.observation);
  j["mask"] = en.mask;
  j["action"] = al.actions[static_cast<std::size_t>(en.action)];
  j["fired_rules"] = en.fired_rules;
  if (en.terminal) j["terminal"] = true;
  return j.dump() + "\n";
}

}  // namespace edw
