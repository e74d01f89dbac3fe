#pragma once

#include <string>

#include "edw/engine.hpp"

namespace edw {

// Three rows over the last `window` entries: the observation each action was
// chosen after, the mask digit, the action. Nil and the fourth action print
// as '.' and '-', undef as '*'. Empty log, empty string.
std::string render_stream(const StreamLog& log, const SymbolAlphabets& al, std::size_t window = 50);

// 8x8 grid of the shared board trace, row 8 on top. Uppercase white,
// lowercase black; the gaze cell in [ ], the lift source in { }.
// ArgumentError when the world has no horiz/vert/board trio.
std::string render_board(const Engine& e, const WorldState& ws, int agent);

// One JSON object per entry.
std::string render_jsonl(const StreamEntry& en, const SymbolAlphabets& al);

}  // namespace edw
