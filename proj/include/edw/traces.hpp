#pragma once

#include <boost/container/small_vector.hpp>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "edw/model.hpp"

namespace edw {

using MarkerId = std::uint16_t;
// Sorted multiset of marker ids.
using Cell = boost::container::small_vector<MarkerId, 4>;

void cell_add(Cell& c, MarkerId m);
// Removes one copy; false if the marker was absent.
bool cell_remove(Cell& c, MarkerId m);
bool cell_has(const Cell& c, MarkerId m);

struct MovingTraceArray {
  std::string id;
  std::string over;
  bool sparse = false;  // over a counter: finite support plus a default cell
  std::vector<Cell> cells;
  std::map<StateKey, Cell> set_cells;
  Cell default_cell;

  const Cell& at(StateKey k) const;
  Cell& at_mut(StateKey k);
  bool valid_key(StateKey k) const;
  // Drops sparse cells equal to the default.
  void compact();
  std::uint64_t hash(std::uint64_t seed) const;

  bool operator==(const MovingTraceArray& o) const;
};

enum class EffectOp : std::uint8_t {
  AddMarker,
  RemoveMarker,
  MoveMarkers,  // marker (or all with "*") from source cell to target cell
  ClearCell,
  CopyCell,     // target cell := source cell
  Remember,     // register := key of target cell
  SetState,     // model forced into a single state
};

const char* to_string(EffectOp op);

struct CellSelector {
  enum class Kind : std::uint8_t { Current, Explicit, Remembered };
  Kind kind = Kind::Current;
  std::string name;  // state for Explicit, register for Remembered
  StateKey key = -1;
  int reg = -1;

  bool operator==(const CellSelector& o) const { return kind == o.kind && name == o.name; }
};

struct CellRef {
  std::string trace;
  CellSelector cell;
  int trace_index = -1;

  bool operator==(const CellRef& o) const { return trace == o.trace && cell == o.cell; }
};

struct TraceEffect {
  EffectOp op = EffectOp::AddMarker;
  CellRef target;
  CellRef source;
  std::string marker;  // name, "*" for every marker, "@model" for the model's state name
  std::string reg;
  std::string model;
  std::string state;
  SourcePos pos;

  int marker_index = -1;
  int marker_via = -1;
  int reg_index = -1;
  int model_index = -1;
  StateKey state_key = -1;

  bool operator==(const TraceEffect& o) const {
    return op == o.op && target == o.target && source == o.source && marker == o.marker &&
           reg == o.reg && model == o.model && state == o.state;
  }
};

std::string to_string(const CellRef& r);
std::string to_string(const TraceEffect& e);

// Answers the run-time parts of a cell selector.
class CellResolver {
 public:
  virtual ~CellResolver() = default;
  virtual StateKey current(int trace_index) const = 0;
  virtual StateKey remembered(int reg) const = 0;
  // Marker named after the active state of a model ("@color").
  virtual MarkerId marker_via(int model) const = 0;
};

// Key of the unique active state; the key space is the one of `over`.
StateKey current_cell(const MovingTraceArray& trace, const ActiveSet& active);
StateKey resolve_cell(const CellSelector& sel, int trace_index, const CellResolver& r);
MarkerId resolve_marker(const TraceEffect& e, const CellResolver& r);

// For effects whose cells all live in `trace`. Remember and SetState leave it
// untouched.
MovingTraceArray apply_effect(const MovingTraceArray& trace, const TraceEffect& effect,
                              const CellResolver& r);
// Shared kernel: edits `dst` (and `src` for moves) in place. Returns false
// when the effect had nothing to do, e.g. removing an absent marker.
bool edit_cells(EffectOp op, Cell* src, Cell& dst, MarkerId marker, bool all_markers);

const Cell& markers_at(const MovingTraceArray& trace, StateKey k);

}  // namespace edw
