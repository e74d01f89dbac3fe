#include "edw/traces.hpp"

#include <algorithm>

#include "edw/errors.hpp"

namespace edw {

void cell_add(Cell& c, MarkerId m) { c.insert(std::upper_bound(c.begin(), c.end(), m), m); }

bool cell_remove(Cell& c, MarkerId m) {
  auto it = std::lower_bound(c.begin(), c.end(), m);
  if (it == c.end() || *it != m) return false;
  c.erase(it);
  return true;
}

bool cell_has(const Cell& c, MarkerId m) { return std::binary_search(c.begin(), c.end(), m); }

const Cell& MovingTraceArray::at(StateKey k) const {
  if (sparse) {
    auto it = set_cells.find(k);
    return it == set_cells.end() ? default_cell : it->second;
  }
  if (k < 0 || static_cast<std::size_t>(k) >= cells.size())
    throw DescriptionError("trace " + id + ": no cell " + std::to_string(k));
  return cells[static_cast<std::size_t>(k)];
}

Cell& MovingTraceArray::at_mut(StateKey k) {
  if (sparse) {
    auto it = set_cells.find(k);
    if (it == set_cells.end()) it = set_cells.emplace(k, default_cell).first;
    return it->second;
  }
  if (k < 0 || static_cast<std::size_t>(k) >= cells.size())
    throw DescriptionError("trace " + id + ": no cell " + std::to_string(k));
  return cells[static_cast<std::size_t>(k)];
}

bool MovingTraceArray::valid_key(StateKey k) const {
  return sparse || (k >= 0 && static_cast<std::size_t>(k) < cells.size());
}

void MovingTraceArray::compact() {
  for (auto it = set_cells.begin(); it != set_cells.end();) {
    if (it->second == default_cell) it = set_cells.erase(it);
    else ++it;
  }
}

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= h >> 31;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 29;
  return h;
}

std::uint64_t hash_cell(std::uint64_t h, const Cell& c) {
  h = mix(h, c.size());
  for (MarkerId m : c) h = mix(h, m);
  return h;
}

}  // namespace

std::uint64_t MovingTraceArray::hash(std::uint64_t seed) const {
  std::uint64_t h = mix(seed, sparse);
  if (sparse) {
    h = hash_cell(h, default_cell);
    for (const auto& [k, c] : set_cells) {
      if (c == default_cell) continue;
      h = mix(h, static_cast<std::uint64_t>(k));
      h = hash_cell(h, c);
    }
  } else {
    for (const auto& c : cells) h = hash_cell(h, c);
  }
  return h;
}

bool MovingTraceArray::operator==(const MovingTraceArray& o) const {
  if (id != o.id || over != o.over || sparse != o.sparse) return false;
  if (!sparse) return cells == o.cells;
  if (default_cell != o.default_cell) return false;
  auto a = *this, b = o;
  a.compact();
  b.compact();
  return a.set_cells == b.set_cells;
}

const char* to_string(EffectOp op) {
  switch (op) {
    case EffectOp::AddMarker: return "add";
    case EffectOp::RemoveMarker: return "remove";
    case EffectOp::MoveMarkers: return "move";
    case EffectOp::ClearCell: return "clear";
    case EffectOp::CopyCell: return "copy";
    case EffectOp::Remember: return "remember";
    case EffectOp::SetState: return "set";
  }
  return "?";
}

std::string to_string(const CellRef& r) {
  switch (r.cell.kind) {
    case CellSelector::Kind::Current: return r.trace + "@cur";
    case CellSelector::Kind::Explicit: return r.trace + "@" + r.cell.name;
    case CellSelector::Kind::Remembered: return r.trace + "@$" + r.cell.name;
  }
  return r.trace;
}

std::string to_string(const TraceEffect& e) {
  switch (e.op) {
    case EffectOp::AddMarker:
    case EffectOp::RemoveMarker:
      return std::string(to_string(e.op)) + " " + to_string(e.target) + " " + e.marker;
    case EffectOp::MoveMarkers:
      return "move " + e.marker + " " + to_string(e.source) + " -> " + to_string(e.target);
    case EffectOp::ClearCell: return "clear " + to_string(e.target);
    case EffectOp::CopyCell: return "copy " + to_string(e.source) + " -> " + to_string(e.target);
    case EffectOp::Remember: return "remember " + e.reg + " " + to_string(e.target);
    case EffectOp::SetState: return "set " + e.model + " = " + e.state;
  }
  return {};
}

StateKey current_cell(const MovingTraceArray& trace, const ActiveSet& active) {
  if (active.size() != 1)
    throw AmbiguityError("trace " + trace.id + ": current cell needs a single active state, got " +
                         std::to_string(active.size()));
  StateKey k = active.front();
  if (!trace.valid_key(k)) throw DescriptionError("trace " + trace.id + ": no cell for active state");
  return k;
}

StateKey resolve_cell(const CellSelector& sel, int trace_index, const CellResolver& r) {
  switch (sel.kind) {
    case CellSelector::Kind::Current: return r.current(trace_index);
    case CellSelector::Kind::Explicit: return sel.key;
    case CellSelector::Kind::Remembered: return r.remembered(sel.reg);
  }
  return -1;
}

MarkerId resolve_marker(const TraceEffect& e, const CellResolver& r) {
  if (e.marker_via >= 0) return r.marker_via(e.marker_via);
  return static_cast<MarkerId>(e.marker_index);
}

bool edit_cells(EffectOp op, Cell* src, Cell& dst, MarkerId marker, bool all_markers) {
  switch (op) {
    case EffectOp::AddMarker: cell_add(dst, marker); return true;
    case EffectOp::RemoveMarker: return cell_remove(dst, marker);
    case EffectOp::ClearCell: {
      bool any = !dst.empty();
      dst.clear();
      return any;
    }
    case EffectOp::CopyCell: dst = *src; return true;
    case EffectOp::MoveMarkers: {
      if (src == &dst) return false;
      if (all_markers) {
        bool any = !src->empty();
        for (MarkerId m : *src) cell_add(dst, m);
        src->clear();
        return any;
      }
      if (!cell_remove(*src, marker)) return false;
      cell_add(dst, marker);
      return true;
    }
    default: return false;
  }
}

MovingTraceArray apply_effect(const MovingTraceArray& trace, const TraceEffect& e,
                              const CellResolver& r) {
  if (e.op == EffectOp::Remember || e.op == EffectOp::SetState) return trace;
  MovingTraceArray out = trace;
  StateKey t = resolve_cell(e.target.cell, e.target.trace_index, r);
  bool all = e.marker == "*";
  MarkerId m = (all || e.op == EffectOp::ClearCell || e.op == EffectOp::CopyCell) ? 0 : resolve_marker(e, r);
  if (e.op == EffectOp::MoveMarkers || e.op == EffectOp::CopyCell) {
    StateKey s = resolve_cell(e.source.cell, e.source.trace_index, r);
    if (s == t) return out;
    Cell src = out.at(s);
    Cell& dst = out.at_mut(t);
    edit_cells(e.op, &src, dst, m, all);
    out.at_mut(s) = src;
  } else {
    edit_cells(e.op, nullptr, out.at_mut(t), m, all);
  }
  if (out.sparse) out.compact();
  return out;
}

const Cell& markers_at(const MovingTraceArray& trace, StateKey k) { return trace.at(k); }

}  // namespace edw
