#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include "isobenefit/Errors.hpp"

namespace isobenefit {

enum class CellState : std::uint8_t { Empty, Built, Centrality, Nature, Garden };

inline bool is_settlement(CellState s) { return s == CellState::Built || s == CellState::Centrality; }
inline bool is_green(CellState s) { return s == CellState::Nature || s == CellState::Garden; }

struct Coord {
  int row = 0;
  int col = 0;
  auto operator<=>(const Coord&) const = default;
};

/// Rectangular lattice of cell states with a physical cell size in meters.
/// Row-major storage; immutable by convention once handed to the analysis
/// functions (they take it by const reference and never mutate).
struct Grid {
  int width = 0;
  int height = 0;
  double cell_size_m = 0.0;
  std::vector<CellState> cells;

  int index(int row, int col) const { return row * width + col; }
  int index(Coord c) const { return c.row * width + c.col; }
  Coord coord(int idx) const { return Coord{idx / width, idx % width}; }

  bool in_bounds(int row, int col) const { return row >= 0 && row < height && col >= 0 && col < width; }
  bool in_bounds(Coord c) const { return in_bounds(c.row, c.col); }

  CellState at(int row, int col) const { return cells[static_cast<std::size_t>(index(row, col))]; }
  CellState at(Coord c) const { return at(c.row, c.col); }
  void set(int row, int col, CellState s) { cells[static_cast<std::size_t>(index(row, col))] = s; }
  void set(Coord c, CellState s) { set(c.row, c.col, s); }

  std::size_t cell_count() const { return cells.size(); }
  double cell_area_m2() const { return cell_size_m * cell_size_m; }

  int count(CellState s) const {
    return static_cast<int>(std::count(cells.begin(), cells.end(), s));
  }

  bool operator==(const Grid&) const = default;
};

inline Grid new_grid(int width, int height, double cell_size_m, CellState fill) {
  if (width <= 0 || height <= 0) {
    throw DimensionError("grid dimensions must be positive, got " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
  if (!(cell_size_m > 0.0)) {
    throw DimensionError("cell size must be positive, got " + std::to_string(cell_size_m));
  }
  Grid g;
  g.width = width;
  g.height = height;
  g.cell_size_m = cell_size_m;
  g.cells.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  return g;
}

// 8-neighborhood offsets, row-major scan order.
inline constexpr int kNeighborOffsets8[8][2] = {
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}};
inline constexpr int kNeighborOffsets4[4][2] = {{-1, 0}, {0, -1}, {0, 1}, {1, 0}};

// ---------------------------------------------------------------------------
// Exact lattice distances.
//
// Every 8-connected path length is orth*1 + diag*sqrt(2) in cell units. The
// search keeps the integer pair (orth, diag) per cell and compares path
// lengths exactly in integer arithmetic (sqrt(2) is irrational, so distinct
// pairs never represent equal lengths and the per-cell optimum is unique).
// Floating-point values are produced only afterwards, by one canonical
// accumulation rule, which makes results independent of visit order and
// bit-reproducible across algorithms that agree on the optimal pairs.
// ---------------------------------------------------------------------------

struct StepCount {
  std::int32_t orth = -1;
  std::int32_t diag = -1;

  bool reached() const { return orth >= 0; }
  bool operator==(const StepCount&) const = default;
};

/// Exact comparison of a.orth + a.diag*sqrt(2) < b.orth + b.diag*sqrt(2).
inline bool step_count_less(StepCount a, StepCount b) {
  const std::int64_t da = static_cast<std::int64_t>(a.orth) - b.orth;
  const std::int64_t db = static_cast<std::int64_t>(b.diag) - a.diag;
  // Decide da < db * sqrt(2).
  if (da < 0 && db >= 0) return true;
  if (da >= 0 && db <= 0) return false;
  if (da >= 0) return da * da < 2 * db * db;  // both sides positive
  return 2 * db * db < da * da;               // both sides negative
}

/// Multi-source shortest paths over the 8-connected lattice, exact pairs.
/// sources[i] != 0 marks cell i as a source. Unreached cells keep orth = -1.
inline std::vector<StepCount> exact_grid_distances(int width, int height,
                                                   const std::vector<std::uint8_t>& sources) {
  const int n = width * height;
  std::vector<StepCount> best(static_cast<std::size_t>(n));

  struct Entry {
    StepCount d;
    std::int32_t idx;
  };
  struct EntryGreater {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.d != b.d) return step_count_less(b.d, a.d);
      return a.idx > b.idx;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, EntryGreater> heap;

  for (int i = 0; i < n; ++i) {
    if (sources[static_cast<std::size_t>(i)]) {
      best[static_cast<std::size_t>(i)] = StepCount{0, 0};
      heap.push(Entry{StepCount{0, 0}, i});
    }
  }

  while (!heap.empty()) {
    const Entry e = heap.top();
    heap.pop();
    if (best[static_cast<std::size_t>(e.idx)] != e.d) continue;  // stale
    const int row = e.idx / width;
    const int col = e.idx % width;
    for (const auto& off : kNeighborOffsets8) {
      const int nr = row + off[0];
      const int nc = col + off[1];
      if (nr < 0 || nr >= height || nc < 0 || nc >= width) continue;
      const bool diagonal = off[0] != 0 && off[1] != 0;
      const StepCount cand{e.d.orth + (diagonal ? 0 : 1), e.d.diag + (diagonal ? 1 : 0)};
      StepCount& cur = best[static_cast<std::size_t>(nr * width + nc)];
      if (!cur.reached() || step_count_less(cand, cur)) {
        cur = cand;
        heap.push(Entry{cand, nr * width + nc});
      }
    }
  }
  return best;
}

/// Canonical scalar value of a step pair: accumulate the diagonal step cost
/// diag times, then the orthogonal step cost orth times, in that order. All
/// travel values in the library come from this one rule.
inline double accumulate_steps(StepCount d, double step_orth, double step_diag) {
  double v = 0.0;
  for (std::int32_t i = 0; i < d.diag; ++i) v += step_diag;
  for (std::int32_t i = 0; i < d.orth; ++i) v += step_orth;
  return v;
}

/// Materializes a whole pair field through a shared table so repeated pairs
/// cost O(1). Unreached pairs map to +infinity.
inline std::vector<double> materialize_steps(const std::vector<StepCount>& pairs, double step_orth,
                                             double step_diag) {
  std::int32_t max_orth = -1;
  std::int32_t max_diag = -1;
  for (const StepCount& p : pairs) {
    if (!p.reached()) continue;
    max_orth = std::max(max_orth, p.orth);
    max_diag = std::max(max_diag, p.diag);
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> out(pairs.size(), inf);
  if (max_orth < 0) return out;

  const std::size_t cols = static_cast<std::size_t>(max_diag) + 1;
  std::vector<double> table((static_cast<std::size_t>(max_orth) + 1) * cols);
  for (std::int32_t b = 0; b <= max_diag; ++b) {
    table[static_cast<std::size_t>(b)] = (b == 0) ? 0.0 : table[static_cast<std::size_t>(b - 1)] + step_diag;
  }
  for (std::int32_t a = 1; a <= max_orth; ++a) {
    for (std::int32_t b = 0; b <= max_diag; ++b) {
      table[static_cast<std::size_t>(a) * cols + static_cast<std::size_t>(b)] =
          table[static_cast<std::size_t>(a - 1) * cols + static_cast<std::size_t>(b)] + step_orth;
    }
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].reached()) {
      out[i] = table[static_cast<std::size_t>(pairs[i].orth) * cols + static_cast<std::size_t>(pairs[i].diag)];
    }
  }
  return out;
}

/// Minutes per meter of walking.
inline double minutes_per_meter(double walk_speed_kmh) {
  return 60.0 / (walk_speed_kmh * 1000.0);
}

/// Orthogonal / diagonal step costs in minutes.
inline double orth_step_minutes(double cell_size_m, double walk_speed_kmh) {
  return cell_size_m * minutes_per_meter(walk_speed_kmh);
}
inline double diag_step_minutes(double cell_size_m, double walk_speed_kmh) {
  return cell_size_m * std::numbers::sqrt2_v<double> * minutes_per_meter(walk_speed_kmh);
}

/// Travel time in minutes for a given step pair.
inline double travel_minutes(StepCount d, double cell_size_m, double walk_speed_kmh) {
  return accumulate_steps(d, orth_step_minutes(cell_size_m, walk_speed_kmh),
                          diag_step_minutes(cell_size_m, walk_speed_kmh));
}

/// Exact 8-connected step pair between two cells of an unobstructed lattice
/// (all cells are walkable, so this equals the shortest-path pair).
inline StepCount steps_between(Coord a, Coord b) {
  const std::int32_t dr = std::abs(a.row - b.row);
  const std::int32_t dc = std::abs(a.col - b.col);
  return StepCount{std::max(dr, dc) - std::min(dr, dc), std::min(dr, dc)};
}

/// Per-cell travel time in minutes to the nearest source cell. Unreachable
/// cells carry +infinity, which is the dedicated marker (never a large finite
/// value); query with DistanceField::unreachable.
struct DistanceField {
  int width = 0;
  int height = 0;
  std::vector<double> minutes;
  std::vector<StepCount> steps;  // exact pairs backing the minutes

  double at(int row, int col) const { return minutes[static_cast<std::size_t>(row * width + col)]; }
  double at(Coord c) const { return at(c.row, c.col); }
  bool unreachable(int row, int col) const { return std::isinf(at(row, col)); }
  bool unreachable(Coord c) const { return unreachable(c.row, c.col); }
};

inline DistanceField distance_field_from_mask(const Grid& grid, const std::vector<std::uint8_t>& sources,
                                              double walk_speed_kmh) {
  if (!(walk_speed_kmh > 0.0)) {
    throw ParamError("walk speed must be positive, got " + std::to_string(walk_speed_kmh));
  }
  DistanceField f;
  f.width = grid.width;
  f.height = grid.height;
  f.steps = exact_grid_distances(grid.width, grid.height, sources);
  f.minutes = materialize_steps(f.steps, orth_step_minutes(grid.cell_size_m, walk_speed_kmh),
                                diag_step_minutes(grid.cell_size_m, walk_speed_kmh));
  return f;
}

/// Multi-source travel-time field with sources selected by cell state.
/// All cells are traversable regardless of state; no source cell anywhere
/// yields an all-unreachable field (not an error).
inline DistanceField distance_field(const Grid& grid, const std::function<bool(CellState)>& sources,
                                    double walk_speed_kmh) {
  std::vector<std::uint8_t> mask(grid.cell_count(), 0);
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    if (sources(grid.cells[i])) mask[i] = 1;
  }
  return distance_field_from_mask(grid, mask, walk_speed_kmh);
}

// ---------------------------------------------------------------------------
// Connected regions (4-connectivity).
// ---------------------------------------------------------------------------

/// Maximal 4-connected set of same-state cells. member_cells is sorted
/// row-major; regions are ordered by their smallest member.
struct Region {
  CellState state_class = CellState::Empty;
  std::vector<Coord> member_cells;
  double area_m2 = 0.0;
};

inline std::vector<Region> connected_regions(const Grid& grid, CellState state_class) {
  std::vector<std::uint8_t> seen(grid.cell_count(), 0);
  std::vector<Region> regions;
  std::vector<int> stack;
  for (int start = 0; start < static_cast<int>(grid.cell_count()); ++start) {
    if (seen[static_cast<std::size_t>(start)] || grid.cells[static_cast<std::size_t>(start)] != state_class) {
      continue;
    }
    Region region;
    region.state_class = state_class;
    stack.clear();
    stack.push_back(start);
    seen[static_cast<std::size_t>(start)] = 1;
    while (!stack.empty()) {
      const int idx = stack.back();
      stack.pop_back();
      region.member_cells.push_back(grid.coord(idx));
      const int row = idx / grid.width;
      const int col = idx % grid.width;
      for (const auto& off : kNeighborOffsets4) {
        const int nr = row + off[0];
        const int nc = col + off[1];
        if (!grid.in_bounds(nr, nc)) continue;
        const int nidx = nr * grid.width + nc;
        if (seen[static_cast<std::size_t>(nidx)] || grid.cells[static_cast<std::size_t>(nidx)] != state_class) {
          continue;
        }
        seen[static_cast<std::size_t>(nidx)] = 1;
        stack.push_back(nidx);
      }
    }
    std::sort(region.member_cells.begin(), region.member_cells.end());
    region.area_m2 = static_cast<double>(region.member_cells.size()) * grid.cell_area_m2();
    regions.push_back(std::move(region));
  }
  // The scan starts regions at their first row-major cell, but flood fill can
  // reach a smaller coordinate later only within one region, never across
  // regions, so the discovery order already matches the smallest member.
  return regions;
}

/// Empty cells 8-adjacent to at least one Built or Centrality cell, row-major.
inline std::vector<Coord> frontier(const Grid& grid) {
  std::vector<Coord> out;
  for (int row = 0; row < grid.height; ++row) {
    for (int col = 0; col < grid.width; ++col) {
      if (grid.at(row, col) != CellState::Empty) continue;
      bool touches = false;
      for (const auto& off : kNeighborOffsets8) {
        const int nr = row + off[0];
        const int nc = col + off[1];
        if (grid.in_bounds(nr, nc) && is_settlement(grid.at(nr, nc))) {
          touches = true;
          break;
        }
      }
      if (touches) out.push_back(Coord{row, col});
    }
  }
  return out;
}

}  // namespace isobenefit
