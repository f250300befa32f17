#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "isobenefit/DnaAudit.hpp"
#include "isobenefit/Errors.hpp"
#include "isobenefit/Grid.hpp"
#include "isobenefit/Random.hpp"

namespace isobenefit {

struct GrowthParams {
  double p_build = 0.3;          // per frontier cell per step
  int max_builds_per_step = 0;   // 0 = unbounded
  int nature_block_side = 0;     // cells; 0 = derived from a_min_nature and cell size
  int composition_dimension = 6;
  std::uint64_t seed = 0;

  void validate() const {
    if (p_build < 0.0 || p_build > 1.0) throw ParamError("p_build must be in [0, 1]");
    if (max_builds_per_step < 0) throw ParamError("max_builds_per_step must be non-negative");
    if (nature_block_side < 0) throw ParamError("nature_block_side must be non-negative");
    if (composition_dimension < 1) throw ParamError("composition_dimension must be at least 1");
  }
};

struct SimConfig {
  int width = 0;
  int height = 0;
  double cell_size_m = 100.0;
  DnaParams dna;
  GrowthParams growth;
  std::optional<Coord> init_centrality;
  std::optional<Grid> init_raster;  // alternative to init_centrality
};

/// What one evolution round changed. Written by step(), read by tests and
/// metrics code.
struct StepEvents {
  std::vector<Coord> built;
  std::vector<Coord> spawned_centralities;
  std::vector<double> spawn_pre_minutes;  // walk time to the nearest prior centrality
  std::vector<Coord> gardens;
  std::vector<Coord> nature_block_origins;
};

struct SimState {
  Grid grid;
  std::vector<CentralitySpec> specs;
  std::uint64_t step_index = 0;
  SplitMix64 rng;
  DnaParams dna;
  GrowthParams growth;
  int next_spec_id = 0;
  StepEvents last_events;
};

inline int effective_nature_block_side(const SimConfig& cfg) {
  int side = cfg.growth.nature_block_side;
  if (side == 0) {
    side = static_cast<int>(std::ceil(std::sqrt(cfg.dna.a_min_nature_m2) / cfg.cell_size_m));
  }
  const double area = static_cast<double>(side) * static_cast<double>(side) *
                      cfg.cell_size_m * cfg.cell_size_m;
  if (area < cfg.dna.a_min_nature_m2) {
    throw ConfigError("nature_block_side " + std::to_string(side) + " gives a block of " +
                      fmt_double(area) + " m2, below a_min_nature_m2 " +
                      fmt_double(cfg.dna.a_min_nature_m2));
  }
  return side;
}

namespace detail {

/// Deterministic nearest-empty-block search: among all side x side all-Empty
/// placements (optionally excluding ones covering `exclude`), returns the one
/// whose nearest cell is closest to `target` by exact walk distance, provided
/// that distance is within limit_min. Ties resolve to the smallest origin
/// row, then column. On an unobstructed lattice the cell-to-cell step pair is
/// exact, so the limit check agrees with a full shortest-path field.
inline std::optional<Coord> find_nature_block(const Grid& grid, Coord target, int side,
                                              double limit_min, double walk_speed_kmh,
                                              std::optional<Coord> exclude = std::nullopt) {
  if (side > grid.width || side > grid.height) return std::nullopt;

  // Prefix sums of the empty-cell indicator for O(1) window emptiness tests.
  const int w = grid.width;
  const int h = grid.height;
  std::vector<int> prefix(static_cast<std::size_t>((w + 1) * (h + 1)), 0);
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      prefix[static_cast<std::size_t>((row + 1) * (w + 1) + col + 1)] =
          prefix[static_cast<std::size_t>(row * (w + 1) + col + 1)] +
          prefix[static_cast<std::size_t>((row + 1) * (w + 1) + col)] -
          prefix[static_cast<std::size_t>(row * (w + 1) + col)] +
          (grid.at(row, col) == CellState::Empty ? 1 : 0);
    }
  }
  const auto empty_in_window = [&](int r0, int c0) {
    const int r1 = r0 + side;
    const int c1 = c0 + side;
    return prefix[static_cast<std::size_t>(r1 * (w + 1) + c1)] -
           prefix[static_cast<std::size_t>(r0 * (w + 1) + c1)] -
           prefix[static_cast<std::size_t>(r1 * (w + 1) + c0)] +
           prefix[static_cast<std::size_t>(r0 * (w + 1) + c0)];
  };

  std::optional<Coord> best;
  StepCount best_steps;
  for (int r0 = 0; r0 + side <= h; ++r0) {
    for (int c0 = 0; c0 + side <= w; ++c0) {
      if (empty_in_window(r0, c0) != side * side) continue;
      if (exclude.has_value() && exclude->row >= r0 && exclude->row < r0 + side &&
          exclude->col >= c0 && exclude->col < c0 + side) {
        continue;
      }
      const Coord nearest{std::clamp(target.row, r0, r0 + side - 1),
                          std::clamp(target.col, c0, c0 + side - 1)};
      const StepCount steps = steps_between(target, nearest);
      if (!best.has_value() || step_count_less(steps, best_steps)) {
        if (travel_minutes(steps, grid.cell_size_m, walk_speed_kmh) <= limit_min) {
          best = Coord{r0, c0};
          best_steps = steps;
        }
      }
    }
  }
  return best;
}

inline void paint_block(Grid& grid, Coord origin, int side, CellState state) {
  for (int r = origin.row; r < origin.row + side; ++r) {
    for (int c = origin.col; c < origin.col + side; ++c) {
      grid.set(r, c, state);
    }
  }
}

/// Relaxes additional sources into an existing exact-distance field. The
/// result equals recomputing from the union of sources.
inline void add_sources_relax(std::vector<StepCount>& best, int width, int height,
                              const std::vector<int>& new_source_indices) {
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
  for (int idx : new_source_indices) {
    StepCount& cur = best[static_cast<std::size_t>(idx)];
    if (!cur.reached() || step_count_less(StepCount{0, 0}, cur)) {
      cur = StepCount{0, 0};
      heap.push(Entry{StepCount{0, 0}, idx});
    }
  }
  while (!heap.empty()) {
    const Entry e = heap.top();
    heap.pop();
    if (best[static_cast<std::size_t>(e.idx)] != e.d) continue;
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
}

/// Nearest Empty cell to `from` (excluded itself) by exact walk distance,
/// ties to the smallest row, then column. Returns the cell and its step pair.
inline std::optional<std::pair<Coord, StepCount>> nearest_empty(const Grid& grid, Coord from) {
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
  std::vector<StepCount> best(grid.cell_count());
  const int start = grid.index(from);
  best[static_cast<std::size_t>(start)] = StepCount{0, 0};
  heap.push(Entry{StepCount{0, 0}, start});
  while (!heap.empty()) {
    const Entry e = heap.top();
    heap.pop();
    if (best[static_cast<std::size_t>(e.idx)] != e.d) continue;
    if (e.idx != start && grid.cells[static_cast<std::size_t>(e.idx)] == CellState::Empty) {
      return std::make_pair(grid.coord(e.idx), e.d);
    }
    const int row = e.idx / grid.width;
    const int col = e.idx % grid.width;
    for (const auto& off : kNeighborOffsets8) {
      const int nr = row + off[0];
      const int nc = col + off[1];
      if (!grid.in_bounds(nr, nc)) continue;
      const bool diagonal = off[0] != 0 && off[1] != 0;
      const StepCount cand{e.d.orth + (diagonal ? 0 : 1), e.d.diag + (diagonal ? 1 : 0)};
      StepCount& cur = best[static_cast<std::size_t>(nr * grid.width + nc)];
      if (!cur.reached() || step_count_less(cand, cur)) {
        cur = cand;
        heap.push(Entry{cand, nr * grid.width + nc});
      }
    }
  }
  return std::nullopt;
}

inline double mean_attractiveness(const std::vector<CentralitySpec>& specs) {
  if (specs.empty()) return 1.0;
  double total = 0.0;
  for (const CentralitySpec& s : specs) total += s.attractiveness;
  return total / static_cast<double>(specs.size());
}

inline CentralitySpec draw_spec(SplitMix64& rng, int id, Coord cell, double anchor_attractiveness,
                                double tolerance, int dimension) {
  CentralitySpec spec;
  spec.id = id;
  spec.cells = {cell};
  // New centralities draw from the inner half of the similarity band: the
  // family mean drifts as the family grows, and half-band draws keep every
  // member inside the full tolerance of the final mean.
  const double half = 0.5 * tolerance;
  spec.attractiveness = rng.uniform(anchor_attractiveness * (1.0 - half),
                                    anchor_attractiveness * (1.0 + half));
  spec.composition = draw_simplex(rng, dimension);
  return spec;
}

}  // namespace detail

/// Verifies that the growth safety contract holds for a state: the
/// reachability and compactness principles (ii-v, gardens) pass wherever they
/// are non-vacuous. Returns the name of the first failing principle, if any.
inline std::optional<std::string> hard_audit_failure(const Grid& grid,
                                                     const std::vector<CentralitySpec>& specs,
                                                     const DnaParams& dna) {
  const AuditReport report = audit_all(grid, specs, dna);
  for (PrincipleId id : {PrincipleId::II, PrincipleId::III, PrincipleId::IV, PrincipleId::V,
                         PrincipleId::Gardens}) {
    const PrincipleResult& r = report.result(id);
    if (!r.vacuous && !r.passed) return std::string(principle_name(id));
  }
  return std::nullopt;
}

/// Builds the starting state: either a single seeded centrality with its
/// qualifying nature block, or a state loaded from an existing land-use grid
/// (one spec is synthesized per Centrality region). The resulting state must
/// satisfy the hard growth audit or an InfeasibleError names the failure.
inline SimState init_state(const SimConfig& cfg) {
  cfg.dna.validate();
  cfg.growth.validate();

  SimState state;
  state.dna = cfg.dna;
  state.growth = cfg.growth;
  state.rng = SplitMix64(cfg.growth.seed);

  if (cfg.init_raster.has_value() == cfg.init_centrality.has_value()) {
    throw ConfigError("exactly one of an initial centrality location or an input raster is required");
  }

  if (cfg.init_raster.has_value()) {
    state.grid = *cfg.init_raster;
    {
      SimConfig probe = cfg;
      probe.cell_size_m = state.grid.cell_size_m;
      effective_nature_block_side(probe);  // surface bad block/a_min combos now
    }
    for (const Region& region : connected_regions(state.grid, CellState::Centrality)) {
      CentralitySpec spec;
      spec.id = state.next_spec_id++;
      spec.cells = region.member_cells;
      spec.attractiveness = 1.0;
      spec.composition = draw_simplex(state.rng, cfg.growth.composition_dimension);
      state.specs.push_back(std::move(spec));
    }
  } else {
    state.grid = new_grid(cfg.width, cfg.height, cfg.cell_size_m, CellState::Empty);
    const Coord seed_cell = *cfg.init_centrality;
    if (!state.grid.in_bounds(seed_cell)) {
      throw ConfigError("initial centrality (" + std::to_string(seed_cell.row) + "," +
                        std::to_string(seed_cell.col) + ") outside grid");
    }
    const int side = effective_nature_block_side(cfg);
    state.grid.set(seed_cell, CellState::Centrality);
    state.specs.push_back(detail::draw_spec(state.rng, state.next_spec_id++, seed_cell, 1.0,
                                            cfg.dna.attractiveness_tolerance,
                                            cfg.growth.composition_dimension));
    const auto origin = detail::find_nature_block(state.grid, seed_cell, side, cfg.dna.t_star_min,
                                                  cfg.dna.walk_speed_kmh);
    if (!origin.has_value()) {
      throw InfeasibleError("cannot reserve a " + std::to_string(side) + "x" + std::to_string(side) +
                            " nature block within t_star of the centrality on a " +
                            std::to_string(cfg.width) + "x" + std::to_string(cfg.height) + " grid");
    }
    detail::paint_block(state.grid, *origin, side, CellState::Nature);
  }

  if (const auto failure = hard_audit_failure(state.grid, state.specs, state.dna)) {
    throw InfeasibleError("initial state fails principle " + *failure);
  }
  return state;
}

/// One evolution round. Frontier cells are enumerated row-major and each is
/// independently selected with probability p_build; a selected cell becomes
/// Built when the conversion keeps it inside every reachability horizon
/// (converting an Empty cell never changes any distance field, so other
/// cells cannot regress). A selected cell beyond the centrality horizon
/// spawns a new one-cell centrality instead, reserving a qualifying nature
/// block first when none is in range. A build whose green contact would
/// exceed the garden horizon converts its nearest Empty cell to a public
/// garden in the same round, which keeps the garden rule satisfied after
/// every step. A step with nothing feasible is a legal no-op.
inline SimState step(SimState state) {
  const DnaParams& dna = state.dna;
  Grid& grid = state.grid;
  const double walk = dna.walk_speed_kmh;
  const double so = orth_step_minutes(grid.cell_size_m, walk);
  const double sd = diag_step_minutes(grid.cell_size_m, walk);
  state.last_events = StepEvents{};

  auto mask_of = [&](auto&& pred) {
    std::vector<std::uint8_t> mask(grid.cell_count(), 0);
    for (std::size_t i = 0; i < grid.cell_count(); ++i) mask[i] = pred(grid.cells[i]) ? 1 : 0;
    return mask;
  };

  std::vector<StepCount> cent_pairs =
      exact_grid_distances(grid.width, grid.height, mask_of([](CellState s) { return s == CellState::Centrality; }));
  std::vector<StepCount> nature_pairs =
      exact_grid_distances(grid.width, grid.height, qualifying_nature_mask(grid, dna.a_min_nature_m2));
  std::vector<StepCount> green_pairs =
      exact_grid_distances(grid.width, grid.height, mask_of(is_green));

  std::vector<double> cent_min = materialize_steps(cent_pairs, so, sd);
  std::vector<double> nature_min = materialize_steps(nature_pairs, so, sd);
  std::vector<double> green_min = materialize_steps(green_pairs, so, sd);

  const std::vector<Coord> candidates = frontier(grid);
  std::vector<std::uint8_t> selected(candidates.size(), 0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    selected[i] = state.rng.bernoulli(state.growth.p_build) ? 1 : 0;
  }

  const int block_side = [&] {
    SimConfig probe;
    probe.cell_size_m = grid.cell_size_m;
    probe.dna = dna;
    probe.growth = state.growth;
    return effective_nature_block_side(probe);
  }();

  int builds = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!selected[i]) continue;
    const Coord cell = candidates[i];
    const int idx = grid.index(cell);
    if (grid.at(cell) != CellState::Empty) continue;  // consumed earlier this round

    const double to_centrality = cent_min[static_cast<std::size_t>(idx)];
    if (!(to_centrality <= dna.t_star_min)) {
      // Beyond the centrality horizon: spawn a new centrality here, provided
      // qualifying nature is (or can be put) in range.
      if (!(nature_min[static_cast<std::size_t>(idx)] <= dna.t_star_min)) {
        const auto origin = detail::find_nature_block(grid, cell, block_side, dna.t_star_min,
                                                      walk, cell);
        if (!origin.has_value()) continue;
        detail::paint_block(grid, *origin, block_side, CellState::Nature);
        state.last_events.nature_block_origins.push_back(*origin);
        std::vector<int> added;
        for (int r = origin->row; r < origin->row + block_side; ++r) {
          for (int c = origin->col; c < origin->col + block_side; ++c) {
            added.push_back(grid.index(r, c));
          }
        }
        detail::add_sources_relax(nature_pairs, grid.width, grid.height, added);
        detail::add_sources_relax(green_pairs, grid.width, grid.height, added);
        nature_min = materialize_steps(nature_pairs, so, sd);
        green_min = materialize_steps(green_pairs, so, sd);
      }
      grid.set(cell, CellState::Centrality);
      state.specs.push_back(detail::draw_spec(state.rng, state.next_spec_id++, cell,
                                              detail::mean_attractiveness(state.specs),
                                              dna.attractiveness_tolerance,
                                              state.growth.composition_dimension));
      state.last_events.spawned_centralities.push_back(cell);
      state.last_events.spawn_pre_minutes.push_back(to_centrality);
      detail::add_sources_relax(cent_pairs, grid.width, grid.height, {idx});
      cent_min = materialize_steps(cent_pairs, so, sd);
      continue;
    }

    // Inside the centrality horizon: regular accretion.
    if (state.growth.max_builds_per_step > 0 && builds >= state.growth.max_builds_per_step) continue;
    if (!(nature_min[static_cast<std::size_t>(idx)] <= dna.t_star_min)) continue;

    if (green_min[static_cast<std::size_t>(idx)] <= dna.garden_time_min) {
      grid.set(cell, CellState::Built);
      state.last_events.built.push_back(cell);
      ++builds;
      continue;
    }
    // Green contact too far: building here requires pairing the conversion
    // with a garden at the nearest empty cell.
    const auto repair = detail::nearest_empty(grid, cell);
    if (!repair.has_value()) continue;
    if (!(accumulate_steps(repair->second, so, sd) <= dna.garden_time_min)) continue;
    grid.set(cell, CellState::Built);
    state.last_events.built.push_back(cell);
    ++builds;
    grid.set(repair->first, CellState::Garden);
    state.last_events.gardens.push_back(repair->first);
    detail::add_sources_relax(green_pairs, grid.width, grid.height, {grid.index(repair->first)});
    green_min = materialize_steps(green_pairs, so, sd);
  }

  state.step_index += 1;
  return state;
}

/// Per-step observability row.
struct StepMetrics {
  std::uint64_t step = 0;
  int built_cells = 0;
  int centrality_count = 0;
  double nature_area_m2 = 0.0;
  int garden_cells = 0;
  double benefit_min = 0.0;
  double benefit_cv = 0.0;  // NaN when undefined
  double worst_walk_centrality_min = 0.0;
  double worst_walk_nature_min = 0.0;
  double worst_walk_green_min = 0.0;
};

inline StepMetrics compute_metrics(const SimState& state) {
  const Grid& grid = state.grid;
  StepMetrics m;
  m.step = state.step_index;
  m.built_cells = grid.count(CellState::Built);
  m.centrality_count = static_cast<int>(state.specs.size());
  m.nature_area_m2 = static_cast<double>(grid.count(CellState::Nature)) * grid.cell_area_m2();
  m.garden_cells = grid.count(CellState::Garden);

  const auto kernels = kernels_from_specs(state.specs, state.dna);
  const BenefitField field = benefit_field(grid, kernels, DistanceMode::StraightLine);
  const BenefitStats stats = benefit_stats(field, grid, mask_dwellers);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  m.benefit_min = stats.empty_mask ? nan : stats.min;
  m.benefit_cv = stats.coefficient_of_variation.value_or(nan);

  const auto worst_over = [&](const DistanceField& f, auto&& pred) {
    double worst = 0.0;
    for (int row = 0; row < grid.height; ++row) {
      for (int col = 0; col < grid.width; ++col) {
        if (pred(grid.at(row, col))) worst = std::max(worst, f.at(row, col));
      }
    }
    return worst;
  };
  const DistanceField cent = distance_field(
      grid, [](CellState s) { return s == CellState::Centrality; }, state.dna.walk_speed_kmh);
  m.worst_walk_centrality_min = worst_over(cent, [](CellState s) { return s == CellState::Built; });
  const DistanceField nature = distance_field_from_mask(
      grid, qualifying_nature_mask(grid, state.dna.a_min_nature_m2), state.dna.walk_speed_kmh);
  m.worst_walk_nature_min = worst_over(nature, mask_dwellers);
  const DistanceField green = distance_field(grid, is_green, state.dna.walk_speed_kmh);
  m.worst_walk_green_min = worst_over(green, [](CellState s) { return s == CellState::Built; });
  return m;
}

/// Output hooks; the I/O layer provides file-backed implementations.
struct RunSinks {
  std::function<void(const StepMetrics&)> on_metrics;
  std::function<void(const SimState&)> on_snapshot;
};

/// Runs n_steps evolution rounds. Emits a metrics row for the incoming state
/// and for every step; emits snapshots for the incoming state, every
/// snapshot_every steps (when positive), and the final state.
inline SimState run(SimState state, int n_steps, int snapshot_every, const RunSinks& sinks = {}) {
  if (n_steps < 0) throw ParamError("n_steps must be non-negative");
  const auto emit_metrics = [&](const SimState& s) {
    if (sinks.on_metrics) sinks.on_metrics(compute_metrics(s));
  };
  const auto emit_snapshot = [&](const SimState& s) {
    if (sinks.on_snapshot) sinks.on_snapshot(s);
  };
  emit_metrics(state);
  emit_snapshot(state);
  for (int i = 0; i < n_steps; ++i) {
    state = step(std::move(state));
    emit_metrics(state);
    const bool on_cadence = snapshot_every > 0 && state.step_index % static_cast<std::uint64_t>(snapshot_every) == 0;
    if (on_cadence || i == n_steps - 1) emit_snapshot(state);
  }
  return state;
}

}  // namespace isobenefit
