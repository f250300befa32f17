#include "catch2/catch_amalgamated.hpp"

#include "isobenefit/Morphogenesis.hpp"
#include "isobenefit/Raster.hpp"

using namespace isobenefit;

namespace {

SimConfig small_config(std::uint64_t seed) {
  SimConfig cfg;
  cfg.width = 60;
  cfg.height = 60;
  cfg.cell_size_m = 100.0;
  cfg.dna.walk_speed_kmh = 2.0;  // 1 km horizon keeps small runs polycentric
  cfg.growth.seed = seed;
  cfg.growth.p_build = 0.6;
  cfg.init_centrality = Coord{30, 30};
  return cfg;
}

bool states_equal(const SimState& a, const SimState& b) {
  if (serialize_raster(a.grid) != serialize_raster(b.grid)) return false;
  if (a.step_index != b.step_index) return false;
  if (a.rng.state() != b.rng.state()) return false;
  if (a.specs.size() != b.specs.size()) return false;
  for (std::size_t i = 0; i < a.specs.size(); ++i) {
    if (a.specs[i].id != b.specs[i].id) return false;
    if (a.specs[i].cells != b.specs[i].cells) return false;
    if (a.specs[i].attractiveness != b.specs[i].attractiveness) return false;
    if (a.specs[i].composition != b.specs[i].composition) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("init_state seeds a centrality with qualifying nature in range") {
  SimConfig cfg;
  cfg.width = 200;
  cfg.height = 200;
  cfg.cell_size_m = 100.0;
  cfg.growth.seed = 42;
  cfg.init_centrality = Coord{100, 100};

  const SimState state = init_state(cfg);
  REQUIRE(state.specs.size() == 1);
  REQUIRE(state.grid.at(100, 100) == CellState::Centrality);
  REQUIRE(state.grid.count(CellState::Nature) >= 100);
  REQUIRE_FALSE(hard_audit_failure(state.grid, state.specs, state.dna).has_value());
  REQUIRE(state.step_index == 0);
}

TEST_CASE("init_state rejects a grid too small for the nature block") {
  SimConfig cfg;
  cfg.width = 5;
  cfg.height = 5;
  cfg.cell_size_m = 100.0;
  cfg.init_centrality = Coord{2, 2};
  REQUIRE_THROWS_AS(init_state(cfg), InfeasibleError);
}

TEST_CASE("init_state is deterministic for a fixed seed") {
  const SimState a = init_state(small_config(1234));
  const SimState b = init_state(small_config(1234));
  REQUIRE(states_equal(a, b));
}

TEST_CASE("init_state requires exactly one init mode") {
  SimConfig cfg = small_config(1);
  cfg.init_raster = new_grid(10, 10, 100.0, CellState::Empty);
  REQUIRE_THROWS_AS(init_state(cfg), ConfigError);
  cfg = small_config(1);
  cfg.init_centrality.reset();
  REQUIRE_THROWS_AS(init_state(cfg), ConfigError);
}

TEST_CASE("init_state from a raster synthesizes distinct specs per centrality region") {
  Grid g = new_grid(40, 40, 100.0, CellState::Empty);
  for (int row = 0; row < 10; ++row) {
    for (int col = 0; col < 10; ++col) g.set(row, col, CellState::Nature);
  }
  g.set(12, 3, CellState::Centrality);
  g.set(12, 8, CellState::Centrality);
  SimConfig cfg;
  cfg.growth.seed = 9;
  cfg.init_raster = g;
  const SimState state = init_state(cfg);
  REQUIRE(state.specs.size() == 2);
  REQUIRE(state.specs[0].composition != state.specs[1].composition);
  REQUIRE(state.grid == g);
}

TEST_CASE("init_state rejects a raster that fails the hard audit") {
  Grid g = new_grid(40, 40, 100.0, CellState::Empty);
  g.set(5, 5, CellState::Built);  // isolated settlement, no nature anywhere
  g.set(5, 6, CellState::Built);
  g.set(5, 7, CellState::Centrality);
  SimConfig cfg;
  cfg.init_raster = g;
  REQUIRE_THROWS_AS(init_state(cfg), InfeasibleError);
}

TEST_CASE("step with an empty frontier is a no-op that still advances the clock") {
  // Settlement fully enclosed by nature: no Empty cell touches it.
  SimState state;
  state.grid = new_grid(20, 20, 100.0, CellState::Empty);
  for (int row = 0; row < 12; ++row) {
    for (int col = 0; col < 12; ++col) state.grid.set(row, col, CellState::Nature);
  }
  state.grid.set(5, 5, CellState::Centrality);
  state.grid.set(5, 6, CellState::Built);
  CentralitySpec spec;
  spec.id = 0;
  spec.cells = {Coord{5, 5}};
  spec.composition = {1.0};
  state.specs.push_back(spec);
  state.rng = SplitMix64(77);
  state.dna.walk_speed_kmh = 2.0;
  state.growth.p_build = 1.0;

  const std::uint64_t rng_before = state.rng.state();
  const Grid grid_before = state.grid;
  const SimState after = step(state);
  REQUIRE(after.grid == grid_before);
  REQUIRE(after.step_index == 1);
  REQUIRE(after.rng.state() == rng_before);  // zero frontier cells, zero draws
  REQUIRE(after.last_events.built.empty());
}

TEST_CASE("step is deterministic from copies of the same state") {
  const SimState s0 = init_state(small_config(555));
  const SimState a = step(s0);
  const SimState b = step(s0);
  REQUIRE(states_equal(a, b));
}

TEST_CASE("every step preserves the hard audit and the conservation laws") {
  SimState state = init_state(small_config(2024));
  int prev_nature = state.grid.count(CellState::Nature);
  int prev_settlement = state.grid.count(CellState::Built) +
                        state.grid.count(CellState::Centrality) +
                        state.grid.count(CellState::Garden);
  for (int i = 0; i < 25; ++i) {
    state = step(std::move(state));

    const int nature = state.grid.count(CellState::Nature);
    const int settlement = state.grid.count(CellState::Built) +
                           state.grid.count(CellState::Centrality) +
                           state.grid.count(CellState::Garden);
    REQUIRE(nature >= prev_nature);
    REQUIRE(settlement >= prev_settlement);
    prev_nature = nature;
    prev_settlement = settlement;

    // Spawn trigger correctness: each new centrality was out of range before.
    REQUIRE(state.last_events.spawned_centralities.size() ==
            state.last_events.spawn_pre_minutes.size());
    for (double pre : state.last_events.spawn_pre_minutes) {
      REQUIRE_FALSE(pre <= state.dna.t_star_min);
    }

    const auto failure = hard_audit_failure(state.grid, state.specs, state.dna);
    INFO("step " << state.step_index << " failed principle " << failure.value_or(""));
    REQUIRE_FALSE(failure.has_value());
  }
  REQUIRE(state.step_index == 25);
}

TEST_CASE("growth spawns additional centralities once the horizon is crossed") {
  SimState state = init_state(small_config(99));
  for (int i = 0; i < 40 && state.specs.size() < 2; ++i) state = step(std::move(state));
  REQUIRE(state.specs.size() >= 2);
}

TEST_CASE("run") {
  SECTION("zero steps is the identity and emits exactly one metrics row") {
    const SimState s0 = init_state(small_config(31));
    int metric_rows = 0;
    RunSinks sinks;
    sinks.on_metrics = [&metric_rows](const StepMetrics&) { ++metric_rows; };
    const SimState s1 = run(s0, 0, 0, sinks);
    REQUIRE(states_equal(s0, s1));
    REQUIRE(metric_rows == 1);
  }

  SECTION("equal seeds give byte-identical snapshots") {
    std::vector<std::string> snaps_a, snaps_b;
    RunSinks sa, sb;
    sa.on_snapshot = [&snaps_a](const SimState& s) { snaps_a.push_back(serialize_raster(s.grid)); };
    sb.on_snapshot = [&snaps_b](const SimState& s) { snaps_b.push_back(serialize_raster(s.grid)); };
    run(init_state(small_config(7)), 15, 5, sa);
    run(init_state(small_config(7)), 15, 5, sb);
    REQUIRE(snaps_a == snaps_b);
    REQUIRE(snaps_a.size() >= 4);  // initial, steps 5, 10, 15
  }

  SECTION("a resumed run matches a straight-through run") {
    SimState split = run(init_state(small_config(64)), 12, 0);
    split = run(std::move(split), 13, 0);
    const SimState straight = run(init_state(small_config(64)), 25, 0);
    REQUIRE(states_equal(split, straight));
    REQUIRE(grid_digest(split.grid) == grid_digest(straight.grid));
  }

  SECTION("negative step count is rejected") {
    REQUIRE_THROWS_AS(run(init_state(small_config(3)), -1, 0), ParamError);
  }
}

TEST_CASE("growth parameter validation") {
  SimConfig cfg = small_config(1);
  cfg.growth.p_build = 1.5;
  REQUIRE_THROWS_AS(init_state(cfg), ParamError);
  cfg = small_config(1);
  cfg.growth.composition_dimension = 0;
  REQUIRE_THROWS_AS(init_state(cfg), ParamError);
  cfg = small_config(1);
  cfg.growth.nature_block_side = 2;  // 4 cells = 40000 m2, below the nature minimum
  REQUIRE_THROWS_AS(init_state(cfg), ConfigError);
}

TEST_CASE("max_builds_per_step caps accretion but not spawns") {
  SimConfig cfg = small_config(21);
  cfg.growth.p_build = 1.0;
  cfg.growth.max_builds_per_step = 1;
  SimState state = init_state(cfg);
  for (int i = 0; i < 10; ++i) {
    state = step(std::move(state));
    REQUIRE(state.last_events.built.size() <= 1);
  }
  REQUIRE(state.grid.count(CellState::Built) <= 10);
}

TEST_CASE("metrics reflect the state") {
  const SimState state = init_state(small_config(12));
  const StepMetrics m = compute_metrics(state);
  REQUIRE(m.step == 0);
  REQUIRE(m.built_cells == 0);
  REQUIRE(m.centrality_count == 1);
  REQUIRE(m.nature_area_m2 >= state.dna.a_min_nature_m2);
  REQUIRE(m.garden_cells == 0);
  REQUIRE(m.benefit_min > 0.0);         // the centrality cell benefits from itself
  REQUIRE(m.benefit_cv == 0.0);         // single dweller cell
  REQUIRE(m.worst_walk_centrality_min == 0.0);
  REQUIRE(m.worst_walk_nature_min <= state.dna.t_star_min);
}
