#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "isobenefit/Errors.hpp"
#include "isobenefit/Morphogenesis.hpp"
#include "isobenefit/Numeric.hpp"

namespace isobenefit {

/// Flat key=value run configuration. Unknown keys are errors (fail-closed);
/// missing keys take the documented defaults below. '#' starts a comment
/// line; blank lines are ignored.
struct RunConfig {
  std::optional<int> grid_width;
  std::optional<int> grid_height;
  std::optional<double> grid_cell_size_m;
  std::uint64_t seed = 0;
  int steps = 0;
  int snapshot_every = 10;
  DnaParams dna;
  GrowthParams growth;  // seed is mirrored into growth when building a SimConfig
  std::optional<int> init_centrality_row;
  std::optional<int> init_centrality_col;
  std::optional<std::string> init_raster_path;
  std::string output_dir = "out";
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

template <typename T>
T parse_number(std::string_view value, const std::string& key, int line) {
  T v{};
  const std::string_view t = trim(value);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
    throw ConfigError("bad value '" + std::string(t) + "' for key '" + key + "' on line " +
                      std::to_string(line));
  }
  return v;
}

}  // namespace detail

inline RunConfig parse_run_config(std::string_view text) {
  RunConfig cfg;
  std::vector<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = (nl == std::string_view::npos) ? text.substr(pos) : text.substr(pos, nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("expected key=value on line " + std::to_string(line_no));
    }
    const std::string key{detail::trim(line.substr(0, eq))};
    const std::string_view value = detail::trim(line.substr(eq + 1));
    for (const std::string& s : seen) {
      if (s == key) throw ConfigError("duplicate key '" + key + "' on line " + std::to_string(line_no));
    }
    seen.push_back(key);

    if (key == "grid.width") cfg.grid_width = detail::parse_number<int>(value, key, line_no);
    else if (key == "grid.height") cfg.grid_height = detail::parse_number<int>(value, key, line_no);
    else if (key == "grid.cell_size_m") cfg.grid_cell_size_m = detail::parse_number<double>(value, key, line_no);
    else if (key == "seed") cfg.seed = detail::parse_number<std::uint64_t>(value, key, line_no);
    else if (key == "steps") cfg.steps = detail::parse_number<int>(value, key, line_no);
    else if (key == "snapshot_every") cfg.snapshot_every = detail::parse_number<int>(value, key, line_no);
    else if (key == "t_star_min") cfg.dna.t_star_min = detail::parse_number<double>(value, key, line_no);
    else if (key == "walk_speed_kmh") cfg.dna.walk_speed_kmh = detail::parse_number<double>(value, key, line_no);
    else if (key == "garden_time_min") cfg.dna.garden_time_min = detail::parse_number<double>(value, key, line_no);
    else if (key == "a_min_nature_m2") cfg.dna.a_min_nature_m2 = detail::parse_number<double>(value, key, line_no);
    else if (key == "c_star") cfg.dna.c_star = detail::parse_number<double>(value, key, line_no);
    else if (key == "epsilon_cv") cfg.dna.epsilon_cv = detail::parse_number<double>(value, key, line_no);
    else if (key == "attractiveness_tolerance") cfg.dna.attractiveness_tolerance = detail::parse_number<double>(value, key, line_no);
    else if (key == "p_build") cfg.growth.p_build = detail::parse_number<double>(value, key, line_no);
    else if (key == "nature_block_side") cfg.growth.nature_block_side = detail::parse_number<int>(value, key, line_no);
    else if (key == "composition_dimension") cfg.growth.composition_dimension = detail::parse_number<int>(value, key, line_no);
    else if (key == "init.centrality_row") cfg.init_centrality_row = detail::parse_number<int>(value, key, line_no);
    else if (key == "init.centrality_col") cfg.init_centrality_col = detail::parse_number<int>(value, key, line_no);
    else if (key == "init.raster_path") cfg.init_raster_path = std::string(value);
    else if (key == "output.dir") cfg.output_dir = std::string(value);
    else throw ConfigError("unknown key '" + key + "' on line " + std::to_string(line_no));
  }
  return cfg;
}

/// Effective configuration as key/value pairs for echoing into reports.
/// Every key appears, with defaults substituted where the file omitted them.
inline std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> kv;
  const auto add_int = [&](const char* k, int v) { kv.emplace_back(k, std::to_string(v)); };
  if (cfg.grid_width) add_int("grid.width", *cfg.grid_width);
  if (cfg.grid_height) add_int("grid.height", *cfg.grid_height);
  if (cfg.grid_cell_size_m) kv.emplace_back("grid.cell_size_m", fmt_double(*cfg.grid_cell_size_m));
  kv.emplace_back("seed", std::to_string(cfg.seed));
  add_int("steps", cfg.steps);
  add_int("snapshot_every", cfg.snapshot_every);
  kv.emplace_back("t_star_min", fmt_double(cfg.dna.t_star_min));
  kv.emplace_back("walk_speed_kmh", fmt_double(cfg.dna.walk_speed_kmh));
  kv.emplace_back("garden_time_min", fmt_double(cfg.dna.garden_time_min));
  kv.emplace_back("a_min_nature_m2", fmt_double(cfg.dna.a_min_nature_m2));
  kv.emplace_back("c_star", fmt_double(cfg.dna.c_star));
  kv.emplace_back("epsilon_cv", fmt_double(cfg.dna.epsilon_cv));
  kv.emplace_back("attractiveness_tolerance", fmt_double(cfg.dna.attractiveness_tolerance));
  kv.emplace_back("p_build", fmt_double(cfg.growth.p_build));
  add_int("nature_block_side", cfg.growth.nature_block_side);
  add_int("composition_dimension", cfg.growth.composition_dimension);
  if (cfg.init_centrality_row) add_int("init.centrality_row", *cfg.init_centrality_row);
  if (cfg.init_centrality_col) add_int("init.centrality_col", *cfg.init_centrality_col);
  if (cfg.init_raster_path) kv.emplace_back("init.raster_path", *cfg.init_raster_path);
  kv.emplace_back("output.dir", cfg.output_dir);
  return kv;
}

/// Builds the simulation configuration, resolving the init mode. Grid keys
/// are required with a seeded centrality and forbidden with a raster (the
/// raster header already carries the geometry).
inline SimConfig to_sim_config(const RunConfig& cfg, std::optional<Grid> raster = std::nullopt) {
  SimConfig sim;
  sim.dna = cfg.dna;
  sim.growth = cfg.growth;
  sim.growth.seed = cfg.seed;

  const bool has_coord_init = cfg.init_centrality_row.has_value() || cfg.init_centrality_col.has_value();
  if (cfg.init_raster_path.has_value()) {
    if (has_coord_init) {
      throw ConfigError("init.raster_path conflicts with init.centrality_row/col");
    }
    if (cfg.grid_width || cfg.grid_height || cfg.grid_cell_size_m) {
      throw ConfigError("grid.* keys conflict with init.raster_path (geometry comes from the raster)");
    }
    if (!raster.has_value()) throw ConfigError("raster init requested but no raster supplied");
    sim.width = raster->width;
    sim.height = raster->height;
    sim.cell_size_m = raster->cell_size_m;
    sim.init_raster = std::move(raster);
    return sim;
  }
  if (!cfg.init_centrality_row.has_value() || !cfg.init_centrality_col.has_value()) {
    throw ConfigError("init.centrality_row and init.centrality_col (or init.raster_path) are required");
  }
  if (!cfg.grid_width || !cfg.grid_height || !cfg.grid_cell_size_m) {
    throw ConfigError("grid.width, grid.height and grid.cell_size_m are required");
  }
  sim.width = *cfg.grid_width;
  sim.height = *cfg.grid_height;
  sim.cell_size_m = *cfg.grid_cell_size_m;
  sim.init_centrality = Coord{*cfg.init_centrality_row, *cfg.init_centrality_col};
  return sim;
}

}  // namespace isobenefit
