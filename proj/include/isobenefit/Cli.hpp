#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "isobenefit/Config.hpp"
#include "isobenefit/DnaAudit.hpp"
#include "isobenefit/Errors.hpp"
#include "isobenefit/Morphogenesis.hpp"
#include "isobenefit/Raster.hpp"
#include "isobenefit/Render.hpp"
#include "isobenefit/Reporting.hpp"

namespace isobenefit {

// Exit codes: 0 success / audit pass, 1 usage or configuration error,
// 2 audit violations found, 3 I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitViolations = 2;
inline constexpr int kExitIo = 3;

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::string snapshot_name(std::uint64_t step, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "step_%06llu.%s", static_cast<unsigned long long>(step), ext);
  return buf;
}

struct SimulateArgs {
  std::string config_path;
  std::optional<int> steps;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

inline int run_simulate(const SimulateArgs& args) {
  RunConfig cfg = parse_run_config(read_file(args.config_path));
  if (args.steps) cfg.steps = *args.steps;
  if (args.seed) cfg.seed = *args.seed;
  if (args.out_dir) cfg.output_dir = *args.out_dir;

  std::optional<Grid> raster;
  if (cfg.init_raster_path) raster = parse_raster(read_file(*cfg.init_raster_path));
  SimState state = init_state(to_sim_config(cfg, std::move(raster)));

  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.output_dir + "': " + ec.message());
  const std::filesystem::path out_dir(cfg.output_dir);

  std::ofstream metrics(out_dir / "metrics.csv", std::ios::binary);
  if (!metrics) throw IoError("cannot open metrics.csv for writing");
  metrics << kMetricsHeader << '\n';

  RunSinks sinks;
  sinks.on_metrics = [&metrics](const StepMetrics& m) { write_metrics_row(metrics, m); };
  sinks.on_snapshot = [&out_dir](const SimState& s) {
    write_file((out_dir / snapshot_name(s.step_index, "isob")).string(), serialize_raster(s.grid));
    write_file((out_dir / snapshot_name(s.step_index, "ppm")).string(), render_ppm(s.grid));
  };

  state = run(std::move(state), cfg.steps, cfg.snapshot_every, sinks);
  metrics.flush();
  if (!metrics) throw IoError("failed writing metrics.csv");

  write_file((out_dir / "final.isob").string(), serialize_raster(state.grid));
  write_file((out_dir / "final.ppm").string(), render_ppm(state.grid));

  const AuditReport report = audit_all(state.grid, state.specs, state.dna);
  std::vector<std::pair<std::string, std::string>> extra;
  extra.emplace_back("rng.algorithm", SplitMix64::algorithm_name());
  for (const auto& [k, v] : config_echo(cfg)) extra.emplace_back("config." + k, v);
  write_file((out_dir / "report.txt").string(), format_report(report, extra));
  return kExitOk;
}

inline int run_audit(const std::string& input_path, const std::string& config_path,
                     const std::string& report_path) {
  DnaParams dna;
  RunConfig cfg;
  const bool have_config = !config_path.empty();
  if (have_config) {
    cfg = parse_run_config(read_file(config_path));
    dna = cfg.dna;
  }
  const Grid grid = parse_raster(read_file(input_path));
  // No centrality specs or amenity catalog accompany a bare raster, so the
  // benefit and distinctness checks come out vacuous; the geometric
  // principles are fully evaluated.
  const AuditReport report = audit_all(grid, {}, dna);

  std::vector<std::pair<std::string, std::string>> extra;
  if (have_config) {
    for (const auto& [k, v] : config_echo(cfg)) extra.emplace_back("config." + k, v);
  }
  const std::string text = format_report(report, extra);
  if (report_path.empty()) {
    std::cout << text;
  } else {
    write_file(report_path, text);
  }
  return report.overall_pass ? kExitOk : kExitViolations;
}

inline int run_render(const std::string& input_path, const std::string& out_path, int scale) {
  const Grid grid = parse_raster(read_file(input_path));
  write_file(out_path, render_ppm(grid, scale));
  return kExitOk;
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Isobenefit urban morphogenesis simulator and land-use auditor"};
  app.require_subcommand(1);

  detail::SimulateArgs sim_args;
  int steps_flag = -1;
  std::uint64_t seed_flag = 0;
  std::string out_flag;
  auto* simulate = app.add_subcommand("simulate", "Grow a city from a run configuration");
  simulate->add_option("--config", sim_args.config_path, "Run configuration file")->required();
  auto* steps_opt = simulate->add_option("--steps", steps_flag, "Override the configured step count");
  auto* seed_opt = simulate->add_option("--seed", seed_flag, "Override the configured seed");
  auto* out_opt = simulate->add_option("--out", out_flag, "Override the configured output directory");

  std::string audit_input, audit_config, audit_report;
  auto* audit = app.add_subcommand("audit", "Score a land-use raster against the urban DNA");
  audit->add_option("--input", audit_input, "Raster file to audit")->required();
  audit->add_option("--config", audit_config, "Run configuration supplying the calibration");
  audit->add_option("--report", audit_report, "Report output path (stdout when omitted)");

  std::string render_input, render_out;
  int render_scale = 4;
  auto* render = app.add_subcommand("render", "Render a raster to a PPM image");
  render->add_option("--input", render_input, "Raster file to render")->required();
  render->add_option("--out", render_out, "Image output path")->required();
  render->add_option("--scale", render_scale, "Pixels per cell (default 4)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help() << std::flush;
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      if (steps_opt->count() > 0) sim_args.steps = steps_flag;
      if (seed_opt->count() > 0) sim_args.seed = seed_flag;
      if (out_opt->count() > 0) sim_args.out_dir = out_flag;
      return detail::run_simulate(sim_args);
    }
    if (audit->parsed()) return detail::run_audit(audit_input, audit_config, audit_report);
    if (render->parsed()) return detail::run_render(render_input, render_out, render_scale);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace isobenefit
