#include "catch2/catch_amalgamated.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "isobenefit/Cli.hpp"
#include "isobenefit/Config.hpp"
#include "isobenefit/Raster.hpp"
#include "isobenefit/Render.hpp"
#include "isobenefit/Reporting.hpp"

using namespace isobenefit;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << bytes;
}

int cli(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"isobenefit"};
  argv.insert(argv.end(), args.begin(), args.end());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

Grid random_grid(SplitMix64& rng, int width, int height) {
  Grid g = new_grid(width, height, 100.0, CellState::Empty);
  for (auto& c : g.cells) c = static_cast<CellState>(rng.next_u64() % 5);
  return g;
}

}  // namespace

TEST_CASE("raster parse and serialize") {
  SECTION("direct mapping") {
    const Grid g = parse_raster("ISOBENEFIT v1 2 1 100\nBN\n");
    REQUIRE(g.width == 2);
    REQUIRE(g.height == 1);
    REQUIRE(g.cell_size_m == 100.0);
    REQUIRE(g.at(0, 0) == CellState::Built);
    REQUIRE(g.at(0, 1) == CellState::Nature);
  }

  SECTION("round-trip is the identity on grids") {
    SplitMix64 rng(0x10u);
    for (int trial = 0; trial < 25; ++trial) {
      const Grid g = random_grid(rng, 2 + static_cast<int>(rng.next_u64() % 20),
                                 1 + static_cast<int>(rng.next_u64() % 15));
      REQUIRE(parse_raster(serialize_raster(g)) == g);
    }
  }

  SECTION("serialize(parse(x)) == x for canonical documents") {
    const std::string doc = "ISOBENEFIT v1 3 2 62.5\n.Bg\nCN.\n";
    REQUIRE(serialize_raster(parse_raster(doc)) == doc);
  }

  SECTION("unknown code reports its position") {
    try {
      parse_raster("ISOBENEFIT v1 3 2 100\n.B.\n.X.\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      REQUIRE(e.line() == 3);
      REQUIRE(e.column() == 2);
    }
  }

  SECTION("ragged row reports its position") {
    try {
      parse_raster("ISOBENEFIT v1 3 2 100\n.B.\n.B\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      REQUIRE(e.line() == 3);
    }
  }

  SECTION("bad headers are rejected") {
    REQUIRE_THROWS_AS(parse_raster(""), ParseError);
    REQUIRE_THROWS_AS(parse_raster("ISOBENEFIT v2 2 1 100\nBN\n"), ParseError);
    REQUIRE_THROWS_AS(parse_raster("ISOBENEFIT v1 0 1 100\n\n"), ParseError);
    REQUIRE_THROWS_AS(parse_raster("ISOBENEFIT v1 2 1 -5\nBN\n"), ParseError);
    REQUIRE_THROWS_AS(parse_raster("ISOBENEFIT v1 2 1\nBN\n"), ParseError);
  }

  SECTION("missing rows are rejected") {
    REQUIRE_THROWS_AS(parse_raster("ISOBENEFIT v1 2 3 100\nBN\n"), ParseError);
  }
}

TEST_CASE("render") {
  SECTION("single centrality cell at scale 1 is one white pixel") {
    const Grid g = new_grid(1, 1, 100.0, CellState::Centrality);
    const std::string expected = std::string("P6\n1 1\n255\n") + "\xFF\xFF\xFF";
    REQUIRE(render_ppm(g, 1) == expected);
  }

  SECTION("equal grids render byte-identically") {
    SplitMix64 rng(0x99u);
    const Grid g = random_grid(rng, 9, 7);
    const Grid h = g;
    REQUIRE(render_ppm(g) == render_ppm(h));
  }

  SECTION("scale expands each cell into a block") {
    const Grid g = new_grid(2, 1, 100.0, CellState::Built);
    const std::string img = render_ppm(g, 3);
    REQUIRE(img.substr(0, 9) == "P6\n6 3\n25");
  }

  SECTION("invalid scale is rejected") {
    REQUIRE_THROWS_AS(render_ppm(new_grid(1, 1, 1.0, CellState::Empty), 0), ParamError);
  }
}

TEST_CASE("run configuration") {
  SECTION("full document parses") {
    const RunConfig cfg = parse_run_config(
        "# a comment\n"
        "grid.width = 120\n"
        "grid.height=80\n"
        "grid.cell_size_m=100\n"
        "seed=42\n"
        "steps=100\n"
        "snapshot_every=25\n"
        "t_star_min=30\n"
        "walk_speed_kmh=2\n"
        "garden_time_min=15\n"
        "a_min_nature_m2=1000000\n"
        "c_star=0.1\n"
        "epsilon_cv=0.15\n"
        "attractiveness_tolerance=0.25\n"
        "p_build=0.75\n"
        "nature_block_side=0\n"
        "composition_dimension=6\n"
        "init.centrality_row=40\n"
        "init.centrality_col=60\n"
        "output.dir=out/test\n");
    REQUIRE(cfg.grid_width == 120);
    REQUIRE(cfg.grid_height == 80);
    REQUIRE(cfg.seed == 42);
    REQUIRE(cfg.dna.walk_speed_kmh == 2.0);
    REQUIRE(cfg.growth.p_build == 0.75);
    REQUIRE(cfg.init_centrality_row == 40);
    REQUIRE(cfg.output_dir == "out/test");
  }

  SECTION("unknown keys fail closed") {
    REQUIRE_THROWS_AS(parse_run_config("grid.width=5\nbogus_key=1\n"), ConfigError);
  }

  SECTION("duplicate keys are rejected") {
    REQUIRE_THROWS_AS(parse_run_config("seed=1\nseed=2\n"), ConfigError);
  }

  SECTION("malformed values are rejected") {
    REQUIRE_THROWS_AS(parse_run_config("seed=banana\n"), ConfigError);
    REQUIRE_THROWS_AS(parse_run_config("p_build\n"), ConfigError);
  }

  SECTION("missing keys take documented defaults, echoed with the config") {
    const RunConfig cfg = parse_run_config("");
    REQUIRE(cfg.dna.t_star_min == 30.0);
    REQUIRE(cfg.dna.walk_speed_kmh == 5.0);
    REQUIRE(cfg.growth.p_build == 0.3);
    const auto echo = config_echo(cfg);
    bool saw_t_star = false;
    for (const auto& [k, v] : echo) {
      if (k == "t_star_min") {
        saw_t_star = true;
        REQUIRE(v == "30");
      }
    }
    REQUIRE(saw_t_star);
  }

  SECTION("raster init conflicts with grid keys and coordinate init") {
    RunConfig cfg = parse_run_config("init.raster_path=x.isob\ngrid.width=5\n");
    REQUIRE_THROWS_AS(to_sim_config(cfg, new_grid(3, 3, 100.0, CellState::Empty)), ConfigError);
    cfg = parse_run_config("init.raster_path=x.isob\ninit.centrality_row=1\n");
    REQUIRE_THROWS_AS(to_sim_config(cfg, new_grid(3, 3, 100.0, CellState::Empty)), ConfigError);
  }
}

TEST_CASE("metrics formatting") {
  StepMetrics m;
  m.step = 3;
  m.built_cells = 12;
  m.centrality_count = 2;
  m.nature_area_m2 = 1000000.0;
  m.garden_cells = 1;
  m.benefit_min = 0.5;
  m.benefit_cv = 0.125;
  m.worst_walk_centrality_min = 2.4;
  m.worst_walk_nature_min = 12.0;
  m.worst_walk_green_min = 6.0;
  REQUIRE(format_metrics_row(m) == "3,12,2,1e+06,1,0.5,0.125,2.4,12,6");
  REQUIRE(std::string(kMetricsHeader) ==
          "step,built_cells,centrality_count,nature_area_m2,garden_cells,benefit_min,benefit_cv,"
          "worst_walk_centrality_min,worst_walk_nature_min,worst_walk_green_min");
}

TEST_CASE("report rendering") {
  Grid g = new_grid(30, 30, 100.0, CellState::Empty);
  for (int row = 0; row < 10; ++row) {
    for (int col = 0; col < 10; ++col) g.set(row, col, CellState::Nature);
  }
  g.set(12, 4, CellState::Centrality);
  g.set(12, 5, CellState::Built);
  g.set(12, 6, CellState::Built);
  const AuditReport report = audit_all(g, {}, DnaParams{});
  const std::string text = format_report(report, {{"rng.algorithm", "splitmix64"}});

  REQUIRE(text.find("principle_iv.passed=true\n") != std::string::npos);
  REQUIRE(text.find("grid.digest=" + fmt_u64_hex(grid_digest(g)) + "\n") != std::string::npos);
  REQUIRE(text.find("overall_pass=true\n") != std::string::npos);
  REQUIRE(text.find("params.d_star_m=2500\n") != std::string::npos);
  REQUIRE(text.find("rng.algorithm=splitmix64\n") != std::string::npos);
  REQUIRE(text.find("principle_gardens.passed=true\n") != std::string::npos);
}

TEST_CASE("cli surface") {
  SECTION("unknown subcommand is a usage error") {
    REQUIRE(cli({"frobnicate"}) == kExitUsage);
    REQUIRE(cli({}) == kExitUsage);
  }

  SECTION("render writes a deterministic image") {
    TempDir tmp("isobenefit_cli_render");
    const Grid g = new_grid(4, 4, 100.0, CellState::Nature);
    const auto raster = tmp.path / "in.isob";
    spit(raster, serialize_raster(g));
    const auto out = tmp.path / "out.ppm";
    REQUIRE(cli({"render", "--input", raster.c_str(), "--out", out.c_str()}) == kExitOk);
    REQUIRE(slurp(out) == render_ppm(g));
  }

  SECTION("render on a missing file is an I/O error") {
    REQUIRE(cli({"render", "--input", "/nonexistent/x.isob", "--out", "/tmp/x.ppm"}) == kExitIo);
  }

  SECTION("audit exit codes distinguish pass from violations") {
    TempDir tmp("isobenefit_cli_audit");
    Grid good = new_grid(30, 30, 100.0, CellState::Empty);
    for (int row = 0; row < 10; ++row) {
      for (int col = 0; col < 10; ++col) good.set(row, col, CellState::Nature);
    }
    good.set(12, 4, CellState::Centrality);
    good.set(12, 5, CellState::Built);
    const auto good_path = tmp.path / "good.isob";
    spit(good_path, serialize_raster(good));
    const auto report_path = tmp.path / "report.txt";
    REQUIRE(cli({"audit", "--input", good_path.c_str(), "--report", report_path.c_str()}) ==
            kExitOk);
    REQUIRE(slurp(report_path).find("overall_pass=true") != std::string::npos);

    Grid bad = good;
    bad.set(29, 29, CellState::Built);  // isolated and far from everything
    const auto bad_path = tmp.path / "bad.isob";
    spit(bad_path, serialize_raster(bad));
    REQUIRE(cli({"audit", "--input", bad_path.c_str(), "--report", report_path.c_str()}) ==
            kExitViolations);
    const std::string report = slurp(report_path);
    REQUIRE(report.find("overall_pass=false") != std::string::npos);
    REQUIRE(report.find("29,29") != std::string::npos);
  }

  SECTION("audit with a malformed raster is a usage error") {
    TempDir tmp("isobenefit_cli_badraster");
    const auto path = tmp.path / "bad.isob";
    spit(path, "ISOBENEFIT v1 2 1 100\nXX\n");
    REQUIRE(cli({"audit", "--input", path.c_str()}) == kExitUsage);
  }

  SECTION("simulate writes metrics, snapshots, raster, image and report") {
    TempDir tmp("isobenefit_cli_sim");
    const auto cfg_path = tmp.path / "run.cfg";
    const auto out_dir = tmp.path / "out";
    spit(cfg_path,
         "grid.width=40\ngrid.height=40\ngrid.cell_size_m=100\nseed=5\nsteps=8\n"
         "snapshot_every=4\nwalk_speed_kmh=2\np_build=0.8\n"
         "init.centrality_row=20\ninit.centrality_col=20\noutput.dir=" + out_dir.string() + "\n");
    REQUIRE(cli({"simulate", "--config", cfg_path.c_str()}) == kExitOk);
    REQUIRE(std::filesystem::exists(out_dir / "metrics.csv"));
    REQUIRE(std::filesystem::exists(out_dir / "step_000000.isob"));
    REQUIRE(std::filesystem::exists(out_dir / "step_000008.ppm"));
    REQUIRE(std::filesystem::exists(out_dir / "final.isob"));
    REQUIRE(std::filesystem::exists(out_dir / "final.ppm"));
    REQUIRE(std::filesystem::exists(out_dir / "report.txt"));

    const std::string metrics = slurp(out_dir / "metrics.csv");
    REQUIRE(metrics.rfind(kMetricsHeader, 0) == 0);
    int lines = 0;
    for (char c : metrics) lines += c == '\n' ? 1 : 0;
    REQUIRE(lines == 1 + 1 + 8);  // header, initial row, one row per step

    const std::string report = slurp(out_dir / "report.txt");
    REQUIRE(report.find("rng.algorithm=splitmix64") != std::string::npos);
    REQUIRE(report.find("config.seed=5") != std::string::npos);
  }

  SECTION("simulate with a bad config is a usage error") {
    TempDir tmp("isobenefit_cli_badcfg");
    const auto cfg_path = tmp.path / "run.cfg";
    spit(cfg_path, "nonsense=1\n");
    REQUIRE(cli({"simulate", "--config", cfg_path.c_str()}) == kExitUsage);
  }
}

TEST_CASE("shipped fixtures audit as designed") {
  SECTION("known-good city passes") {
    const auto report_path = std::filesystem::temp_directory_path() / "isobenefit_fixture_report.txt";
    REQUIRE(cli({"audit", "--input", "fixtures/known_good.isob", "--config",
                 "fixtures/audit_default.cfg", "--report", report_path.c_str()}) == kExitOk);
    std::filesystem::remove(report_path);
  }

  SECTION("exclave fixture fails exactly the reach principles") {
    const auto report_path = std::filesystem::temp_directory_path() / "isobenefit_exclave_report.txt";
    REQUIRE(cli({"audit", "--input", "fixtures/violating_exclave.isob", "--config",
                 "fixtures/audit_default.cfg", "--report", report_path.c_str()}) ==
            kExitViolations);
    const std::string report = slurp(report_path);
    REQUIRE(report.find("principle_ii.passed=false") != std::string::npos);
    REQUIRE(report.find("principle_iii.passed=false") != std::string::npos);
    REQUIRE(report.find("principle_iv.passed=true") != std::string::npos);
    REQUIRE(report.find("principle_v.passed=true") != std::string::npos);
    REQUIRE(report.find("principle_gardens.passed=true") != std::string::npos);
    std::filesystem::remove(report_path);
  }

  SECTION("known-good render matches the golden image") {
    std::ifstream fixture("fixtures/known_good.isob", std::ios::binary);
    REQUIRE(fixture.good());
    std::ostringstream ss;
    ss << fixture.rdbuf();
    const Grid g = parse_raster(ss.str());
    REQUIRE(render_ppm(g) == slurp("tests/golden/known_good.ppm"));
  }
}
