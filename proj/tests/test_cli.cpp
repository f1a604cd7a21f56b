#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"

namespace fs = std::filesystem;
using sim::ConfigError;
using sim::parse_config;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("emzi_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const auto p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int run_sim(const std::string& args) {
  const std::string cmd = std::string(SIM_EXE) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ConfigError config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return ConfigError("", 0, "");
}

// Cheap quantum settings: two emitters, a short scan.
const char* kSmallScan = R"([beam]
energy = 10 keV
[coherence]
n_source_points = 2
max_source_points = 2
[classical]
quadrature = monte_carlo
n_rays = 20000
[scan]
shift_start = 0 nm
shift_stop = 200 nm
shift_step = 10 nm
port = 0
[noise]
count_rate = 200 /s
sweeps = 5
drift = 10 nm
[map]
start = -4 um
stop = 4 um
step = 2 um
[talbot]
n_planes = 8
)";

class ScratchCleanup : public ::testing::Environment {
 public:
  void TearDown() override { fs::remove_all(scratch("x").parent_path()); }
};
const auto* const kCleanup = ::testing::AddGlobalTestEnvironment(new ScratchCleanup);

}  // namespace

TEST(Config, UnitsConvertToSi) {
  const auto c = parse_config(
      "[beam]\nenergy = 6 keV, 8000 eV, 0.01 MeV\n[geometry]\ngrating_period = 0.1 um\n"
      "collimator_width = 1500 nm\nsource_width = 5 µm\ngrating1_to_grating2 = 2.54 cm\n[noise]\ndwell = 250 ms\n");
  ASSERT_EQ(c.energies_ev.size(), 3u);
  EXPECT_DOUBLE_EQ(c.energies_ev[0], 6000.0);
  EXPECT_DOUBLE_EQ(c.energies_ev[1], 8000.0);
  EXPECT_DOUBLE_EQ(c.energies_ev[2], 10000.0);
  EXPECT_DOUBLE_EQ(c.apparatus.grating_period, 1e-7);
  EXPECT_DOUBLE_EQ(c.apparatus.collimator_width, 1.5e-6);
  EXPECT_DOUBLE_EQ(c.apparatus.source_width, 5e-6);
  EXPECT_DOUBLE_EQ(c.apparatus.distances.grating1_to_grating2, 0.0254);
  EXPECT_DOUBLE_EQ(c.noise.dwell, 0.25);
}

TEST(Config, DefaultsReproduceApparatusDistancesExactly) {
  const auto c = parse_config(slurp(fs::path(SOURCE_DIR) / "configs" / "default.cfg"));
  const auto g = c.geometry(10e3);
  EXPECT_EQ(g.distances.source_to_collimator, 0.24);
  EXPECT_EQ(g.distances.collimator_to_grating1, 0.03);
  EXPECT_EQ(g.distances.grating1_to_grating2, 0.0254);
  EXPECT_EQ(g.distances.grating2_to_grating3, 0.0254);
  EXPECT_EQ(g.distances.grating3_to_detector, 0.27);
}

TEST(Config, RejectionsNameKeyAndLine) {
  auto e = config_error("[beam]\nenergy = 10 keV\n\nspeed = 3\n");
  EXPECT_EQ(e.key(), "beam.speed");
  EXPECT_EQ(e.line(), 4u);

  e = config_error("[beam]\nenergy = 10\n");
  EXPECT_EQ(e.key(), "beam.energy");
  EXPECT_EQ(e.line(), 2u);
  EXPECT_NE(std::string(e.what()).find("unit"), std::string::npos);

  e = config_error("[geometry]\ngrating_period = 100 keV\n");
  EXPECT_EQ(e.key(), "geometry.grating_period");

  e = config_error("[geometry]\nsource_width = -5 um\n");
  EXPECT_EQ(e.key(), "geometry.source_width");

  e = config_error("[scan]\nport = 3\n");
  EXPECT_EQ(e.key(), "scan.port");

  e = config_error("[beam]\nenergy = 10 keV\nenergy = 8 keV\n");
  EXPECT_EQ(e.key(), "beam.energy");
  EXPECT_EQ(e.line(), 3u);

  e = config_error("[detector]\nwidth = 5 um\n");
  EXPECT_EQ(e.key(), "detector");
  EXPECT_EQ(e.line(), 1u);

  e = config_error("energy = 10 keV\n");
  EXPECT_EQ(e.line(), 1u);

  e = config_error("[geometry]\nopen_fraction = 1.2\n");
  EXPECT_EQ(e.key(), "geometry.open_fraction");
}

TEST(Config, EmptyOrCommentOnlyIsRejected) {
  config_error("");
  config_error("# nothing here\n\n[beam]\n");
}

TEST(Config, RenderedConfigParsesBackToItself) {
  auto c = parse_config(kSmallScan);
  c.dx = 4e-9;
  c.apparatus.grating_shifts[2] = 1.0 / 3.0 * 1e-7;
  std::string text;
  for (const auto& line : sim::render_config(c)) text += line + "\n";
  const auto back = parse_config(text);
  EXPECT_EQ(sim::render_config(back), sim::render_config(c));
  EXPECT_EQ(back.apparatus.grating_shifts[2], c.apparatus.grating_shifts[2]);
}

TEST(Csv, QuotesAndSeventeenDigits) {
  sim::CsvTable t({"a", "b,c"});
  t.meta("k", 0.1);
  t.row(std::vector<double>{1.0 / 3.0, 2.0});
  t.row(std::vector<std::string>{"x\"y", "plain"});
  EXPECT_EQ(t.str(), "# k = 0.10000000000000001\r\na,\"b,c\"\r\n0.33333333333333331,2\r\n\"x\"\"y\",plain\r\n");
}

TEST(Cli, ExitCodes) {
  const auto empty = write_file("empty.cfg", "");
  EXPECT_EQ(run_sim("validate --config " + empty.string()), 2);
  EXPECT_EQ(run_sim("validate --config " + scratch("missing.cfg").string()), 2);
  const auto unknown = write_file("unknown.cfg", "[beam]\nenergy = 10 keV\nflux = 2\n");
  EXPECT_EQ(run_sim("talbot --config " + unknown.string()), 2);
  EXPECT_EQ(run_sim("frobnicate --config " + unknown.string()), 2);

  const auto out = scratch("out_validate");
  const auto defaults = fs::path(SOURCE_DIR) / "configs" / "default.cfg";
  EXPECT_EQ(run_sim("validate --config " + defaults.string() + " --out " + out.string()), 0);
  const auto coarse = write_file("coarse.cfg", "[sampling]\ndx = 50 nm\n");
  EXPECT_EQ(run_sim("validate --config " + coarse.string() + " --out " + out.string()), 3);
  EXPECT_EQ(run_sim("pattern --config " + coarse.string() + " --out " + out.string()), 3);

  // Four samples over 100 nm cannot support a fit.
  const auto sparse = write_file("sparse.cfg", "[scan]\nshift_stop = 100 nm\nshift_step = 30 nm\n");
  EXPECT_EQ(run_sim("scan --config " + sparse.string() + " --out " + out.string()), 4);

  // Output below a regular file cannot be created.
  const auto blocker = write_file("blocker", "x");
  EXPECT_EQ(run_sim("talbot --config " + defaults.string() + " --out " + (blocker / "sub").string()), 5);
}

TEST(Cli, ValidateReportsEveryLeg) {
  const auto out = scratch("out_legs");
  const auto coarse = write_file("coarse_legs.cfg", "[sampling]\ndx = 50 nm\n");
  ASSERT_EQ(run_sim("validate --config " + coarse.string() + " --out " + out.string()), 3);
  const auto text = slurp(out / "validate.csv");
  EXPECT_NE(text.find("G3->detector,"), std::string::npos);
  EXPECT_NE(text.find("# 10keV.dx_m = "), std::string::npos);
  EXPECT_NE(text.find(",0\r\n"), std::string::npos);
}

TEST(Cli, RerunsAreByteIdenticalAndSeedMatters) {
  const auto cfg = write_file("small.cfg", kSmallScan);
  const auto a = scratch("run_a"), b = scratch("run_b"), c = scratch("run_c");
  for (const auto* cmd : {"scan", "talbot", "moire"}) {
    ASSERT_EQ(run_sim(std::string(cmd) + " --config " + cfg.string() + " --out " + a.string() + " --seed 7"), 0) << cmd;
    ASSERT_EQ(run_sim(std::string(cmd) + " --config " + cfg.string() + " --out " + b.string() + " --seed 7"), 0) << cmd;
  }
  ASSERT_EQ(run_sim("scan --config " + cfg.string() + " --out " + c.string() + " --seed 8"), 0);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    std::string left = slurp(entry.path()), right = slurp(b / entry.path().filename());
    // The output directory is part of the echoed config; align it before comparing.
    for (auto* s : {&left, &right}) {
      const auto k = s->find("directory = ");
      ASSERT_NE(k, std::string::npos);
      s->erase(k, s->find('\r', k) - k);
    }
    EXPECT_EQ(left, right) << entry.path().filename();
    ++compared;
  }
  EXPECT_GE(compared, 6u);
  const auto body = [](const std::string& s) { return s.substr(s.find("shift_m,")); };
  EXPECT_NE(body(slurp(a / "scan_classical_10keV.csv")), body(slurp(c / "scan_classical_10keV.csv")));
}

TEST(Cli, CsvHeaderReproducesTheRun) {
  const auto cfg = write_file("header.cfg", kSmallScan);
  const auto out = scratch("out_header");
  ASSERT_EQ(run_sim("talbot --config " + cfg.string() + " --out " + out.string() + " --seed 3"), 0);
  std::istringstream in(slurp(out / "talbot_report.csv"));
  std::string line, echoed;
  const std::string prefix = "# config: ";
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) echoed += line.substr(prefix.size()) + "\n";
  }
  const auto again = parse_config(echoed);
  EXPECT_EQ(again.seed, 3u);
  EXPECT_EQ(again.coherence.n_source_points, 2u);
  EXPECT_EQ(again.output_directory, out.string());
}
