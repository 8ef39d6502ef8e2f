#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "mfglq/cli.hpp"

using namespace mfglq;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "mfglq");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch_dir() {
  static int counter = 0;
  fs::path dir = fs::temp_directory_path() / ("mfglq_cli_" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.cfg";
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kCoupledMfg =
    "[model]\n"
    "game_class = mfg\n"
    "A = -0.2\nAbar = 0.5\nQ = 1.0\nQbar = 0.8\nS = 0.9\n"
    "Q_T = 0.5\nQbar_T = 0.4\nS_T = 0.9\n"
    "sigma = 0.3\nx0_mean = 1.0\nx0_std = 0.5\n"
    "[grid]\n"
    "horizon = 1.0\n"
    "n_steps = 100\n";

const std::string kDecoupledMfg =
    "[model]\n"
    "game_class = mfg\n"
    "Q = 1.0\nQ_T = 1.0\nsigma = 0.4\nx0_mean = 1.2\nx0_std = 0.7\n"
    "[grid]\n"
    "horizon = 1.0\n"
    "n_steps = 100\n";

}  // namespace

TEST_CASE("formatting round-trips doubles exactly") {
  for (double v : {0.1, 1.0 / 3.0, -2.718281828459045e-5, 0.0, 1e300}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("atomic write creates parent directories and leaves no temp file") {
  const fs::path dir = scratch_dir();
  const fs::path target = dir / "a" / "b" / "report.json";
  write_file_atomic(target.string(), "payload");
  CHECK(slurp(target) == "payload");
  CHECK_FALSE(fs::exists(target.string() + ".tmp"));
}

TEST_CASE("argument errors exit with code 2") {
  CHECK(run({}) == 2);                           // missing subcommand
  CHECK(run({"frobnicate", "x.cfg"}) == 2);      // unknown subcommand
  CHECK(run({"solve", "/nonexistent.cfg"}) == 2);
  CHECK(run({"--help"}) == 0);
}

TEST_CASE("solve writes the trajectory table and summary") {
  const fs::path dir = scratch_dir();
  const std::string cfg = write_config(dir, kCoupledMfg);
  const fs::path out = dir / "out";
  REQUIRE(run({"solve", cfg, "--out", out.string()}) == 0);

  const std::string csv = slurp(out / "solution.csv");
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "t,component_id,p,r,s,z,variance");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == 101);  // (n_steps + 1) nodes, one component

  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(summary.at("game_class") == "mfg");
  CHECK(summary.at("fb_meta").at("converged") == true);
  REQUIRE(summary.at("value").size() == 1);
  CHECK(std::isfinite(summary.at("value")[0].get<double>()));
  CHECK(summary.at("config").at("model").at("Abar") == "0.5");
}

TEST_CASE("solve reports non-convergence with exit code 3") {
  const fs::path dir = scratch_dir();
  const std::string cfg = write_config(dir, kCoupledMfg +
                                                "[solver]\n"
                                                "max_iter = 1\n"
                                                "damping = 0.5\n");
  CHECK(run({"solve", cfg, "--out", (dir / "out").string()}) == 3);
}

TEST_CASE("solve reports blow-up with exit code 4") {
  const fs::path dir = scratch_dir();
  // uncontrolled unstable drift: the mean grows like e^{10 t}
  const std::string cfg = write_config(dir,
                                       "[model]\n"
                                       "game_class = mfg\n"
                                       "A = 10.0\nx0_mean = 1.0\n"
                                       "[grid]\n"
                                       "horizon = 3.0\n"
                                       "n_steps = 200\n");
  CHECK(run({"solve", cfg, "--out", (dir / "out").string()}) == 4);
}

TEST_CASE("verify requires a sweep and honors seed overrides") {
  const fs::path dir = scratch_dir();
  const std::string no_sweep = write_config(dir, kDecoupledMfg);
  CHECK(run({"verify", no_sweep, "--out", (dir / "o0").string()}) == 2);

  const std::string cfg = write_config(dir, kDecoupledMfg +
                                                "[simulate]\n"
                                                "n_reps = 3\n"
                                                "deviation_knots = 2\n"
                                                "seed = 7\n"
                                                "sweep = 4, 8\n");
  REQUIRE(run({"verify", cfg, "--out", (dir / "o1").string(), "--seed", "99"}) == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "o1" / "nash_report.json"));
  CHECK(report.at("seed") == 99);
  CHECK(report.at("entries").size() == 2);
  CHECK(report.at("entries")[0].at("N") == 4);
  CHECK(report.at("entries")[1].at("N") == 8);
  for (const auto& e : report.at("entries")) {
    CHECK(e.at("gap").get<double>() >= 0.0);
    CHECK(e.at("std_error").get<double>() >= 0.0);
  }

  const std::string csv = slurp(dir / "o1" / "nash_report.csv");
  CHECK(csv.rfind("N,gap,std_error\n", 0) == 0);
}

TEST_CASE("verify is reproducible byte for byte") {
  const fs::path dir = scratch_dir();
  const std::string cfg = write_config(dir, kDecoupledMfg +
                                                "[simulate]\n"
                                                "n_reps = 3\n"
                                                "deviation_knots = 2\n"
                                                "seed = 11\n"
                                                "sweep = 4, 8\n");
  REQUIRE(run({"verify", cfg, "--out", (dir / "a").string()}) == 0);
  REQUIRE(run({"verify", cfg, "--out", (dir / "b").string(), "--threads", "2"}) == 0);
  CHECK(slurp(dir / "a" / "nash_report.json") == slurp(dir / "b" / "nash_report.json"));
  CHECK(slurp(dir / "a" / "nash_report.csv") == slurp(dir / "b" / "nash_report.csv"));
}

TEST_CASE("poa runs on single-population games only") {
  const fs::path dir = scratch_dir();
  const std::string cfg = write_config(dir, kDecoupledMfg);
  REQUIRE(run({"poa", cfg, "--out", (dir / "out").string()}) == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "poa_report.json"));
  const double poa = report.at("price_of_anarchy").get<double>();
  CHECK(poa == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(report.at("optimizer").at("converged") == true);

  const std::string multi = write_config(
      scratch_dir(),
      "[model]\ngame_class = mpmfg\nweights = 1,0,0,1\nQ_T = 1\n"
      "[grid]\nhorizon = 1\nn_steps = 50\n");
  CHECK(run({"poa", multi}) == 2);
}

TEST_CASE("reduce-check embeds a two-population game and passes") {
  const fs::path dir = scratch_dir();
  const std::string cfg = write_config(
      dir,
      "[model]\n"
      "game_class = mpmfg\n"
      "populations = 2\n"
      "weights = 0.6, 0.4, 0.4, 0.7\n"
      "A = -0.2\nAbar = 0.5\nQ = 1.0\nQbar = 0.8\nS = 0.9\n"
      "Q_T = 0.5\nQbar_T = 0.4\nS_T = 0.9\n"
      "sigma = 0.3\nx0_mean = 1.0, -0.5\nx0_std = 0.5\n"
      "[grid]\n"
      "horizon = 1.0\n"
      "n_steps = 100\n"
      "[graphon]\n"
      "kind = step\n"
      "weights = 0.6, 0.4, 0.4, 0.7\n"
      "m_points = 8\n");
  REQUIRE(run({"reduce-check", cfg, "--out", (dir / "out").string()}) == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "reduce_check.json"));
  CHECK(report.at("pass") == true);
  CHECK(report.at("m_points") == 8);
  CHECK(report.at("gmfg_vs_mpmfg").at("pass") == true);
  CHECK(report.at("gmfg_vs_mpmfg").at("z_diff").get<double>() <= 1e-9);

  // grid-size mismatch: m_points must be a multiple of the population count
  const fs::path dir2 = scratch_dir();
  const std::string bad = write_config(
      dir2,
      "[model]\ngame_class = mpmfg\npopulations = 2\nweights = 1,0,0,1\nQ_T = 1\n"
      "[grid]\nhorizon = 1\nn_steps = 50\n"
      "[graphon]\nkind = step\nweights = 1,0,0,1\nm_points = 5\n");
  CHECK(run({"reduce-check", bad}) == 2);

  const std::string wrong_game = write_config(scratch_dir(), kDecoupledMfg);
  CHECK(run({"reduce-check", wrong_game}) == 2);
}
