#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "stax/csv.hpp"
#include "stax/experiment.hpp"

using namespace stax;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("stax_test_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

const char* kSmall =
    "Bud = 300\nK_Bud = 40\nM = 20\nlatent_dim = 4\nae_hidden = 16\nae_max_epochs = 1\n"
    "raster_size = 16\nepisode_length = 40\ngrid_cells = 20\nmetrics_interval = 100\n";

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("quantiles use linear interpolation") {
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  CHECK(quantile({1, 2, 3, 4, 5}, 0.25) == 2.0);
  CHECK(quantile({10, 20}, 0.75) == 17.5);
  CHECK(interquartile_range({1, 2, 3, 4}) == doctest::Approx(1.5));
  CHECK(interquartile_range({7}) == 0.0);
  CHECK_THROWS(median({}));
}

TEST_CASE("run directory names") {
  CHECK(run_directory_name("STAX", "PointMaze", 3) == "STAX_PointMaze_seed3");
}

TEST_CASE("two variants by three seeds") {
  TempDir tmp;
  auto spec = parse_config(std::string("seeds = 1, 2, 3\n") + kSmall + "[run]\nvariant = NS\n[run]\nvariant = STAX\n");
  spec.output_dir = tmp.path.string();
  spec.parallel_runs = 2;
  std::ostringstream log;
  const auto report = run_experiment(spec, &log);
  CHECK(report.exit_code == 0);
  REQUIRE(report.runs.size() == 6);
  CHECK_FALSE(fs::exists(tmp.path / "failures.csv"));

  std::size_t dirs = 0;
  for (const auto& e : fs::directory_iterator(tmp.path)) {
    if (!e.is_directory()) continue;
    ++dirs;
    CHECK(e.path().filename().string().front() != '.');
    for (const char* f : {"config.txt", "metrics.csv", "novelty_archive.csv", "reward_archive.csv", "emitters.log"}) {
      CHECK(fs::exists(e.path() / f));
    }
  }
  CHECK(dirs == 6);
  CHECK(fs::exists(tmp.path / "STAX_PointMaze_seed2" / "ae.ckpt"));
  CHECK_FALSE(fs::exists(tmp.path / "NS_PointMaze_seed2" / "ae.ckpt"));
  CHECK(log.str().find("[6/6]") != std::string::npos);

  // Recompute the summary from the per-run metrics files.
  const auto table = csv::read_table(report.summary_path);
  REQUIRE(table.rows.size() == 2);
  for (const auto& row : table.rows) {
    const std::string variant = row[table.column("variant")];
    CHECK(row[table.column("runs")] == "3");
    std::vector<double> cov, r0;
    for (int seed = 1; seed <= 3; ++seed) {
      const auto m = csv::read_table(tmp.path / run_directory_name(variant, "PointMaze", seed) / "metrics.csv");
      cov.push_back(csv::parse_double(m.rows.back()[m.column("coverage")]));
      r0.push_back(csv::parse_double(m.rows.back()[m.column("max_reward_area_0")]));
    }
    std::sort(cov.begin(), cov.end());
    std::sort(r0.begin(), r0.end());
    CHECK(csv::parse_double(row[table.column("coverage_median")]) == cov[1]);
    CHECK(csv::parse_double(row[table.column("coverage_iqr")]) == doctest::Approx((cov[2] - cov[0]) / 2));
    CHECK(csv::parse_double(row[table.column("max_reward_area_0_median")]) == r0[1]);
  }

  // Re-summarizing gives the same file.
  CHECK(format_summary(summarize_directory(tmp.path)) == read_file(report.summary_path));
}

TEST_CASE("stored config reproduces the run") {
  TempDir tmp;
  auto spec = parse_config(std::string("seeds = 4\n") + kSmall + "[run]\nvariant = SERENE\n");
  spec.output_dir = tmp.path.string();
  run_experiment(spec);
  const auto dir = tmp.path / "SERENE_PointMaze_seed4";
  const auto again = parse_config("[run]\n" + read_file(dir / "config.txt"));
  const auto result = run(again.resolve(again.runs[0], 4));
  CHECK(result.metrics_csv == read_file(dir / "metrics.csv"));
}

TEST_CASE("a failing run does not stop the others") {
  TempDir tmp;
  auto spec = parse_config(std::string("seeds = 1, 2\n") + kSmall +
                           "[run]\nvariant = NS\n[run]\nvariant = MOO-NR\nwalls = 0 10 20 10\n");
  spec.output_dir = tmp.path.string();
  const auto report = run_experiment(spec);
  CHECK(report.exit_code == 2);
  const auto failures = csv::read_table(tmp.path / "failures.csv");
  CHECK(failures.rows.size() == 2);
  CHECK(failures.rows[0][0] == "MOO-NR");
  CHECK(fs::exists(tmp.path / "NS_PointMaze_seed2"));
  CHECK_FALSE(fs::exists(tmp.path / "MOO-NR_PointMaze_seed1"));
  const auto summary = csv::read_table(report.summary_path);
  CHECK(summary.rows.size() == 1);
}

TEST_CASE("summaries ignore unfinished directories") {
  TempDir tmp;
  auto spec = parse_config(std::string("seeds = 1\n") + kSmall + "[run]\nvariant = NS\n");
  spec.output_dir = tmp.path.string();
  run_experiment(spec);
  fs::create_directories(tmp.path / ".NS_PointMaze_seed2.partial");
  fs::copy(tmp.path / "NS_PointMaze_seed1", tmp.path / ".NS_PointMaze_seed2.partial",
           fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  const auto rows = summarize_directory(tmp.path);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].runs == 1);
}

TEST_CASE("command-line options") {
  auto spec = parse_config("[run]\nvariant = NS\n[run]\nvariant = STAX\nseeds = 9\n");
  ExperimentOptions o;
  o.profile = "desk";
  o.metrics_interval = 250;
  apply_options(spec, o);
  CHECK(spec.runs[0].seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
  CHECK(spec.runs[1].seeds == std::vector<std::uint64_t>{9});
  const auto c = spec.resolve(spec.runs[0], 1);
  CHECK(c.budget == 50000);
  CHECK(c.metrics_interval == 250);

  ExperimentOptions s;
  s.seeds = std::vector<std::uint64_t>{7, 8};
  s.output_dir = "elsewhere";
  s.parallel_runs = 4;
  apply_options(spec, s);
  CHECK(spec.run_count() == 4);
  CHECK(spec.output_dir == "elsewhere");
  CHECK(spec.parallel_runs == 4);

  ExperimentOptions dup;
  dup.seeds = std::vector<std::uint64_t>{1, 1};
  CHECK_THROWS_AS(apply_options(spec, dup), ConfigError);
  ExperimentOptions zero;
  zero.parallel_runs = 0;
  CHECK_THROWS_AS(apply_options(spec, zero), ConfigError);
  ExperimentOptions bad;
  bad.profile = "cluster";
  CHECK_THROWS_AS(apply_options(spec, bad), ConfigError);
}
