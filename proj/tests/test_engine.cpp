#include <doctest.h>

#include <set>
#include <sstream>

#include "stax/archive.hpp"
#include "stax/csv.hpp"
#include "stax/engine.hpp"

using namespace stax;

namespace {

// Small enough to run every variant in a few seconds.
RunConfig small(const std::string& variant, std::uint64_t budget = 1200) {
  RunConfig c;
  apply_variant(c, variant);
  c.budget = budget;
  c.chunk = 40;
  c.population = 20;
  c.offspring = 2;
  c.emitter_population = 4;
  c.lambda = 3;
  c.latent_dim = 4;
  c.ae_hidden = {24};
  c.ae_max_epochs = 2;
  c.ae_batch_size = 32;
  c.grid_cells = 20;
  c.metrics_interval = 0;
  c.environment.raster_size = 16;
  c.environment.episode_length = 60;
  return c;
}

std::string archive_text(const RunResult& r) {
  std::ostringstream out;
  write_archive_csv(out, r.novelty_archive.entries(), r.config.descriptor);
  write_archive_csv(out, r.reward_archive.entries(), r.config.descriptor);
  return out.str();
}

std::vector<std::vector<std::string>> metric_rows(const RunResult& r) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(r.metrics_csv);
  std::string line;
  while (std::getline(in, line)) rows.push_back(csv::split(line, ','));
  return rows;
}

}  // namespace

TEST_CASE("budget accounting and phase layout") {
  for (std::string v : {"STAX", "NS", "SERENE", "MAP-Elites"}) {
    CAPTURE(v);
    const auto c = small(v);
    const auto r = run(c);
    const std::uint64_t per_generation = c.population * c.offspring;
    CHECK(r.evaluations >= c.budget);
    CHECK(r.evaluations < c.budget + per_generation);
    CHECK(r.final_positions.size() == r.evaluations);

    REQUIRE_FALSE(r.chunks.empty());
    CHECK(r.chunks.front().phase == Phase::exploration);
    std::uint64_t total = 0;  // the first chunk includes the initial population
    for (std::size_t i = 0; i < r.chunks.size(); ++i) {
      const auto& ch = r.chunks[i];
      total += ch.evaluations;
      CHECK(ch.total_evaluations == total);
      CHECK(ch.index == i + 1);
      if (ch.phase == Phase::exploitation) {
        CHECK(ch.evaluations <= c.chunk);
        // Exploitation always follows exploration.
        REQUIRE(i > 0);
        CHECK(r.chunks[i - 1].phase == Phase::exploration);
      } else {
        CHECK(ch.evaluations < c.chunk + per_generation);
      }
    }
    CHECK(total == r.evaluations);
    if (!c.emitters) {
      for (const auto& ch : r.chunks) CHECK(ch.phase == Phase::exploration);
      CHECK(r.reward_archive.size() == 0);
    }
  }
}

TEST_CASE("training fires on the growing schedule") {
  const auto c = small("STAX", 2400);
  const auto r = run(c);
  std::vector<std::uint64_t> steps;
  for (const auto& t : r.trainings) steps.push_back(t.exploration_step);
  REQUIRE(steps.size() >= 5);
  const std::vector<std::uint64_t> expect{1, 3, 6, 10, 15};
  CHECK(std::vector<std::uint64_t>(steps.begin(), steps.begin() + 5) == expect);
  for (std::size_t i = 1; i < r.trainings.size(); ++i) {
    CHECK(r.trainings[i].optimizer_steps_before > r.trainings[i - 1].optimizer_steps_before);
  }
  REQUIRE(r.autoencoder);
  CHECK(r.autoencoder->optimizer_steps() > 0);
}

TEST_CASE("frozen and reset regimes") {
  SUBCASE("frozen weights equal the initial ones") {
    const auto c = small("STAX-NT");
    const auto r = run(c);
    REQUIRE(r.autoencoder);
    const auto fresh = make_autoencoder(c, 16);
    CHECK(r.autoencoder->flat_parameters() == fresh->flat_parameters());
    CHECK(r.autoencoder->optimizer_steps() == 0);
    CHECK(r.trainings.empty());
  }
  SUBCASE("reshuffled weights move but never train") {
    const auto c = small("STAX-NT_reset");
    const auto r = run(c);
    CHECK(r.autoencoder->flat_parameters() != make_autoencoder(c, 16)->flat_parameters());
    CHECK(r.autoencoder->optimizer_steps() == 0);
    CHECK_FALSE(r.trainings.empty());
  }
  SUBCASE("reset regime starts each episode from zero optimizer steps") {
    const auto r = run(small("STAX_reset", 2400));
    REQUIRE(r.trainings.size() >= 2);
    for (const auto& t : r.trainings) CHECK(t.optimizer_steps_before == 0);
  }
}

TEST_CASE("parallel evaluation is byte-identical to serial") {
  for (std::string v : {"STAX", "MAP-Elites"}) {
    CAPTURE(v);
    auto c = small(v);
    const auto serial = run(c);
    c.eval_threads = 3;
    const auto parallel = run(c);
    CHECK(serial.metrics_csv == parallel.metrics_csv);
    CHECK(archive_text(serial) == archive_text(parallel));
    CHECK(format_emitter_log(serial.emitter_events) == format_emitter_log(parallel.emitter_events));
  }
}

TEST_CASE("seeds change the run") {
  auto c = small("NS");
  const auto a = run(c);
  c.seed = 2;
  const auto b = run(c);
  CHECK(archive_text(a) != archive_text(b));
}

TEST_CASE("every variant runs on every environment") {
  for (const auto& v : known_variants()) {
    for (const char* env : {"PointMaze", "CurlingLite", "RedundantArm"}) {
      CAPTURE(v);
      CAPTURE(env);
      auto c = small(v, 400);
      c.env = env;
      const auto r = run(c);
      CHECK(r.evaluations >= c.budget);
      CHECK(r.coverage > 0.0);
      CHECK(static_cast<bool>(r.autoencoder) == c.uses_autoencoder());
      for (const auto& p : r.novelty_archive.entries()) {
        CHECK(p.learned_bd.has_value() == c.uses_autoencoder());
      }
    }
  }
}

TEST_CASE("novelty archive grows by N_Q per generation") {
  const auto c = small("NS", 800);
  const auto r = run(c);
  CHECK(r.novelty_archive.size() == r.chunks.back().generation * c.n_q);
}

TEST_CASE("MAP-Elites keeps one elite per cell") {
  const auto c = small("MAP-Elites", 2000);
  const auto r = run(c);
  std::set<std::pair<int, int>> cells;
  const auto env = make_environment(c.env, c.environment);
  const Box box = env->bounding_box();
  for (const auto& p : r.novelty_archive.entries()) {
    auto bin = [&](double v, double lo, double hi) {
      return std::clamp(static_cast<int>(std::floor((v - lo) / (hi - lo) * c.grid_cells)), 0, c.grid_cells - 1);
    };
    cells.insert({bin(p.ground_truth_bd.values[0], box.xmin, box.xmax),
                  bin(p.ground_truth_bd.values[1], box.ymin, box.ymax)});
  }
  CHECK(cells.size() == r.novelty_archive.size());
  CHECK(r.chunks.back().generation * c.population * c.offspring == r.evaluations - c.population);
  const auto rows = metric_rows(r);
  CHECK(std::stoul(rows.back()[rows.front().size() - 6]) == r.novelty_archive.size());
  // The grid never loses a filled cell, so coverage is at least the grid's share.
  CHECK(r.coverage >= 100.0 * static_cast<double>(cells.size()) / (c.grid_cells * c.grid_cells) - 1e-9);
}

TEST_CASE("metrics rows") {
  auto c = small("STAX");
  c.metrics_interval = 300;
  const auto r = run(c);
  const auto rows = metric_rows(r);
  REQUIRE(rows.size() >= 3);
  const auto env = make_environment(c.env, c.environment);
  auto header = metrics_header(env->reward_areas().size());
  header.pop_back();
  CHECK(rows.front() == csv::split(header, ','));
  std::uint64_t prev = 0;
  double prev_cov = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == rows.front().size());
    const auto d = std::stoull(rows[i][0]);
    CHECK(d > prev);
    const double cov = csv::parse_double(rows[i][5]);
    CHECK(cov >= prev_cov);
    prev = d;
    prev_cov = cov;
  }
  CHECK(prev == r.evaluations);
  CHECK(prev_cov == r.coverage);
}
