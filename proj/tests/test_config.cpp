#include <doctest.h>

#include <string>

#include "stax/config.hpp"

using namespace stax;

namespace {

// Returns the ConfigError thrown by parse_config, or fails the test.
ConfigError parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected a ConfigError");
  return ConfigError("", 0, "");
}

}  // namespace

TEST_CASE("defaults are the full-scale values") {
  const RunConfig c;
  CHECK(c.budget == 500000);
  CHECK(c.chunk == 100);
  CHECK(c.population == 100);
  CHECK(c.offspring == 2);
  CHECK(c.sigma == 0.5);
  CHECK(c.n_q == 5);
  CHECK(c.emitter_population == 6);
  CHECK(c.lambda == 6);
  CHECK(c.k_samples == 5);
  CHECK(c.k_nn == 15);
  CHECK(c.variant == "STAX");
  CHECK(c.uses_autoencoder());
}

TEST_CASE("desk profile shrinks the run") {
  RunConfig c;
  apply_profile(c, "desk");
  CHECK(c.budget == 50000);
  CHECK(c.grid_cells == 50);
  CHECK(*c.environment.raster_size == 32);
  CHECK(*c.environment.arm_dof == 10);
  CHECK_THROWS_AS(apply_profile(c, "laptop"), ConfigError);
}

TEST_CASE("variants switch the expected pieces") {
  auto with = [](const char* v) {
    RunConfig c;
    apply_variant(c, v);
    return c;
  };
  CHECK(with("STAX_single").k_samples == 1);
  CHECK(with("STAX-ALT_multi").selection == SelectionMode::alternating);
  CHECK(with("STAX-ALT_multi").k_samples == 5);
  CHECK(with("STAX-NT").ae_regime == AeRegime::frozen_random);
  CHECK(with("STAX-NT_reset").ae_regime == AeRegime::reshuffle_random);
  CHECK(with("STAX_reset").ae_regime == AeRegime::reset_each_episode);
  const auto ns = with("NS");
  CHECK(ns.descriptor == DescriptorKind::ground_truth);
  CHECK_FALSE(ns.emitters);
  CHECK_FALSE(ns.uses_autoencoder());
  CHECK(with("SERENE").emitters);
  CHECK(with("TAXONS").uses_autoencoder());
  CHECK_FALSE(with("TAXONS").emitters);
  CHECK(with("MOO-NR").selection == SelectionMode::novelty_reward_nsga2);
  CHECK(with("MAP-Elites").selection == SelectionMode::map_elites_grid);
  CHECK(known_variants().size() == 12);
  RunConfig c;
  CHECK_THROWS_AS(apply_variant(c, "STAX2"), ConfigError);
}

TEST_CASE("a negative sigma names the key") {
  const auto e = parse_error("sigma = -1\n[run]\nvariant = STAX\n");
  CHECK(e.key() == "sigma");
  CHECK(e.line() == 1);
  CHECK(std::string(e.what()).find("sigma") != std::string::npos);
}

TEST_CASE("bad values are rejected with their line") {
  CHECK(parse_error("[run]\nvariant = STAX\nM = 0\n").line() == 3);
  CHECK(parse_error("[run]\nvariant = STAX\nlambda = 1\n").key() == "lambda");
  CHECK(parse_error("[run]\nbogus = 3\n").key() == "bogus");
  CHECK(parse_error("[run]\nvariant = Nope\n").key() == "variant");
  CHECK(parse_error("[run]\nenv = Moon\n").key() == "env");
  CHECK(parse_error("[runs]\n").line() == 1);
  CHECK(parse_error("# only a comment\n\n[run]\nM 10\n").line() == 4);
  CHECK(parse_error("[run]\nM = 10\nM = 12\n").detail() == "duplicate key");
  CHECK(parse_error("M = 1.5\n[run]\n").key() == "M");
  CHECK(parse_error("split_fraction = 1.5\n[run]\n").key() == "split_fraction");
  CHECK(parse_error("").detail() == "no [run] sections");
  CHECK(parse_error("variant = NS\n[run]\n").key() == "variant");
  CHECK(parse_error("[run]\nprofile = desk\n").key() == "profile");
  CHECK(parse_error("profile = huge\n[run]\n").key() == "profile");
}

TEST_CASE("cross-field checks report the run header") {
  const auto e = parse_error("[run]\nvariant = STAX\n\n[run]\nvariant = NS\nparam_min = 3\nparam_max = 2\n");
  CHECK(e.key() == "param_min");
  CHECK(e.line() == 4);
  CHECK(parse_error("[run]\nvariant = STAX\nselection = map_elites_grid\n").key() == "selection");
}

TEST_CASE("seed rules") {
  SUBCASE("defaults depend on the profile") {
    const auto full = parse_config("[run]\n");
    CHECK(full.runs[0].seeds.size() == 15);
    CHECK_FALSE(full.runs[0].explicit_seeds);
    const auto desk = parse_config("profile = desk\n[run]\n");
    CHECK(desk.runs[0].seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
    CHECK(desk.run_count() == 5);
  }
  SUBCASE("run seeds beat global seeds") {
    const auto s = parse_config("seeds = 7, 8\n[run]\nvariant = NS\n[run]\nvariant = STAX\nseeds = 3\n");
    CHECK(s.runs[0].seeds == std::vector<std::uint64_t>{7, 8});
    CHECK(s.runs[1].seeds == std::vector<std::uint64_t>{3});
    CHECK(s.runs[0].explicit_seeds);
    CHECK(s.run_count() == 3);
  }
  SUBCASE("duplicates are errors") {
    CHECK(parse_error("[run]\nseeds = 1, 1\n").key() == "seeds");
    CHECK(parse_error("[run]\nseeds = 1, 2\n[run]\nseeds = 2\n").line() == 3);
    CHECK(parse_error("[run]\nseeds = -1\n").key() == "seeds");
    // Same seed on different (variant, env) pairs is fine.
    CHECK_NOTHROW(parse_config("[run]\nseeds = 1\n[run]\nvariant = NS\nseeds = 1\n"));
  }
}

TEST_CASE("resolution precedence") {
  const auto spec = parse_config(
      "profile = desk\nM = 40\nsigma = 0.25\n"
      "[run]\nvariant = STAX_single\nM = 20\n"
      "[run]\nvariant = NS\nenv = RedundantArm\nK_samples = 3\n");
  const auto a = spec.resolve(spec.runs[0], 4);
  CHECK(a.budget == 50000);
  CHECK(a.population == 20);
  CHECK(a.sigma == 0.25);
  CHECK(a.k_samples == 1);
  CHECK(a.seed == 4);
  const auto b = spec.resolve(spec.runs[1], 1);
  CHECK(b.population == 40);
  CHECK(b.env == "RedundantArm");
  CHECK(b.k_samples == 3);  // an explicit key beats the variant
}

TEST_CASE("global section options") {
  const auto spec = parse_config("output_dir = out/x\nparallel_runs = 3\n[run]\n");
  CHECK(spec.output_dir == "out/x");
  CHECK(spec.parallel_runs == 3);
  CHECK(parse_error("parallel_runs = 0\n[run]\n").key() == "parallel_runs");
}

TEST_CASE("config text round-trips") {
  RunConfig c;
  apply_variant(c, "STAX-ALT_single");
  apply_profile(c, "desk");
  c.seed = 9;
  c.sigma = 1.0 / 3.0;
  c.ae_hidden = {32, 16};
  c.environment.walls = std::vector<Segment>{{{0, 0}, {1, 0.1}}, {{2, 2}, {3, 3}}};
  c.environment.reward_areas = std::vector<RewardArea>{{{5, 5}, 2.5, 1.0}};
  c.environment.friction = 0.125;
  const auto text = to_config_text(c);

  const auto spec = parse_config("[run]\n" + text);
  const auto back = spec.resolve(spec.runs[0], c.seed);
  CHECK(to_config_text(back) == text);
  CHECK(back.sigma == c.sigma);
  CHECK(back.k_samples == 1);
  CHECK(back.environment.walls->size() == 2);
}
