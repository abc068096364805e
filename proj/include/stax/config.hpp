#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stax/environment.hpp"
#include "stax/types.hpp"

namespace stax {

enum class AeRegime { train, frozen_random, reshuffle_random, reset_each_episode };
enum class SelectionMode {
  nsga2_novelty_surprise,
  alternating,
  novelty_only,
  novelty_reward_nsga2,
  map_elites_grid,
};

std::string_view to_string(AeRegime regime);
std::string_view to_string(SelectionMode mode);

// Defaults are the full-scale values; the desk profile shrinks the budget.
struct RunConfig {
  std::string variant = "STAX";
  std::string env = "PointMaze";
  std::uint64_t seed = 1;

  std::uint64_t budget = 500000;         // Bud
  std::uint64_t chunk = 100;             // K_Bud
  std::size_t population = 100;          // M
  std::size_t offspring = 2;             // m
  double sigma = 0.5;
  std::size_t n_q = 5;                   // N_Q
  std::size_t emitter_population = 6;    // M_E
  std::size_t lambda = 6;
  std::size_t k_samples = 5;
  std::size_t latent_dim = 10;
  std::size_t k_nn = 15;
  ParamBounds bounds;

  AeRegime ae_regime = AeRegime::train;
  DescriptorKind descriptor = DescriptorKind::learned;
  SelectionMode selection = SelectionMode::nsga2_novelty_surprise;
  bool emitters = true;

  std::vector<int> ae_hidden{256, 64};
  int ae_max_epochs = 50;
  int ae_batch_size = 64;
  double ae_learning_rate = 1e-3;
  double split_fraction = 0.9;

  int grid_cells = 50;  // coverage grid and MAP-Elites grid
  std::size_t eval_threads = 1;
  std::uint64_t metrics_interval = 1000;  // 0 = one row per chunk

  EnvironmentOverrides environment;

  // True when the variant needs an autoencoder at all.
  bool uses_autoencoder() const;
};

// Error carrying the offending key and line (line 0 when not from a file).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, int line, const std::string& message);
  const std::string& key() const { return key_; }
  int line() const { return line_; }
  const std::string& detail() const { return detail_; }  // message without location

 private:
  std::string key_;
  int line_;
  std::string detail_;
};

bool is_known_variant(std::string_view variant);
std::vector<std::string> known_variants();

// Applies a named variant's deltas. Throws ConfigError for unknown tags.
void apply_variant(RunConfig& config, std::string_view variant);

// "desk": Bud 50000, 50x50 coverage grid, 32x32 rasters, 10-DoF arm.
void apply_profile(RunConfig& config, std::string_view profile);

// Sets one key from its textual value; throws ConfigError on unknown keys,
// malformed values or out-of-range values.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value, int line = 0);

// Cross-field checks (bounds ordering, descriptor/selection compatibility).
void validate(const RunConfig& config);

struct Assignment {
  std::string key;
  std::string value;
  int line = 0;
};

struct RunSpec {
  std::string variant = "STAX";
  std::string env = "PointMaze";
  std::vector<std::uint64_t> seeds;
  bool explicit_seeds = false;  // false when the profile default was used
  std::vector<Assignment> overrides;
  int line = 0;  // line of the [run] header
};

struct ExperimentSpec {
  std::string output_dir = "results";
  std::optional<std::string> profile;
  std::size_t parallel_runs = 1;
  std::vector<Assignment> global_overrides;
  std::vector<RunSpec> runs;

  // Precedence: defaults, profile, variant, global overrides, run overrides.
  RunConfig resolve(const RunSpec& run, std::uint64_t seed) const;
  std::size_t run_count() const;
};

// Key/value text: `key = value` lines, `#` comments, global keys first, then
// one `[run]` section per (variant, env). Validates every run it describes.
ExperimentSpec parse_config(std::string_view text);
ExperimentSpec load_config(const std::string& path);

// Round-trippable `key = value` dump of a resolved config.
std::string to_config_text(const RunConfig& config);

}  // namespace stax
