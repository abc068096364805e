#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stax/config.hpp"
#include "stax/engine.hpp"

namespace stax {

// Command-line conveniences; each maps onto a config key.
struct ExperimentOptions {
  std::optional<std::string> output_dir;
  std::optional<std::vector<std::uint64_t>> seeds;  // replaces every run's seed list
  std::optional<std::size_t> parallel_runs;
  std::optional<std::uint64_t> metrics_interval;
  std::optional<std::string> profile;
};

// Throws ConfigError when an option value is invalid.
void apply_options(ExperimentSpec& spec, const ExperimentOptions& options);

struct RunOutcome {
  std::string variant;
  std::string env;
  std::uint64_t seed = 0;
  std::filesystem::path directory;
  bool ok = false;
  std::string error;
  double seconds = 0.0;
};

struct ExperimentReport {
  std::vector<RunOutcome> runs;
  std::filesystem::path summary_path;
  int exit_code = 0;  // 0 all runs ok, 2 at least one failed
};

std::string run_directory_name(const std::string& variant, const std::string& env, std::uint64_t seed);

// Writes config.txt, metrics.csv, novelty_archive.csv, reward_archive.csv,
// emitters.log and (when present) ae.ckpt into a hidden sibling, then renames it
// into place. Returns the final directory.
std::filesystem::path write_run_directory(const std::filesystem::path& root, const RunResult& result);

// Runs every (variant, env, seed), then writes summary.csv (and failures.csv
// when a run threw). Progress goes to `log` when non-null.
ExperimentReport run_experiment(const ExperimentSpec& spec, std::ostream* log = nullptr);

// Linear-interpolation quantile (the usual "type 7"); throws on empty input.
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);
double interquartile_range(std::vector<double> values);

struct SummaryRow {
  std::string variant;
  std::string env;
  std::size_t runs = 0;
  double coverage_median = 0.0;
  double coverage_iqr = 0.0;
  std::vector<double> reward_median;  // per reward area
  std::vector<double> reward_iqr;
};

// Aggregates the final metrics row of every run directory below `root`.
std::vector<SummaryRow> summarize_directory(const std::filesystem::path& root);
std::string format_summary(const std::vector<SummaryRow>& rows);

}  // namespace stax
