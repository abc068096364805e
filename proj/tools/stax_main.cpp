// stax: run, validate and summarize experiments described by a config file.
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "stax/config.hpp"
#include "stax/csv.hpp"
#include "stax/experiment.hpp"

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::string token;
  for (char c : text + ",") {
    if (c == ',' || c == ' ') {
      if (!token.empty()) {
        const long long v = stax::csv::parse_int(token);
        if (v < 0) throw stax::ConfigError("seeds", 0, "seeds must be non-negative integers");
        seeds.push_back(static_cast<std::uint64_t>(v));
      }
      token.clear();
    } else {
      token += c;
    }
  }
  return seeds;
}

void print_plan(const stax::ExperimentSpec& spec) {
  std::cout << "output_dir: " << spec.output_dir << '\n'
            << "profile: " << spec.profile.value_or("none") << '\n'
            << "runs: " << spec.run_count() << '\n';
  for (const auto& run : spec.runs) {
    const auto c = spec.resolve(run, run.seeds.front());
    std::cout << "  " << run.variant << ' ' << run.env << " seeds";
    for (auto s : run.seeds) std::cout << ' ' << s;
    std::cout << "  (Bud " << c.budget << ", M " << c.population << ", K_samples " << c.k_samples << ")\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STAX quality-diversity experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> output_dir, seeds_text, profile;
  std::optional<std::size_t> parallel_runs;
  std::optional<std::uint64_t> metrics_interval;
  bool dry_run = false;

  auto* run_cmd = app.add_subcommand("run", "Run every (variant, env, seed) in a config");
  run_cmd->add_option("config", config_path, "Experiment config file")->required();
  run_cmd->add_option("-o,--output", output_dir, "Output directory");
  run_cmd->add_option("--seeds", seeds_text, "Seed list replacing the config's, e.g. 1,2,3");
  run_cmd->add_option("--parallel-runs", parallel_runs, "Runs executed concurrently");
  run_cmd->add_option("--metrics-interval", metrics_interval, "Evaluations between metrics rows (0 = every chunk)");
  run_cmd->add_option("--profile", profile, "Preset profile (desk)");
  run_cmd->add_flag("--dry-run", dry_run, "Validate and print the plan without running");

  auto* validate_cmd = app.add_subcommand("validate", "Parse and validate a config");
  validate_cmd->add_option("config", config_path, "Experiment config file")->required();

  std::string summary_dir;
  auto* summarize_cmd = app.add_subcommand("summarize", "Rebuild summary.csv from run directories");
  summarize_cmd->add_option("dir", summary_dir, "Output directory of a previous run")->required();

  CLI11_PARSE(app, argc, argv);

  if (summarize_cmd->parsed()) {
    try {
      const std::string text = stax::format_summary(stax::summarize_directory(summary_dir));
      stax::csv::write_file_atomic(std::filesystem::path(summary_dir) / "summary.csv", text);
      std::cout << text;
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "summarize: " << e.what() << '\n';
      return 1;
    }
  }

  stax::ExperimentSpec spec;
  try {
    spec = stax::load_config(config_path);
    stax::ExperimentOptions options;
    options.output_dir = output_dir;
    options.profile = profile;
    options.parallel_runs = parallel_runs;
    options.metrics_interval = metrics_interval;
    if (seeds_text) options.seeds = parse_seed_list(*seeds_text);
    stax::apply_options(spec, options);
  } catch (const std::exception& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return 1;
  }

  if (validate_cmd->parsed() || dry_run) {
    print_plan(spec);
    return 0;
  }

  const auto report = stax::run_experiment(spec, &std::cerr);
  std::cout << "summary: " << report.summary_path.string() << '\n';
  return report.exit_code;
}
