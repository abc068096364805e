#include "stax/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "stax/archive.hpp"
#include "stax/csv.hpp"

namespace fs = std::filesystem;

namespace stax {

void apply_options(ExperimentSpec& spec, const ExperimentOptions& options) {
  if (options.output_dir) {
    if (options.output_dir->empty()) throw ConfigError("output_dir", 0, "must not be empty");
    spec.output_dir = *options.output_dir;
  }
  if (options.profile) {
    RunConfig probe;
    apply_profile(probe, *options.profile);
    const bool changed = spec.profile != options.profile;
    spec.profile = options.profile;
    if (changed) {
      // Runs that relied on the default seed list pick up the profile's.
      for (auto& run : spec.runs) {
        if (run.explicit_seeds) continue;
        run.seeds.resize(5);
        std::iota(run.seeds.begin(), run.seeds.end(), std::uint64_t{1});
      }
    }
  }
  if (options.seeds) {
    const std::set<std::uint64_t> unique(options.seeds->begin(), options.seeds->end());
    if (options.seeds->empty()) throw ConfigError("seeds", 0, "at least one seed is required");
    if (unique.size() != options.seeds->size()) throw ConfigError("seeds", 0, "seeds must be distinct");
    for (auto& run : spec.runs) {
      run.seeds = *options.seeds;
      run.explicit_seeds = true;
    }
  }
  if (options.parallel_runs) {
    if (*options.parallel_runs == 0) throw ConfigError("parallel_runs", 0, "must be at least 1");
    spec.parallel_runs = *options.parallel_runs;
  }
  if (options.metrics_interval) {
    spec.global_overrides.push_back({"metrics_interval", std::to_string(*options.metrics_interval), 0});
  }
  for (const auto& run : spec.runs) validate(spec.resolve(run, run.seeds.front()));
}

std::string run_directory_name(const std::string& variant, const std::string& env, std::uint64_t seed) {
  return variant + "_" + env + "_seed" + std::to_string(seed);
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out.flush()) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

fs::path write_run_directory(const fs::path& root, const RunResult& result) {
  const auto& c = result.config;
  const std::string name = run_directory_name(c.variant, c.env, c.seed);
  const fs::path final_dir = root / name;
  const fs::path tmp_dir = root / ("." + name + ".partial");
  fs::remove_all(tmp_dir);
  fs::create_directories(tmp_dir);
  try {
    write_text(tmp_dir / "config.txt", to_config_text(c));
    write_text(tmp_dir / "metrics.csv", result.metrics_csv);
    std::ostringstream nov, rew;
    write_archive_csv(nov, result.novelty_archive.entries(), c.descriptor);
    write_archive_csv(rew, result.reward_archive.entries(), c.descriptor);
    write_text(tmp_dir / "novelty_archive.csv", nov.str());
    write_text(tmp_dir / "reward_archive.csv", rew.str());
    write_text(tmp_dir / "emitters.log", format_emitter_log(result.emitter_events));
    if (result.autoencoder) {
      std::ofstream ckpt(tmp_dir / "ae.ckpt", std::ios::binary);
      save_checkpoint(ckpt, *result.autoencoder, result.schedule);
      if (!ckpt.flush()) throw std::runtime_error("cannot write checkpoint");
    }
    fs::remove_all(final_dir);
    fs::rename(tmp_dir, final_dir);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp_dir, ec);
    throw;
  }
  return final_dir;
}

ExperimentReport run_experiment(const ExperimentSpec& spec, std::ostream* log) {
  struct Job {
    const RunSpec* run;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& run : spec.runs) {
    for (auto seed : run.seeds) jobs.push_back({&run, seed});
  }

  const fs::path root = spec.output_dir;
  fs::create_directories(root);

  ExperimentReport report;
  report.runs.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> finished{0};
  std::mutex log_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      RunOutcome& out = report.runs[i];
      out.variant = job.run->variant;
      out.env = job.run->env;
      out.seed = job.seed;
      const auto start = std::chrono::steady_clock::now();
      try {
        const RunConfig config = spec.resolve(*job.run, job.seed);
        const RunResult result = run(config);
        out.directory = write_run_directory(root, result);
        out.ok = true;
      } catch (const std::exception& e) {
        out.error = e.what();
      }
      out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (log) {
        std::lock_guard lock(log_mutex);
        *log << '[' << ++finished << '/' << jobs.size() << "] " << out.variant << ' ' << out.env << " seed "
             << out.seed << ": " << (out.ok ? "ok" : "FAILED: " + out.error) << " (" << std::fixed
             << std::setprecision(1) << out.seconds << " s)\n";
        log->flush();
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(spec.parallel_runs, jobs.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::string failures = "variant,env,seed,error\n";
  bool any_failed = false;
  for (const auto& r : report.runs) {
    if (r.ok) continue;
    any_failed = true;
    std::string msg = r.error;
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::replace(msg.begin(), msg.end(), ',', ';');
    failures += r.variant + ',' + r.env + ',' + std::to_string(r.seed) + ',' + msg + '\n';
  }
  if (any_failed) csv::write_file_atomic(root / "failures.csv", failures);

  report.summary_path = root / "summary.csv";
  csv::write_file_atomic(report.summary_path, format_summary(summarize_directory(root)));
  report.exit_code = any_failed ? 2 : 0;
  return report;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double interquartile_range(std::vector<double> values) {
  return quantile(values, 0.75) - quantile(values, 0.25);
}

namespace {

std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[std::string(csv::trim(line.substr(0, eq)))] = std::string(csv::trim(line.substr(eq + 1)));
  }
  return kv;
}

}  // namespace

std::vector<SummaryRow> summarize_directory(const fs::path& root) {
  struct Final {
    double coverage;
    std::vector<double> rewards;
  };
  std::map<std::pair<std::string, std::string>, std::vector<Final>> groups;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    const auto name = entry.path().filename().string();
    if (name.empty() || name.front() == '.') continue;  // unfinished run
    if (!fs::exists(entry.path() / "metrics.csv") || !fs::exists(entry.path() / "config.txt")) continue;
    dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    const auto kv = read_key_values(dir / "config.txt");
    const auto table = csv::read_table(dir / "metrics.csv");
    if (table.rows.empty()) throw std::runtime_error("empty metrics in " + dir.string());
    const auto& last = table.rows.back();
    Final f;
    f.coverage = csv::parse_double(last[table.column("coverage")]);
    for (std::size_t i = 0;; ++i) {
      const std::string col = "max_reward_area_" + std::to_string(i);
      if (std::find(table.header.begin(), table.header.end(), col) == table.header.end()) break;
      f.rewards.push_back(csv::parse_double(last[table.column(col)]));
    }
    groups[{kv.at("variant"), kv.at("env")}].push_back(std::move(f));
  }

  std::vector<SummaryRow> rows;
  for (const auto& [key, finals] : groups) {
    SummaryRow row;
    row.variant = key.first;
    row.env = key.second;
    row.runs = finals.size();
    std::vector<double> cov;
    for (const auto& f : finals) cov.push_back(f.coverage);
    row.coverage_median = median(cov);
    row.coverage_iqr = interquartile_range(cov);
    const std::size_t areas = finals.front().rewards.size();
    for (std::size_t a = 0; a < areas; ++a) {
      std::vector<double> r;
      for (const auto& f : finals) r.push_back(a < f.rewards.size() ? f.rewards[a] : 0.0);
      row.reward_median.push_back(median(r));
      row.reward_iqr.push_back(interquartile_range(r));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_summary(const std::vector<SummaryRow>& rows) {
  std::size_t areas = 0;
  for (const auto& r : rows) areas = std::max(areas, r.reward_median.size());
  std::string out = "variant,env,runs,coverage_median,coverage_iqr";
  for (std::size_t a = 0; a < areas; ++a) {
    const std::string p = "max_reward_area_" + std::to_string(a);
    out += ',' + p + "_median," + p + "_iqr";
  }
  out += '\n';
  for (const auto& r : rows) {
    out += r.variant + ',' + r.env + ',' + std::to_string(r.runs) + ',' + csv::format_double(r.coverage_median) +
           ',' + csv::format_double(r.coverage_iqr);
    for (std::size_t a = 0; a < areas; ++a) {
      if (a < r.reward_median.size()) {
        out += ',' + csv::format_double(r.reward_median[a]) + ',' + csv::format_double(r.reward_iqr[a]);
      } else {
        out += ",,";
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace stax
