#include "stax/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "stax/csv.hpp"

namespace stax {

std::string_view to_string(AeRegime regime) {
  switch (regime) {
    case AeRegime::train:
      return "train";
    case AeRegime::frozen_random:
      return "frozen_random";
    case AeRegime::reshuffle_random:
      return "reshuffle_random";
    case AeRegime::reset_each_episode:
      return "reset_each_episode";
  }
  return "unknown";
}

std::string_view to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::nsga2_novelty_surprise:
      return "nsga2_novelty_surprise";
    case SelectionMode::alternating:
      return "alternating";
    case SelectionMode::novelty_only:
      return "novelty_only";
    case SelectionMode::novelty_reward_nsga2:
      return "novelty_reward_nsga2";
    case SelectionMode::map_elites_grid:
      return "map_elites_grid";
  }
  return "unknown";
}

bool RunConfig::uses_autoencoder() const {
  return descriptor == DescriptorKind::learned ||
         selection == SelectionMode::nsga2_novelty_surprise ||
         selection == SelectionMode::alternating;
}

namespace {

std::string with_location(const std::string& key, int line, const std::string& message) {
  std::string out;
  if (line > 0) out += "line " + std::to_string(line) + ": ";
  if (!key.empty()) out += "'" + key + "': ";
  return out + message;
}

}  // namespace

ConfigError::ConfigError(std::string key, int line, const std::string& message)
    : std::runtime_error(with_location(key, line, message)), key_(std::move(key)), line_(line), detail_(message) {}

// --- variants ---------------------------------------------------------------------

namespace {

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names = {
      "STAX",   "STAX_single", "STAX-ALT_multi", "STAX-ALT_single", "STAX-NT", "STAX-NT_reset",
      "STAX_reset", "NS",      "SERENE",         "TAXONS",          "MOO-NR",  "MAP-Elites"};
  return names;
}

}  // namespace

bool is_known_variant(std::string_view variant) {
  const auto& n = variant_names();
  return std::find(n.begin(), n.end(), variant) != n.end();
}

std::vector<std::string> known_variants() { return variant_names(); }

void apply_variant(RunConfig& c, std::string_view v) {
  if (!is_known_variant(v)) throw ConfigError("variant", 0, "unknown variant '" + std::string(v) + "'");
  c.variant = std::string(v);
  // Start from the full algorithm and switch pieces off.
  c.descriptor = DescriptorKind::learned;
  c.selection = SelectionMode::nsga2_novelty_surprise;
  c.ae_regime = AeRegime::train;
  c.emitters = true;
  if (v == "STAX_single") {
    c.k_samples = 1;
  } else if (v == "STAX-ALT_multi") {
    c.selection = SelectionMode::alternating;
  } else if (v == "STAX-ALT_single") {
    c.selection = SelectionMode::alternating;
    c.k_samples = 1;
  } else if (v == "STAX-NT") {
    c.ae_regime = AeRegime::frozen_random;
  } else if (v == "STAX-NT_reset") {
    c.ae_regime = AeRegime::reshuffle_random;
  } else if (v == "STAX_reset") {
    c.ae_regime = AeRegime::reset_each_episode;
  } else if (v == "NS") {
    c.descriptor = DescriptorKind::ground_truth;
    c.selection = SelectionMode::novelty_only;
    c.emitters = false;
  } else if (v == "SERENE") {
    c.descriptor = DescriptorKind::ground_truth;
    c.selection = SelectionMode::novelty_only;
  } else if (v == "TAXONS") {
    c.selection = SelectionMode::alternating;
    c.emitters = false;
    c.k_samples = 1;
  } else if (v == "MOO-NR") {
    c.descriptor = DescriptorKind::ground_truth;
    c.selection = SelectionMode::novelty_reward_nsga2;
    c.emitters = false;
  } else if (v == "MAP-Elites") {
    c.descriptor = DescriptorKind::ground_truth;
    c.selection = SelectionMode::map_elites_grid;
    c.emitters = false;
  }
}

void apply_profile(RunConfig& c, std::string_view profile) {
  if (profile != "desk") throw ConfigError("profile", 0, "unknown profile '" + std::string(profile) + "'");
  c.budget = 50000;
  c.grid_cells = 50;
  c.environment.raster_size = 32;
  c.environment.arm_dof = 10;
}

// --- value parsing ----------------------------------------------------------------

namespace {

using csv::trim;

struct Parser {
  std::string key;
  int line;

  [[noreturn]] void fail(const std::string& message) const { throw ConfigError(key, line, message); }

  double real(std::string_view v) const {
    try {
      return csv::parse_double(trim(v));
    } catch (const std::exception&) {
      fail("expected a number, got '" + std::string(v) + "'");
    }
  }

  long long integer(std::string_view v) const {
    try {
      return csv::parse_int(trim(v));
    } catch (const std::exception&) {
      fail("expected an integer, got '" + std::string(v) + "'");
    }
  }

  std::uint64_t count(std::string_view v, long long min) const {
    const long long x = integer(v);
    if (x < min) fail("must be >= " + std::to_string(min));
    return static_cast<std::uint64_t>(x);
  }

  bool boolean(std::string_view v) const {
    const auto t = trim(v);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    fail("expected a boolean, got '" + std::string(v) + "'");
  }

  std::vector<double> reals(std::string_view v) const {
    std::vector<double> out;
    std::string text(v);
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) out.push_back(real(tok));
    return out;
  }

  // "a b c d; a b c d; ..." with a fixed number of values per group.
  std::vector<std::vector<double>> groups(std::string_view v, std::size_t width) const {
    std::vector<std::vector<double>> out;
    for (const auto& part : csv::split(v, ';')) {
      if (trim(part).empty()) continue;
      auto g = reals(part);
      if (g.size() != width) fail("each group needs " + std::to_string(width) + " numbers");
      out.push_back(std::move(g));
    }
    return out;
  }
};

}  // namespace

void set_config_value(RunConfig& c, std::string_view key_view, std::string_view value_view, int line) {
  const std::string key(key_view);
  const Parser p{key, line};
  const std::string value(trim(value_view));

  if (key == "variant") {
    if (!is_known_variant(value)) p.fail("unknown variant '" + value + "'");
    c.variant = value;
  } else if (key == "env") {
    if (!is_known_environment(value)) p.fail("unknown environment '" + value + "'");
    c.env = value;
  } else if (key == "seed") {
    c.seed = p.count(value, 0);
  } else if (key == "Bud") {
    c.budget = p.count(value, 1);
  } else if (key == "K_Bud") {
    c.chunk = p.count(value, 1);
  } else if (key == "M") {
    c.population = p.count(value, 1);
  } else if (key == "m") {
    c.offspring = p.count(value, 1);
  } else if (key == "sigma") {
    const double s = p.real(value);
    if (!(s > 0.0) || !std::isfinite(s)) p.fail("must be > 0");
    c.sigma = s;
  } else if (key == "N_Q") {
    c.n_q = p.count(value, 0);
  } else if (key == "M_E") {
    c.emitter_population = p.count(value, 1);
  } else if (key == "lambda") {
    c.lambda = p.count(value, 2);
  } else if (key == "K_samples") {
    c.k_samples = p.count(value, 1);
  } else if (key == "latent_dim") {
    c.latent_dim = p.count(value, 1);
  } else if (key == "k_nn") {
    c.k_nn = p.count(value, 1);
  } else if (key == "param_min") {
    c.bounds.min = p.real(value);
  } else if (key == "param_max") {
    c.bounds.max = p.real(value);
  } else if (key == "ae_regime") {
    if (value == "train") c.ae_regime = AeRegime::train;
    else if (value == "frozen_random") c.ae_regime = AeRegime::frozen_random;
    else if (value == "reshuffle_random") c.ae_regime = AeRegime::reshuffle_random;
    else if (value == "reset_each_episode") c.ae_regime = AeRegime::reset_each_episode;
    else p.fail("unknown regime '" + value + "'");
  } else if (key == "descriptor") {
    if (value == "learned") c.descriptor = DescriptorKind::learned;
    else if (value == "ground_truth") c.descriptor = DescriptorKind::ground_truth;
    else p.fail("expected learned or ground_truth");
  } else if (key == "selection") {
    if (value == "nsga2_novelty_surprise") c.selection = SelectionMode::nsga2_novelty_surprise;
    else if (value == "alternating") c.selection = SelectionMode::alternating;
    else if (value == "novelty_only") c.selection = SelectionMode::novelty_only;
    else if (value == "novelty_reward_nsga2") c.selection = SelectionMode::novelty_reward_nsga2;
    else if (value == "map_elites_grid") c.selection = SelectionMode::map_elites_grid;
    else p.fail("unknown selection '" + value + "'");
  } else if (key == "emitters") {
    c.emitters = p.boolean(value);
  } else if (key == "ae_hidden") {
    std::vector<int> sizes;
    for (double d : p.reals(value)) {
      if (d < 1 || d != std::floor(d)) p.fail("hidden sizes must be positive integers");
      sizes.push_back(static_cast<int>(d));
    }
    c.ae_hidden = std::move(sizes);
  } else if (key == "ae_max_epochs") {
    c.ae_max_epochs = static_cast<int>(p.count(value, 0));
  } else if (key == "ae_batch_size") {
    c.ae_batch_size = static_cast<int>(p.count(value, 1));
  } else if (key == "ae_learning_rate") {
    const double lr = p.real(value);
    if (!(lr > 0.0)) p.fail("must be > 0");
    c.ae_learning_rate = lr;
  } else if (key == "split_fraction") {
    const double f = p.real(value);
    if (!(f > 0.0) || f > 1.0) p.fail("must lie in (0, 1]");
    c.split_fraction = f;
  } else if (key == "grid_cells") {
    c.grid_cells = static_cast<int>(p.count(value, 1));
  } else if (key == "eval_threads") {
    c.eval_threads = p.count(value, 1);
  } else if (key == "metrics_interval") {
    c.metrics_interval = p.count(value, 0);
  } else if (key == "walls") {
    std::vector<Segment> walls;
    for (const auto& g : p.groups(value, 4)) walls.push_back({{g[0], g[1]}, {g[2], g[3]}});
    c.environment.walls = std::move(walls);
  } else if (key == "reward_areas") {
    std::vector<RewardArea> areas;
    for (const auto& g : p.groups(value, 4)) {
      if (!(g[2] > 0.0)) p.fail("reward area radius must be > 0");
      if (!(g[3] > 0.0)) p.fail("reward area max_reward must be > 0");
      areas.push_back({{g[0], g[1]}, g[2], g[3]});
    }
    c.environment.reward_areas = std::move(areas);
  } else if (key == "link_lengths") {
    auto lengths = p.reals(value);
    for (double l : lengths) {
      if (!(l > 0.0)) p.fail("link lengths must be > 0");
    }
    c.environment.link_lengths = std::move(lengths);
  } else if (key == "episode_length") {
    c.environment.episode_length = static_cast<int>(p.count(value, 1));
  } else if (key == "raster_size") {
    const auto g = p.count(value, 4);
    if (g > 128) p.fail("must be <= 128");
    c.environment.raster_size = static_cast<int>(g);
  } else if (key == "arm_dof") {
    const auto d = p.count(value, 1);
    if (d > 64) p.fail("must be <= 64");
    c.environment.arm_dof = d;
  } else if (key == "end_effector_only") {
    c.environment.end_effector_only = p.boolean(value);
  } else if (key == "friction") {
    const double f = p.real(value);
    if (f < 0.0 || f > 1.0) p.fail("must lie in [0, 1]");
    c.environment.friction = f;
  } else {
    p.fail("unknown key");
  }
}

void validate(const RunConfig& c) {
  if (!(c.bounds.min < c.bounds.max)) throw ConfigError("param_min", 0, "must be < param_max");
  if (c.selection == SelectionMode::map_elites_grid && c.descriptor != DescriptorKind::ground_truth) {
    throw ConfigError("selection", 0, "map_elites_grid needs ground_truth descriptors");
  }
  if (!is_known_environment(c.env)) throw ConfigError("env", 0, "unknown environment '" + c.env + "'");
  if (!is_known_variant(c.variant)) throw ConfigError("variant", 0, "unknown variant '" + c.variant + "'");
}

// --- experiment files ---------------------------------------------------------------

RunConfig ExperimentSpec::resolve(const RunSpec& run, std::uint64_t seed) const {
  RunConfig c;
  if (profile) apply_profile(c, *profile);
  apply_variant(c, run.variant);
  c.env = run.env;
  for (const auto& a : global_overrides) set_config_value(c, a.key, a.value, a.line);
  for (const auto& a : run.overrides) set_config_value(c, a.key, a.value, a.line);
  c.seed = seed;
  return c;
}

std::size_t ExperimentSpec::run_count() const {
  std::size_t n = 0;
  for (const auto& r : runs) n += r.seeds.size();
  return n;
}

namespace {

std::vector<std::uint64_t> parse_seeds(std::string_view value, int line) {
  const Parser p{"seeds", line};
  std::vector<std::uint64_t> seeds;
  for (double d : p.reals(value)) {
    if (d < 0 || d != std::floor(d)) p.fail("seeds must be non-negative integers");
    seeds.push_back(static_cast<std::uint64_t>(d));
  }
  if (seeds.empty()) p.fail("at least one seed is required");
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) p.fail("seeds must be distinct");
  return seeds;
}

std::vector<std::uint64_t> default_seeds(const std::optional<std::string>& profile) {
  std::vector<std::uint64_t> seeds(profile ? 5 : 15);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = i + 1;
  return seeds;
}

}  // namespace

ExperimentSpec parse_config(std::string_view text) {
  ExperimentSpec spec;
  std::optional<std::vector<std::uint64_t>> global_seeds;
  std::vector<std::optional<std::vector<std::uint64_t>>> run_seeds;
  std::set<std::string> seen;  // keys in the current section
  RunConfig scratch;           // type/range check of every assignment as it is read

  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    std::string_view body = trim(std::string_view(raw).substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body != "[run]") throw ConfigError(std::string(body), line, "unknown section");
      spec.runs.emplace_back();
      spec.runs.back().line = line;
      run_seeds.emplace_back();
      seen.clear();
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ConfigError("", line, "expected 'key = value'");
    const std::string key(trim(body.substr(0, eq)));
    const std::string value(trim(body.substr(eq + 1)));
    if (key.empty()) throw ConfigError("", line, "missing key");
    if (!seen.insert(key).second) throw ConfigError(key, line, "duplicate key");

    if (spec.runs.empty()) {
      if (key == "output_dir") {
        if (value.empty()) throw ConfigError(key, line, "must not be empty");
        spec.output_dir = value;
      } else if (key == "profile") {
        try {
          RunConfig probe;
          apply_profile(probe, value);
        } catch (const ConfigError&) {
          throw ConfigError(key, line, "unknown profile '" + value + "'");
        }
        spec.profile = value;
      } else if (key == "parallel_runs") {
        spec.parallel_runs = Parser{key, line}.count(value, 1);
      } else if (key == "seeds") {
        global_seeds = parse_seeds(value, line);
      } else if (key == "variant" || key == "env") {
        throw ConfigError(key, line, "belongs in a [run] section");
      } else {
        set_config_value(scratch, key, value, line);
        spec.global_overrides.push_back({key, value, line});
      }
      continue;
    }

    RunSpec& run = spec.runs.back();
    if (key == "variant") {
      if (!is_known_variant(value)) throw ConfigError(key, line, "unknown variant '" + value + "'");
      run.variant = value;
    } else if (key == "env") {
      if (!is_known_environment(value)) throw ConfigError(key, line, "unknown environment '" + value + "'");
      run.env = value;
    } else if (key == "seeds") {
      run_seeds.back() = parse_seeds(value, line);
    } else if (key == "output_dir" || key == "profile" || key == "parallel_runs") {
      throw ConfigError(key, line, "must appear before the first [run] section");
    } else {
      set_config_value(scratch, key, value, line);
      run.overrides.push_back({key, value, line});
    }
  }

  if (spec.runs.empty()) throw ConfigError("", 0, "no [run] sections");

  std::map<std::pair<std::string, std::string>, std::set<std::uint64_t>> used;
  for (std::size_t i = 0; i < spec.runs.size(); ++i) {
    RunSpec& run = spec.runs[i];
    run.seeds = run_seeds[i] ? *run_seeds[i] : (global_seeds ? *global_seeds : default_seeds(spec.profile));
    run.explicit_seeds = run_seeds[i] || global_seeds;
    auto& taken = used[{run.variant, run.env}];
    for (auto s : run.seeds) {
      if (!taken.insert(s).second) {
        throw ConfigError("seeds", run.line,
                          "seed " + std::to_string(s) + " repeated for " + run.variant + "/" + run.env);
      }
    }
    try {
      validate(spec.resolve(run, run.seeds.front()));
    } catch (const ConfigError& e) {
      throw ConfigError(e.key(), e.line() > 0 ? e.line() : run.line, e.detail());
    }
  }
  return spec;
}

ExperimentSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string to_config_text(const RunConfig& c) {
  std::ostringstream out;
  auto real = [](double v) { return csv::format_double(v); };
  out << "variant = " << c.variant << '\n'
      << "env = " << c.env << '\n'
      << "seed = " << c.seed << '\n'
      << "Bud = " << c.budget << '\n'
      << "K_Bud = " << c.chunk << '\n'
      << "M = " << c.population << '\n'
      << "m = " << c.offspring << '\n'
      << "sigma = " << real(c.sigma) << '\n'
      << "N_Q = " << c.n_q << '\n'
      << "M_E = " << c.emitter_population << '\n'
      << "lambda = " << c.lambda << '\n'
      << "K_samples = " << c.k_samples << '\n'
      << "latent_dim = " << c.latent_dim << '\n'
      << "k_nn = " << c.k_nn << '\n'
      << "param_min = " << real(c.bounds.min) << '\n'
      << "param_max = " << real(c.bounds.max) << '\n'
      << "ae_regime = " << to_string(c.ae_regime) << '\n'
      << "descriptor = " << to_string(c.descriptor) << '\n'
      << "selection = " << to_string(c.selection) << '\n'
      << "emitters = " << (c.emitters ? "true" : "false") << '\n'
      << "ae_hidden =";
  for (int h : c.ae_hidden) out << ' ' << h;
  out << '\n'
      << "ae_max_epochs = " << c.ae_max_epochs << '\n'
      << "ae_batch_size = " << c.ae_batch_size << '\n'
      << "ae_learning_rate = " << real(c.ae_learning_rate) << '\n'
      << "split_fraction = " << real(c.split_fraction) << '\n'
      << "grid_cells = " << c.grid_cells << '\n'
      << "eval_threads = " << c.eval_threads << '\n'
      << "metrics_interval = " << c.metrics_interval << '\n';
  const auto& e = c.environment;
  if (e.walls) {
    out << "walls =";
    for (std::size_t i = 0; i < e.walls->size(); ++i) {
      const auto& w = (*e.walls)[i];
      out << (i ? "; " : " ") << real(w.a.x) << ' ' << real(w.a.y) << ' ' << real(w.b.x) << ' '
          << real(w.b.y);
    }
    out << '\n';
  }
  if (e.reward_areas) {
    out << "reward_areas =";
    for (std::size_t i = 0; i < e.reward_areas->size(); ++i) {
      const auto& a = (*e.reward_areas)[i];
      out << (i ? "; " : " ") << real(a.center.x) << ' ' << real(a.center.y) << ' ' << real(a.radius)
          << ' ' << real(a.max_reward);
    }
    out << '\n';
  }
  if (e.link_lengths) {
    out << "link_lengths =";
    for (double l : *e.link_lengths) out << ' ' << real(l);
    out << '\n';
  }
  if (e.episode_length) out << "episode_length = " << *e.episode_length << '\n';
  if (e.raster_size) out << "raster_size = " << *e.raster_size << '\n';
  if (e.arm_dof) out << "arm_dof = " << *e.arm_dof << '\n';
  if (e.end_effector_only) out << "end_effector_only = " << (*e.end_effector_only ? "true" : "false") << '\n';
  if (e.friction) out << "friction = " << real(*e.friction) << '\n';
  return out.str();
}

}  // namespace stax
