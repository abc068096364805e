#include "stax/emitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "stax/csv.hpp"
#include "stax/evolution.hpp"

namespace stax {

std::string_view to_string(EmitterState state) {
  switch (state) {
    case EmitterState::bootstrapping:
      return "bootstrapping";
    case EmitterState::queued:
      return "queued";
    case EmitterState::running:
      return "running";
    case EmitterState::terminated:
      return "terminated";
    case EmitterState::discarded:
      return "discarded";
  }
  return "unknown";
}

double compute_emitter_sigma(const Genome& seed, std::span<const Genome> neighbors,
                             double fallback_sigma) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : neighbors) {
    if (g.id == seed.id) continue;
    best = std::min(best, euclidean_distance(seed.params, g.params));
  }
  if (!std::isfinite(best) || !(best > 0.0)) return fallback_sigma;
  return best / 3.0;
}

namespace {

std::vector<double> rewards_of(std::span<const EvaluatedPolicy> policies) {
  std::vector<double> out;
  out.reserve(policies.size());
  for (const auto& p : policies) out.push_back(p.reward);
  return out;
}

EmitterEvent make_event(std::string_view name, const Emitter& e) {
  return {std::string(name), e.id,      e.generation, e.improvement,
          e.emitter_novelty, e.r_max, e.evaluations};
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Emitter init_emitter(std::uint64_t id, EvaluatedPolicy seed, double sigma, double emitter_novelty,
                     const EmitterSettings& settings, const EvaluateFn& evaluate, Rng& rng,
                     IdSource& ids) {
  if (!(seed.reward > 0.0)) throw std::invalid_argument("emitters need a rewarding seed");
  Emitter e;
  e.id = id;
  e.sigma = sigma;
  e.emitter_novelty = emitter_novelty;
  e.r_max = seed.reward;
  auto genomes = mutate(seed.genome, sigma, settings.population_size, settings.bounds, rng, ids);
  e.seed = std::move(seed);
  e.population = evaluate(std::move(genomes));
  e.evaluations = e.population.size();
  e.population_rewards.push_back(rewards_of(e.population));
  e.state = EmitterState::bootstrapping;
  return e;
}

std::vector<EvaluatedPolicy> emitter_generation(Emitter& emitter, const EmitterSettings& settings,
                                                const EvaluateFn& evaluate, Rng& rng,
                                                IdSource& ids) {
  std::vector<Genome> genomes;
  genomes.reserve(settings.generation_cost());
  for (const auto& parent : emitter.population) {
    auto kids = mutate(parent.genome, emitter.sigma, settings.offspring_per_parent, settings.bounds,
                       rng, ids);
    for (auto& k : kids) genomes.push_back(std::move(k));
  }
  std::vector<EvaluatedPolicy> offspring = evaluate(std::move(genomes));
  emitter.evaluations += offspring.size();

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& o : offspring) best = std::max(best, o.reward);
  emitter.best_offspring.push_back(best);

  std::vector<const EvaluatedPolicy*> pool;
  pool.reserve(emitter.population.size() + offspring.size());
  for (const auto& p : emitter.population) pool.push_back(&p);
  for (const auto& o : offspring) pool.push_back(&o);
  std::vector<double> scores;
  std::vector<PolicyId> pool_ids;
  for (const auto* p : pool) {
    scores.push_back(p->reward);
    pool_ids.push_back(p->id());
  }
  std::vector<EvaluatedPolicy> next;
  for (std::size_t i : select_top(scores, pool_ids, settings.population_size)) {
    next.push_back(*pool[i]);
  }
  emitter.population = std::move(next);
  emitter.population_rewards.push_back(rewards_of(emitter.population));
  ++emitter.generation;
  return offspring;
}

double improvement(std::span<const std::vector<double>> history, std::size_t lambda,
                   std::size_t population_size, std::size_t gamma0) {
  if (lambda == 0 || population_size == 0) throw std::invalid_argument("lambda and M_E must be > 0");
  if (gamma0 > history.size() || history.size() - gamma0 < lambda) {
    throw std::invalid_argument("improvement needs at least lambda generations of history");
  }
  const std::size_t half = lambda / 2;
  auto window_sum = [&](std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t g = from; g < to; ++g) {
      for (double r : history[g]) s += r;
    }
    return s;
  };
  const double first = window_sum(gamma0, gamma0 + half);
  const double last = window_sum(history.size() - half, history.size());
  return (last - first) / static_cast<double>(lambda * population_size);
}

std::size_t termination_window(std::size_t genome_dim, std::size_t population_size) {
  if (population_size == 0) throw std::invalid_argument("M_E must be > 0");
  return 120 + 20 * (genome_dim / population_size);
}

bool should_terminate(std::span<const double> per_generation_best, std::size_t genome_dim,
                      std::size_t population_size) {
  const std::size_t w = termination_window(genome_dim, population_size);
  if (per_generation_best.size() < w) return false;
  const auto window = per_generation_best.subspan(per_generation_best.size() - w);
  const std::vector<double> first(window.begin(), window.begin() + 20);
  const std::vector<double> last(window.end() - 20, window.end());
  const double max_first = *std::max_element(first.begin(), first.end());
  const double max_last = *std::max_element(last.begin(), last.end());
  return max_last <= max_first || median_of(last) <= median_of(first);
}

std::vector<std::size_t> nondominated_emitters(std::span<const Emitter> emitters) {
  std::vector<std::size_t> front;
  for (std::size_t i = 0; i < emitters.size(); ++i) {
    const ObjectivePair a{emitters[i].improvement, emitters[i].emitter_novelty};
    bool dominated = false;
    for (std::size_t j = 0; j < emitters.size() && !dominated; ++j) {
      if (i == j) continue;
      dominated = dominates({emitters[j].improvement, emitters[j].emitter_novelty}, a);
    }
    if (!dominated) front.push_back(i);
  }
  return front;
}

std::size_t pareto_pick_emitter(std::span<const Emitter> emitters, Rng& rng) {
  if (emitters.empty()) throw std::invalid_argument("emitter buffer is empty");
  const auto front = nondominated_emitters(emitters);
  std::uniform_int_distribution<std::size_t> pick(0, front.size() - 1);
  return front[pick(rng)];
}

double novelty_against(const EvaluatedPolicy& policy, std::span<const EvaluatedPolicy> references,
                       DescriptorKind kind, std::size_t k) {
  std::vector<DescriptorView> refs;
  refs.reserve(references.size());
  for (const auto& r : references) {
    if (r.id() == policy.id()) continue;
    refs.push_back(active_descriptor(r, kind));
  }
  return novelty(active_descriptor(policy, kind), refs, k);
}

std::size_t most_novel_candidate(std::span<const EvaluatedPolicy> candidates,
                                 std::span<const EvaluatedPolicy> reward_archive,
                                 DescriptorKind kind, std::size_t k) {
  if (candidates.empty()) throw std::invalid_argument("no emitter candidates");
  std::size_t best = 0;
  double best_novelty = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double n = novelty_against(candidates[i], reward_archive, kind, k);
    if (n > best_novelty) {
      best_novelty = n;
      best = i;
    }
  }
  return best;
}

std::uint64_t bootstrap_step(ExploitationState& state, ExploitationContext& ctx,
                             std::uint64_t budget) {
  const auto& s = ctx.settings;
  std::uint64_t spent = 0;
  while (true) {
    if (!state.bootstrapping) {
      if (ctx.candidates.empty() || spent + s.population_size > budget) break;
      const std::size_t idx = most_novel_candidate(ctx.candidates.entries(),
                                                   ctx.reward_archive.entries(), s.kind, s.k_nn);
      EvaluatedPolicy seed = ctx.candidates.take(idx);
      const double sigma = compute_emitter_sigma(seed.genome, ctx.neighbor_genomes, s.fallback_sigma);
      const double eta = novelty_against(seed, ctx.reward_archive.entries(), s.kind, s.k_nn);
      state.bootstrapping = init_emitter(state.next_emitter_id++, std::move(seed), sigma, eta, s,
                                         ctx.evaluate, ctx.rng, ctx.ids);
      spent += s.population_size;
      state.events.push_back(make_event("created", *state.bootstrapping));
    }
    Emitter& e = *state.bootstrapping;
    while (e.generation < s.bootstrap_generations && spent + s.generation_cost() <= budget) {
      emitter_generation(e, s, ctx.evaluate, ctx.rng, ctx.ids);
      spent += s.generation_cost();
    }
    if (e.generation < s.bootstrap_generations) break;  // resumes next phase

    e.improvement = improvement(e.population_rewards, s.bootstrap_generations, s.population_size, 0);
    if (e.improvement > 0.0) {
      e.state = EmitterState::queued;
      state.events.push_back(make_event("queued", e));
      state.queue.push_back(std::move(e));
    } else {
      e.state = EmitterState::discarded;
      state.events.push_back(make_event("discarded", e));
      ++state.discarded;
    }
    state.bootstrapping.reset();
  }
  return spent;
}

std::uint64_t emitter_run_step(ExploitationState& state, ExploitationContext& ctx,
                               std::uint64_t budget) {
  const auto& s = ctx.settings;
  std::uint64_t spent = 0;
  while (!state.queue.empty() && spent + s.generation_cost() <= budget) {
    const std::size_t idx = pareto_pick_emitter(state.queue, ctx.rng);
    Emitter e = std::move(state.queue[idx]);
    state.queue.erase(state.queue.begin() + static_cast<std::ptrdiff_t>(idx));
    e.state = EmitterState::running;
    e.gamma0 = e.population_rewards.size() - 1;
    state.events.push_back(make_event("resumed", e));

    bool terminated = false;
    while (spent + s.generation_cost() <= budget) {
      auto offspring = emitter_generation(e, s, ctx.evaluate, ctx.rng, ctx.ids);
      spent += s.generation_cost();
      // Thresholds are those of the previous generation; maxima update afterwards.
      const double r_prev = e.r_max;
      const double eta_prev = e.eta_max;
      for (auto& o : offspring) {
        if (o.reward > r_prev) {
          ctx.reward_archive.append(o);
          e.r_max = std::max(e.r_max, o.reward);
        }
        o.novelty = novelty_against(o, ctx.novelty_archive.entries(), s.kind, s.k_nn);
        if (o.novelty > eta_prev) {
          e.eta_max = std::max(e.eta_max, o.novelty);
          e.novelty_candidates.push_back(std::move(o));
        }
      }
      if (should_terminate(e.best_offspring, s.genome_dim, s.population_size)) {
        terminated = true;
        break;
      }
    }

    if (terminated) {
      archive_sample_add(ctx.novelty_archive, e.novelty_candidates, s.n_q, ctx.rng);
      e.state = EmitterState::terminated;
      state.events.push_back(make_event("terminated", e));
      ++state.terminated;
      continue;
    }
    // Budget ran out: refresh I over the stint, stretched back to lambda
    // generations when the stint was shorter.
    const std::size_t len = e.population_rewards.size();
    const std::size_t lambda = s.bootstrap_generations;
    std::size_t from = e.gamma0;
    if (len - from < lambda) from = len >= lambda ? len - lambda : 0;
    if (len - from >= lambda) e.improvement = improvement(e.population_rewards, lambda, s.population_size, from);
    e.state = EmitterState::queued;
    state.events.push_back(make_event("queued", e));
    state.queue.push_back(std::move(e));
  }
  return spent;
}

PhaseReport run_exploitation_phase(ExploitationState& state, ExploitationContext& ctx,
                                   std::uint64_t budget) {
  PhaseReport report;
  report.bootstrap_evaluations = bootstrap_step(state, ctx, budget / 3);
  report.emitter_evaluations = emitter_run_step(state, ctx, budget - report.bootstrap_evaluations);
  return report;
}

void refresh_emitter_novelty(ExploitationState& state, std::span<const EvaluatedPolicy> reward_archive,
                             DescriptorKind kind, std::size_t k) {
  for (auto& e : state.queue) e.emitter_novelty = novelty_against(e.seed, reward_archive, kind, k);
  if (state.bootstrapping) {
    state.bootstrapping->emitter_novelty =
        novelty_against(state.bootstrapping->seed, reward_archive, kind, k);
  }
}

std::vector<std::span<EvaluatedPolicy>> emitter_policy_views(ExploitationState& state) {
  std::vector<std::span<EvaluatedPolicy>> views;
  auto add = [&](Emitter& e) {
    views.emplace_back(&e.seed, 1);
    views.emplace_back(e.population);
    views.emplace_back(e.novelty_candidates);
  };
  for (auto& e : state.queue) add(e);
  if (state.bootstrapping) add(*state.bootstrapping);
  return views;
}

std::string format_emitter_log(std::span<const EmitterEvent> events) {
  std::ostringstream out;
  out << "event,emitter_id,generation,improvement,emitter_novelty,r_max,evaluations\n";
  for (const auto& e : events) {
    out << e.event << ',' << e.emitter_id << ',' << e.generation << ','
        << csv::format_double(e.improvement) << ',' << csv::format_double(e.emitter_novelty) << ','
        << csv::format_double(e.r_max) << ',' << e.evaluations << '\n';
  }
  return out.str();
}

}  // namespace stax
