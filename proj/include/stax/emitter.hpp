#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stax/archive.hpp"
#include "stax/random.hpp"
#include "stax/types.hpp"

namespace stax {

enum class EmitterState { bootstrapping, queued, running, terminated, discarded };

std::string_view to_string(EmitterState state);

// Local elitist EA seeded from a rewarding policy.
struct Emitter {
  std::uint64_t id = 0;
  EvaluatedPolicy seed;
  double sigma = 0.0;
  std::vector<EvaluatedPolicy> population;  // P_gamma, size M_E
  std::size_t generation = 0;               // completed generations
  std::size_t gamma0 = 0;                   // history index where the current stint began

  // population_rewards[g] = rewards of P_g (index 0 is the initial population).
  std::vector<std::vector<double>> population_rewards;
  // best_offspring[g] = best offspring reward of generation g+1; drives termination.
  std::vector<double> best_offspring;

  double r_max = 0.0;
  double eta_max = 0.0;
  double emitter_novelty = 0.0;  // novelty of the seed w.r.t. the reward archive
  double improvement = 0.0;
  std::vector<EvaluatedPolicy> novelty_candidates;
  EmitterState state = EmitterState::bootstrapping;
  std::uint64_t evaluations = 0;
};

// Evaluates genomes in order; the returned policies carry descriptors for the
// active descriptor kind.
using EvaluateFn = std::function<std::vector<EvaluatedPolicy>(std::vector<Genome>)>;

struct EmitterSettings {
  std::size_t population_size = 6;        // M_E
  std::size_t offspring_per_parent = 2;   // m
  std::size_t bootstrap_generations = 6;  // lambda
  std::size_t n_q = 5;
  std::size_t k_nn = 15;
  std::size_t genome_dim = 0;             // n, for the termination window
  double fallback_sigma = 0.5;
  ParamBounds bounds;
  DescriptorKind kind = DescriptorKind::learned;

  std::size_t generation_cost() const { return offspring_per_parent * population_size; }
};

// Nearest parameter-space neighbor distance / 3. Neighbors sharing the seed's
// id are skipped; falls back when there is no neighbor or the distance is 0.
double compute_emitter_sigma(const Genome& seed, std::span<const Genome> neighbors,
                             double fallback_sigma);

// Samples P_0 around the seed and evaluates it (M_E evaluations).
Emitter init_emitter(std::uint64_t id, EvaluatedPolicy seed, double sigma, double emitter_novelty,
                     const EmitterSettings& settings, const EvaluateFn& evaluate, Rng& rng,
                     IdSource& ids);

// One generation: m * M_E offspring, evaluated; survivors are the top M_E of
// parents and offspring by reward (ties by lower id). Returns the offspring.
std::vector<EvaluatedPolicy> emitter_generation(Emitter& emitter, const EmitterSettings& settings,
                                                const EvaluateFn& evaluate, Rng& rng,
                                                IdSource& ids);

// Difference between the summed rewards of the last and first floor(lambda/2)
// generations of history[gamma0..], divided by lambda * M_E.
double improvement(std::span<const std::vector<double>> history, std::size_t lambda,
                   std::size_t population_size, std::size_t gamma0);

std::size_t termination_window(std::size_t genome_dim, std::size_t population_size);

// Stagnation test over the last W per-generation best rewards: stop unless both
// the max and the median of the last 20 strictly beat those of the first 20.
bool should_terminate(std::span<const double> per_generation_best, std::size_t genome_dim,
                      std::size_t population_size);

// Indices of emitters not dominated in (improvement, emitter_novelty).
std::vector<std::size_t> nondominated_emitters(std::span<const Emitter> emitters);

// Uniform choice among the non-dominated emitters. Throws on an empty buffer.
std::size_t pareto_pick_emitter(std::span<const Emitter> emitters, Rng& rng);

// --- exploitation phase ----------------------------------------------------------

struct EmitterEvent {
  std::string event;  // created, queued, discarded, resumed, terminated
  std::uint64_t emitter_id = 0;
  std::size_t generation = 0;
  double improvement = 0.0;
  double emitter_novelty = 0.0;
  double r_max = 0.0;
  std::uint64_t evaluations = 0;
};

struct ExploitationState {
  std::optional<Emitter> bootstrapping;  // interrupted bootstrap, resumed next phase
  std::vector<Emitter> queue;            // Q_Em
  std::uint64_t next_emitter_id = 1;
  std::vector<EmitterEvent> events;
  std::size_t terminated = 0;
  std::size_t discarded = 0;

  bool has_work(const CandidateEmitterBuffer& candidates) const {
    return !candidates.empty() || !queue.empty() || bootstrapping.has_value();
  }
  std::size_t active_emitters() const { return queue.size() + (bootstrapping ? 1 : 0); }
};

struct ExploitationContext {
  CandidateEmitterBuffer& candidates;
  NoveltyArchive& novelty_archive;
  RewardArchive& reward_archive;
  std::span<const Genome> neighbor_genomes;  // latest population and offspring
  EmitterSettings settings;
  EvaluateFn evaluate;
  Rng& rng;
  IdSource& ids;
};

struct PhaseReport {
  std::uint64_t bootstrap_evaluations = 0;
  std::uint64_t emitter_evaluations = 0;
  std::uint64_t total() const { return bootstrap_evaluations + emitter_evaluations; }
};

// Novelty of `policy` against a set of stored policies, in the active space.
double novelty_against(const EvaluatedPolicy& policy, std::span<const EvaluatedPolicy> references,
                       DescriptorKind kind, std::size_t k);

// Index of the candidate most novel w.r.t. the reward archive (first wins ties).
std::size_t most_novel_candidate(std::span<const EvaluatedPolicy> candidates,
                                 std::span<const EvaluatedPolicy> reward_archive,
                                 DescriptorKind kind, std::size_t k);

// Creates and bootstraps emitters within `budget` evaluations. A unit of work
// (initial population or one generation) only starts if it fits.
std::uint64_t bootstrap_step(ExploitationState& state, ExploitationContext& ctx,
                             std::uint64_t budget);

// Runs queued emitters within `budget` evaluations.
std::uint64_t emitter_run_step(ExploitationState& state, ExploitationContext& ctx,
                               std::uint64_t budget);

// floor(budget/3) for the bootstrap, everything left for the emitter step.
PhaseReport run_exploitation_phase(ExploitationState& state, ExploitationContext& ctx,
                                   std::uint64_t budget);

// Recomputes every live emitter's novelty against the reward archive.
void refresh_emitter_novelty(ExploitationState& state, std::span<const EvaluatedPolicy> reward_archive,
                             DescriptorKind kind, std::size_t k);

// Mutable views over every stored policy held by emitters (for descriptor refresh).
std::vector<std::span<EvaluatedPolicy>> emitter_policy_views(ExploitationState& state);

std::string format_emitter_log(std::span<const EmitterEvent> events);

}  // namespace stax
