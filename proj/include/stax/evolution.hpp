#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "stax/random.hpp"
#include "stax/types.hpp"

namespace stax {

// Gaussian mutation with per-coordinate standard deviation `sigma`, clamped to
// `bounds`. Each offspring gets a fresh id and `parent.id` as parent.
std::vector<Genome> mutate(const Genome& parent, double sigma, std::size_t m,
                           const ParamBounds& bounds, Rng& rng, IdSource& ids);

// Standard-normal sample, clamped to bounds.
Genome random_genome(std::size_t dimension, const ParamBounds& bounds, Rng& rng, IdSource& ids);

using DescriptorView = std::span<const double>;
using DistanceFn = double (*)(DescriptorView, DescriptorView);

double euclidean_distance(DescriptorView a, DescriptorView b);

// Mean distance to the min(k, |references|) nearest references. The caller
// excludes the target from `references`. +inf when `references` is empty.
double novelty(DescriptorView target, std::span<const DescriptorView> references, std::size_t k,
               DistanceFn distance = euclidean_distance);

// Batch form: scores each target against `references`, skipping references
// that carry the target's own id.
std::vector<double> novelty_scores(std::span<const DescriptorView> targets,
                                   std::span<const PolicyId> target_ids,
                                   std::span<const DescriptorView> references,
                                   std::span<const PolicyId> reference_ids, std::size_t k,
                                   DistanceFn distance = euclidean_distance);

// --- NSGA-II -----------------------------------------------------------------

// Both objectives are maximized.
struct ObjectivePair {
  double first = 0.0;
  double second = 0.0;
};

bool dominates(const ObjectivePair& a, const ObjectivePair& b);

struct FrontAssignment {
  std::vector<std::size_t> front;  // per member, 0 = non-dominated
  std::vector<double> crowding;    // per member, within its own front
  std::size_t front_count = 0;
};

// `ids` only orders ties when computing crowding distances, so that the
// result does not depend on input order.
FrontAssignment fast_nondominated_sort(std::span<const ObjectivePair> objectives,
                                       std::span<const PolicyId> ids);

// Crowding distance of the members listed in `front` (indices into objectives).
std::vector<double> crowding_distance(std::span<const ObjectivePair> objectives,
                                      std::span<const PolicyId> ids,
                                      std::span<const std::size_t> front);

// Indices of the M survivors, ordered by (front, crowding desc, id).
std::vector<std::size_t> select_next_population(std::span<const ObjectivePair> objectives,
                                                std::span<const PolicyId> ids, std::size_t M);

// Top-M by a single score, ties broken by lower id.
std::vector<std::size_t> select_top(std::span<const double> scores, std::span<const PolicyId> ids,
                                    std::size_t M);

enum class SelectionObjective { novelty, surprise };

SelectionObjective draw_alternating_objective(Rng& rng);

// Picks novelty or surprise uniformly at random, then selects top-M by it.
std::vector<std::size_t> alternating_select(std::span<const double> novelty,
                                            std::span<const double> surprise,
                                            std::span<const PolicyId> ids, std::size_t M,
                                            Rng& rng, SelectionObjective* chosen = nullptr);

}  // namespace stax
