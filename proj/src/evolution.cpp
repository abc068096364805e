#include "stax/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace stax {

std::vector<Genome> mutate(const Genome& parent, double sigma, std::size_t m,
                           const ParamBounds& bounds, Rng& rng, IdSource& ids) {
  if (!(sigma > 0.0)) throw std::invalid_argument("mutation sigma must be > 0");
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<Genome> offspring;
  offspring.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    Genome child;
    child.params.resize(parent.params.size());
    for (std::size_t i = 0; i < parent.params.size(); ++i) {
      child.params[i] = std::clamp(parent.params[i] + noise(rng), bounds.min, bounds.max);
    }
    child.id = ids.next();
    child.parent_id = parent.id;
    offspring.push_back(std::move(child));
  }
  return offspring;
}

Genome random_genome(std::size_t dimension, const ParamBounds& bounds, Rng& rng, IdSource& ids) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Genome g;
  g.params.resize(dimension);
  for (auto& p : g.params) p = std::clamp(normal(rng), bounds.min, bounds.max);
  g.id = ids.next();
  return g;
}

double euclidean_distance(DescriptorView a, DescriptorView b) {
  if (a.size() != b.size()) throw std::invalid_argument("descriptor dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

namespace {

double mean_of_k_smallest(std::vector<double>& distances, std::size_t k) {
  if (distances.empty()) return std::numeric_limits<double>::infinity();
  const std::size_t n = std::min(k, distances.size());
  if (n == 0) return std::numeric_limits<double>::infinity();
  std::nth_element(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(n - 1),
                   distances.end());
  // Sum in sorted order so the result is independent of nth_element's layout.
  std::sort(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(n));
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += distances[i];
  return sum / static_cast<double>(n);
}

}  // namespace

double novelty(DescriptorView target, std::span<const DescriptorView> references, std::size_t k,
               DistanceFn distance) {
  std::vector<double> d;
  d.reserve(references.size());
  for (const auto& r : references) d.push_back(distance(target, r));
  return mean_of_k_smallest(d, k);
}

std::vector<double> novelty_scores(std::span<const DescriptorView> targets,
                                   std::span<const PolicyId> target_ids,
                                   std::span<const DescriptorView> references,
                                   std::span<const PolicyId> reference_ids, std::size_t k,
                                   DistanceFn distance) {
  if (targets.size() != target_ids.size() || references.size() != reference_ids.size()) {
    throw std::invalid_argument("novelty_scores: id/descriptor count mismatch");
  }
  std::vector<double> out(targets.size());
  std::vector<double> d;
  d.reserve(references.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    d.clear();
    for (std::size_t r = 0; r < references.size(); ++r) {
      if (reference_ids[r] == target_ids[t]) continue;
      d.push_back(distance(targets[t], references[r]));
    }
    out[t] = mean_of_k_smallest(d, k);
  }
  return out;
}

bool dominates(const ObjectivePair& a, const ObjectivePair& b) {
  return a.first >= b.first && a.second >= b.second && (a.first > b.first || a.second > b.second);
}

std::vector<double> crowding_distance(std::span<const ObjectivePair> objectives,
                                      std::span<const PolicyId> ids,
                                      std::span<const std::size_t> front) {
  const std::size_t n = front.size();
  std::vector<double> crowd(n, 0.0);
  if (n <= 2) {
    std::fill(crowd.begin(), crowd.end(), std::numeric_limits<double>::infinity());
    return crowd;
  }
  std::vector<std::size_t> order(n);
  for (int obj = 0; obj < 2; ++obj) {
    auto value = [&](std::size_t local) {
      const auto& o = objectives[front[local]];
      return obj == 0 ? o.first : o.second;
    };
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = value(a), vb = value(b);
      if (va != vb) return va < vb;
      return ids[front[a]] < ids[front[b]];
    });
    crowd[order.front()] = std::numeric_limits<double>::infinity();
    crowd[order.back()] = std::numeric_limits<double>::infinity();
    const double range = value(order.back()) - value(order.front());
    if (!(range > 0.0) || !std::isfinite(range)) continue;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      crowd[order[i]] += (value(order[i + 1]) - value(order[i - 1])) / range;
    }
  }
  return crowd;
}

FrontAssignment fast_nondominated_sort(std::span<const ObjectivePair> objectives,
                                       std::span<const PolicyId> ids) {
  const std::size_t n = objectives.size();
  if (ids.size() != n) throw std::invalid_argument("fast_nondominated_sort: id count mismatch");
  FrontAssignment out;
  out.front.assign(n, 0);
  out.crowding.assign(n, 0.0);

  std::vector<std::vector<std::size_t>> dominated_by_me(n);
  std::vector<std::size_t> domination_count(n, 0);
  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates(objectives[p], objectives[q])) {
        dominated_by_me[p].push_back(q);
      } else if (dominates(objectives[q], objectives[p])) {
        ++domination_count[p];
      }
    }
    if (domination_count[p] == 0) current.push_back(p);
  }

  std::size_t rank = 0;
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t p : current) {
      out.front[p] = rank;
      for (std::size_t q : dominated_by_me[p]) {
        if (--domination_count[q] == 0) next.push_back(q);
      }
    }
    const auto crowd = crowding_distance(objectives, ids, current);
    for (std::size_t i = 0; i < current.size(); ++i) out.crowding[current[i]] = crowd[i];
    current = std::move(next);
    ++rank;
  }
  out.front_count = rank;
  return out;
}

std::vector<std::size_t> select_next_population(std::span<const ObjectivePair> objectives,
                                                std::span<const PolicyId> ids, std::size_t M) {
  const auto fronts = fast_nondominated_sort(objectives, ids);
  std::vector<std::size_t> order(objectives.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (fronts.front[a] != fronts.front[b]) return fronts.front[a] < fronts.front[b];
    if (fronts.crowding[a] != fronts.crowding[b]) return fronts.crowding[a] > fronts.crowding[b];
    return ids[a] < ids[b];
  });
  // Sorting by (front, crowding) admits whole fronts first and fills the last
  // partially admitted front with its least crowded members.
  order.resize(std::min(M, order.size()));
  return order;
}

std::vector<std::size_t> select_top(std::span<const double> scores, std::span<const PolicyId> ids,
                                    std::size_t M) {
  if (scores.size() != ids.size()) throw std::invalid_argument("select_top: size mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  order.resize(std::min(M, order.size()));
  return order;
}

SelectionObjective draw_alternating_objective(Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  return coin(rng) ? SelectionObjective::novelty : SelectionObjective::surprise;
}

std::vector<std::size_t> alternating_select(std::span<const double> novelty,
                                            std::span<const double> surprise,
                                            std::span<const PolicyId> ids, std::size_t M,
                                            Rng& rng, SelectionObjective* chosen) {
  const auto objective = draw_alternating_objective(rng);
  if (chosen) *chosen = objective;
  return select_top(objective == SelectionObjective::novelty ? novelty : surprise, ids, M);
}

}  // namespace stax
