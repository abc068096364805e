#pragma once

#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "stax/random.hpp"
#include "stax/types.hpp"

namespace stax::test {

inline EvaluatedPolicy make_policy(PolicyId id, std::vector<double> gt, double reward = 0.0,
                                   std::optional<std::vector<double>> learned = std::nullopt) {
  EvaluatedPolicy p;
  p.genome.id = id;
  p.genome.params = {static_cast<double>(id)};
  p.ground_truth_bd = {std::move(gt), DescriptorKind::ground_truth};
  if (learned) p.learned_bd = BehaviorDescriptor{std::move(*learned), DescriptorKind::learned};
  p.reward = reward;
  p.observations = std::make_shared<Observations>();
  return p;
}

inline std::vector<double> uniform_vector(Rng& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace stax::test
