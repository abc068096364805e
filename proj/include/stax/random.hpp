#pragma once

#include <cstdint>
#include <random>

namespace stax {

using Rng = std::mt19937_64;

// Independent streams derived from one run seed, so that e.g. the autoencoder
// initialization can change without perturbing the initial population.
enum class RngStream : std::uint64_t {
  evolution = 1,
  autoencoder = 2,
  emitters = 3,
  sampling = 4,
  analysis = 5,
};

inline Rng make_stream(std::uint64_t seed, RngStream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x5eed5eedu};
  return Rng(seq);
}

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

}  // namespace stax
