#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace stax {

using PolicyId = std::uint64_t;

struct ParamBounds {
  double min = -5.0;
  double max = 5.0;
};

// Flat parameter vector of a policy network.
struct Genome {
  std::vector<double> params;
  PolicyId id = 0;
  std::optional<PolicyId> parent_id;
};

enum class DescriptorKind { ground_truth, learned };

std::string_view to_string(DescriptorKind kind);

struct BehaviorDescriptor {
  std::vector<double> values;
  DescriptorKind kind = DescriptorKind::ground_truth;
};

// Row-major G x G grayscale image, values in [0, 1].
struct Raster {
  int size = 0;
  std::vector<float> pixels;

  Raster() = default;
  explicit Raster(int g) : size(g), pixels(static_cast<std::size_t>(g) * g, 0.0f) {}

  float& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * size + col]; }
  float at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * size + col]; }
};

using Observations = std::vector<Raster>;

struct EvaluatedPolicy {
  Genome genome;
  // Immutable once evaluated; shared between every container holding a copy.
  std::shared_ptr<const Observations> observations;
  BehaviorDescriptor ground_truth_bd;
  std::optional<BehaviorDescriptor> learned_bd;
  double reward = 0.0;
  double novelty = 0.0;
  double surprise = 0.0;
  std::uint64_t evaluated_at = 0;

  PolicyId id() const { return genome.id; }
};

// Descriptor currently driving the search; throws if a learned one is requested but absent.
std::span<const double> active_descriptor(const EvaluatedPolicy& policy, DescriptorKind kind);

class IdSource {
 public:
  explicit IdSource(PolicyId first = 1) : next_(first) {}
  PolicyId next() { return next_++; }
  PolicyId peek() const { return next_; }

 private:
  PolicyId next_;
};

}  // namespace stax
