#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "stax/environment.hpp"
#include "stax/random.hpp"
#include "stax/types.hpp"

namespace stax {

// C x C occupancy grid over a box. Points on or beyond an edge land in the
// edge cell.
class CoverageGrid {
 public:
  CoverageGrid(Box box, int cells = 50);

  // Flat cell index (row-major over y then x) of a point.
  std::size_t cell_of(Vec2 p) const;
  void add(Vec2 p);
  std::size_t occupied() const { return occupied_; }
  int cells() const { return cells_; }
  double coverage() const;  // percent

 private:
  Box box_;
  int cells_;
  std::vector<std::uint8_t> flags_;
  std::size_t occupied_ = 0;
};

double coverage(std::span<const Vec2> final_positions, const Box& box, int cells = 50);

// Running maximum reward per reward area.
class RewardTracker {
 public:
  explicit RewardTracker(std::size_t areas) : maxima_(areas, 0.0) {}
  void record(int area, double reward);
  std::span<const double> maxima() const { return maxima_; }

 private:
  std::vector<double> maxima_;
};

struct RewardEvent {
  int area = -1;
  double reward = 0.0;
};

// Per-area running maxima after each prefix of `log` whose length is a
// multiple of `interval` (and after the full log). One row per sample point.
std::vector<std::vector<double>> max_reward_per_area(std::span<const RewardEvent> log,
                                                     std::size_t areas, std::size_t interval);

// nullopt when either input has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

// --- distance structure -------------------------------------------------------------

struct DistancePair {
  PolicyId anchor = 0;
  PolicyId member = 0;
  double gt_distance = 0.0;
  double learned_distance = 0.0;
};

struct AnchorCorrelation {
  PolicyId anchor = 0;
  std::optional<double> r;
};

struct DistanceReport {
  std::vector<DistancePair> pairs;
  std::vector<AnchorCorrelation> summary;
};

// Samples `anchors` policies (without replacement) and correlates their
// ground-truth and learned distances to every other member. Throws for fewer
// than 3 policies or policies lacking a learned descriptor.
DistanceReport distance_structure_report(std::span<const EvaluatedPolicy> archive,
                                         std::size_t anchors, Rng& rng);

void write_distance_pairs(std::ostream& out, const DistanceReport& report);
void write_distance_summary(std::ostream& out, const DistanceReport& report);
DistanceReport read_distance_report(std::istream& pairs, std::istream& summary);

}  // namespace stax
