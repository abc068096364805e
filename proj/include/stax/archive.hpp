#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stax/random.hpp"
#include "stax/types.hpp"

namespace stax {

// Append-only ordered collection of evaluated policies. Descriptors may only be
// rewritten all at once (after an autoencoder update).
class PolicyArchive {
 public:
  std::span<const EvaluatedPolicy> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const EvaluatedPolicy& operator[](std::size_t i) const { return entries_[i]; }

  // Mutable view used only by the descriptor refresh; the caller must not
  // change anything but descriptors and derived scores.
  std::span<EvaluatedPolicy> refresh_view() { return entries_; }

 protected:
  std::vector<EvaluatedPolicy> entries_;
};

class NoveltyArchive : public PolicyArchive {
 public:
  void append(EvaluatedPolicy policy) { entries_.push_back(std::move(policy)); }
};

class RewardArchive : public PolicyArchive {
 public:
  // Throws std::invalid_argument for non-rewarding policies.
  void append(EvaluatedPolicy policy);
};

// Rewarding policies found during exploration, waiting to seed emitters.
class CandidateEmitterBuffer {
 public:
  void push(EvaluatedPolicy policy);  // throws for reward <= 0
  EvaluatedPolicy take(std::size_t index);

  std::span<const EvaluatedPolicy> entries() const { return entries_; }
  std::span<EvaluatedPolicy> refresh_view() { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<EvaluatedPolicy> entries_;
};

// Appends min(n_q, |population|) distinct members of `population`, drawn
// uniformly without replacement. Returns the ids added, in draw order.
std::vector<PolicyId> archive_sample_add(NoveltyArchive& archive,
                                         std::span<const EvaluatedPolicy> population,
                                         std::size_t n_q, Rng& rng);

// Same sampling rule for an arbitrary destination.
std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t count,
                                                    Rng& rng);

struct RecordResult {
  bool added = false;
  double best = 0.0;
};

// Adds `policy` iff its reward strictly exceeds `best_so_far`.
RecordResult reward_archive_add_if_record(RewardArchive& archive, const EvaluatedPolicy& policy,
                                          double best_so_far);

// --- serialization -----------------------------------------------------------

struct ArchiveRecord {
  PolicyId id = 0;
  std::optional<PolicyId> parent_id;
  DescriptorKind kind = DescriptorKind::ground_truth;
  double reward = 0.0;
  std::vector<double> ground_truth;
  std::vector<double> learned;
  std::uint64_t evaluated_at = 0;
};

ArchiveRecord to_record(const EvaluatedPolicy& policy, DescriptorKind kind);

// Header: id,parent_id,kind,reward,gt_0..,learned_0..,evaluated_at
void write_archive_csv(std::ostream& out, std::span<const EvaluatedPolicy> entries,
                       DescriptorKind kind);
std::vector<ArchiveRecord> read_archive_csv(std::istream& in);

}  // namespace stax
