#include "stax/archive.hpp"

#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "stax/csv.hpp"

namespace stax {

std::string_view to_string(DescriptorKind kind) {
  return kind == DescriptorKind::learned ? "learned" : "ground_truth";
}

std::span<const double> active_descriptor(const EvaluatedPolicy& policy, DescriptorKind kind) {
  if (kind == DescriptorKind::ground_truth) return policy.ground_truth_bd.values;
  if (!policy.learned_bd) {
    throw std::logic_error("policy " + std::to_string(policy.id()) + " has no learned descriptor");
  }
  return policy.learned_bd->values;
}

void RewardArchive::append(EvaluatedPolicy policy) {
  if (!(policy.reward > 0.0)) {
    throw std::invalid_argument("reward archive only accepts rewarding policies");
  }
  entries_.push_back(std::move(policy));
}

void CandidateEmitterBuffer::push(EvaluatedPolicy policy) {
  if (!(policy.reward > 0.0)) {
    throw std::invalid_argument("emitter candidates must be rewarding");
  }
  entries_.push_back(std::move(policy));
}

EvaluatedPolicy CandidateEmitterBuffer::take(std::size_t index) {
  if (index >= entries_.size()) throw std::out_of_range("candidate index");
  EvaluatedPolicy out = std::move(entries_[index]);
  entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(index));
  return out;
}

std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t count,
                                                    Rng& rng) {
  count = std::min(count, population);
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, population - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  return idx;
}

std::vector<PolicyId> archive_sample_add(NoveltyArchive& archive,
                                         std::span<const EvaluatedPolicy> population,
                                         std::size_t n_q, Rng& rng) {
  std::vector<PolicyId> added;
  for (std::size_t i : sample_without_replacement(population.size(), n_q, rng)) {
    archive.append(population[i]);
    added.push_back(population[i].id());
  }
  return added;
}

RecordResult reward_archive_add_if_record(RewardArchive& archive, const EvaluatedPolicy& policy,
                                          double best_so_far) {
  if (best_so_far < 0.0) throw std::invalid_argument("best_so_far must be >= 0");
  if (policy.reward > best_so_far) {
    archive.append(policy);
    return {true, policy.reward};
  }
  return {false, best_so_far};
}

ArchiveRecord to_record(const EvaluatedPolicy& policy, DescriptorKind kind) {
  ArchiveRecord r;
  r.id = policy.id();
  r.parent_id = policy.genome.parent_id;
  r.kind = kind;
  r.reward = policy.reward;
  r.ground_truth = policy.ground_truth_bd.values;
  if (policy.learned_bd) r.learned = policy.learned_bd->values;
  r.evaluated_at = policy.evaluated_at;
  return r;
}

void write_archive_csv(std::ostream& out, std::span<const EvaluatedPolicy> entries,
                       DescriptorKind kind) {
  std::size_t gt_dim = 0;
  std::size_t learned_dim = 0;
  if (!entries.empty()) {
    gt_dim = entries.front().ground_truth_bd.values.size();
    learned_dim = entries.front().learned_bd ? entries.front().learned_bd->values.size() : 0;
  }
  out << "id,parent_id,kind,reward";
  for (std::size_t i = 0; i < gt_dim; ++i) out << ",gt_" << i;
  for (std::size_t i = 0; i < learned_dim; ++i) out << ",learned_" << i;
  out << ",evaluated_at\n";
  for (const auto& p : entries) {
    const auto& learned = p.learned_bd ? p.learned_bd->values : std::vector<double>{};
    if (p.ground_truth_bd.values.size() != gt_dim || learned.size() != learned_dim) {
      throw std::logic_error("archive entries have inconsistent descriptor dimensions");
    }
    out << p.id() << ',';
    if (p.genome.parent_id) out << *p.genome.parent_id;
    out << ',' << to_string(kind) << ',' << csv::format_double(p.reward);
    for (double v : p.ground_truth_bd.values) out << ',' << csv::format_double(v);
    for (double v : learned) out << ',' << csv::format_double(v);
    out << ',' << p.evaluated_at << '\n';
  }
}

std::vector<ArchiveRecord> read_archive_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("archive file has no header");
  const auto header = csv::split(line, ',');
  std::size_t gt_dim = 0;
  std::size_t learned_dim = 0;
  for (const auto& h : header) {
    if (h.rfind("gt_", 0) == 0) ++gt_dim;
    if (h.rfind("learned_", 0) == 0) ++learned_dim;
  }
  const std::size_t expected = 5 + gt_dim + learned_dim;
  if (header.size() != expected || header[0] != "id" || header.back() != "evaluated_at") {
    throw std::runtime_error("malformed archive header");
  }
  std::vector<ArchiveRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv::split(line, ',');
    if (f.size() != expected) throw std::runtime_error("malformed archive row: " + line);
    ArchiveRecord r;
    r.id = static_cast<PolicyId>(csv::parse_int(f[0]));
    if (!f[1].empty()) r.parent_id = static_cast<PolicyId>(csv::parse_int(f[1]));
    if (f[2] == "learned") {
      r.kind = DescriptorKind::learned;
    } else if (f[2] == "ground_truth") {
      r.kind = DescriptorKind::ground_truth;
    } else {
      throw std::runtime_error("unknown descriptor kind: " + f[2]);
    }
    r.reward = csv::parse_double(f[3]);
    std::size_t col = 4;
    for (std::size_t i = 0; i < gt_dim; ++i) r.ground_truth.push_back(csv::parse_double(f[col++]));
    for (std::size_t i = 0; i < learned_dim; ++i) r.learned.push_back(csv::parse_double(f[col++]));
    r.evaluated_at = static_cast<std::uint64_t>(csv::parse_int(f[col]));
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace stax
